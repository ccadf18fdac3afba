"""CSV readers and writers for tables and survey counts.

Table CSV: first row holds the column labels (its first cell names the row
axis and may be empty), first column holds the row labels. Survey CSV has
the header ``gender,generation,survey_year,n,x``. In both formats lines
starting with ``#`` are comments.
"""

from __future__ import annotations

import csv
import io
from importlib import resources
from pathlib import Path
from typing import Iterable

from .errors import ParseError, ValidationError
from .survey import GroupCount
from .table import ContingencyTable, make_table

COUNTS_HEADER = ("gender", "generation", "survey_year", "n", "x")


def _data_lines(text: str, path) -> list[tuple[int, list[str]]]:
    out = []
    lines = text.splitlines()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            row = next(csv.reader([line], strict=True))
        except csv.Error as exc:
            raise ParseError(str(exc), line=lineno, path=path) from None
        out.append((lineno, [c.strip() for c in row]))
    return out


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not UTF-8: {exc}", path=path) from None


def parse_table_csv(text: str, path=None) -> tuple[ContingencyTable, str]:
    rows = _data_lines(text, path)
    if len(rows) < 2:
        raise ParseError("need a header row and at least one data row", path=path)
    (_, header), body = rows[0], rows[1:]
    corner, col_labels = header[0], header[1:]
    if not col_labels:
        raise ParseError("header has no column labels", line=rows[0][0], path=path)
    row_labels, cells = [], []
    for lineno, row in body:
        if len(row) != len(header):
            raise ParseError(
                f"expected {len(header)} fields, found {len(row)}", line=lineno, col=min(len(row), len(header)) + 1, path=path
            )
        row_labels.append(row[0])
        parsed = []
        for j, cell in enumerate(row[1:], start=2):
            try:
                parsed.append(float(cell))
            except ValueError:
                raise ParseError(f"not a decimal number: {cell!r}", line=lineno, col=j, path=path) from None
        cells.append(parsed)
    return make_table(cells, row_labels, col_labels), corner


def load_table_csv(path) -> ContingencyTable:
    return parse_table_csv(_read_text(path), path)[0]


def format_cell(v: float) -> str:
    """Integers without a decimal point, everything else shortest round-trip."""
    if float(v).is_integer():
        return str(int(v))
    return repr(float(v))


def table_to_csv(t: ContingencyTable, corner: str = "") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([corner, *t.col_labels])
    for label, row in zip(t.row_labels, t.values):
        w.writerow([label, *(format_cell(v) for v in row)])
    return buf.getvalue()


def write_table_csv(t: ContingencyTable, path, corner: str = "") -> None:
    Path(path).write_text(table_to_csv(t, corner), encoding="utf-8")


def parse_counts_csv(text: str, path=None) -> list[GroupCount]:
    rows = _data_lines(text, path)
    if not rows:
        raise ParseError("empty counts file", path=path)
    lineno, header = rows[0]
    if tuple(h.lower() for h in header) != COUNTS_HEADER:
        raise ParseError(f"header must be {','.join(COUNTS_HEADER)}", line=lineno, path=path)
    out = []
    for lineno, row in rows[1:]:
        if len(row) != len(COUNTS_HEADER):
            raise ParseError(f"expected {len(COUNTS_HEADER)} fields, found {len(row)}", line=lineno, path=path)
        gender, generation = row[0], row[1]
        ints = []
        for j, cell in enumerate(row[2:], start=3):
            try:
                ints.append(int(cell))
            except ValueError:
                raise ParseError(f"not an integer: {cell!r}", line=lineno, col=j, path=path) from None
        try:
            out.append(GroupCount(gender, generation, *ints))
        except ValidationError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
    return out


def load_counts_csv(path) -> list[GroupCount]:
    return parse_counts_csv(_read_text(path), path)


def counts_to_csv(counts: Iterable[GroupCount]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COUNTS_HEADER)
    for g in counts:
        w.writerow([g.gender, g.generation, g.survey_year, g.n, g.x])
    return buf.getvalue()


def bundled_path(name: str):
    """Path-like handle to a CSV shipped in ``homophily/data``."""
    return resources.files("homophily").joinpath("data", name)


def bundled_table(name: str) -> ContingencyTable:
    ref = bundled_path(name if name.endswith(".csv") else f"{name}.csv")
    return parse_table_csv(ref.read_text(encoding="utf-8"), ref.name)[0]


def bundled_counts() -> list[GroupCount]:
    ref = bundled_path("pew_counts.csv")
    return parse_counts_csv(ref.read_text(encoding="utf-8"), ref.name)
