"""Ordered contingency tables and the association statistics computed on them.

Tables are immutable: every operation returns a new :class:`ContingencyTable`.
Cells are non-negative reals because transformed tables are fractional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateMargins,
    DimensionMismatch,
    DivisionByZero,
    EmptyTable,
    IndexOutOfRange,
    NegativeCell,
    NonFiniteCell,
    NotSquare,
    NotTwoByTwo,
    ValidationError,
)

MARGIN_RTOL = 1e-9

ROW, COL = "row", "col"


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """A two-way table with ordered row and column categories."""

    values: np.ndarray
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def total(self) -> float:
        return float(self.values.sum())

    def row_sums(self) -> np.ndarray:
        return self.values.sum(axis=1)

    def col_sums(self) -> np.ndarray:
        return self.values.sum(axis=0)

    def with_values(self, values) -> "ContingencyTable":
        """Same labels, new cells (validated)."""
        return make_table(values, self.row_labels, self.col_labels)

    def rounded(self) -> "ContingencyTable":
        return self.with_values(round_half_away(self.values))

    def tolist(self) -> list[list[float]]:
        return self.values.tolist()

    def __eq__(self, other):
        if not isinstance(other, ContingencyTable):
            return NotImplemented
        return (
            self.row_labels == other.row_labels
            and self.col_labels == other.col_labels
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return f"ContingencyTable({self.values.tolist()!r}, rows={self.row_labels}, cols={self.col_labels})"


@dataclass(frozen=True, eq=False)
class MarginSpec:
    """Target row and column sums for a transformation."""

    row_sums: np.ndarray
    col_sums: np.ndarray

    def __post_init__(self):
        rows = _frozen(self.row_sums)
        cols = _frozen(self.col_sums)
        if rows.ndim != 1 or cols.ndim != 1 or rows.size == 0 or cols.size == 0:
            raise DimensionMismatch("margins must be non-empty vectors")
        if not (np.all(np.isfinite(rows)) and np.all(np.isfinite(cols))):
            raise ValidationError("margins must be finite")
        if np.any(rows <= 0) or np.any(cols <= 0):
            raise ValidationError("target margins must be strictly positive")
        tr, tc = rows.sum(), cols.sum()
        if not math.isclose(tr, tc, rel_tol=MARGIN_RTOL):
            raise ValidationError(f"row sums ({tr}) and column sums ({tc}) disagree")
        object.__setattr__(self, "row_sums", rows)
        object.__setattr__(self, "col_sums", cols)

    @property
    def shape(self) -> tuple[int, int]:
        return self.row_sums.size, self.col_sums.size

    @property
    def total(self) -> float:
        return float(self.row_sums.sum())

    def merged(self, axis: str, k: int) -> "MarginSpec":
        rows, cols = self.row_sums, self.col_sums
        if axis == ROW:
            rows = _merge_vector(rows, k)
        elif axis == COL:
            cols = _merge_vector(cols, k)
        else:
            raise ValueError(f"axis must be 'row' or 'col', got {axis!r}")
        return MarginSpec(rows, cols)


@dataclass(frozen=True, eq=False)
class AssociationMatrix:
    """LL indicators over all row/column cut pairs of an ordered table.

    ``values[i, j]`` belongs to the dichotomization that keeps rows
    ``0..row_cuts[i]-1`` and columns ``0..col_cuts[j]-1`` in the first block.
    """

    values: np.ndarray
    row_cuts: tuple[int, ...]
    col_cuts: tuple[int, ...]

    def cut(self, i: int, j: int) -> tuple[int, int]:
        return self.row_cuts[i], self.col_cuts[j]


def make_table(values, row_labels: Sequence[str] | None = None, col_labels: Sequence[str] | None = None) -> ContingencyTable:
    """Validate ``values`` and wrap them in a :class:`ContingencyTable`.

    Labels default to ``r1..rR`` and ``c1..cC``.
    """
    try:
        arr = np.array(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DimensionMismatch(f"cells do not form a numeric matrix: {exc}") from None
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got {arr.ndim} dimension(s)")
    n_rows, n_cols = arr.shape
    if n_rows == 0 or n_cols == 0:
        raise EmptyTable("table has no cells")
    rows = tuple(row_labels) if row_labels is not None else tuple(f"r{i + 1}" for i in range(n_rows))
    cols = tuple(col_labels) if col_labels is not None else tuple(f"c{j + 1}" for j in range(n_cols))
    if len(rows) != n_rows or len(cols) != n_cols:
        raise DimensionMismatch(
            f"{len(rows)} row labels / {len(cols)} column labels for a {n_rows}x{n_cols} table"
        )
    if len(set(rows)) != n_rows or len(set(cols)) != n_cols:
        raise ValidationError("labels must be unique within each axis")
    bad = np.argwhere(~np.isfinite(arr))
    if bad.size:
        i, j = bad[0]
        raise NonFiniteCell(rows[i], cols[j], arr[i, j])
    neg = np.argwhere(arr < 0)
    if neg.size:
        i, j = neg[0]
        raise NegativeCell(rows[i], cols[j], arr[i, j])
    if arr.sum() <= 0:
        raise EmptyTable("table total mass must be positive")
    return ContingencyTable(_frozen(arr), rows, cols)


def margins_of(t: ContingencyTable) -> MarginSpec:
    """Row and column sums of ``t``; zero sums raise :class:`DegenerateMargins`."""
    rows, cols = t.row_sums(), t.col_sums()
    if np.any(rows <= 0) or np.any(cols <= 0):
        raise DegenerateMargins("table has an empty row or column; it cannot serve as a margin target")
    return MarginSpec(rows, cols)


def _merge_vector(v: np.ndarray, k: int) -> np.ndarray:
    if not 0 <= k < v.size - 1:
        raise IndexOutOfRange(f"cannot merge categories {k} and {k + 1} of {v.size}")
    return np.concatenate([v[:k], [v[k] + v[k + 1]], v[k + 2:]])


def merge_adjacent(t: ContingencyTable, axis: str, k: int) -> ContingencyTable:
    """Sum categories ``k`` and ``k + 1`` (0-based) of ``axis`` into one."""
    v = t.values
    if axis == ROW:
        if not 0 <= k < v.shape[0] - 1:
            raise IndexOutOfRange(f"cannot merge rows {k} and {k + 1} of {v.shape[0]}")
        merged = np.vstack([v[:k], v[k] + v[k + 1], v[k + 2:]])
        labels = t.row_labels
        new = labels[:k] + (f"{labels[k]}+{labels[k + 1]}",) + labels[k + 2:]
        return ContingencyTable(_frozen(merged), new, t.col_labels)
    if axis == COL:
        if not 0 <= k < v.shape[1] - 1:
            raise IndexOutOfRange(f"cannot merge columns {k} and {k + 1} of {v.shape[1]}")
        merged = np.hstack([v[:, :k], (v[:, k] + v[:, k + 1])[:, None], v[:, k + 2:]])
        labels = t.col_labels
        new = labels[:k] + (f"{labels[k]}+{labels[k + 1]}",) + labels[k + 2:]
        return ContingencyTable(_frozen(merged), t.row_labels, new)
    raise ValueError(f"axis must be 'row' or 'col', got {axis!r}")


def apply_merges(t: ContingencyTable, plan: Sequence[tuple[str, int]]) -> ContingencyTable:
    for axis, k in plan:
        t = merge_adjacent(t, axis, k)
    return t


def _require_2x2(t: ContingencyTable):
    if t.shape != (2, 2):
        raise NotTwoByTwo(f"expected a 2x2 table, got {t.shape[0]}x{t.shape[1]}")


def odds_ratio(t: ContingencyTable) -> float:
    _require_2x2(t)
    (a, b), (c, d) = t.values
    if b == 0 or c == 0:
        raise DivisionByZero("odds ratio undefined: an off-diagonal cell is zero")
    return float(a * d / (b * c))


def ll_from_cells(n11: float, r1: float, c1: float, total: float) -> float:
    """LL indicator of a 2x2 table given its top-left cell and first margins.

    Positive association is scaled by the upper Frechet bound
    ``min(r1, c1)``; negative association by the lower bound
    ``max(0, r1 + c1 - total)``.
    """
    if not (0 < r1 < total and 0 < c1 < total):
        raise DegenerateMargins(f"margins ({r1}, {c1}) of total {total} leave LL undefined")
    e11 = r1 * c1 / total
    if n11 >= e11:
        return (n11 - e11) / (min(r1, c1) - e11)
    return (n11 - e11) / (e11 - max(0.0, r1 + c1 - total))


def n11_from_ll(ll: float, r1: float, c1: float, total: float) -> float:
    """Inverse of :func:`ll_from_cells` for fixed margins."""
    if not (0 < r1 < total and 0 < c1 < total):
        raise DegenerateMargins(f"margins ({r1}, {c1}) of total {total} leave LL undefined")
    e11 = r1 * c1 / total
    if ll >= 0:
        return e11 + ll * (min(r1, c1) - e11)
    return e11 + ll * (e11 - max(0.0, r1 + c1 - total))


def liu_lu(t: ContingencyTable) -> float:
    """Liu-Lu association indicator of a 2x2 table, in [-1, 1].

    The negative branch (normalization by the lower Frechet bound) is an
    implementation convention; only positive-association cases are pinned
    by published fixtures.
    """
    _require_2x2(t)
    v = t.values
    return ll_from_cells(v[0, 0], v[0].sum(), v[:, 0].sum(), v.sum())


def dichotomize(t: ContingencyTable, row_cut: int, col_cut: int) -> ContingencyTable:
    """Collapse ``t`` to 2x2: rows ``[:row_cut]`` vs the rest, same for columns."""
    n_rows, n_cols = t.shape
    if not (0 < row_cut < n_rows and 0 < col_cut < n_cols):
        raise IndexOutOfRange(f"cut ({row_cut}, {col_cut}) outside a {n_rows}x{n_cols} table")
    v = t.values
    out = [
        [v[:row_cut, :col_cut].sum(), v[:row_cut, col_cut:].sum()],
        [v[row_cut:, :col_cut].sum(), v[row_cut:, col_cut:].sum()],
    ]
    return ContingencyTable(_frozen(out), ("upper", "lower"), ("left", "right"))


def generalized_ll(t: ContingencyTable) -> AssociationMatrix:
    """Matrix of LL values over every (row cut, column cut) pair.

    A table with a single row or column has no cuts and yields an empty matrix.
    """
    n_rows, n_cols = t.shape
    v = t.values
    cum = v.cumsum(axis=0).cumsum(axis=1)
    rows_cum = v.sum(axis=1).cumsum()
    cols_cum = v.sum(axis=0).cumsum()
    total = v.sum()
    out = np.empty((n_rows - 1, n_cols - 1))
    for i in range(n_rows - 1):
        for j in range(n_cols - 1):
            out[i, j] = ll_from_cells(cum[i, j], rows_cum[i], cols_cum[j], total)
    return AssociationMatrix(
        _frozen(out), tuple(range(1, n_rows)), tuple(range(1, n_cols))
    )


def homogamy_share(t: ContingencyTable) -> float:
    """Share of mass on the diagonal."""
    if t.shape[0] != t.shape[1]:
        raise NotSquare(f"homogamy share needs a square table, got {t.shape[0]}x{t.shape[1]}")
    return float(np.trace(t.values) / t.values.sum())


def round_half_away(a) -> np.ndarray:
    """Round to integers, halves away from zero (``numpy.round`` rounds to even)."""
    a = np.asarray(a, dtype=float)
    return np.sign(a) * np.floor(np.abs(a) + 0.5)
