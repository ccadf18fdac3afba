import pytest

from homophily.errors import NegativeCell, ParseError, ValidationError
from homophily.io import (
    bundled_counts,
    bundled_path,
    bundled_table,
    counts_to_csv,
    format_cell,
    load_counts_csv,
    load_table_csv,
    parse_counts_csv,
    parse_table_csv,
    table_to_csv,
    write_table_csv,
)
from homophily.table import make_table


def test_bundled_p_num1():
    t = bundled_table("P_num1")
    assert t.tolist() == [[500, 700], [100, 700]]
    assert t.row_labels == ("L", "H")


def test_bundled_num2_tables():
    assert bundled_table("P_num2").tolist() == [[500, 400, 300], [100, 400, 300]]
    assert bundled_table("Q_num2").tolist() == [[500, 300, 200], [100, 300, 600]]


def test_bundled_counts():
    idx = {g.key: g for g in bundled_counts()}
    assert len(idx) == 16
    g = idx["male", "late_boomer", 2010]
    assert (g.n, g.x) == (75, 25)
    g = idx["female", "genx_pooled", 2017]
    assert (g.n, g.x) == (715, 284)


def test_bundled_files_carry_comment_header():
    for name in ("P_num1.csv", "Q_num1.csv", "P_num2.csv", "Q_num2.csv", "pew_counts.csv"):
        assert bundled_path(name).read_text(encoding="utf-8").startswith("#")


def test_negative_cell(tmp_path):
    f = tmp_path / "t.csv"
    f.write_text(",a,b\nx,1,-2\ny,3,4\n")
    with pytest.raises(NegativeCell) as exc:
        load_table_csv(f)
    assert "x" in str(exc.value) and "b" in str(exc.value)


def test_ragged(tmp_path):
    f = tmp_path / "t.csv"
    f.write_text(",a,b\nx,1,2\ny,3\n")
    with pytest.raises(ParseError) as exc:
        load_table_csv(f)
    assert exc.value.line == 3


def test_non_numeric():
    with pytest.raises(ParseError) as exc:
        parse_table_csv(",a,b\nx,1,two\n")
    assert (exc.value.line, exc.value.col) == (2, 3)


def test_header_only():
    with pytest.raises(ParseError):
        parse_table_csv(",a,b\n")


def test_corner_and_comments():
    t, corner = parse_table_csv("# note\nrow\\col,a,b\n\nx,1,2\n# mid\ny,3,4\n")
    assert corner == "row\\col"
    assert t.tolist() == [[1, 2], [3, 4]]


def test_format_cell():
    assert format_cell(3.0) == "3"
    assert format_cell(0.1) == "0.1"
    assert float(format_cell(1 / 3)) == 1 / 3


def test_round_trip_canonical(tmp_path):
    text = ",L,H\nL,534,665.5\nH,0.1,735\n"
    t, corner = parse_table_csv(text)
    assert table_to_csv(t, corner) == text
    f = tmp_path / "out.csv"
    write_table_csv(t, f, corner)
    assert f.read_text() == text
    assert load_table_csv(f) == t


def test_round_trip_full_precision(tmp_path):
    t = make_table([[1 / 3, 2 / 7], [5.0, 1e-7]])
    assert parse_table_csv(table_to_csv(t))[0] == t


def test_counts_header():
    with pytest.raises(ParseError):
        parse_counts_csv("gender,generation,year,n,x\n")


def test_counts_x_above_n():
    with pytest.raises(ValidationError) as exc:
        parse_counts_csv("gender,generation,survey_year,n,x\nmale,late_boomer,2010,5,6\n")
    assert "line 2" in str(exc.value)


def test_counts_non_integer():
    with pytest.raises(ParseError) as exc:
        parse_counts_csv("gender,generation,survey_year,n,x\nmale,late_boomer,2010,5.5,2\n")
    assert exc.value.col == 4


def test_counts_round_trip(tmp_path):
    rows = bundled_counts()
    f = tmp_path / "c.csv"
    f.write_text(counts_to_csv(rows))
    assert load_counts_csv(f) == rows


def test_not_utf8(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_bytes(b"\xff\xfe,\x00")
    with pytest.raises(ParseError):
        load_table_csv(f)
