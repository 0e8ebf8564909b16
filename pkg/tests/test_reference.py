from __future__ import annotations

from decimal import Decimal
from fractions import Fraction

import pytest

from exactnum import PiMonomial, eval_interval
from reference import ReferenceRow, ReferenceTable


def test_load_shipped_table():
    table = ReferenceTable.load_from_file()
    assert table.dimensions == list(range(7, 19))
    assert table[7].lambda_min == "74.50435"
    assert table[7].lambda_hp2 is None
    assert table[11].lambda_hp2 == "135.9033973"


def test_last_digit():
    assert ReferenceRow.last_digit("74.50435") == Decimal("1E-5")
    assert ReferenceRow.last_digit("113.5272754") == Decimal("1E-7")


def test_matches_within_one_unit():
    row = ReferenceRow(7, "113.5272754", "74.50435")
    assert row.matches("lambda_min", "74.504346")
    assert row.matches("lambda_min", "74.50436")
    assert not row.matches("lambda_min", "74.50437")
    assert row.matches("lambda_hp2", None)
    assert not row.matches("yamabe_sphere", None)


def test_relative_tolerance_covers_last_digit_slips():
    row = ReferenceTable.load_from_file()[15]
    assert row.tolerance("lambda_hp2") == Fraction(2139967504, 10**16)
    # printed 213.9967504 is 1.7 units above the exact value
    assert row.matches("lambda_hp2", "213.99675022838")
    assert not row.matches("lambda_hp2", "213.9967500")
    assert ReferenceTable.load_from_file()[18].matches("yamabe_sphere", "301.90506734977")


def test_matches_certified_interval():
    row = ReferenceRow(7, "113.5272754", "3.1415926536")
    pi = eval_interval(PiMonomial(Fraction(1), 2))
    assert row.matches("lambda_min", pi)
    assert not ReferenceRow(7, "113.5272754", "3.1415925").matches("lambda_min", pi, rel_tol=Fraction(0))
    assert not row.matches("lambda_hp2", pi)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        ReferenceTable.load_from_file(tmp_path / "nope.txt")


@pytest.mark.parametrize("text", ["7 113.5, 74.5\n", "7: 113.5\n", "x: 1, 2\n", "7: 1, abc\n"])
def test_bad_format(tmp_path, text):
    path = tmp_path / "table.txt"
    path.write_text(text)
    with pytest.raises(RuntimeError):
        ReferenceTable.load_from_file(path)


def test_duplicate_rows(tmp_path):
    path = tmp_path / "table.txt"
    path.write_text("# comment\n7: 1.0, 2.0\n\n7: 1.0, 2.0\n")
    with pytest.raises(ValueError):
        ReferenceTable.load_from_file(path)
