import pytest

from src.summation_poly_lab.dimacs import SatInstance, pad_clause, parse_dimacs
from src.summation_poly_lab.errors import DimacsError, ReductionError


def test_parse_single_clause():
    sat = parse_dimacs("p cnf 3 1\n1 -2 3 0")
    assert sat.num_vars == 3
    assert sat.clauses == ((1, -2, 3),)


def test_parse_comments_multiline_clauses_and_percent_terminator():
    text = "c example\nc another\np cnf 4 2\n1 -2\n 3 0 -4 0\n%\n0\n"
    sat = parse_dimacs(text)
    assert sat.clauses == ((1, -2, 3), (-4, -4, -4))


def test_short_clauses_are_padded():
    sat = parse_dimacs("p cnf 2 2\n1 0\n-1 2 0\n")
    assert sat.clauses == ((1, 1, 1), (-1, 2, 2))
    assert pad_clause([5]) == (5, 5, 5)


@pytest.mark.parametrize("text, line, column", [
    ("p cnf 3 1\n0\n", 2, 1),
    ("p cnf 3 1\n1 2  0 0\n", 2, 8),
    ("p cnf 3 1\n1 5 0\n", 2, 3),
    ("p cnf 3 1\n1 2 3 -1 0\n", 2, 7),
    ("p cnf 3 1\n1 x 0\n", 2, 3),
    ("p cnf 3 1\n1 2\n", 2, 1),
    ("p cnf 3 2\n1 2 3 0\n", 1, 1),
    ("p dnf 3 1\n1 2 3 0\n", 1, 1),
    ("p cnf three 1\n", 1, 7),
    ("1 2 3 0\np cnf 3 1\n", 1, 1),
    ("c only a comment\n", 1, 1),
])
def test_malformed_input_reports_location(text, line, column):
    with pytest.raises(DimacsError) as excinfo:
        parse_dimacs(text)
    assert excinfo.value.line == line
    assert excinfo.value.column == column
    assert str(excinfo.value).startswith(f"line {line}, column {column}:")


def test_duplicate_header_rejected():
    with pytest.raises(DimacsError):
        parse_dimacs("p cnf 1 0\np cnf 1 0\n")


def test_round_trip_through_text():
    sat = SatInstance(3, ((1, -2, 3), (-1, -1, 2)))
    assert parse_dimacs(sat.to_dimacs()) == sat


def test_satisfaction_and_validation():
    sat = SatInstance(2, ((1, 1, 1), (-1, 2, 2)))
    assert sat.is_satisfied((True, True))
    assert not sat.is_satisfied((True, False))
    assert not sat.is_satisfied((True,))
    assert SatInstance(0).is_satisfied(())
    with pytest.raises(ReductionError):
        SatInstance(2, ((1, 3, 2),))
    with pytest.raises(ReductionError):
        SatInstance(2, ((1, 2),))
    with pytest.raises(ReductionError):
        SatInstance.from_clauses(2, [[]])
    assert SatInstance.from_clauses(2, [[2]]).clauses == ((2, 2, 2),)
