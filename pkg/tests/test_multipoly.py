import pytest

from src.summation_poly_lab.errors import FieldMismatchError, PolynomialError
from src.summation_poly_lab.fields import field_construct
from src.summation_poly_lab.multipoly import (
    MultiPoly,
    bareiss_determinant,
    evaluate_univariate,
    field_resultant,
    interpolate,
    resultant,
)


@pytest.fixture
def f7():
    return field_construct(7)


def test_square_in_characteristic_two():
    f2 = field_construct(2)
    X0, X1 = MultiPoly.generators(f2, ["X0", "X1"])
    assert (X0 + X1) ** 2 == X0 ** 2 + X1 ** 2


def test_evaluate(f7):
    X0, X1 = MultiPoly.generators(f7, ["X0", "X1"])
    f = X0 * X1 + 1
    assert f.evaluate({"X0": 2, "X1": 3}).is_zero()
    assert f.evaluate([1, 1]) == f7(2)
    with pytest.raises(PolynomialError):
        f.evaluate({"X0": 1})


def test_substitute_then_evaluate(f7):
    X, Y = MultiPoly.generators(f7, ["X", "Y"])
    f = X ** 3 + 2 * X * Y + 5
    g = Y ** 2 + 1
    h = f.substitute("X", g)
    for x in range(7):
        for y in range(7):
            inner = g.evaluate([x, y])
            assert h.evaluate([x, y]) == f.evaluate([inner, y])


def test_reduction_modulo_field_equation():
    f4 = field_construct(2, 2)
    X, = MultiPoly.generators(f4, ["X"], reduce_q=4)
    assert X ** 4 == X
    assert (X ** 7).degree("X") == 1
    assert (X ** 0) == MultiPoly.constant(f4, ["X"], 1, 4)


def test_resultant_of_linear_factors(f7):
    X, A, B = MultiPoly.generators(f7, ["X", "A", "B"])
    res = resultant(X - A, X - B, "X")
    assert res == A - B
    assert res.degree("X") == -1


def test_resultant_detects_common_root(f7):
    X, = MultiPoly.generators(f7, ["X"])
    assert resultant(X ** 2 - 1, X - 1, "X").is_zero()
    assert not resultant(X ** 2 - 1, X - 2, "X").is_zero()
    f = X ** 3 + 3 * X + 1
    assert resultant(f, f, "X").is_zero()


def test_resultant_needs_positive_degree(f7):
    X, Y = MultiPoly.generators(f7, ["X", "Y"])
    with pytest.raises(PolynomialError):
        resultant(Y + 1, X, "X")


def test_resultant_eliminates_variable(f7):
    # x^2 + y^2 = 1 and x = y meet where 2 y^2 = 1
    X, Y = MultiPoly.generators(f7, ["X", "Y"])
    res = resultant(X ** 2 + Y ** 2 - 1, X - Y, "X")
    assert res.used_variables() == ["Y"]
    for y in range(7):
        assert res.evaluate([0, y]).is_zero() == (2 * y * y % 7 == 1)


def test_bareiss_matches_expansion(f7):
    X, Y = MultiPoly.generators(f7, ["X", "Y"])
    M = [[X, Y, MultiPoly.constant(f7, ["X", "Y"], 1)],
         [Y + 1, X, Y],
         [MultiPoly.constant(f7, ["X", "Y"], 2), X * Y, X]]
    expected = (M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1])
                - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
                + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]))
    assert bareiss_determinant(M) == expected


def test_exact_div(f7):
    X, Y = MultiPoly.generators(f7, ["X", "Y"])
    a = X ** 2 + 3 * X * Y + 1
    b = Y ** 3 - X
    assert (a * b).exact_div(b) == a
    with pytest.raises(PolynomialError):
        (a * b + X).exact_div(b)


def test_text_uses_grevlex_and_signed_coefficients(f7):
    X0, X1, X2 = MultiPoly.generators(f7, ["X0", "X1", "X2"])
    f = X2 ** 2 - 2 * X0 * X1 + X0 ** 3 + 4
    assert f.to_text() == "X0^3 - 2*X0*X1 + X2^2 - 3"
    assert MultiPoly.zero(f7, ["X0"]).to_text() == "0"
    assert (X0 - X1).to_text() == "X0 - X1"


def test_text_over_extension_field():
    f4 = field_construct(2, 2)
    X, = MultiPoly.generators(f4, ["X"])
    u = f4.gen
    assert (X * u + 1).to_text() == "(u)*X + 1"


def test_json_round_trip(f7):
    X0, X1 = MultiPoly.generators(f7, ["X0", "X1"])
    f = 3 * X0 ** 2 * X1 - X1 + 6
    assert MultiPoly.from_json(f.to_json()) == f


def test_mixing_fields_is_rejected(f7):
    f11 = field_construct(11)
    with pytest.raises(FieldMismatchError):
        MultiPoly.variable(f7, ["X"], "X") + MultiPoly.variable(f11, ["X"], "X")


def test_interpolate_recovers_polynomial(f7):
    coeffs = [3, 0, 5, 1]
    xs = [0, 1, 2, 4]
    ys = [evaluate_univariate(f7, coeffs, x) for x in xs]
    assert interpolate(f7, xs, ys) == coeffs


def test_field_resultant_matches_symbolic(f7):
    X, = MultiPoly.generators(f7, ["X"])
    f = X ** 2 + 3 * X + 2
    g = 4 * X ** 3 + X + 5
    symbolic = resultant(f, g, "X").constant_term()
    assert field_resultant(f7, [2, 3, 1], [5, 1, 0, 4]) == symbolic.value
