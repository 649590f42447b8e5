import itertools

import numpy as np
import pytest

from src.summation_poly_lab.curves import WeierstrassModel, point_order, random_point, random_smooth_curve
from src.summation_poly_lab.descent import (
    DescendedSystem,
    check_trace_descent,
    check_trace_identity,
    descend,
    draw_ordinary_instance,
    linear_trace_combination,
    recombine,
    ring_trace,
    ring_trace_in_ideal,
    trace_cofactor,
)
from src.summation_poly_lab.errors import CurveError, DescentError, FieldError, ResourceCapError
from src.summation_poly_lab.fields import field_construct
from src.summation_poly_lab.multipoly import MultiPoly


def _random_poly(F, variables, rng, terms=5, max_exp=None):
    max_exp = F.order - 1 if max_exp is None else max_exp
    out = {}
    for _ in range(terms):
        e = tuple(int(k) for k in rng.integers(0, max_exp + 1, size=len(variables)))
        out[e] = F.random_element(rng, nonzero=True).value
    return MultiPoly(F, variables, out)


def _random_basis(F, rng):
    while True:
        basis = [F.random_element(rng, nonzero=True) for _ in range(F.n)]
        try:
            F.with_basis(basis)
            return basis
        except FieldError:
            continue


def _ordinary_point(E, rng):
    """A point with 2P != 0."""
    while True:
        P = random_point(E, rng)
        if not P.is_infinity and point_order(E, P) > 2:
            return P


def test_descend_linear_polynomial_gives_coordinates():
    F = field_construct(2, 3)
    X = MultiPoly.variable(F, ["X"], "X")
    parts = descend(X)
    assert len(parts) == 3
    for j, part in enumerate(parts):
        assert part.terms == {tuple(1 if k == j else 0 for k in range(3)): 1}


def test_descend_square_over_gf4_matches_zero_set():
    F = field_construct(2, 2)
    X = MultiPoly.variable(F, ["X"], "X")
    f = X ** 2 + X + F.gen
    parts = descend(f)
    for a in F.elements():
        coords = F.coords_in_basis(a)
        zero = f.evaluate([a]).is_zero()
        assert zero == all(part.evaluate(coords).is_zero() for part in parts)


@pytest.mark.parametrize("p,n,r", [(2, 2, 2), (2, 3, 1), (3, 2, 1), (2, 4, 1), (3, 2, 2)])
def test_descent_zero_sets_correspond(p, n, r):
    F = field_construct(p, n)
    rng = np.random.default_rng(p * 100 + n * 10 + r)
    variables = [f"X{i}" for i in range(r)]
    basis = _random_basis(F, rng)
    f = _random_poly(F, variables, rng)
    parts = descend(f, basis)
    for point in itertools.product(list(F.elements()), repeat=r):
        coords = [c for a in point for c in F.coords_in_basis(a, basis)]
        assert f.evaluate(list(point)).is_zero() == all(part.evaluate(coords).is_zero() for part in parts)


def test_components_are_reduced_by_field_equations():
    F = field_construct(3, 2)
    rng = np.random.default_rng(2)
    f = _random_poly(F, ["X0", "X1"], rng, terms=8)
    for part in descend(f):
        assert part.field == field_construct(3)
        assert all(k < 3 for e in part.terms for k in e)


def test_descended_system_recombines():
    F = field_construct(2, 4)
    rng = np.random.default_rng(3)
    f = _random_poly(F, ["X0", "X1"], rng)
    g = _random_poly(F, ["X0", "X1"], rng)
    system = DescendedSystem.build([f, g], _random_basis(F, rng))
    assert system.recombination_holds()
    assert len(system.generators()) == 8
    assert system.variables[:4] == ("X0_0", "X0_1", "X0_2", "X0_3")
    assert system.to_json()["variables"] == list(system.variables)


def test_descent_of_product_is_product_of_recombinations():
    F = field_construct(2, 3)
    rng = np.random.default_rng(4)
    f = _random_poly(F, ["X"], rng)
    g = _random_poly(F, ["X"], rng)
    lhs = recombine(descend(f * g), F)
    rhs = recombine(descend(f), F) * recombine(descend(g), F)
    assert lhs == rhs


def test_rank_deficient_basis_rejected():
    F = field_construct(2, 3)
    X = MultiPoly.variable(F, ["X"], "X")
    with pytest.raises(DescentError):
        descend(X, [F.one, F.one, F.gen])


def test_ring_trace_of_constant_is_field_trace():
    F = field_construct(2, 3)
    for c in F.elements():
        t = ring_trace(MultiPoly.constant(F, ["X"], c))
        assert t.constant_term() == F(c.trace().value)
        assert t.is_constant()


def test_ring_trace_of_variable_over_gf4():
    F = field_construct(2, 2)
    X = MultiPoly.variable(F, ["X"], "X")
    assert ring_trace(X) == (X + X ** 2).with_reduction(4)
    for a in F.elements():
        assert ring_trace(X).evaluate([a]) == F(a.trace().value)


@pytest.mark.parametrize("p,n", [(2, 3), (3, 2), (2, 4)])
def test_ring_trace_commutes_with_evaluation(p, n):
    F = field_construct(p, n)
    rng = np.random.default_rng(p + n)
    f = _random_poly(F, ["X0", "X1"], rng)
    t = ring_trace(f)
    assert ring_trace(f ** p) == t
    for a in F.elements():
        for b in F.elements():
            value = t.evaluate([a, b])
            assert value == F(f.evaluate([a, b]).trace().value)


@pytest.mark.parametrize("p,n", [(2, 2), (2, 3), (3, 2), (2, 4)])
def test_ring_trace_is_a_multiple_of_f(p, n):
    F = field_construct(p, n)
    rng = np.random.default_rng(50 + p + n)
    for _ in range(3):
        f = _random_poly(F, ["X0", "X1"], rng, terms=4)
        g = trace_cofactor(f)
        assert (f.with_reduction(F.order) * g) == ring_trace(f)
        assert ring_trace_in_ideal(f)


def test_ring_trace_in_ideal_of_constant():
    F = field_construct(2, 3)
    c = MultiPoly.constant(F, ["X"], F.gen)
    assert trace_cofactor(c).is_constant()
    assert ring_trace_in_ideal(c)


@pytest.mark.parametrize("p,n", [(2, 3), (3, 2), (2, 4), (5, 2)])
def test_trace_descent_identity(p, n):
    F = field_construct(p, n)
    rng = np.random.default_rng(10 * p + n)
    f = _random_poly(F, ["X0", "X1"], rng, max_exp=2)
    for basis in (None, _random_basis(F, rng)):
        c = F.random_element(rng, nonzero=True)
        report = check_trace_descent(f, c, basis)
        assert report.holds
    assert check_trace_descent(f, F.zero).holds
    assert all(part.is_zero() for part in check_trace_descent(f, F.zero).lhs)


def test_trace_descent_with_unit_scalar_and_power_basis():
    F = field_construct(2, 3)
    rng = np.random.default_rng(12)
    f = _random_poly(F, ["X"], rng)
    report = check_trace_descent(f, F.one)
    assert report.one_coords == [1, 0, 0]
    assert report.lhs[1].is_zero() and report.lhs[2].is_zero()


@pytest.mark.parametrize("n", [3, 4, 5])
def test_trace_identity_exhaustive(n):
    F = field_construct(2, n)
    rng = np.random.default_rng(20 + n)
    E = random_smooth_curve(F, rng, ordinary=True)
    report = check_trace_identity(E, _ordinary_point(E, rng))
    assert report.mode == "exhaustive"
    assert report.points_checked == F.order ** 2
    assert report.holds


@pytest.mark.parametrize("n", [4, 7, 9])
def test_trace_identity_symbolic(n):
    F = field_construct(2, n)
    rng = np.random.default_rng(30 + n)
    E = random_smooth_curve(F, rng, ordinary=True)
    report = check_trace_identity(E, _ordinary_point(E, rng), mode="symbolic")
    assert report.holds


def test_trace_identity_rejects_two_torsion_and_supersingular():
    F = field_construct(2, 3)
    E = WeierstrassModel.from_coefficients(F, [1, 0, 0, 0, 1])
    two_torsion = E.point(0, 1)
    with pytest.raises(CurveError):
        check_trace_identity(E, two_torsion)
    supersingular = WeierstrassModel.from_coefficients(F, [0, 0, 1, 0, 0])
    with pytest.raises(CurveError):
        check_trace_identity(supersingular, supersingular.rational_points()[1])


def test_trace_identity_caps():
    F = field_construct(2, 11)
    E = random_smooth_curve(F, np.random.default_rng(1), ordinary=True)
    P = random_point(E, np.random.default_rng(2))
    with pytest.raises(ResourceCapError):
        check_trace_identity(E, P)


@pytest.mark.parametrize("n", [3, 4, 6])
def test_linear_trace_combination(n):
    F = field_construct(2, n)
    rng = np.random.default_rng(40 + n)
    E = random_smooth_curve(F, rng, ordinary=True)
    P = _ordinary_point(E, rng)
    for basis in (None, _random_basis(F, rng), _random_basis(F, rng)):
        report = linear_trace_combination(E, P, basis)
        assert report.holds
        assert report.degree == 1
    x = P.x
    expected_constant = ((x + E.a2) / (E.a1 * E.a1)).trace().value
    assert report.rhs.constant_term().value == expected_constant


def test_draw_ordinary_instance_is_seeded():
    model, P = draw_ordinary_instance(5, 11)
    again, Q = draw_ordinary_instance(5, 11)
    assert model.descriptor() == again.descriptor()
    assert P == Q
    assert not model.a1.is_zero()
    assert model.is_smooth
    assert not (model.a1 * P.x + model.a3).is_zero()


def test_draw_ordinary_instance_limits():
    with pytest.raises(DescentError):
        draw_ordinary_instance(1, 0)
    with pytest.raises(ResourceCapError):
        draw_ordinary_instance(4, 0, retries=0)
