import itertools

import numpy as np
import pytest

from src.summation_poly_lab.curves import (
    INFINITY,
    WeierstrassModel,
    cuspidal_model,
    nodal_model,
    random_point,
    random_smooth_curve,
)
from src.summation_poly_lab.errors import CurveError, PolynomialError, ResourceCapError
from src.summation_poly_lab.fields import field_construct
from src.summation_poly_lab.sumpoly import (
    SummationInstance,
    degenerate_factorization_check,
    find_relation,
    specialized_summation_poly,
    summation_poly,
    summation_value,
    verify_vanishing_by_points,
)


@pytest.fixture
def smooth_f11():
    return WeierstrassModel.from_coefficients(field_construct(11), [0, 0, 0, 1, 3])


def _relation_inputs(E, rng, r):
    """x-coordinates of r affine points summing to zero, or None when a partial sum hits infinity."""
    points = [random_point(E, rng) for _ in range(r - 1)]
    total = INFINITY
    for P in points:
        total = E.point_add(total, P)
    last = E.point_neg(total)
    points.append(last)
    if any(P.is_infinity for P in points):
        return None
    return [P.x for P in points]


def test_s3_golden_text_for_zero_model():
    E = cuspidal_model(field_construct(7))
    expected = "X0^2*X1^2 - 2*X0^2*X1*X2 - 2*X0*X1^2*X2 + X0^2*X2^2 - 2*X0*X1*X2^2 + X1^2*X2^2"
    assert summation_poly(E, 3).to_text() == expected


def test_s2_is_difference(smooth_f11):
    assert summation_poly(smooth_f11, 2).to_text() == "X0 - X1"


def test_arity_limits(smooth_f11):
    with pytest.raises(PolynomialError):
        summation_poly(smooth_f11, 1)
    with pytest.raises(ResourceCapError):
        summation_poly(smooth_f11, 8)
    with pytest.raises(ResourceCapError):
        summation_value(smooth_f11, [smooth_f11.field(1)] * 9)


def test_s3_leading_coefficient(smooth_f11):
    lead = summation_poly(smooth_f11, 3).coefficients_in("X2")[2]
    assert lead.evaluate([1, 4, 0]) == smooth_f11.field((1 - 4) ** 2)


@pytest.mark.parametrize("r", [3, 4])
def test_symbolic_polynomial_is_symmetric(smooth_f11, r):
    S = summation_poly(smooth_f11, r)
    rng = np.random.default_rng(r)
    for _ in range(10):
        xs = [int(v) for v in rng.integers(0, 11, size=r)]
        value = S.evaluate(xs)
        for perm in itertools.permutations(xs):
            assert S.evaluate(list(perm)) == value


def test_s4_has_degree_four_in_each_variable(smooth_f11):
    S4 = summation_poly(smooth_f11, 4)
    assert [S4.degree(v) for v in S4.variables] == [4, 4, 4, 4]


def test_specialized_value_matches_symbolic(smooth_f11):
    F = smooth_f11.field
    rng = np.random.default_rng(7)
    for r in (2, 3, 4):
        S = summation_poly(smooth_f11, r)
        for _ in range(15):
            xs = [F(int(v)) for v in rng.integers(0, 11, size=r)]
            assert summation_value(smooth_f11, xs) == S.evaluate(xs)


def test_specialized_value_over_tiny_field_uses_extension():
    E = WeierstrassModel.from_coefficients(field_construct(2), [1, 0, 0, 0, 1])
    F = E.field
    S4 = summation_poly(E, 4)
    for xs in itertools.product([0, 1], repeat=4):
        values = [F(x) for x in xs]
        assert summation_value(E, values) == S4.evaluate(values)


def test_specialized_polynomial_agrees_with_values():
    F = field_construct(2, 5)
    rng = np.random.default_rng(3)
    E = random_smooth_curve(F, rng, ordinary=True)
    xs = [F.random_element(rng) for _ in range(4)]
    coeffs = specialized_summation_poly(E, xs)
    assert len(coeffs) == 9
    for _ in range(6):
        u = F.random_element(rng)
        acc = F.zero
        for c in reversed(coeffs):
            acc = acc * u + c
        assert acc == summation_value(E, xs + [u])


@pytest.mark.parametrize("r", [3, 4])
def test_vanishing_matches_point_relations_gf13(r):
    F = field_construct(13)
    rng = np.random.default_rng(40 + r)
    E = random_smooth_curve(F, rng)
    checked = 0
    while checked < 8:
        xs = _relation_inputs(E, rng, r)
        if xs is None:
            continue
        checked += 1
        report = verify_vanishing_by_points(SummationInstance(E, tuple(xs)))
        assert report.vanishes
        assert report.witness is not None and report.witness.verify()
        assert report.consistent
    for _ in range(20):
        xs = [F.random_element(rng) for _ in range(r)]
        report = verify_vanishing_by_points(SummationInstance(E, tuple(xs)))
        assert report.consistent


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("r", [3, 4])
def test_vanishing_matches_relations_on_every_input(n, r):
    F = field_construct(2, n)
    rng = np.random.default_rng(70 + 10 * n + r)
    curves = {}
    while len(curves) < 10:
        E = random_smooth_curve(F, rng)
        curves.setdefault(tuple(c.value for c in E.a), E)
    elements = list(F.elements())
    for E in curves.values():
        vanishing = 0
        for xs in itertools.combinations_with_replacement(elements, r):
            vanishes = summation_value(E, xs).is_zero()
            assert vanishes == (find_relation(E, xs) is not None)
            vanishing += vanishes
        assert vanishing > 0


def test_relation_search_agrees_with_values_for_six_points():
    F = field_construct(2, 5)
    rng = np.random.default_rng(11)
    E = random_smooth_curve(F, rng, ordinary=True)
    found = 0
    while found < 3:
        xs = _relation_inputs(E, rng, 6)
        if xs is None:
            continue
        found += 1
        witness = find_relation(E, xs)
        assert witness is not None and witness.verify()
        assert summation_value(E, xs).is_zero()
    for _ in range(5):
        xs = [F.random_element(rng) for _ in range(6)]
        assert (find_relation(E, xs) is None) == (not summation_value(E, xs).is_zero())


def test_nodal_gf11_example():
    F = field_construct(11)
    E = nodal_model(F)
    report = degenerate_factorization_check(E, [F(2), F(3), F(6)])
    assert report.holds
    assert report.vanishes


@pytest.mark.parametrize("p,n", [(7, 1), (3, 2), (2, 3)])
def test_degenerate_product_forms_hold_everywhere(p, n):
    F = field_construct(p, n)
    nodal, cusp = nodal_model(F), cuspidal_model(F)
    for xs in itertools.product(list(F.elements()), repeat=3):
        if not any(x.is_zero() for x in xs):
            assert degenerate_factorization_check(cusp, xs).holds
            if not any(x.is_one() for x in xs):
                assert degenerate_factorization_check(nodal, xs).holds


def test_degenerate_check_rejects_other_models(smooth_f11):
    F = smooth_f11.field
    with pytest.raises(CurveError):
        degenerate_factorization_check(smooth_f11, [F(1), F(2), F(3)])
    with pytest.raises(CurveError):
        degenerate_factorization_check(nodal_model(F), [F(1), F(2), F(3)])


@pytest.mark.parametrize("p,r", [(11, 3), (7, 4)])
def test_nodal_vanishing_is_multiplicative_relation(p, r):
    F = field_construct(p)
    E = nodal_model(F)
    ts = [t for t in F.nonzero_elements() if not t.is_one()]
    for tup in itertools.product(ts, repeat=r):
        xs = [t / ((t - 1) * (t - 1)) for t in tup]
        expected = any(_product(tup, signs).is_one() for signs in itertools.product((1, -1), repeat=r))
        assert summation_value(E, xs).is_zero() == expected


@pytest.mark.parametrize("p,r", [(11, 3), (7, 4)])
def test_cuspidal_vanishing_is_additive_relation(p, r):
    F = field_construct(p)
    E = cuspidal_model(F)
    ts = list(F.nonzero_elements())
    for tup in itertools.product(ts, repeat=r):
        xs = [(t * t).inverse() for t in tup]
        expected = any(_signed_sum(tup, signs).is_zero() for signs in itertools.product((1, -1), repeat=r))
        assert summation_value(E, xs).is_zero() == expected


@pytest.mark.parametrize("r", [3, 4])
def test_char2_cuspidal_vanishing_is_plain_sum(r):
    F = field_construct(2, 3)
    E = cuspidal_model(F)
    for tup in itertools.product(list(F.nonzero_elements()), repeat=r):
        xs = [(a * a).inverse() for a in tup]
        total = F.zero
        for a in tup:
            total = total + a
        assert summation_value(E, xs).is_zero() == total.is_zero()


def test_cuspidal_relation_search_on_many_points():
    F = field_construct(3, 4)
    E = cuspidal_model(F)
    rng = np.random.default_rng(8)
    last = F.zero
    while last.is_zero():
        ts = [F.random_element(rng, nonzero=True) for _ in range(11)]
        signs = [1 if s else -1 for s in rng.integers(0, 2, size=11)]
        last = F.zero
        for s, t in zip(signs, ts):
            last = last - t * s
    xs = [(t * t).inverse() for t in ts + [last]]
    witness = find_relation(E, xs)
    assert witness is not None
    assert witness.verify()
    assert [P.x for P in witness.points] == xs


def test_cuspidal_relation_search_agrees_with_values():
    F = field_construct(5, 2)
    E = cuspidal_model(F)
    rng = np.random.default_rng(12)
    for _ in range(20):
        xs = [F.random_element(rng, nonzero=True) for _ in range(4)]
        assert (find_relation(E, xs) is None) == (not summation_value(E, xs).is_zero())


def test_relation_search_rejects_singular_inputs():
    F = field_construct(7)
    with pytest.raises(CurveError):
        find_relation(nodal_model(F), [F(0), F(1)])
    with pytest.raises(CurveError):
        find_relation(cuspidal_model(F), [F(0), F(1)])


def _product(ts, signs):
    acc = ts[0].field.one
    for t, s in zip(ts, signs):
        acc = acc * (t if s > 0 else t.inverse())
    return acc


def _signed_sum(ts, signs):
    acc = ts[0].field.zero
    for t, s in zip(ts, signs):
        acc = acc + t * s
    return acc
