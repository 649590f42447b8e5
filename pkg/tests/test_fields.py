import numpy as np
import pytest

from src.summation_poly_lab.errors import FieldError, FieldMismatchError
from src.summation_poly_lab.fields import (
    Field,
    extend,
    field_construct,
    find_irreducible,
    is_irreducible,
    parse_field_spec,
    quadratic_embed,
)


def test_prime_field_has_linear_modulus():
    f = field_construct(2, 1)
    assert f.modulus == (0, 1)
    assert f.order == 2
    assert f.is_prime_field


def test_gf4_default_modulus_is_first_irreducible():
    f = field_construct(2, 2)
    assert f.modulus == (1, 1, 1)


def test_supplied_modulus_accepted():
    f = field_construct(2, 2, [1, 1, 1])
    assert f.order == 4


def test_reducible_modulus_rejected():
    with pytest.raises(FieldError):
        field_construct(2, 2, [1, 0, 1])


def test_non_prime_characteristic_rejected():
    with pytest.raises(FieldError):
        field_construct(4, 1)


def test_non_monic_modulus_rejected():
    with pytest.raises(FieldError):
        Field(3, 2, [1, 0, 2])


@pytest.mark.parametrize("p,n", [(2, 3), (2, 8), (3, 2), (3, 5), (5, 3), (7, 2)])
def test_find_irreducible_is_irreducible(p, n):
    modulus = find_irreducible(p, n)
    assert len(modulus) == n + 1
    assert modulus[-1] == 1
    assert is_irreducible(modulus, p)


def test_is_irreducible_rejects_square():
    # (X^2+X+1)^2 = X^4+X^2+1 over GF(2)
    assert not is_irreducible([1, 0, 1, 0, 1], 2)


def test_field_construct_is_cached():
    assert field_construct(2, 5) is field_construct(2, 5)


def test_gf4_product():
    f = field_construct(2, 2, [1, 1, 1])
    u = f.gen
    assert u * (u + 1) == f.one


def test_additive_inverse():
    f = field_construct(3, 3)
    for a in f.elements():
        assert (a + (-a)).is_zero()


def test_inverse_of_zero_raises():
    f = field_construct(2, 3)
    with pytest.raises(FieldError):
        f.zero.inverse()


def test_mismatched_fields_raise():
    f = field_construct(2, 3)
    g = field_construct(2, 4)
    with pytest.raises(FieldMismatchError):
        _ = f.gen + g.gen


@pytest.mark.parametrize("p,n", [(2, 4), (3, 2), (5, 2), (2, 20), (3, 8), (13, 1)])
def test_multiplicative_inverse(p, n):
    f = field_construct(p, n)
    rng = np.random.default_rng(7)
    for _ in range(50):
        a = f.random_element(rng, nonzero=True)
        assert (a * a.inverse()).is_one()
        assert a / a == f.one


def test_table_and_raw_multiplication_agree():
    f = field_construct(2, 6)
    rng = np.random.default_rng(3)
    for _ in range(200):
        a = int(rng.integers(0, f.order))
        b = int(rng.integers(0, f.order))
        assert f._mul(a, b) == f._mul_raw(a, b)


def test_pow_square_and_multiply():
    f = field_construct(3, 3)
    a = f.gen + 1
    acc = f.one
    for k in range(30):
        assert a ** k == acc
        acc = acc * a
    assert a ** -1 == a.inverse()
    assert a ** (f.order - 1) == f.one


def test_integer_coercion_uses_prime_field():
    f = field_construct(7)
    assert f(9) == f(2)
    assert 3 * f(5) == f(1)
    assert f(2) - 3 == f(6)


def test_trace_examples():
    f = field_construct(2, 2, [1, 1, 1])
    assert f.zero.trace().is_zero()
    assert f.gen.trace().is_one()


@pytest.mark.parametrize("p,n", [(2, 4), (3, 2), (5, 2), (2, 3)])
def test_trace_linear_and_surjective(p, n):
    f = field_construct(p, n)
    values = set()
    elements = list(f.elements())
    for a in elements:
        ta = a.trace()
        values.add(ta.value)
        assert (a ** p).trace() == ta
        for b in elements:
            assert (a + b).trace() == ta + b.trace()
    assert values == set(range(p))


def test_trace_matches_sum_of_conjugates_gf256():
    f = field_construct(2, 8)
    values = set()
    for a in f.elements():
        conj = a
        total = f.zero
        for _ in range(f.n):
            total = total + conj
            conj = conj ** 2
        assert total.value == f._trace(a.value)
        values.add(total.value)
    assert values == {0, 1}


def test_trace_of_artin_schreier_image_vanishes():
    f = field_construct(2, 7)
    for a in f.elements():
        assert (a * a + a).trace().is_zero()


@pytest.mark.parametrize("p,n", [(2, 4), (3, 3), (5, 2)])
def test_frobenius_is_automorphism(p, n):
    f = field_construct(p, n)
    elements = list(f.elements())
    images = {a.frobenius().value for a in elements}
    assert len(images) == f.order
    for a in elements:
        for b in elements[:: max(1, len(elements) // 16)]:
            assert (a * b).frobenius() == a.frobenius() * b.frobenius()
            assert (a + b).frobenius() == a.frobenius() + b.frobenius()
    assert all(a.frobenius(n) == a for a in elements)


def test_power_basis_coordinates():
    f = field_construct(3, 4)
    for i, alpha in enumerate(f.power_basis()):
        expected = [0] * f.n
        expected[i] = 1
        assert f.coords_in_basis(alpha) == expected
    assert f.one_coords() == [1, 0, 0, 0]


def _random_basis(f, rng):
    while True:
        candidate = [f.random_element(rng) for _ in range(f.n)]
        try:
            f.with_basis(candidate)
            return candidate
        except FieldError:
            continue


@pytest.mark.parametrize("p,n", [(2, 5), (3, 3), (7, 2)])
def test_coords_round_trip_random_basis(p, n):
    f = field_construct(p, n)
    rng = np.random.default_rng(11)
    basis = _random_basis(f, rng)
    for a in f.elements():
        coords = f.coords_in_basis(a, basis)
        assert all(0 <= c < p for c in coords)
        assert f.combine(coords, basis) == a
    ones = f.one_coords(basis)
    assert f.combine(ones, basis) == f.one


def test_degenerate_basis_rejected():
    f = field_construct(2, 3)
    with pytest.raises(FieldError):
        f.with_basis([f.one, f.gen, f.one + f.gen])


def test_quadratic_embed_is_ring_homomorphism():
    small = field_construct(2, 2)
    ext = quadratic_embed(small)
    assert ext.big.order == 16
    assert ext.embed(small.one) == ext.big.one
    for a in small.elements():
        for b in small.elements():
            assert ext.embed(a * b) == ext.embed(a) * ext.embed(b)
            assert ext.embed(a + b) == ext.embed(a) + ext.embed(b)


@pytest.mark.parametrize("p,n", [(2, 1), (2, 2), (3, 1), (2, 4), (3, 2)])
def test_frobenius_fixes_exactly_the_base(p, n):
    small = field_construct(p, n)
    ext = quadratic_embed(small)
    image = {ext.embed(a).value for a in small.elements()}
    fixed = set()
    for b in ext.big.elements():
        sb = ext.frobenius(b)
        assert ext.frobenius(sb) == b
        if sb == b:
            fixed.add(b.value)
    assert fixed == image
    assert len(fixed) < ext.big.order


def test_restrict_inverts_embed():
    small = field_construct(3, 2)
    ext = extend(small, 3)
    assert ext.big.order == 3 ** 6
    for a in small.elements():
        assert ext.restrict(ext.embed(a)) == a
    outside = next(b for b in ext.big.elements() if not ext.in_base(b))
    with pytest.raises(FieldError):
        ext.restrict(outside)


@pytest.mark.parametrize("p,n", [(3, 2), (13, 1), (2, 4), (5, 3)])
def test_sqrt(p, n):
    f = field_construct(p, n)
    squares = {(a * a).value for a in f.elements()}
    for a in f.elements():
        root = a.sqrt()
        if a.value in squares:
            assert root is not None and root * root == a
        else:
            assert root is None


@pytest.mark.parametrize("n", [1, 4, 5, 6])
def test_artin_schreier_solver(n):
    f = field_construct(2, n)
    for c in f.elements():
        z = f._solve_artin_schreier(c.value)
        if c.trace().is_zero():
            zz = f.from_value(z)
            assert zz * zz + zz == c
        else:
            assert z is None


@pytest.mark.parametrize("p,n", [(2, 3), (2, 4), (7, 1), (3, 2)])
def test_quadratic_roots_exhaustive(p, n):
    f = field_construct(p, n)
    elements = list(f.elements())
    for b in elements[:: max(1, len(elements) // 8)]:
        for c in elements:
            expected = sorted({y.value for y in elements if (y * y + b * y + c).is_zero()})
            assert [r.value for r in f.quadratic_roots(b, c)] == expected


def test_descriptor_round_trip():
    f = field_construct(3, 4)
    data = f.descriptor()
    assert data == {"p": 3, "n": 4, "modulus": list(f.modulus)}
    assert Field.from_descriptor(data) == f


def test_parse_field_spec():
    assert parse_field_spec("7") == field_construct(7)
    assert parse_field_spec("2^4") == field_construct(2, 4)
    assert parse_field_spec("2^2:1,1,1").modulus == (1, 1, 1)
    with pytest.raises(FieldError):
        parse_field_spec("2**4")


def test_format_value():
    f7 = field_construct(7)
    assert str(f7(5)) == "-2"
    assert str(f7(3)) == "3"
    f4 = field_construct(2, 2)
    assert str(f4.gen + 1) == "u+1"
    f9 = field_construct(3, 2)
    assert str(f9.gen * 2 + 1) == "2*u+1"
