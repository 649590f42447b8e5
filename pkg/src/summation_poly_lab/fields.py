"""Exact arithmetic in GF(p^n) over a polynomial basis.

Elements are stored as a single integer: the coefficient of u^i sits in base-p
digit i (so for p = 2 the value is the bit-packed coordinate vector). The
integer-level methods prefixed with an underscore are what the polynomial and
curve code call in hot loops; `FieldElement` is the public value type.
"""
from __future__ import annotations

import itertools
import logging
import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from sympy import Matrix
from sympy.polys import galoistools as gt
from sympy.polys.domains import ZZ

from .errors import FieldError, FieldMismatchError, ResourceCapError

# Fields up to this order get log/antilog multiplication tables.
TABLE_MAX_ORDER = 4096
# p^n must stay below 2^64 so element values fit numpy int64/uint64 buffers.
MAX_ORDER_BITS = 63

Scalar = Union["FieldElement", int]


def is_irreducible(modulus: Sequence[int], p: int) -> bool:
    """Distinct-degree test: no factor of degree <= n/2 divides the modulus.

    Args:
        modulus: coefficients c_0..c_n, lowest degree first.
        p: the characteristic.
    """
    f = [ZZ(c % p) for c in reversed(modulus)]
    f = gt.gf_strip(f)
    n = len(f) - 1
    if n < 1:
        return False
    if n == 1:
        return True
    x = [ZZ(1), ZZ(0)]
    h = x
    for _ in range(1, n // 2 + 1):
        h = gt.gf_pow_mod(h, p, f, p, ZZ)
        g = gt.gf_gcd(gt.gf_sub(h, x, p, ZZ), f, p, ZZ)
        if len(g) > 1:
            return False
    return True


def find_irreducible(p: int, n: int) -> Tuple[int, ...]:
    """First monic irreducible of degree n in lexicographic order of (c_{n-1}, ..., c_0).

    Equivalently the candidates X^n + sum c_i X^i are walked by the integer sum c_i p^i.
    """
    for low in itertools.product(range(p), repeat=n):
        candidate = tuple(reversed(low)) + (1,)
        if n > 1 and candidate[0] == 0:
            continue
        if is_irreducible(candidate, p):
            return candidate
    raise FieldError(f"no irreducible polynomial of degree {n} over GF({p})")  # unreachable


class Field:
    """GF(p^n) = GF(p)[u]/(modulus) with a distinguished GF(p)-basis."""

    def __init__(self, p: int, n: int, modulus: Sequence[int], basis: Optional[Sequence[int]] = None):
        if not sympy.isprime(p):
            raise FieldError(f"characteristic {p} is not prime")
        if n < 1:
            raise FieldError(f"extension degree must be >= 1, got {n}")
        if (p ** n).bit_length() > MAX_ORDER_BITS:
            raise ResourceCapError(f"GF({p}^{n}) exceeds 2^{MAX_ORDER_BITS} elements")
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != n + 1 or modulus[-1] != 1:
            raise FieldError(f"modulus must be monic of degree {n}")
        if not is_irreducible(modulus, p):
            raise FieldError(f"modulus {list(modulus)} is reducible over GF({p})")
        self.p = p
        self.n = n
        self.modulus = modulus
        self.order = p ** n
        self._mod_int = sum(c << i for i, c in enumerate(modulus)) if p == 2 else 0
        self._mod_gf = [ZZ(c) for c in reversed(modulus)]
        self.basis: Tuple[int, ...] = tuple(basis) if basis is not None else self.power_basis_values
        if len(self.basis) != n:
            raise FieldError(f"basis must have {n} elements")
        self._basis_inverse(self.basis)  # rejects rank-deficient bases

    # -- identity -------------------------------------------------------------

    @property
    def key(self) -> Tuple[int, int, Tuple[int, ...]]:
        return (self.p, self.n, self.modulus)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Field) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        if self.n == 1:
            return f"GF({self.p})"
        return f"GF({self.p}^{self.n})"

    def descriptor(self) -> Dict[str, Any]:
        return {"p": self.p, "n": self.n, "modulus": list(self.modulus)}

    @classmethod
    def from_descriptor(cls, data: Dict[str, Any]) -> "Field":
        return field_construct(int(data["p"]), int(data["n"]), data.get("modulus"))

    # -- element construction -------------------------------------------------

    def __call__(self, value: Union[int, Sequence[int], "FieldElement"]) -> "FieldElement":
        return self.element(value)

    def element(self, value: Union[int, Sequence[int], "FieldElement"]) -> "FieldElement":
        """Integers are read as prime-field scalars; sequences as power-basis coordinates."""
        if isinstance(value, FieldElement):
            self._check(value)
            return value
        if isinstance(value, (int, np.integer)):
            return FieldElement(self, int(value) % self.p)
        return self.from_coords(value)

    def from_value(self, value: int) -> "FieldElement":
        """Build from the packed integer encoding (digit i = coefficient of u^i)."""
        if not 0 <= value < self.order:
            raise FieldError(f"packed value {value} out of range for {self}")
        return FieldElement(self, value)

    def from_coords(self, coords: Sequence[int]) -> "FieldElement":
        if len(coords) != self.n:
            raise FieldError(f"expected {self.n} coordinates, got {len(coords)}")
        return FieldElement(self, self._from_digits([int(c) % self.p for c in coords]))

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(self, 0)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(self, 1)

    @property
    def gen(self) -> "FieldElement":
        """The class of u (the prime-field element 0 when n = 1 and the modulus is X)."""
        if self.n == 1:
            return FieldElement(self, (-self.modulus[0]) % self.p)
        return FieldElement(self, self.p)

    def elements(self) -> Iterator["FieldElement"]:
        for v in range(self.order):
            yield FieldElement(self, v)

    def nonzero_elements(self) -> Iterator["FieldElement"]:
        for v in range(1, self.order):
            yield FieldElement(self, v)

    def random_element(self, rng: np.random.Generator, nonzero: bool = False) -> "FieldElement":
        low = 1 if nonzero else 0
        return FieldElement(self, int(rng.integers(low, self.order)))

    @property
    def is_prime_field(self) -> bool:
        return self.n == 1

    def prime_field(self) -> "Field":
        return field_construct(self.p, 1)

    def _check(self, a: "FieldElement") -> None:
        if a.field is not self and a.field != self:
            raise FieldMismatchError(f"element of {a.field} used in {self}")

    # -- digits ---------------------------------------------------------------

    def _to_digits(self, v: int) -> List[int]:
        p = self.p
        if p == 2:
            return [(v >> i) & 1 for i in range(self.n)]
        digits = []
        for _ in range(self.n):
            v, d = divmod(v, p)
            digits.append(d)
        return digits

    def _from_digits(self, digits: Sequence[int]) -> int:
        v = 0
        for d in reversed(digits):
            v = v * self.p + d
        return v

    def _to_gf(self, v: int) -> List[Any]:
        return gt.gf_strip([ZZ(d) for d in reversed(self._to_digits(v))])

    def _from_gf(self, poly: Sequence[Any]) -> int:
        v = 0
        for c in poly:
            v = v * self.p + int(c)
        return v

    # -- integer-level arithmetic ------------------------------------------------

    def _add(self, a: int, b: int) -> int:
        p = self.p
        if p == 2:
            return a ^ b
        if self.n == 1:
            return (a + b) % p
        da, db = self._to_digits(a), self._to_digits(b)
        return self._from_digits([(x + y) % p for x, y in zip(da, db)])

    def _neg(self, a: int) -> int:
        p = self.p
        if p == 2 or a == 0:
            return a
        if self.n == 1:
            return p - a
        return self._from_digits([(-x) % p for x in self._to_digits(a)])

    def _sub(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        return self._add(a, self._neg(b))

    def _scale(self, a: int, k: int) -> int:
        """Multiply by the prime-field scalar k."""
        k %= self.p
        if k == 0 or a == 0:
            return 0
        if k == 1:
            return a
        if self.n == 1:
            return (a * k) % self.p
        return self._from_digits([(x * k) % self.p for x in self._to_digits(a)])

    def _mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        tables = self._tables
        if tables is not None:
            exp, log = tables
            return exp[(log[a] + log[b]) % (self.order - 1)]
        return self._mul_raw(a, b)

    def _mul_raw(self, a: int, b: int) -> int:
        if self.n == 1:
            return (a * b) % self.p
        if self.p == 2:
            n, mod_int = self.n, self._mod_int
            r = 0
            while b:
                if b & 1:
                    r ^= a
                b >>= 1
                a <<= 1
                if (a >> n) & 1:
                    a ^= mod_int
            return r
        prod = gt.gf_mul(self._to_gf(a), self._to_gf(b), self.p, ZZ)
        return self._from_gf(gt.gf_rem(prod, self._mod_gf, self.p, ZZ))

    def _square(self, a: int) -> int:
        return self._mul(a, a)

    def _inv(self, a: int) -> int:
        if a == 0:
            raise FieldError("inverse of zero")
        tables = self._tables
        if tables is not None:
            exp, log = tables
            return exp[(-log[a]) % (self.order - 1)]
        if self.n == 1:
            return pow(a, -1, self.p)
        if self.p == 2:
            return self._pow_raw(a, self.order - 2)
        s, _, g = gt.gf_gcdex(self._to_gf(a), self._mod_gf, self.p, ZZ)
        if g != [ZZ(1)]:
            raise FieldError("element is not invertible")  # unreachable for irreducible moduli
        return self._from_gf(gt.gf_rem(s, self._mod_gf, self.p, ZZ))

    def _pow(self, a: int, e: int) -> int:
        if e < 0:
            a = self._inv(a)
            e = -e
        if e == 0:
            return 1
        if a == 0:
            return 0
        tables = self._tables
        if tables is not None:
            exp, log = tables
            return exp[(log[a] * e) % (self.order - 1)]
        return self._pow_raw(a, e)

    def _pow_raw(self, a: int, e: int) -> int:
        result = 1
        while e:
            if e & 1:
                result = self._mul_raw(result, a)
            e >>= 1
            if e:
                a = self._mul_raw(a, a)
        return result

    def _frobenius(self, a: int, k: int = 1) -> int:
        """a -> a^(p^k)."""
        k %= self.n
        if k == 0 or a == 0:
            return a
        return self._pow(a, self.p ** k)

    def _div(self, a: int, b: int) -> int:
        return self._mul(a, self._inv(b))

    @cached_property
    def _tables(self) -> Optional[Tuple[List[int], List[int]]]:
        if self.n == 1 or self.order > TABLE_MAX_ORDER:
            return None
        g = self._primitive_value
        exp = [0] * (self.order - 1)
        log = [0] * self.order
        v = 1
        for i in range(self.order - 1):
            exp[i] = v
            log[v] = i
            v = self._mul_raw(v, g)
        return exp, log

    @cached_property
    def _primitive_value(self) -> int:
        q1 = self.order - 1
        primes = list(sympy.factorint(q1).keys())
        for v in range(1, self.order):
            if all(self._pow_raw(v, q1 // ell) != 1 for ell in primes):
                return v
        raise FieldError("no primitive element found")  # unreachable

    def primitive_element(self) -> "FieldElement":
        return FieldElement(self, self._primitive_value)

    # -- trace, linear algebra ---------------------------------------------------

    @cached_property
    def _trace_of_monomials(self) -> List[int]:
        traces = []
        for i in range(self.n):
            v = self._pow_raw(self.p, i) if self.n > 1 else 1
            t = 0
            w = v
            for _ in range(self.n):
                t = self._add(t, w)
                w = self._pow_raw(w, self.p)
            traces.append(t)
        return traces

    @cached_property
    def _trace_mask(self) -> int:
        return sum(1 << i for i, t in enumerate(self._trace_of_monomials) if t)

    def _trace(self, a: int) -> int:
        """Tr_{GF(p^n)/GF(p)} as an integer in [0, p)."""
        if self.p == 2:
            return (a & self._trace_mask).bit_count() & 1
        digits = self._to_digits(a)
        return sum(d * t for d, t in zip(digits, self._trace_of_monomials)) % self.p

    def trace(self, a: "FieldElement") -> "FieldElement":
        self._check(a)
        return FieldElement(self.prime_field(), self._trace(a.value))

    @property
    def power_basis_values(self) -> Tuple[int, ...]:
        return tuple(self.p ** i for i in range(self.n))

    def power_basis(self) -> List["FieldElement"]:
        return [FieldElement(self, v) for v in self.power_basis_values]

    def basis_elements(self) -> List["FieldElement"]:
        return [FieldElement(self, v) for v in self.basis]

    def with_basis(self, basis: Sequence["FieldElement"]) -> "Field":
        return Field(self.p, self.n, self.modulus, [b.value for b in basis])

    def _basis_inverse(self, basis: Tuple[int, ...]) -> List[List[int]]:
        cache = self.__dict__.setdefault("_inverse_cache", {})
        if basis not in cache:
            if len(basis) != self.n:
                raise FieldError(f"basis must have {self.n} elements")
            columns = [self._to_digits(v) for v in basis]
            mat = Matrix(self.n, self.n, lambda i, j: columns[j][i])
            try:
                inverse = mat.inv_mod(self.p)
            except ValueError as e:
                raise FieldError(f"basis is not linearly independent over GF({self.p})") from e
            cache[basis] = [[int(inverse[i, j]) for j in range(self.n)] for i in range(self.n)]
        return cache[basis]

    def _coords_in_basis(self, a: int, basis: Tuple[int, ...]) -> List[int]:
        inverse = self._basis_inverse(basis)
        digits = self._to_digits(a)
        p = self.p
        return [sum(r * d for r, d in zip(row, digits)) % p for row in inverse]

    def coords_in_basis(self, a: "FieldElement", basis: Optional[Sequence["FieldElement"]] = None) -> List[int]:
        """Coordinates c with a = sum c_i basis_i, solved exactly over GF(p)."""
        self._check(a)
        key = self.basis if basis is None else tuple(b.value for b in basis)
        return self._coords_in_basis(a.value, key)

    def combine(self, coords: Sequence[int], basis: Optional[Sequence["FieldElement"]] = None) -> "FieldElement":
        values = self.basis if basis is None else tuple(b.value for b in basis)
        acc = 0
        for c, v in zip(coords, values):
            acc = self._add(acc, self._scale(v, c))
        return FieldElement(self, acc)

    def one_coords(self, basis: Optional[Sequence["FieldElement"]] = None) -> List[int]:
        """c_1..c_n with 1 = sum c_i alpha_i."""
        return self.coords_in_basis(self.one, basis)

    # -- roots ------------------------------------------------------------------

    def _sqrt(self, a: int) -> Optional[int]:
        if a == 0:
            return 0
        q = self.order
        if self.p == 2:
            return self._pow(a, q // 2)
        if self._pow(a, (q - 1) // 2) != 1:
            return None
        s, t = 0, q - 1
        while t % 2 == 0:
            s += 1
            t //= 2
        z = self._non_residue
        m, c = s, self._pow(z, t)
        r, tt = self._pow(a, (t + 1) // 2), self._pow(a, t)
        while tt != 1:
            i, u = 0, tt
            while u != 1:
                u = self._square(u)
                i += 1
            b = self._pow(c, 1 << (m - i - 1))
            m, c = i, self._square(b)
            tt, r = self._mul(tt, c), self._mul(r, b)
        return r

    @cached_property
    def _non_residue(self) -> int:
        half = (self.order - 1) // 2
        for v in range(2, self.order):
            if self._pow(v, half) != 1:
                return v
        raise FieldError("no quadratic non-residue")  # unreachable for odd q > 2

    def sqrt(self, a: "FieldElement") -> Optional["FieldElement"]:
        self._check(a)
        root = self._sqrt(a.value)
        return None if root is None else FieldElement(self, root)

    @cached_property
    def _artin_schreier_images(self) -> List[int]:
        # z(c) = sum_{i<n-1} c^(2^i) * sum_{j>i} delta^(2^j) is GF(2)-linear in c.
        n = self.n
        delta = next(v for v in range(1, self.order) if self._trace(v) == 1)
        conj = [self._frobenius(delta, j) for j in range(n)]
        tails = []
        for i in range(n):
            acc = 0
            for j in range(i + 1, n):
                acc ^= conj[j]
            tails.append(acc)
        images = []
        for k in range(n):
            c = 1 << k
            z = 0
            ci = c
            for i in range(n - 1):
                z ^= self._mul(ci, tails[i])
                ci = self._square(ci)
            images.append(z)
        return images

    def _solve_artin_schreier(self, c: int) -> Optional[int]:
        """A root z of z^2 + z = c in characteristic 2 (the other one is z + 1)."""
        if self.p != 2:
            raise FieldError("Artin-Schreier solving is only used in characteristic 2")
        if self._trace(c) != 0:
            return None
        if self.n == 1:
            return 0
        z = 0
        images = self._artin_schreier_images
        k = 0
        while c:
            if c & 1:
                z ^= images[k]
            c >>= 1
            k += 1
        return z

    def quadratic_roots(self, b: "FieldElement", c: "FieldElement") -> List["FieldElement"]:
        """Roots in this field of Y^2 + bY + c, without multiplicity, sorted by value."""
        self._check(b)
        self._check(c)
        roots = [FieldElement(self, v) for v in self._quadratic_roots(b.value, c.value)]
        return roots

    def _quadratic_roots(self, b: int, c: int) -> List[int]:
        if self.p == 2:
            if b == 0:
                root = self._sqrt(c)
                return [root] if root is not None else []
            w = self._solve_artin_schreier(self._div(c, self._square(b)))
            if w is None:
                return []
            z0 = self._mul(b, w)
            return sorted({z0, z0 ^ b})
        disc = self._sub(self._square(b), self._scale(c, 4))
        root = self._sqrt(disc)
        if root is None:
            return []
        half = self._inv(2 % self.p)
        r1 = self._mul(self._sub(root, b), half)
        r2 = self._mul(self._sub(self._neg(root), b), half)
        return sorted({r1, r2})

    # -- formatting -----------------------------------------------------------------

    def format_value(self, v: int) -> str:
        """Human-readable form: signed integer in a prime field, polynomial in u otherwise."""
        p = self.p
        if self.n == 1:
            return str(v - p if p > 2 and v > p // 2 else v)
        terms = []
        for i, d in reversed(list(enumerate(self._to_digits(v)))):
            if d == 0:
                continue
            mono = "1" if i == 0 else ("u" if i == 1 else f"u^{i}")
            if d == 1:
                terms.append(mono)
            elif i == 0:
                terms.append(str(d))
            else:
                terms.append(f"{d}*{mono}")
        return "+".join(terms) if terms else "0"


class FieldElement:
    """Immutable element of a `Field`."""

    __slots__ = ("field", "value")

    field: Field
    value: int

    def __init__(self, field: Field, value: int):
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "value", value)

    def __setattr__(self, name: str, value: Any) -> None:
        raise AttributeError("FieldElement is immutable")

    def _coerce(self, other: Scalar) -> int:
        if isinstance(other, FieldElement):
            if other.field is not self.field and other.field != self.field:
                raise FieldMismatchError(f"cannot combine elements of {self.field} and {other.field}")
            return other.value
        if isinstance(other, (int, np.integer)):
            return int(other) % self.field.p
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other: Scalar) -> "FieldElement":
        return FieldElement(self.field, self.field._add(self.value, self._coerce(other)))

    __radd__ = __add__

    def __sub__(self, other: Scalar) -> "FieldElement":
        return FieldElement(self.field, self.field._sub(self.value, self._coerce(other)))

    def __rsub__(self, other: Scalar) -> "FieldElement":
        return FieldElement(self.field, self.field._sub(self._coerce(other), self.value))

    def __mul__(self, other: Scalar) -> "FieldElement":
        return FieldElement(self.field, self.field._mul(self.value, self._coerce(other)))

    __rmul__ = __mul__

    def __truediv__(self, other: Scalar) -> "FieldElement":
        return FieldElement(self.field, self.field._div(self.value, self._coerce(other)))

    def __rtruediv__(self, other: Scalar) -> "FieldElement":
        return FieldElement(self.field, self.field._div(self._coerce(other), self.value))

    def __neg__(self) -> "FieldElement":
        return FieldElement(self.field, self.field._neg(self.value))

    def __pow__(self, e: int) -> "FieldElement":
        return FieldElement(self.field, self.field._pow(self.value, int(e)))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field, self.field._inv(self.value))

    def trace(self) -> "FieldElement":
        return self.field.trace(self)

    def frobenius(self, k: int = 1) -> "FieldElement":
        return FieldElement(self.field, self.field._frobenius(self.value, k))

    def sqrt(self) -> Optional["FieldElement"]:
        return self.field.sqrt(self)

    @property
    def coords(self) -> Tuple[int, ...]:
        return tuple(self.field._to_digits(self.value))

    def is_zero(self) -> bool:
        return self.value == 0

    def is_one(self) -> bool:
        return self.value == 1

    def __bool__(self) -> bool:
        return self.value != 0

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FieldElement) and other.value == self.value and other.field == self.field

    def __hash__(self) -> int:
        return hash((self.field.key, self.value))

    def __repr__(self) -> str:
        return f"{self.field!r}({self.field.format_value(self.value)})"

    def __str__(self) -> str:
        return self.field.format_value(self.value)

    def to_json(self) -> List[int]:
        return list(self.coords)


@dataclass(frozen=True)
class FieldExtension:
    """An embedding of `small` into `big` together with the relative Frobenius x -> x^|small|."""

    small: Field
    big: Field
    root: int

    @cached_property
    def _images(self) -> List[int]:
        big = self.big
        images, v = [], 1
        for _ in range(self.small.n):
            images.append(v)
            v = big._mul(v, self.root)
        return images

    def _embed(self, a: int) -> int:
        big = self.big
        acc = 0
        for d, img in zip(self.small._to_digits(a), self._images):
            if d:
                acc = big._add(acc, big._scale(img, d))
        return acc

    def embed(self, a: FieldElement) -> FieldElement:
        self.small._check(a)
        return FieldElement(self.big, self._embed(a.value))

    def frobenius(self, b: FieldElement) -> FieldElement:
        """sigma: b -> b^q, q = |small|; an involution for quadratic extensions."""
        self.big._check(b)
        return FieldElement(self.big, self.big._pow(b.value, self.small.order))

    def in_base(self, b: FieldElement) -> bool:
        return self.frobenius(b) == b

    @cached_property
    def _restriction(self) -> Dict[int, int]:
        if self.small.order > 1 << 16:
            raise ResourceCapError("restriction table limited to base fields of order <= 2^16")
        return {self._embed(v): v for v in range(self.small.order)}

    def restrict(self, b: FieldElement) -> FieldElement:
        """Inverse of `embed` on its image."""
        self.big._check(b)
        try:
            return FieldElement(self.small, self._restriction[b.value])
        except KeyError:
            raise FieldError(f"{b!r} does not lie in the image of {self.small}") from None


@lru_cache(maxsize=None)
def _cached_field(p: int, n: int, modulus: Optional[Tuple[int, ...]]) -> Field:
    if modulus is None:
        if not sympy.isprime(p):
            raise FieldError(f"characteristic {p} is not prime")
        modulus = find_irreducible(p, n)
    field = Field(p, n, modulus)
    logging.debug(f"Constructed {field} with modulus {list(field.modulus)}")
    return field


def field_construct(p: int, n: int = 1, modulus: Optional[Sequence[int]] = None) -> Field:
    """GF(p^n); without a modulus the lexicographically first irreducible one is used."""
    if n < 1:
        raise FieldError(f"extension degree must be >= 1, got {n}")
    return _cached_field(int(p), int(n), None if modulus is None else tuple(int(c) for c in modulus))


@lru_cache(maxsize=None)
def extend(small: Field, k: int) -> FieldExtension:
    """Embed `small` into GF(p^(n*k)) by locating a root of its modulus there."""
    big = field_construct(small.p, small.n * k)
    if small.n == 1:
        return FieldExtension(small, big, big._scale(1, -small.modulus[0]))
    if small.order > 1 << 16:
        raise ResourceCapError("extension embedding is limited to base fields of order <= 2^16")
    # The order-(q-1) subgroup of big is small^*; walk it until the modulus vanishes.
    step = big._pow(big._primitive_value, (big.order - 1) // (small.order - 1))
    candidate = 1
    for _ in range(small.order - 1):
        acc = 0
        for c in reversed(small.modulus):
            acc = big._add(big._mul(acc, candidate), c % small.p)
        if acc == 0:
            logging.debug(f"Embedded {small} into {big}")
            return FieldExtension(small, big, candidate)
        candidate = big._mul(candidate, step)
    raise FieldError(f"modulus of {small} has no root in {big}")  # unreachable


def quadratic_embed(field: Field) -> FieldExtension:
    return extend(field, 2)


_FIELD_SPEC = re.compile(r"^\s*(\d+)\s*(?:\^\s*(\d+))?\s*(?::\s*([\d,\s]+))?\s*$")


def parse_field_spec(text: str) -> Field:
    """Parse "7", "2^4" or "2^4:1,1,0,0,1" (explicit modulus c_0..c_n)."""
    match = _FIELD_SPEC.match(text)
    if not match:
        raise FieldError(f"bad field spec {text!r}; expected p, p^n or p^n:c0,...,cn")
    p = int(match.group(1))
    n = int(match.group(2) or 1)
    modulus = None
    if match.group(3):
        modulus = [int(c) for c in match.group(3).split(",") if c.strip()]
    return field_construct(p, n, modulus)
