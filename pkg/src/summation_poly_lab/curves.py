"""Weierstrass models over finite fields: group law, singular parametrizations,
the characteristic-2 trace morphism, point counting and randomized curve search."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dataclass_field
from enum import Enum
from functools import cached_property
from itertools import product
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from .errors import CurveError, FieldError, InvalidPointError, ResourceCapError
from .fields import Field, FieldElement, FieldExtension, field_construct, quadratic_embed

NAIVE_COUNT_MAX_ORDER = 4096
MAX_ORDER = 1 << 24
SEARCH_TRIALS_PER_FIELD = 8
SEARCH_MAX_TRIALS = 2000

# Integer-level point: None is the point at infinity.
RawPoint = Optional[Tuple[int, int]]


class Classification(str, Enum):
    SMOOTH = "smooth"
    NODAL = "nodal"
    CUSPIDAL = "cuspidal"


@dataclass(frozen=True)
class CurvePoint:
    """Affine point (x, y) or the point at infinity (both coordinates None)."""

    x: Optional[FieldElement] = None
    y: Optional[FieldElement] = None

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    @property
    def raw(self) -> RawPoint:
        if self.x is None or self.y is None:
            return None
        return (self.x.value, self.y.value)

    @classmethod
    def from_raw(cls, field: Field, raw: RawPoint) -> "CurvePoint":
        if raw is None:
            return cls()
        return cls(FieldElement(field, raw[0]), FieldElement(field, raw[1]))

    def to_json(self) -> Union[str, Dict[str, List[int]]]:
        if self.x is None or self.y is None:
            return "inf"
        return {"x": self.x.to_json(), "y": self.y.to_json()}

    def __str__(self) -> str:
        if self.x is None:
            return "O"
        return f"({self.x}, {self.y})"


INFINITY = CurvePoint()


def _coerce_coefficient(field: Field, c: Union[int, FieldElement]) -> FieldElement:
    if isinstance(c, FieldElement):
        return field.element(c)
    if field.is_prime_field:
        return field(int(c))
    return field.from_value(int(c))


@dataclass(frozen=True)
class WeierstrassModel:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over `field`."""

    field: Field
    a: Tuple[FieldElement, ...]

    def __post_init__(self) -> None:
        if len(self.a) != 5:
            raise CurveError(f"a Weierstrass model needs 5 coefficients, got {len(self.a)}")
        for c in self.a:
            self.field._check(c)

    @classmethod
    def from_coefficients(cls, field: Field, coefficients: Sequence[Union[int, FieldElement]]) -> "WeierstrassModel":
        """Integers are reduced mod p in prime fields and read as packed values otherwise."""
        return cls(field, tuple(_coerce_coefficient(field, c) for c in coefficients))

    @classmethod
    def from_descriptor(cls, data: Dict[str, Any]) -> "WeierstrassModel":
        field = Field.from_descriptor(data["field"])
        return cls(field, tuple(field.from_coords(c) for c in data["a"]))

    def descriptor(self) -> Dict[str, Any]:
        return {"field": self.field.descriptor(), "a": [c.to_json() for c in self.a]}

    def __str__(self) -> str:
        return f"E({','.join(str(c) for c in self.a)}) over {self.field!r}"

    # -- invariants ---------------------------------------------------------------

    @property
    def a1(self) -> FieldElement:
        return self.a[0]

    @property
    def a2(self) -> FieldElement:
        return self.a[1]

    @property
    def a3(self) -> FieldElement:
        return self.a[2]

    @property
    def a4(self) -> FieldElement:
        return self.a[3]

    @property
    def a6(self) -> FieldElement:
        return self.a[4]

    @cached_property
    def b2(self) -> FieldElement:
        return self.a1 * self.a1 + 4 * self.a2

    @cached_property
    def b4(self) -> FieldElement:
        return self.a1 * self.a3 + 2 * self.a4

    @cached_property
    def b6(self) -> FieldElement:
        return self.a3 * self.a3 + 4 * self.a6

    @cached_property
    def b8(self) -> FieldElement:
        a1, a2, a3, a4, a6 = self.a
        return a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4

    @cached_property
    def c4(self) -> FieldElement:
        return self.b2 * self.b2 - 24 * self.b4

    @cached_property
    def discriminant(self) -> FieldElement:
        b2, b4, b6, b8 = self.b2, self.b4, self.b6, self.b8
        return -(b2 * b2 * b8) - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @cached_property
    def classification(self) -> Classification:
        if not self.discriminant.is_zero():
            return Classification.SMOOTH
        if not self.c4.is_zero():
            return Classification.NODAL
        return Classification.CUSPIDAL

    @property
    def is_smooth(self) -> bool:
        return self.classification is Classification.SMOOTH

    @property
    def is_ordinary(self) -> bool:
        """Characteristic 2 with a1 != 0."""
        return self.field.p == 2 and not self.a1.is_zero()

    @cached_property
    def _ai(self) -> Tuple[int, int, int, int, int]:
        a1, a2, a3, a4, a6 = (c.value for c in self.a)
        return a1, a2, a3, a4, a6

    # -- integer-level geometry ------------------------------------------------------

    def _rhs(self, x: int) -> int:
        F = self.field
        _, a2, _, a4, a6 = self._ai
        acc = F._add(x, a2)
        acc = F._add(F._mul(acc, x), a4)
        return F._add(F._mul(acc, x), a6)

    def _lhs_linear(self, x: int) -> int:
        """a1 x + a3, the linear coefficient of y."""
        F = self.field
        a1, _, a3, _, _ = self._ai
        return F._add(F._mul(a1, x), a3)

    def _on_curve(self, x: int, y: int) -> bool:
        F = self.field
        lhs = F._mul(y, F._add(y, self._lhs_linear(x)))
        return lhs == self._rhs(x)

    def _is_singular_point(self, x: int, y: int) -> bool:
        F = self.field
        a1, a2, _, a4, _ = self._ai
        dy = F._add(F._scale(y, 2), self._lhs_linear(x))
        dx = F._sub(F._mul(a1, y), F._add(F._add(F._scale(F._mul(x, x), 3), F._scale(F._mul(a2, x), 2)), a4))
        return dx == 0 and dy == 0

    def _ys(self, x: int) -> List[int]:
        """y-roots over this field for the given x, skipping the singular point."""
        F = self.field
        ys = F._quadratic_roots(self._lhs_linear(x), F._neg(self._rhs(x)))
        if not self.is_smooth:
            ys = [y for y in ys if not self._is_singular_point(x, y)]
        return ys

    def _neg(self, P: RawPoint) -> RawPoint:
        if P is None:
            return None
        F = self.field
        x, y = P
        return (x, F._neg(F._add(y, self._lhs_linear(x))))

    def _add(self, P: RawPoint, Q: RawPoint) -> RawPoint:
        if P is None:
            return Q
        if Q is None:
            return P
        F = self.field
        a1, a2, a3, a4, a6 = self._ai
        x1, y1 = P
        x2, y2 = Q
        if x1 == x2:
            if F._add(F._add(y1, y2), self._lhs_linear(x2)) == 0:
                return None
            denom = F._add(F._scale(y1, 2), self._lhs_linear(x1))
            num = F._sub(F._add(F._add(F._scale(F._mul(x1, x1), 3), F._scale(F._mul(a2, x1), 2)), a4), F._mul(a1, y1))
            lam = F._div(num, denom)
            nu_num = F._sub(F._add(F._neg(F._mul(F._mul(x1, x1), x1)), F._add(F._mul(a4, x1), F._scale(a6, 2))), F._mul(a3, y1))
            nu = F._div(nu_num, denom)
        else:
            dx_inv = F._inv(F._sub(x2, x1))
            lam = F._mul(F._sub(y2, y1), dx_inv)
            nu = F._mul(F._sub(F._mul(y1, x2), F._mul(y2, x1)), dx_inv)
        x3 = F._sub(F._sub(F._sub(F._add(F._mul(lam, lam), F._mul(a1, lam)), a2), x1), x2)
        y3 = F._sub(F._neg(F._mul(F._add(lam, a1), x3)), F._add(nu, a3))
        return (x3, y3)

    def _mul(self, k: int, P: RawPoint) -> RawPoint:
        if k < 0:
            return self._mul(-k, self._neg(P))
        result: RawPoint = None
        addend = P
        while k:
            if k & 1:
                result = self._add(result, addend)
            k >>= 1
            if k:
                addend = self._add(addend, addend)
        return result

    # -- public points -----------------------------------------------------------------

    @property
    def infinity(self) -> CurvePoint:
        return INFINITY

    def contains(self, P: CurvePoint) -> bool:
        """On the curve and, for singular models, off the singular point."""
        raw = P.raw
        if raw is None:
            return True
        if P.x is None or P.x.field != self.field:
            return False
        x, y = raw
        if not self._on_curve(x, y):
            return False
        return self.is_smooth or not self._is_singular_point(x, y)

    def point(self, x: Union[int, FieldElement], y: Union[int, FieldElement]) -> CurvePoint:
        P = CurvePoint(_coerce_coefficient(self.field, x), _coerce_coefficient(self.field, y))
        self._validate(P)
        return P

    def _validate(self, P: CurvePoint) -> RawPoint:
        if P.raw is not None and P.x is not None and P.x.field != self.field:
            raise InvalidPointError(f"point {P} is not defined over {self.field!r}")
        if not self.contains(P):
            raise InvalidPointError(f"point {P} is not a non-singular point of {self}")
        return P.raw

    def _wrap(self, raw: RawPoint) -> CurvePoint:
        return CurvePoint.from_raw(self.field, raw)

    def point_add(self, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
        return self._wrap(self._add(self._validate(P), self._validate(Q)))

    def point_neg(self, P: CurvePoint) -> CurvePoint:
        return self._wrap(self._neg(self._validate(P)))

    def point_sub(self, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
        return self._wrap(self._add(self._validate(P), self._neg(self._validate(Q))))

    def scalar_mul(self, k: int, P: CurvePoint) -> CurvePoint:
        return self._wrap(self._mul(int(k), self._validate(P)))

    def lift_x(self, x: FieldElement) -> List[CurvePoint]:
        """All points of this model over its field with the given x-coordinate."""
        self.field._check(x)
        return [self._wrap((x.value, y)) for y in self._ys(x.value)]

    def rational_points(self) -> List[CurvePoint]:
        """Infinity followed by the affine points, ordered by (x, y) value."""
        if self.field.order > NAIVE_COUNT_MAX_ORDER:
            raise ResourceCapError(f"point enumeration limited to fields of order <= {NAIVE_COUNT_MAX_ORDER}")
        points = [INFINITY]
        for x in range(self.field.order):
            points.extend(self._wrap((x, y)) for y in self._ys(x))
        return points

    def base_change(self, ext: FieldExtension) -> "WeierstrassModel":
        if ext.small != self.field:
            raise FieldError(f"extension of {ext.small!r} cannot carry a model over {self.field!r}")
        return WeierstrassModel(ext.big, tuple(ext.embed(c) for c in self.a))


def classify(model: WeierstrassModel) -> Classification:
    return model.classification


def nodal_model(field: Field) -> WeierstrassModel:
    return WeierstrassModel.from_coefficients(field, [1, 0, 0, 0, 0])


def cuspidal_model(field: Field) -> WeierstrassModel:
    return WeierstrassModel.from_coefficients(field, [0, 0, 0, 0, 0])


def nodal_param(t: FieldElement) -> CurvePoint:
    """F^* -> E_ns(F) on y^2 + xy = x^3, t -> (t/(t-1)^2, t/(t-1)^3)."""
    if t.is_zero():
        raise CurveError("nodal parametrization is undefined at t = 0")
    if t.is_one():
        return INFINITY
    s = (t - 1).inverse()
    x = t * s * s
    return CurvePoint(x, x * s)


def nodal_param_inv(P: CurvePoint, field: Optional[Field] = None) -> FieldElement:
    """(x, y) -> 1 + x/y; infinity maps to 1 of `field`."""
    if P.x is None or P.y is None:
        if field is None:
            raise CurveError("the image of infinity needs an explicit field")
        return field.one
    return P.x / P.y + 1


def cuspidal_param(t: FieldElement) -> CurvePoint:
    """(F, +) -> E_ns(F) on y^2 = x^3, t -> (1/t^2, 1/t^3), 0 -> infinity."""
    if t.is_zero():
        return INFINITY
    s = t.inverse()
    x = s * s
    return CurvePoint(x, x * s)


def cuspidal_param_inv(P: CurvePoint, field: Optional[Field] = None) -> FieldElement:
    """(x, y) -> x/y; infinity maps to 0 of `field`."""
    if P.x is None or P.y is None:
        if field is None:
            raise CurveError("the image of infinity needs an explicit field")
        return field.zero
    return P.x / P.y


def trace_morphism(model: WeierstrassModel, P: CurvePoint) -> int:
    """E(F) -> F_2, P -> Tr((x(P) + a2)/a1^2); kernel 2E(F)."""
    if model.field.p != 2:
        raise CurveError("the trace morphism is defined in characteristic 2")
    if model.a1.is_zero():
        raise CurveError("the trace morphism needs an ordinary model (a1 != 0)")
    raw = model._validate(P)
    if raw is None:
        return 0
    F = model.field
    a1, a2 = model._ai[0], model._ai[1]
    return F._trace(F._div(F._add(raw[0], a2), F._mul(a1, a1)))


def relation_traces_vanish(model: WeierstrassModel, signs: Sequence[int], points: Sequence[CurvePoint]) -> bool:
    """For a relation sum(signs_i P_i) = 0, report whether the trace-morphism values sum to 0."""
    if len(signs) != len(points):
        raise CurveError("signs and points must have equal length")
    total: RawPoint = None
    for s, P in zip(signs, points):
        raw = model._validate(P)
        total = model._add(total, raw if s > 0 else model._neg(raw))
    if total is not None:
        raise CurveError("the signed points do not form a relation")
    return sum(trace_morphism(model, P) for P in points) % 2 == 0


# -- orders ----------------------------------------------------------------------------


def _check_size(field: Field) -> None:
    if field.order > MAX_ORDER:
        raise ResourceCapError(f"point counting limited to fields of order <= {MAX_ORDER}")


def _count_naive(model: WeierstrassModel) -> int:
    F = model.field
    q = F.order
    if not model.is_smooth:
        return sum(len(model._ys(x)) for x in range(q)) + 1
    count = 1
    half = (q - 1) // 2
    for x in range(q):
        b = model._lhs_linear(x)
        c = model._rhs(x)
        if F.p == 2:
            if b == 0:
                count += 1
            elif F._trace(F._div(c, F._mul(b, b))) == 0:
                count += 2
        else:
            disc = F._add(F._mul(b, b), F._scale(c, 4))
            if disc == 0:
                count += 1
            elif F._pow(disc, half) == 1:
                count += 2
    return count


def _hasse_interval(q: int) -> Tuple[int, int]:
    width = math.isqrt(4 * q)
    return max(1, q + 1 - width), q + 1 + width


def _multiple_of_order(model: WeierstrassModel, P: RawPoint) -> int:
    """Some N in the Hasse interval with N P = O, by baby-step giant-step."""
    lo, hi = _hasse_interval(model.field.order)
    m = math.isqrt(hi - lo) + 1
    baby: Dict[RawPoint, int] = {}
    R: RawPoint = None
    for j in range(m):
        baby.setdefault(R, j)
        R = model._add(R, P)
    giant = R
    G = model._mul(lo, P)
    for i in range(m + 1):
        j = baby.get(model._neg(G))
        if j is not None and lo + i * m + j <= hi:
            return lo + i * m + j
        G = model._add(G, giant)
    raise CurveError("no multiple of the point order in the Hasse interval")  # unreachable for smooth models


def _reduce_multiple(model: WeierstrassModel, P: RawPoint, N: int) -> int:
    for ell in sympy.factorint(N):
        while N % ell == 0 and model._mul(N // ell, P) is None:
            N //= ell
    return N


def group_order(model: WeierstrassModel) -> int:
    """#E(F_q): enumeration for small q, baby-step giant-step with point-order lcm otherwise."""
    F = model.field
    _check_size(F)
    if F.order <= NAIVE_COUNT_MAX_ORDER:
        return _count_naive(model)
    if model.classification is Classification.CUSPIDAL:
        return F.order
    if not model.is_smooth:
        raise ResourceCapError("group order of nodal models is only counted for small fields")
    lo, hi = _hasse_interval(F.order)
    rng = np.random.default_rng(F.order)
    lcm = 1
    for _ in range(64):
        P = random_point(model, rng).raw
        if P is None:
            continue
        lcm = math.lcm(lcm, _reduce_multiple(model, P, _multiple_of_order(model, P)))
        candidates = [N for N in range((lo + lcm - 1) // lcm * lcm, hi + 1, lcm)]
        if len(candidates) == 1:
            return candidates[0]
    raise ResourceCapError(f"group order of {model} stayed ambiguous in the Hasse interval")


def point_order(model: WeierstrassModel, P: CurvePoint) -> int:
    raw = model._validate(P)
    if raw is None:
        return 1
    F = model.field
    _check_size(F)
    if F.order <= NAIVE_COUNT_MAX_ORDER or not model.is_smooth:
        N = group_order(model)
    else:
        N = _multiple_of_order(model, raw)
    return _reduce_multiple(model, raw, N)


def random_point(model: WeierstrassModel, rng: np.random.Generator) -> CurvePoint:
    """Uniform x until one lifts, then a uniform choice among its y-roots."""
    F = model.field
    for _ in range(256):
        x = int(rng.integers(0, F.order))
        ys = model._ys(x)
        if ys:
            return model._wrap((x, ys[int(rng.integers(0, len(ys)))]))
    points = model.rational_points()
    return points[int(rng.integers(0, len(points)))]


def random_smooth_curve(field: Field, rng: np.random.Generator, ordinary: bool = False,
                        max_tries: int = 1000) -> WeierstrassModel:
    for _ in range(max_tries):
        a = [field.random_element(rng) for _ in range(5)]
        if ordinary and a[0].is_zero():
            continue
        model = WeierstrassModel(field, tuple(a))
        if model.is_smooth:
            return model
    raise ResourceCapError(f"no smooth model drawn over {field!r} in {max_tries} tries")


@dataclass(frozen=True)
class CurveSearchResult:
    field: Field
    model: WeierstrassModel
    point: CurvePoint
    order: int


def _field_sizes(N: int, characteristic: Optional[int]) -> List[Tuple[int, int]]:
    """Candidate (p, n) pairs in increasing order of q, starting at the least q with q+1+2*sqrt(q) >= N."""
    def large_enough(q: int) -> bool:
        return q + 1 + math.isqrt(4 * q) >= N

    sizes: List[Tuple[int, int]] = []
    if characteristic is None:
        start = max(0, math.isqrt(N) - 2) ** 2
        p = 2 if start <= 2 else int(sympy.nextprime(start))
        while p <= MAX_ORDER:
            if large_enough(p):
                sizes.append((p, 1))
            p = int(sympy.nextprime(p))
            if len(sizes) >= 64:
                break
    else:
        n = 1
        while characteristic ** n <= MAX_ORDER:
            if large_enough(characteristic ** n):
                sizes.append((characteristic, n))
            n += 1
    return sizes


def find_curve_with_large_order_point(N: int, rng: np.random.Generator, characteristic: Optional[int] = None,
                                      trials_per_field: Optional[int] = None,
                                      max_trials: Optional[int] = None) -> CurveSearchResult:
    """Random smooth curves over the smallest admissible fields (prime fields unless a
    characteristic is given) until a rational point of order >= N turns up."""
    trials_per_field = SEARCH_TRIALS_PER_FIELD if trials_per_field is None else trials_per_field
    max_trials = SEARCH_MAX_TRIALS if max_trials is None else max_trials
    if N > 1 << 20:
        raise ResourceCapError("curve search supports order bounds up to 2^20")
    trials = 0
    for p, n in _field_sizes(max(N, 1), characteristic):
        field = field_construct(p, n)
        for _ in range(trials_per_field):
            if trials >= max_trials:
                raise ResourceCapError(f"curve search for order >= {N} exhausted {max_trials} trials")
            trials += 1
            try:
                model = random_smooth_curve(field, rng, max_tries=100)
            except ResourceCapError:
                continue
            P = random_point(model, rng)
            order = point_order(model, P)
            if order >= N:
                logging.info(f"Found point of order {order} >= {N} on {model} after {trials} trial(s)")
                return CurveSearchResult(field, model, P, order)
    raise ResourceCapError(f"curve search for order >= {N} ran out of candidate fields")


# -- quadratic-extension points ------------------------------------------------------------


def rational_x_nonrational_points(model: WeierstrassModel) -> Tuple[WeierstrassModel, List[CurvePoint]]:
    """Points of E(F_{q^2}) outside E(F_q) whose x-coordinate lies in F_q."""
    if model.field.order > NAIVE_COUNT_MAX_ORDER:
        raise ResourceCapError(f"enumeration limited to fields of order <= {NAIVE_COUNT_MAX_ORDER}")
    ext = quadratic_embed(model.field)
    big = model.base_change(ext)
    points = []
    for a in model.field.elements():
        x = ext.embed(a)
        for P in big.lift_x(x):
            if P.y is not None and not ext.in_base(P.y):
                points.append(P)
    return big, points


@dataclass
class RationalSumReport:
    holds: bool
    arity: int
    candidate_points: int
    sums_checked: int
    rational_sums: int
    violations: List[Tuple[CurvePoint, ...]] = dataclass_field(default_factory=list)


def check_rational_sums(model: WeierstrassModel, r: int) -> RationalSumReport:
    """Sums of r points with x in F_q but y outside F_q that land in E(F_q) are 2-torsion."""
    big, points = rational_x_nonrational_points(model)
    ext_frob_order = model.field.order
    report = RationalSumReport(True, r, len(points), 0, 0)
    raws = [P.raw for P in points]
    for combo in product(range(len(raws)), repeat=r):
        total: RawPoint = None
        for i in combo:
            total = big._add(total, raws[i])
        report.sums_checked += 1
        if total is not None:
            F = big.field
            if F._pow(total[0], ext_frob_order) != total[0] or F._pow(total[1], ext_frob_order) != total[1]:
                continue
        report.rational_sums += 1
        if big._add(total, total) is not None:
            report.holds = False
            report.violations.append(tuple(points[i] for i in combo))
    if not report.holds:
        logging.error(f"{len(report.violations)} rational sum(s) on {model} are not 2-torsion")
    return report
