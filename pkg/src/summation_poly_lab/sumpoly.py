"""Summation polynomials S_{A,r}: symbolic construction, specialized evaluation and
the point-relation side of the vanishing criterion."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .curves import Classification, CurvePoint, RawPoint, WeierstrassModel
from .errors import CurveError, PolynomialError, ResourceCapError
from .fields import Field, FieldElement, FieldExtension, extend, quadratic_embed
from .multipoly import MultiPoly, evaluate_univariate, field_resultant, interpolate, resultant

MAX_ARITY = 7
LITERAL_MAX_ARITY = 8
RELATION_MAX_ARITY = 48

AUX_VARIABLE = "Z"


def variable_names(r: int) -> List[str]:
    return [f"X{i}" for i in range(r)]


def _s3_terms(model: WeierstrassModel) -> Dict[Tuple[int, int, int], int]:
    F = model.field
    b2, b4, b6, b8 = (c.value for c in (model.b2, model.b4, model.b6, model.b8))
    one = 1
    minus_two = F._neg(F._scale(1, 2))
    terms: Dict[Tuple[int, int, int], int] = {}

    def put(e: Tuple[int, int, int], c: int) -> None:
        terms[e] = F._add(terms.get(e, 0), c)

    for e in [(2, 2, 0), (2, 0, 2), (0, 2, 2)]:
        put(e, one)
    for e in [(2, 1, 1), (1, 2, 1), (1, 1, 2)]:
        put(e, minus_two)
    put((1, 1, 1), F._neg(b2))
    for e in [(1, 1, 0), (1, 0, 1), (0, 1, 1)]:
        put(e, F._neg(b4))
    for e in [(1, 0, 0), (0, 1, 0), (0, 0, 1)]:
        put(e, F._neg(b6))
    put((0, 0, 0), F._neg(b8))
    return terms


@lru_cache(maxsize=64)
def summation_poly(model: WeierstrassModel, r: int) -> MultiPoly:
    """S_{A,r} in variables X0..X{r-1}: S_2 = X0 - X1, S_3 explicit, then resultants in an auxiliary variable."""
    if r < 2:
        raise PolynomialError(f"summation polynomials need arity >= 2, got {r}")
    if r > MAX_ARITY:
        raise ResourceCapError(f"symbolic summation polynomials are capped at arity {MAX_ARITY}, got {r}")
    F = model.field
    names = variable_names(r)
    if r == 2:
        return MultiPoly(F, names, {(1, 0): 1, (0, 1): F._neg(1)})
    if r == 3:
        return MultiPoly(F, names, _s3_terms(model))
    previous = summation_poly(model, r - 1)
    work = names + [AUX_VARIABLE]
    left = previous.rename(work, {f"X{r - 2}": AUX_VARIABLE})
    right = summation_poly(model, 3).rename(work, {"X0": f"X{r - 2}", "X1": f"X{r - 1}", "X2": AUX_VARIABLE})
    res = resultant(left, right, AUX_VARIABLE, m=2 ** (r - 3), n=2)
    logging.debug(f"S_{r} for {model}: {len(res)} terms")
    return res.rename(names)


# -- specialized evaluation ------------------------------------------------------------------------------


def _s3_in_last(F: Field, model_b: Tuple[int, int, int, int], a: int, b: int) -> List[int]:
    """Coefficients (constant first) of S_3(a, b, Z) in Z."""
    b2, b4, b6, b8 = model_b
    ab = F._mul(a, b)
    a_plus_b = F._add(a, b)
    two = F._scale(1, 2)
    c2 = F._sub(F._mul(a_plus_b, a_plus_b), F._scale(ab, 4))
    c1 = F._neg(F._add(F._add(F._mul(F._mul(two, ab), a_plus_b), F._mul(b2, ab)), F._add(F._mul(b4, a_plus_b), b6)))
    c0 = F._sub(F._sub(F._sub(F._mul(ab, ab), F._mul(b4, ab)), F._mul(b6, a_plus_b)), b8)
    return [c0, c1, c2]


def _working_extension(field: Field, points_needed: int) -> Optional[FieldExtension]:
    if field.order >= points_needed:
        return None
    k = 2
    while field.order ** k < points_needed:
        k += 1
    return extend(field, k)


def _prefix_polynomial(F: Field, model_b: Tuple[int, int, int, int], xs: Sequence[int], k: int) -> List[int]:
    """Coefficients of S_k(xs[0], ..., xs[k-2], U) in U, formal degree 2^(k-2)."""
    if k == 2:
        return [xs[0], F._neg(1)]
    if k == 3:
        return _s3_in_last(F, model_b, xs[0], xs[1])
    below = _prefix_polynomial(F, model_b, xs, k - 1)
    degree = 2 ** (k - 2)
    if F.order < degree + 1:
        raise ResourceCapError(f"{F!r} has too few points to interpolate degree {degree}")
    us = list(range(degree + 1))
    values = [field_resultant(F, below, _s3_in_last(F, model_b, xs[k - 2], u)) for u in us]
    return interpolate(F, us, values)


def _prepare(model: WeierstrassModel, xs: Sequence[FieldElement], points_needed: int):
    F = model.field
    for x in xs:
        F._check(x)
    ext = _working_extension(F, points_needed)
    if ext is None:
        return F, None, tuple(c.value for c in (model.b2, model.b4, model.b6, model.b8)), [x.value for x in xs]
    big = ext.big
    model_b = tuple(ext.embed(c).value for c in (model.b2, model.b4, model.b6, model.b8))
    return big, ext, model_b, [ext.embed(x).value for x in xs]


def summation_value(model: WeierstrassModel, xs: Sequence[FieldElement]) -> FieldElement:
    """S_{A,r}(xs) with r = len(xs), by running the resultant recursion on specialized polynomials."""
    r = len(xs)
    if r < 2:
        raise PolynomialError(f"summation polynomials need arity >= 2, got {r}")
    if r > LITERAL_MAX_ARITY:
        raise ResourceCapError(f"specialized evaluation is capped at arity {LITERAL_MAX_ARITY}, got {r}")
    F = model.field
    if r == 2:
        return xs[0] - xs[1]
    if r == 3:
        coeffs = _s3_in_last(F, tuple(c.value for c in (model.b2, model.b4, model.b6, model.b8)),
                             xs[0].value, xs[1].value)
        return FieldElement(F, evaluate_univariate(F, coeffs, xs[2].value))
    W, ext, model_b, vals = _prepare(model, xs, 2 ** (r - 3) + 1)
    below = _prefix_polynomial(W, model_b, vals, r - 1)
    value = field_resultant(W, below, _s3_in_last(W, model_b, vals[r - 2], vals[r - 1]))
    result = FieldElement(W, value)
    return result if ext is None else ext.restrict(result)


def specialized_summation_poly(model: WeierstrassModel, xs: Sequence[FieldElement]) -> List[FieldElement]:
    """Coefficients in U of S_{A,r}(xs[0], ..., xs[r-2], U), r = len(xs) + 1, formal degree 2^(r-2)."""
    r = len(xs) + 1
    if r < 2 or r > LITERAL_MAX_ARITY:
        raise ResourceCapError(f"specialized polynomials need 2 <= r <= {LITERAL_MAX_ARITY}, got {r}")
    W, ext, model_b, vals = _prepare(model, xs, 2 ** (r - 2) + 1)
    coeffs = _prefix_polynomial(W, model_b, vals, r)
    out = [FieldElement(W, c) for c in coeffs]
    return out if ext is None else [ext.restrict(c) for c in out]


# -- instances and point relations ------------------------------------------------------------------------------


@dataclass(frozen=True)
class SummationInstance:
    model: WeierstrassModel
    inputs: Tuple[FieldElement, ...]

    def __post_init__(self) -> None:
        if len(self.inputs) < 2:
            raise PolynomialError("a summation instance needs at least two inputs")
        for x in self.inputs:
            self.model.field._check(x)

    @property
    def r(self) -> int:
        return len(self.inputs)

    def evaluate(self) -> FieldElement:
        return summation_value(self.model, self.inputs)


@dataclass(frozen=True)
class RelationWitness:
    """sum signs[i] * points[i] = 0 on `model` (possibly base-changed), x(points[i]) = inputs[i]."""

    model: WeierstrassModel
    signs: Tuple[int, ...]
    points: Tuple[CurvePoint, ...]

    def verify(self) -> bool:
        total: RawPoint = None
        for s, P in zip(self.signs, self.points):
            raw = self.model._validate(P)
            total = self.model._add(total, raw if s > 0 else self.model._neg(raw))
        return total is None


@dataclass
class VanishingReport:
    vanishes: bool
    value: FieldElement
    witness: Optional[RelationWitness]
    combinations_checked: int

    @property
    def consistent(self) -> bool:
        return self.vanishes == (self.witness is not None)


def _lift_all(model: WeierstrassModel, xs: Sequence[FieldElement]) -> Tuple[WeierstrassModel, List[RawPoint], Optional[FieldExtension]]:
    """One point per x over F, or over the quadratic extension when some x does not lift over F."""
    F = model.field
    lifts = [model._ys(x.value) for x in xs]
    if all(lifts):
        return model, [(x.value, ys[0]) for x, ys in zip(xs, lifts)], None
    ext = quadratic_embed(F)
    big = model.base_change(ext)
    raws: List[RawPoint] = []
    for x in xs:
        xv = ext._embed(x.value)
        ys = big._ys(xv)
        if not ys:
            raise CurveError(f"x = {x} has no non-singular point even over {big.field!r}")
        raws.append((xv, ys[0]))
    return big, raws, ext


def verify_vanishing_by_points(instance: SummationInstance) -> VanishingReport:
    """Exhaustive search over the y-choices for a point relation, checked against S(inputs)."""
    model, xs = instance.model, instance.inputs
    big, raws, _ = _lift_all(model, xs)
    value = instance.evaluate()
    checked = 0
    witness = None
    for signs in itertools.product((1, -1), repeat=len(raws) - 1):
        full = (1,) + signs
        checked += 1
        total: RawPoint = None
        for s, P in zip(full, raws):
            total = big._add(total, P if s > 0 else big._neg(P))
        if total is None:
            points = tuple(big._wrap(P) for P in raws)
            witness = RelationWitness(big, full, points)
            break
    report = VanishingReport(value.is_zero(), value, witness, checked)
    if not report.consistent:
        logging.error(f"S_{instance.r} vanishing ({report.vanishes}) disagrees with point search on {model}")
    return report


def _index_signs(index: int, free: int) -> List[int]:
    """Sign vector produced by the doubling order: each doubled row lands on a higher bit, first row lowest."""
    return [1 if (index >> t) & 1 == 0 else -1 for t in range(free)]


def find_relation(model: WeierstrassModel, xs: Sequence[FieldElement]) -> Optional[RelationWitness]:
    """A signed point relation with the given x-coordinates, or None when none exists.

    Smooth and nodal models search point sums; the cuspidal model searches additive
    coordinates t with x = 1/t^2.
    """
    r = len(xs)
    if r < 2:
        raise PolynomialError("relations need at least two points")
    if r > RELATION_MAX_ARITY:
        raise ResourceCapError(f"relation search is capped at {RELATION_MAX_ARITY} points, got {r}")
    for x in xs:
        model.field._check(x)
    if model.classification is Classification.CUSPIDAL and all(c.is_zero() for c in model.a):
        return _find_cuspidal_relation(model, xs)
    big, raws, _ = _lift_all(model, xs)
    half = r // 2
    left, right = raws[:half], raws[half:]
    table: Dict[RawPoint, Tuple[int, ...]] = {}
    for signs in itertools.product((1, -1), repeat=len(left) - 1):
        full = (1,) + signs
        total: RawPoint = None
        for s, P in zip(full, left):
            total = big._add(total, P if s > 0 else big._neg(P))
        table.setdefault(total, full)
    for signs in itertools.product((1, -1), repeat=len(right)):
        total = None
        for s, P in zip(signs, right):
            total = big._add(total, P if s > 0 else big._neg(P))
        match = table.get(big._neg(total))
        if match is not None:
            full = match + signs
            return RelationWitness(big, full, tuple(big._wrap(P) for P in raws))
    return None


def _find_cuspidal_relation(model: WeierstrassModel, xs: Sequence[FieldElement]) -> Optional[RelationWitness]:
    F = model.field
    if any(x.is_zero() for x in xs):
        raise CurveError("x = 0 is the cusp of y^2 = x^3")
    W, ext, work_model = F, None, model
    roots = [F._sqrt(x.value) for x in xs]
    if any(root is None for root in roots):
        ext = quadratic_embed(F)
        W, work_model = ext.big, model.base_change(ext)
        roots = [W._sqrt(ext._embed(x.value)) for x in xs]
    ts = [W._inv(root) for root in roots]  # type: ignore[arg-type]
    vectors = np.array([W._to_digits(t) for t in ts], dtype=np.int64)
    target = np.zeros(W.n, dtype=np.int64)
    signs = _cuspidal_signs(vectors, target, W.p)
    if signs is None:
        return None
    points = []
    for t in ts:
        s = W._inv(t)
        x = W._mul(s, s)
        points.append(CurvePoint(FieldElement(W, x), FieldElement(W, W._mul(x, s))))
    return RelationWitness(work_model, tuple(int(s) for s in signs), tuple(points))


def _cuspidal_signs(vectors: np.ndarray, target: np.ndarray, p: int) -> Optional[List[int]]:
    k, m = vectors.shape
    half = max(1, (k + 1) // 2)
    digit = np.int16 if p < 1 << 14 else np.int64
    vectors = vectors.astype(digit)
    left, right = vectors[:half], vectors[half:]

    def expand(rows: np.ndarray, start: np.ndarray, fixed_first: bool) -> np.ndarray:
        acc = (start.reshape(1, m) % p).astype(digit)
        for i, v in enumerate(rows):
            if i == 0 and fixed_first:
                acc = (acc + v) % p
            else:
                acc = np.concatenate([(acc + v) % p, (acc - v) % p])
        return acc

    def encode(arr: np.ndarray) -> np.ndarray:
        codes = np.zeros(arr.shape[0], dtype=np.int64)
        for j in range(m - 1, -1, -1):
            codes = codes * p + arr[:, j]
        return codes

    left_codes = encode(expand(left, np.zeros(m, dtype=np.int64), True))
    # target - sum(right): a right entry equal to a left entry closes the relation
    right_codes = encode(expand(-right, target, False))
    hits = np.nonzero(np.isin(right_codes, left_codes))[0]
    if hits.size == 0:
        return None
    j = int(hits[0])
    i = int(np.nonzero(left_codes == right_codes[j])[0][0])
    left_signs = [1] + _index_signs(i, left.shape[0] - 1)
    right_signs = _index_signs(j, right.shape[0])
    return left_signs + right_signs


# -- singular models ------------------------------------------------------------------------------------------------


@dataclass
class DegenerateReport:
    kind: Classification
    inputs: Tuple[FieldElement, ...]
    transformed: Tuple[FieldElement, ...]
    lhs: FieldElement
    rhs: FieldElement

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs

    @property
    def vanishes(self) -> bool:
        return self.lhs.is_zero()


def degenerate_factorization_check(model: WeierstrassModel, xs: Sequence[FieldElement]) -> DegenerateReport:
    """Compare S_3 at transformed inputs with its closed product form on the nodal or cuspidal model."""
    if len(xs) != 3:
        raise PolynomialError("the product form is stated for three inputs")
    a = [c.value for c in model.a]
    x0, x1, x2 = xs
    if a == [1, 0, 0, 0, 0]:
        if any(x.is_zero() or x.is_one() for x in xs):
            raise CurveError("nodal inputs must avoid 0 and 1")
        transformed = tuple(x / ((x - 1) * (x - 1)) for x in xs)
        unit = ((x0 - 1) * (x1 - 1) * (x2 - 1)) ** -4
        rhs = unit * (x1 * x2 - x0) * (x0 * x2 - x1) * (x2 - x0 * x1) * (x0 * x1 * x2 - 1)
        kind = Classification.NODAL
    elif a == [0, 0, 0, 0, 0]:
        if any(x.is_zero() for x in xs):
            raise CurveError("cuspidal inputs must be nonzero")
        transformed = tuple((x * x).inverse() for x in xs)
        unit = (x0 * x1 * x2) ** -4
        rhs = unit * (x1 - x0 - x2) * (x1 + x2 - x0) * (x0 + x1 - x2) * (x0 + x1 + x2)
        kind = Classification.CUSPIDAL
    else:
        raise CurveError("the product form exists only for the models (1,0,0,0,0) and (0,0,0,0,0)")
    lhs = summation_value(model, transformed)
    report = DegenerateReport(kind, tuple(xs), transformed, lhs, rhs)
    if not report.holds:
        logging.error(f"{kind.value} product form mismatch at {[str(x) for x in xs]}: {lhs} != {rhs}")
    return report
