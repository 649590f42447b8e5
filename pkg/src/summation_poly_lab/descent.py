"""Weil descent from GF(p^n)[X_1..X_r] to GF(p)[X_ij] and the trace identities behind the degree fall."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .curves import CurvePoint, WeierstrassModel, random_point
from .errors import CurveError, DescentError, FieldError, ResourceCapError
from .fields import Field, FieldElement, field_construct
from .multipoly import MultiPoly, Terms
from .sumpoly import summation_poly

EXHAUSTIVE_MAX_N = 6
SYMBOLIC_MAX_N = 10
DRAW_RETRIES = 32


def _basis_values(F: Field, basis: Optional[Sequence[FieldElement]]) -> Tuple[int, ...]:
    if basis is None:
        return F.basis
    values = []
    for b in basis:
        F._check(b)
        values.append(b.value)
    values_t = tuple(values)
    try:
        F._basis_inverse(values_t)
    except FieldError as e:
        raise DescentError(str(e)) from e
    return values_t


def descended_variables(variables: Sequence[str], n: int) -> List[str]:
    """X -> X_0..X_{n-1}, variable-major."""
    return [f"{v}_{j}" for v in variables for j in range(n)]


def _span_values(F: Field, span: Sequence[FieldElement]) -> Tuple[int, ...]:
    """Values of `span`, rejected unless linearly independent over GF(p)."""
    p = F.p
    rows = []
    for b in span:
        F._check(b)
        rows.append(F._to_digits(b.value))
    rank = 0
    for col in range(F.n):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                factor = rows[i][col] * inv % p
                rows[i] = [(a - factor * b) % p for a, b in zip(rows[i], rows[rank])]
        rank += 1
    if rank < len(span):
        raise DescentError(f"{len(span)} span elements have rank {rank} over GF({p})")
    return tuple(b.value for b in span)


def _linear_powers(F: Field, basis: Tuple[int, ...], r: int, work: Sequence[str]) -> List[List[MultiPoly]]:
    """powers[i][k] = X_i^(p^k) = sum_j alpha_j^(p^k) X_ij, linear modulo X_ij^p - X_ij."""
    n, p = F.n, F.p
    width = len(basis)
    powers = []
    for i in range(r):
        row = []
        for k in range(n):
            terms: Terms = {}
            for j, alpha in enumerate(basis):
                e = [0] * (r * width)
                e[i * width + j] = 1
                c = F._frobenius(alpha, k)
                if c:
                    terms[tuple(e)] = c
            row.append(MultiPoly(F, work, terms, p))
        powers.append(row)
    return powers


def _substitute_basis(f: MultiPoly, basis: Tuple[int, ...]) -> MultiPoly:
    """f(sum_j X_1j alpha_j, ...) over GF(p^n), reduced modulo X_ij^p - X_ij.

    `basis` may be shorter than n, restricting every variable to its span.
    """
    F = f.field
    p = F.p
    r = len(f.variables)
    work = descended_variables(f.variables, len(basis))
    powers = _linear_powers(F, basis, r, work)
    cache: Dict[Tuple[int, int], MultiPoly] = {}
    one = MultiPoly.constant(F, work, 1, p)

    def expand(i: int, e: int) -> MultiPoly:
        key = (i, e)
        if key not in cache:
            acc, k, rest = one, 0, e
            while rest:
                rest, d = divmod(rest, p)
                for _ in range(d):
                    acc = acc * powers[i][k]
                k += 1
            cache[key] = acc
        return cache[key]

    total = MultiPoly.zero(F, work, p)
    for e, c in f.terms.items():
        term = MultiPoly.constant(F, work, FieldElement(F, c), p)
        for i, k in enumerate(e):
            if k:
                term = term * expand(i, k)
                if term.is_zero():
                    break
        total = total + term
    return total


def descend(f: MultiPoly, basis: Optional[Sequence[FieldElement]] = None,
            span: Optional[Sequence[FieldElement]] = None) -> List[MultiPoly]:
    """[f]_1..[f]_n over GF(p) with f(sum_j X_ij alpha_j) = sum_i [f]_i alpha_i.

    With `span`, every variable is first restricted to X_i = sum_j X_ij beta_j over the
    given independent elements; coefficients are still split along `basis`.
    """
    F = f.field
    values = _basis_values(F, basis)
    if f.reduce_q is None:
        f = f.with_reduction(F.order)
    substituted = _substitute_basis(f, values if span is None else _span_values(F, span))
    prime = F.prime_field()
    parts: List[Terms] = [{} for _ in range(F.n)]
    for e, c in substituted.terms.items():
        for i, coord in enumerate(F._coords_in_basis(c, values)):
            if coord:
                parts[i][e] = coord
    return [MultiPoly(prime, substituted.variables, t, F.p) for t in parts]


def recombine(components: Sequence[MultiPoly], F: Field, basis: Optional[Sequence[FieldElement]] = None) -> MultiPoly:
    """sum_i [f]_i alpha_i back over GF(p^n); prime-field values embed unchanged."""
    values = _basis_values(F, basis)
    work = components[0].variables
    total = MultiPoly.zero(F, work, F.p)
    for comp, alpha in zip(components, values):
        total = total + MultiPoly(F, work, comp.terms, F.p).scale(FieldElement(F, alpha))
    return total


@dataclass
class DescendedSystem:
    source: List[MultiPoly]
    basis: Tuple[FieldElement, ...]
    components: List[List[MultiPoly]]

    @classmethod
    def build(cls, source: Sequence[MultiPoly], basis: Optional[Sequence[FieldElement]] = None) -> "DescendedSystem":
        if not source:
            raise DescentError("nothing to descend")
        F = source[0].field
        values = _basis_values(F, basis)
        chosen = [FieldElement(F, v) for v in values]
        components = [descend(f, chosen) for f in source]
        logging.debug(f"Descended {len(source)} polynomial(s) over {F!r} into {F.n * len(source)} components")
        return cls(list(source), tuple(chosen), components)

    @property
    def field(self) -> Field:
        return self.source[0].field

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def n(self) -> int:
        return self.field.n

    @property
    def r(self) -> int:
        return len(self.source[0].variables)

    @property
    def variables(self) -> Tuple[str, ...]:
        return self.components[0][0].variables

    def generators(self) -> List[MultiPoly]:
        return [c for comps in self.components for c in comps]

    def recombination_holds(self) -> bool:
        F = self.field
        for f, comps in zip(self.source, self.components):
            expected = _substitute_basis(f.with_reduction(F.order), tuple(b.value for b in self.basis))
            if recombine(comps, F, self.basis) != expected:
                return False
        return True

    def to_json(self) -> Dict[str, object]:
        return {
            "field": self.field.descriptor(),
            "basis": [b.to_json() for b in self.basis],
            "variables": list(self.variables),
            "source": [f.to_json() for f in self.source],
            "components": [[c.to_json() for c in comps] for comps in self.components],
        }


def ring_trace(f: MultiPoly) -> MultiPoly:
    """Tr(f) = sum_{i<n} f^(p^i), reduced modulo X^(p^n) - X."""
    F = f.field
    q = F.order
    out: Terms = {}
    add = F._add
    for i in range(F.n):
        scale = F.p ** i
        for e, c in f.terms.items():
            key = tuple(k * scale for k in e)
            value = F._frobenius(c, i)
            out[key] = add(out[key], value) if key in out else value
    return MultiPoly(F, f.variables, out, q)


def trace_cofactor(f: MultiPoly) -> MultiPoly:
    """g = sum_{i<n} f^(p^i - 1) in R_1, so that Tr(f) = f g."""
    F = f.field
    reduced = f.with_reduction(F.order)
    g = MultiPoly.zero(F, f.variables, F.order)
    for i in range(F.n):
        g = g + reduced ** (F.p ** i - 1)
    return g


def ring_trace_in_ideal(f: MultiPoly) -> bool:
    """Tr(f) lies in the ideal (f) of R_1, witnessed by the cofactor."""
    reduced = f.with_reduction(f.field.order)
    return reduced * trace_cofactor(f) == ring_trace(f)


# -- trace of c*f versus the descended components --------------------------------------------------------


@dataclass
class TraceDescentReport:
    one_coords: List[int]
    lhs: List[MultiPoly]
    rhs: List[MultiPoly]
    ideal_holds: bool
    trace_in_ideal: bool = True

    @property
    def components_hold(self) -> bool:
        return all(a == b for a, b in zip(self.lhs, self.rhs))

    @property
    def holds(self) -> bool:
        return self.components_hold and self.ideal_holds and self.trace_in_ideal


def check_trace_descent(f: MultiPoly, c: FieldElement, basis: Optional[Sequence[FieldElement]] = None) -> TraceDescentReport:
    """[Tr(c f)]_i against c_i * sum_j Tr(c alpha_j) [f]_j, with 1 = sum_i c_i alpha_i."""
    F = f.field
    F._check(c)
    values = _basis_values(F, basis)
    chosen = [FieldElement(F, v) for v in values]
    ones = F._coords_in_basis(1, values)
    lhs = descend(ring_trace(f.scale(c)), chosen)
    parts = descend(f, chosen)
    prime = F.prime_field()
    weighted = MultiPoly.zero(prime, parts[0].variables, F.p)
    for alpha, part in zip(values, parts):
        weight = F._trace(F._mul(c.value, alpha))
        if weight:
            weighted = weighted + part.scale(weight)
    rhs = [weighted.scale(ci) for ci in ones]
    # every component is a multiple of the j-th one whenever c_j != 0
    ideal_holds = True
    for j, cj in enumerate(ones):
        if cj:
            inv = prime._inv(cj)
            ideal_holds = ideal_holds and all(lhs[i] == lhs[j].scale(prime._mul(ci, inv)) for i, ci in enumerate(ones))
    report = TraceDescentReport(ones, lhs, rhs, ideal_holds, ring_trace_in_ideal(f.scale(c)))
    if not report.holds:
        logging.error(f"trace/descent identity failed over {F!r} for c = {c}")
    return report


# -- trace identity for T = S_3(X0, X1, x(P)) in characteristic 2 -------------------------------------------


def _trace_setup(model: WeierstrassModel, P: CurvePoint) -> Tuple[int, int]:
    F = model.field
    if F.p != 2:
        raise CurveError("the trace identity is stated in characteristic 2")
    if model.a1.is_zero():
        raise CurveError("the trace identity needs an ordinary model (a1 != 0)")
    raw = model._validate(P)
    if raw is None:
        raise CurveError("the point at infinity has no x-coordinate")
    x = raw[0]
    a1, _, a3, _, _ = model._ai
    b = F._mul(a1, F._add(F._mul(a1, x), a3))
    if b == 0:
        raise CurveError(f"{P} is 2-torsion (a1 x + a3 = 0)")
    return x, b


def specialized_s3(model: WeierstrassModel, x: FieldElement) -> MultiPoly:
    """T = S_3(X0, X1, x) in the variables X0, X1."""
    S3 = summation_poly(model, 3)
    return S3.partial_evaluate({"X2": x}).rename(["X0", "X1"])


def _linear_trace_side(model: WeierstrassModel, x: int) -> MultiPoly:
    """(X0 + X1 + x + a2) / a1^2."""
    F = model.field
    a1, a2 = model._ai[0], model._ai[1]
    inv = F._inv(F._mul(a1, a1))
    terms = {(1, 0): inv, (0, 1): inv, (0, 0): F._mul(F._add(x, a2), inv)}
    return MultiPoly(F, ["X0", "X1"], terms)


@dataclass
class TraceIdentityReport:
    mode: str
    n: int
    points_checked: int
    identity_holds: bool
    constant_trace_holds: bool
    field_identity_holds: bool
    relation_pair_vanishes: bool

    @property
    def holds(self) -> bool:
        return (self.identity_holds and self.constant_trace_holds
                and self.field_identity_holds and self.relation_pair_vanishes)

    def to_json(self) -> Dict[str, object]:
        return {**vars(self), "holds": self.holds}


def check_trace_identity(model: WeierstrassModel, P: CurvePoint, mode: str = "auto") -> TraceIdentityReport:
    """Tr(T / b^2) = Tr((X0 + X1 + x + a2) / a1^2) in F[X0, X1]/(X^q - X), b = a1 (a1 x + a3).

    mode "exhaustive" compares both traces at all q^2 points, "symbolic" compares the
    reduced trace polynomials; "auto" picks exhaustive for small n.
    """
    F = model.field
    if mode == "auto":
        mode = "exhaustive" if F.n <= EXHAUSTIVE_MAX_N else "symbolic"
    if mode not in ("exhaustive", "symbolic"):
        raise DescentError(f"unknown mode {mode!r}")
    if mode == "exhaustive" and F.n > EXHAUSTIVE_MAX_N:
        raise ResourceCapError(f"exhaustive trace check is capped at n = {EXHAUSTIVE_MAX_N}")
    if mode == "symbolic" and F.n > SYMBOLIC_MAX_N:
        raise ResourceCapError(f"symbolic trace check is capped at n = {SYMBOLIC_MAX_N}")
    x, b = _trace_setup(model, P)

    T = specialized_s3(model, FieldElement(F, x))
    inv_b2 = F._inv(F._mul(b, b))
    lhs = T.scale(FieldElement(F, inv_b2))
    rhs = _linear_trace_side(model, x)
    checked = 0
    if mode == "exhaustive":
        identity = True
        for u in range(F.order):
            for v in range(F.order):
                checked += 1
                if F._trace(lhs._evaluate_raw([u, v])) != F._trace(rhs._evaluate_raw([u, v])):
                    identity = False
                    break
            if not identity:
                break
    else:
        identity = ring_trace(lhs) == ring_trace(rhs)

    a1, a2, a3, a4, a6 = model._ai
    b6, b8 = model.b6.value, model.b8.value
    constant = F._mul(F._add(F._mul(b6, x), b8), inv_b2)
    linear_part = F._div(F._add(x, a2), F._mul(a1, a1))
    constant_holds = F._trace(constant) == F._trace(linear_part)
    # (b6 x + b8)/b^2 = (x + a2)/a1^2 + (x^3 + a2 x^2 + a4 x + a6)/(a1 x + a3)^2 + a4/b + (a4/b)^2
    cubic = F._add(F._add(F._mul(F._mul(x, x), F._add(x, a2)), F._mul(a4, x)), a6)
    denom = F._add(F._mul(a1, x), a3)
    a4_b = F._div(a4, b)
    rebuilt = F._add(F._add(linear_part, F._div(cubic, F._mul(denom, denom))), F._add(a4_b, F._mul(a4_b, a4_b)))
    field_identity = rebuilt == constant

    double = model._mul(2, (x, model._validate(P)[1]))  # type: ignore[index]
    relation_pair = double is not None and T._evaluate_raw([double[0], x]) == 0

    report = TraceIdentityReport(mode, F.n, checked, identity, constant_holds, field_identity, relation_pair)
    if report.holds:
        logging.info(f"Trace identity holds over {F!r} ({mode})")
    else:
        logging.error(f"Trace identity failed over {F!r} for {P}: {report}")
    return report


# -- the linear combination of descended components -----------------------------------------------------------


@dataclass
class CombinationReport:
    weights: List[int]
    lhs: MultiPoly
    rhs: MultiPoly
    component_degrees: List[int] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs

    @property
    def degree(self) -> int:
        return self.rhs.total_degree()

    def to_json(self) -> Dict[str, object]:
        return {
            "weights": list(self.weights),
            "lhs": self.lhs.to_text(),
            "rhs": self.rhs.to_text(),
            "degree": self.degree,
            "component_degrees": list(self.component_degrees),
            "holds": self.holds,
        }


def linear_trace_combination(model: WeierstrassModel, P: CurvePoint,
                             basis: Optional[Sequence[FieldElement]] = None) -> CombinationReport:
    """sum_j Tr(alpha_j / b^2) [T]_j against Tr((x + a2)/a1^2) + sum_j Tr(alpha_j / a1^2)(X0_j + X1_j)."""
    F = model.field
    x, b = _trace_setup(model, P)
    values = _basis_values(F, basis)
    chosen = [FieldElement(F, v) for v in values]
    T = specialized_s3(model, FieldElement(F, x))
    parts = descend(T, chosen)
    inv_b2 = F._inv(F._mul(b, b))
    weights = [F._trace(F._mul(alpha, inv_b2)) for alpha in values]
    prime = field_construct(2)
    work = parts[0].variables
    lhs = MultiPoly.zero(prime, work, 2)
    for w, part in zip(weights, parts):
        if w:
            lhs = lhs + part
    a1, a2 = model._ai[0], model._ai[1]
    inv_a1_2 = F._inv(F._mul(a1, a1))
    terms: Terms = {}
    d = F._trace(F._mul(F._add(x, a2), inv_a1_2))
    if d:
        terms[(0,) * len(work)] = 1
    n = F.n
    for j, alpha in enumerate(values):
        if F._trace(F._mul(alpha, inv_a1_2)):
            for i in range(2):
                e = [0] * len(work)
                e[i * n + j] = 1
                terms[tuple(e)] = 1
    rhs = MultiPoly(prime, work, terms, 2)
    report = CombinationReport(weights, lhs, rhs, [part.total_degree() for part in parts])
    if not report.holds:
        logging.error(f"Linear trace combination failed over {F!r} for {P}")
    return report


def draw_ordinary_instance(n: int, seed: int, retries: Optional[int] = None) -> Tuple[WeierstrassModel, CurvePoint]:
    """Seeded smooth ordinary curve over GF(2^n) with a point P, a1 x(P) + a3 != 0.

    Draws with a1 = 0, singular draws and 2-torsion points are redrawn and logged.
    """
    if n < 2:
        raise DescentError(f"trace checks need n >= 2, got {n}")
    F = field_construct(2, n)
    retries = DRAW_RETRIES if retries is None else retries
    for attempt in range(retries):
        rng = np.random.default_rng(np.random.SeedSequence([seed, n, attempt]))
        a = tuple(F.random_element(rng) for _ in range(5))
        if a[0].is_zero():
            logging.info(f"Redrawing curve n={n} seed={seed}: a1 = 0, model is not ordinary")
            continue
        model = WeierstrassModel(F, a)
        if not model.is_smooth:
            logging.debug(f"Redrawing curve n={n} seed={seed}: singular model")
            continue
        P = random_point(model, rng)
        if P.x is None or (model.a1 * P.x + model.a3).is_zero():
            logging.info(f"Redrawing point n={n} seed={seed}: {P} is 2-torsion")
            continue
        return model, P
    raise ResourceCapError(f"no ordinary curve with a usable point for n={n} seed={seed} in {retries} draws")
