"""Macaulay-matrix elimination over GF(2) with degree instrumentation.

Boolean polynomials are frozensets of monomials, each monomial a bitmask over the
system variables (bit i is variable i). Matrix columns run over all monomials of
degree <= d in grevlex-descending order, so the leftmost pivot of a row is its
leading monomial and the rows of degree < d form a tail block of the echelon form.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .curves import WeierstrassModel, random_point, random_smooth_curve
from .descent import DescendedSystem, descend, specialized_s3
from .errors import CurveError, DescentError, PolynomialError, ResourceCapError
from .fields import Field, FieldElement, extend, field_construct
from .gf2_matrix import matrix_bytes, nonzero_rows, pack_rows, reduce_against, row_reduce, span_rank, unpack_row
from .multipoly import MultiPoly, Terms, evaluate_univariate
from .sumpoly import _s3_in_last, summation_poly, summation_value

DMAX = 5
MEMORY_BUDGET_BYTES = 4 * 1024 ** 3
ENUMERATION_MAX_DIM = 16
DRAW_RETRIES = 32
MAX_VARIABLES = 62
SUBSPACE_MIN_N = 4
SUBSPACE_MAX_N = 24

BoolPoly = FrozenSet[int]
Assignment = Tuple[int, ...]


class ProfileStatus(str, Enum):
    RESOLVED = "resolved"
    UNRESOLVED = "unresolved"
    CAPPED = "capped"


# -- Boolean polynomials --------------------------------------------------------------------------------


def _degree(poly: BoolPoly) -> int:
    return max((m.bit_count() for m in poly), default=-1)


def _multiply(m: int, poly: BoolPoly) -> BoolPoly:
    out: set = set()
    for t in poly:
        out ^= {m | t}
    return frozenset(out)


def to_masks(poly: MultiPoly) -> BoolPoly:
    if poly.field.order != 2:
        raise PolynomialError(f"Boolean systems live over GF(2), got {poly.field!r}")
    out: set = set()
    for e, c in poly.terms.items():
        if any(k > 1 for k in e):
            raise PolynomialError("generator is not multilinear")
        if c:
            out ^= {sum(1 << i for i, k in enumerate(e) if k)}
    return frozenset(out)


def from_masks(poly: Iterable[int], variables: Sequence[str]) -> MultiPoly:
    width = len(variables)
    terms: Terms = {tuple((m >> i) & 1 for i in range(width)): 1 for m in poly}
    return MultiPoly(field_construct(2), variables, terms, 2)


def _evaluate_points(generators: Sequence[BoolPoly], points: np.ndarray) -> np.ndarray:
    """Mask of points (packed assignments) where every generator vanishes."""
    ok = np.ones(points.shape[0], dtype=bool)
    for g in generators:
        value = np.zeros(points.shape[0], dtype=bool)
        for t in g:
            value ^= (points & t) == t
        ok &= ~value
    return ok


def _unpack_points(points: Iterable[int], width: int) -> List[Assignment]:
    return sorted(tuple((int(v) >> i) & 1 for i in range(width)) for v in points)


@dataclass
class BooleanSystem:
    variables: Tuple[str, ...]
    generators: List[MultiPoly]
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.variables = tuple(self.variables)
        if len(self.variables) > MAX_VARIABLES:
            raise ResourceCapError(f"Boolean systems are capped at {MAX_VARIABLES} variables")
        for g in self.generators:
            if g.variables != self.variables:
                raise PolynomialError(f"generator variables {g.variables} differ from the system's")
            to_masks(g)

    @classmethod
    def from_polynomials(cls, polys: Sequence[MultiPoly], provenance: Optional[Dict[str, Any]] = None) -> "BooleanSystem":
        """Drops zero generators; every polynomial must share one variable list."""
        if not polys:
            raise PolynomialError("a Boolean system needs at least one polynomial")
        kept = [g for g in polys if not g.is_zero()]
        return cls(polys[0].variables, kept, dict(provenance or {}))

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    def masks(self) -> List[BoolPoly]:
        return [to_masks(g) for g in self.generators]

    def max_degree(self) -> int:
        return max((_degree(g) for g in self.masks()), default=-1)

    def is_solution(self, assignment: Sequence[int]) -> bool:
        return all(g.evaluate(list(assignment)).is_zero() for g in self.generators)

    def brute_force_solutions(self) -> List[Assignment]:
        if self.num_variables > ENUMERATION_MAX_DIM:
            raise ResourceCapError(f"brute force is capped at {ENUMERATION_MAX_DIM} variables")
        points = np.arange(1 << self.num_variables, dtype=np.int64)
        ok = _evaluate_points(self.masks(), points)
        return _unpack_points(points[ok], self.num_variables)

    def to_json(self) -> Dict[str, Any]:
        return {
            "variables": list(self.variables),
            "generators": [g.to_text() for g in self.generators],
            "provenance": self.provenance,
        }


# -- one degree of the Macaulay matrix ------------------------------------------------------------------


def _monomials_up_to(width: int, d: int) -> List[int]:
    out = []
    for k in range(d, -1, -1):
        out.extend(sorted(sum(1 << i for i in c) for c in itertools.combinations(range(width), k)))
    return out


@dataclass
class MacaulayStep:
    degree: int
    rows: int
    columns: int
    rank: int
    lower_rank: int
    new_polynomials: List[BoolPoly]
    linear_rows: List[BoolPoly]

    @property
    def dims(self) -> str:
        return f"{self.rows}x{self.columns}"


def macaulay_step(system: BooleanSystem, d: int, extra: Sequence[BoolPoly] = (),
                  memory_budget: Optional[int] = None) -> MacaulayStep:
    """Row-reduce all products m*g of degree <= d and return the new rows of degree < d.

    A row is new when it is not in the span of the products of degree <= d - 1.
    `extra` carries generators found at earlier steps.
    """
    generators = [g for g in system.masks() + list(extra) if g]
    width = system.num_variables
    top = max((_degree(g) for g in generators), default=0)
    if d < top:
        raise PolynomialError(f"degree {d} is below the generator degree {top}")
    budget = MEMORY_BUDGET_BYTES if memory_budget is None else memory_budget
    columns = _monomials_up_to(width, d)
    index = {m: i for i, m in enumerate(columns)}
    ncols = len(columns)

    products: Dict[BoolPoly, int] = {}
    for g in generators:
        for k in range(d + 1):
            for combo in itertools.combinations(range(width), k):
                m = sum(1 << i for i in combo)
                prod = g if m == 0 else _multiply(m, g)
                deg = _degree(prod)
                if prod and deg <= d and prod not in products:
                    products[prod] = deg
    need = matrix_bytes(len(products), ncols)
    if need > budget:
        raise ResourceCapError(f"degree {d} Macaulay matrix needs {need} bytes, budget is {budget}")

    full_rows = [[index[t] for t in prod] for prod in products]
    low_rows = [[index[t] for t in prod] for prod, deg in products.items() if deg < d]
    echelon, pivots = row_reduce(pack_rows(full_rows, ncols), ncols)
    first_low = math.comb(width, d)
    lower = [i for i, c in enumerate(pivots) if c >= first_low]
    below, below_pivots = row_reduce(pack_rows(low_rows, ncols), ncols)
    residues = nonzero_rows(reduce_against(echelon[lower], below, below_pivots))
    fresh, _ = row_reduce(residues, ncols)

    def as_poly(row: np.ndarray) -> BoolPoly:
        return frozenset(columns[c] for c in unpack_row(row))

    first_linear = ncols - width - 1
    linear = [as_poly(echelon[i]) for i, c in enumerate(pivots) if c >= first_linear]
    step = MacaulayStep(d, len(full_rows), ncols, len(pivots), len(lower), [as_poly(r) for r in fresh], linear)
    logging.debug(f"Macaulay degree {d}: {step.dims}, rank {step.rank}, {len(step.new_polynomials)} new")
    return step


# -- resolution -----------------------------------------------------------------------------------------


@dataclass
class Resolution:
    resolved: bool
    free_dimension: int
    solutions: Optional[List[Assignment]]


def _resolve(generators: Sequence[BoolPoly], linear_rows: Sequence[BoolPoly], width: int,
             max_dim: int) -> Resolution:
    """Decide whether the linear rows cut out the affine hull of the solution set.

    Rows come from a reduced echelon form, so every variable of a row other than its
    pivot is free. Solutions are listed whenever the affine space is small enough.
    """
    if any(row == frozenset({0}) for row in linear_rows):
        return Resolution(True, -1, [])
    pivoted = [(min(m for m in row if m), row) for row in linear_rows]
    pivot_set = {p for p, _ in pivoted}
    free = [i for i in range(width) if (1 << i) not in pivot_set]
    if len(free) > max_dim:
        return Resolution(False, len(free), None)
    counter = np.arange(1 << len(free), dtype=np.int64)
    points = np.zeros_like(counter)
    for bit, var in enumerate(free):
        points |= ((counter >> bit) & 1) << var
    for pivot, row in pivoted:
        value = np.full_like(points, 1 if 0 in row else 0)
        for m in row:
            if m and m != pivot:
                value ^= (points >> (m.bit_length() - 1)) & 1
        points |= value << (pivot.bit_length() - 1)
    ok = _evaluate_points(generators, points)
    found = points[ok]
    if found.size == 0:
        return Resolution(False, len(free), [])
    base = int(found[0])
    hull = span_rank(int(v) ^ base for v in found)
    return Resolution(hull == len(free), len(free), _unpack_points(found, width))


# -- profile --------------------------------------------------------------------------------------------


@dataclass
class DegreeStep:
    degree: int
    rows: int
    columns: int
    rank: int
    new_polynomials: int
    linear_rank: int
    passes: int


@dataclass
class DegreeProfile:
    first_fall_degree: Optional[int]
    solving_degree: Optional[int]
    steps: List[DegreeStep]
    solutions: Optional[List[Assignment]]
    status: ProfileStatus
    dmax: int

    @property
    def max_rows(self) -> int:
        return max((s.rows for s in self.steps), default=0)

    @property
    def max_columns(self) -> int:
        return max((s.columns for s in self.steps), default=0)

    @property
    def matrix_max_dims(self) -> str:
        return f"{self.max_rows}x{self.max_columns}"

    def to_json(self) -> Dict[str, Any]:
        return {
            "first_fall_degree": self.first_fall_degree,
            "solving_degree": self.solving_degree,
            "status": self.status.value,
            "dmax": self.dmax,
            "steps": [vars(s) for s in self.steps],
            "solutions": None if self.solutions is None else [list(s) for s in self.solutions],
        }


def profile(system: BooleanSystem, dmax: Optional[int] = None, memory_budget: Optional[int] = None,
            enumeration_max_dim: Optional[int] = None) -> DegreeProfile:
    """Run Macaulay steps with feedback until the linear rows cut out the solution set.

    Each degree is repeated while it keeps producing new lower-degree rows, which are
    added as generators. The first fall degree is the least d >= 2 producing one; a
    purely linear system resolves at degree 1 with no fall degree.
    """
    dmax = DMAX if dmax is None else dmax
    max_dim = ENUMERATION_MAX_DIM if enumeration_max_dim is None else enumeration_max_dim
    if dmax < 2:
        raise PolynomialError(f"dmax must be at least 2, got {dmax}")
    generators = system.masks()
    width = system.num_variables
    start = max(1, system.max_degree())
    steps: List[DegreeStep] = []
    extra: List[BoolPoly] = []
    ffd: Optional[int] = None
    solutions: Optional[List[Assignment]] = None
    status = ProfileStatus.UNRESOLVED

    for d in range(start, dmax + 1):
        passes, found = 0, 0
        try:
            while True:
                step = macaulay_step(system, d, extra, memory_budget)
                passes += 1
                if not step.new_polynomials:
                    break
                found += len(step.new_polynomials)
                extra.extend(step.new_polynomials)
        except ResourceCapError as e:
            logging.warning(f"Profile capped at degree {d}: {e}")
            status = ProfileStatus.CAPPED
            break
        steps.append(DegreeStep(d, step.rows, step.columns, step.rank, found, len(step.linear_rows), passes))
        if found and d >= 2 and ffd is None:
            ffd = d
        resolution = _resolve(generators, step.linear_rows, width, max_dim)
        if resolution.solutions is not None:
            solutions = resolution.solutions
        if resolution.resolved:
            result = DegreeProfile(ffd, d, steps, solutions, ProfileStatus.RESOLVED, dmax)
            logging.debug(f"Profile resolved at degree {d}, first fall {ffd}, {len(solutions or [])} solution(s)")
            return result
    return DegreeProfile(ffd, None, steps, solutions, status, dmax)


# -- instance builders ----------------------------------------------------------------------------------


def _trace_relation(model: WeierstrassModel, fixed: int, constants: Sequence[int], blocks: Sequence[int],
                    span: Tuple[int, ...], work: Sequence[str]) -> MultiPoly:
    """Tr((U + V + x + a2)/a1^2) with U, V either constants or span-restricted variable blocks."""
    F = model.field
    a1, a2 = model._ai[0], model._ai[1]
    inv = F._inv(F._mul(a1, a1))
    c = F._add(fixed, a2)
    for v in constants:
        c = F._add(c, v)
    terms: Terms = {}
    if F._trace(F._mul(c, inv)):
        terms[(0,) * len(work)] = 1
    k = len(span)
    for block in blocks:
        for j, beta in enumerate(span):
            if F._trace(F._mul(beta, inv)):
                e = [0] * len(work)
                e[block * k + j] = 1
                terms[tuple(e)] = 1
    return MultiPoly(field_construct(2), work, terms, 2)


def _trace_applies(model: WeierstrassModel, x: int) -> bool:
    """x lifts to E(F) and is not the x-coordinate of a 2-torsion point."""
    F = model.field
    a1, a3 = model._ai[0], model._ai[2]
    return F._add(F._mul(a1, x), a3) != 0 and bool(model._ys(x))


def _independent_span(F: Field, k: int, rng: np.random.Generator) -> List[FieldElement]:
    while True:
        span = [F.random_element(rng, nonzero=True) for _ in range(k)]
        if span_rank(b.value for b in span) == k:
            return span


def build_subspace_instance(n: int, seed: int, subspace: str = "random", add_trace_relation: bool = False,
                            retries: Optional[int] = None) -> BooleanSystem:
    """Descent of S_3(X0, X1, x(P)) with X0, X1 restricted to a ceil(n/2)-dimensional subspace of GF(2^n)."""
    if not SUBSPACE_MIN_N <= n <= SUBSPACE_MAX_N:
        raise ResourceCapError(f"subspace instances need {SUBSPACE_MIN_N} <= n <= {SUBSPACE_MAX_N}, got {n}")
    if subspace not in ("random", "fixed"):
        raise DescentError(f"unknown subspace mode {subspace!r}")
    F = field_construct(2, n)
    k = (n + 1) // 2
    retries = DRAW_RETRIES if retries is None else retries
    for attempt in range(retries):
        rng = np.random.default_rng(np.random.SeedSequence([seed, n, attempt]))
        model = random_smooth_curve(F, rng, ordinary=True)
        P = random_point(model, rng)
        if P.is_infinity or not _trace_applies(model, P.x.value):
            logging.warning(f"Redrawing subspace instance n={n} seed={seed}: point is 2-torsion or infinite")
            continue
        if subspace == "fixed":
            span = F.power_basis()[:k]
        else:
            span = _independent_span(F, k, rng)
        T = specialized_s3(model, P.x)
        components = [c for c in descend(T, span=span) if not c.is_zero()]
        if not components:
            logging.warning(f"Redrawing subspace instance n={n} seed={seed}: restriction vanished")
            continue
        work = components[0].variables
        if add_trace_relation:
            relation = _trace_relation(model, P.x.value, [], [0, 1], tuple(b.value for b in span), work)
            if not relation.is_zero():
                components.append(relation)
        provenance = {
            "kind": "subspace",
            "n": n,
            "seed": seed,
            "attempt": attempt,
            "subspace": subspace,
            "curve": model.descriptor(),
            "point": P.to_json(),
            "span": [b.to_json() for b in span],
            "blocks": ["X0", "X1"],
            "trace_relation": add_trace_relation,
        }
        logging.debug(f"Subspace instance n={n} seed={seed}: {len(components)} generators in {len(work)} unknowns")
        return BooleanSystem(work, components, provenance)
    raise ResourceCapError(f"no usable subspace instance for n={n} seed={seed} in {retries} draws")


def _chain_link(S3: MultiPoly, args: Sequence[Union[FieldElement, str]], variables: Sequence[str]) -> MultiPoly:
    constants = {f"X{i}": a for i, a in enumerate(args) if not isinstance(a, str)}
    mapping = {f"X{i}": a for i, a in enumerate(args) if isinstance(a, str)}
    return S3.partial_evaluate(constants).rename(variables, mapping)


def _chain_arguments(xs: Sequence[FieldElement]) -> List[List[Union[FieldElement, str]]]:
    """S_3(a1, a2, X1), S_3(a3, X1, X2), ..., S_3(a_{m-1}, a_m, X_{m-3})."""
    m = len(xs)
    links: List[List[Union[FieldElement, str]]] = [[xs[0], xs[1], "X1"]]
    for i in range(1, m - 3):
        links.append([xs[i + 1], f"X{i}", f"X{i + 1}"])
    links.append([xs[m - 2], xs[m - 1], f"X{m - 3}"])
    return links


def build_split_system(model: WeierstrassModel, xs: Sequence[FieldElement],
                       basis: Optional[Sequence[FieldElement]] = None,
                       add_trace_relation: bool = False) -> BooleanSystem:
    """Descend the chain of specialized S_3 polynomials equivalent to S_m(xs) = 0."""
    F = model.field
    m = len(xs)
    if m < 4:
        raise PolynomialError(f"split systems need at least 4 inputs, got {m}")
    if F.p != 2:
        raise DescentError("split systems are descended to GF(2)")
    if add_trace_relation and model.a1.is_zero():
        raise CurveError("the trace relation needs an ordinary model (a1 != 0)")
    chain_vars = [f"X{i}" for i in range(1, m - 2)]
    S3 = summation_poly(model, 3)
    links = _chain_arguments(xs)
    system = DescendedSystem.build([_chain_link(S3, args, chain_vars) for args in links], basis)
    work = system.variables
    generators = [g for g in system.generators() if not g.is_zero()]
    if add_trace_relation:
        span = tuple(b.value for b in system.basis)
        for args in links:
            fixed = args[0]
            if isinstance(fixed, str) or not _trace_applies(model, fixed.value):
                continue
            constants = [a.value for a in args[1:] if isinstance(a, FieldElement)]
            blocks = [chain_vars.index(a) for a in args[1:] if isinstance(a, str)]
            relation = _trace_relation(model, fixed.value, constants, blocks, span, work)
            if not relation.is_zero():
                generators.append(relation)
    provenance = {
        "kind": "split",
        "curve": model.descriptor(),
        "inputs": [x.to_json() for x in xs],
        "span": [b.to_json() for b in system.basis],
        "blocks": chain_vars,
        "trace_relation": add_trace_relation,
    }
    return BooleanSystem(work, generators, provenance)


def recover_x_coordinates(system: BooleanSystem, solution: Sequence[int]) -> List[FieldElement]:
    """Field values of the variable blocks of a subspace or split system at a GF(2) solution."""
    prov = system.provenance
    F = Field.from_descriptor(prov["curve"]["field"])
    span = [F.from_coords(c) for c in prov["span"]]
    k = len(span)
    return [F.combine(solution[b * k:(b + 1) * k], span) for b in range(len(prov["blocks"]))]


# -- chain consistency over the algebraic closure -------------------------------------------------------


@dataclass
class ChainReport:
    consistent: Optional[bool]
    degenerate: bool
    reachable: int


def chain_consistent(model: WeierstrassModel, xs: Sequence[FieldElement]) -> ChainReport:
    """Whether the chained S_3 equations have a common solution over the closure of F.

    Root sets are propagated link by link inside GF(q^(2^(m-3))). Coincident arguments
    and vanishing prefix sums make the report degenerate; an identically vanishing
    link leaves the verdict undecided.
    """
    m = len(xs)
    if m < 4:
        raise PolynomialError(f"chains need at least 4 inputs, got {m}")
    F = model.field
    ext = extend(F, 2 ** (m - 3))
    K = ext.big
    model_b = tuple(ext._embed(c.value) for c in (model.b2, model.b4, model.b6, model.b8))
    vals = [ext._embed(x.value) for x in xs]
    degenerate = any(summation_value(model, list(xs[:k])).is_zero() for k in range(2, m - 1))
    degenerate = degenerate or vals[m - 2] == vals[m - 1]

    def roots(a: int, b: int) -> Optional[List[int]]:
        nonlocal degenerate
        c0, c1, c2 = _s3_in_last(K, model_b, a, b)
        if c2:
            return K._quadratic_roots(K._div(c1, c2), K._div(c0, c2))
        degenerate = True
        if c1:
            return [K._div(K._neg(c0), c1)]
        return None if c0 == 0 else []

    level = roots(vals[0], vals[1])
    if level is None:
        return ChainReport(None, True, 0)
    for i in range(2, m - 2):
        reached: set = set()
        for u in level:
            found = roots(vals[i], u)
            if found is None:
                return ChainReport(None, True, 0)
            reached.update(found)
        level = sorted(reached)
    last = _s3_in_last(K, model_b, vals[m - 2], vals[m - 1])
    consistent = any(evaluate_univariate(K, last, u) == 0 for u in level)
    return ChainReport(consistent, degenerate, len(level))
