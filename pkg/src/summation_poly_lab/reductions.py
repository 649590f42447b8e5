"""3-SAT -> subset sum -> summation-polynomial reductions, their witnesses and oracles.

Every reduction returns the downstream instance together with a
`ReductionCertificate`; `pull_back_witness` walks a downstream witness back
through one certificate and re-verifies it at every stage.
"""
import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import sympy

from . import sumpoly
from .curves import CurvePoint, WeierstrassModel, cuspidal_model, cuspidal_param_inv, find_curve_with_large_order_point
from .dimacs import SatInstance
from .errors import InvalidPointError, ReductionError, ResourceCapError, WitnessError
from .fields import FieldElement, field_construct
from .sumpoly import RelationWitness, SummationInstance, find_relation

DEFAULT_P = 3
SAT_MAX_VARS = 24
SUBSET_MAX_ELEMENTS = 44
ORDER_BOUND_MAX = 1 << 20
# Digit base of the integer packing; every column sum stays below it.
RADIX = 8
SAT_CHUNK = 1 << 20

Element = Union[int, Tuple[int, ...]]
Assignment = Tuple[bool, ...]
Subset = Tuple[int, ...]


# -- groups and instances ----------------------------------------------------------------------------------------


class GroupKind(str, Enum):
    INTEGERS = "Z"
    CYCLIC = "Z/nZ"
    VECTORS = "(Z/mZ)^r"


@dataclass(frozen=True)
class Group:
    """Z, Z/nZ (modulus n) or (Z/mZ)^r (modulus m, rank r)."""

    kind: GroupKind
    modulus: int = 0
    rank: int = 1

    def __post_init__(self) -> None:
        if self.kind is GroupKind.CYCLIC and self.modulus < 1:
            raise ReductionError(f"Z/nZ needs n >= 1, got {self.modulus}")
        if self.kind is GroupKind.VECTORS and (self.modulus < 2 or self.rank < 0):
            raise ReductionError(f"(Z/mZ)^r needs m >= 2 and r >= 0, got m={self.modulus}, r={self.rank}")

    @classmethod
    def integers(cls) -> "Group":
        return cls(GroupKind.INTEGERS)

    @classmethod
    def cyclic(cls, n: int) -> "Group":
        return cls(GroupKind.CYCLIC, n)

    @classmethod
    def vectors(cls, m: int, r: int) -> "Group":
        return cls(GroupKind.VECTORS, m, r)

    def __str__(self) -> str:
        if self.kind is GroupKind.INTEGERS:
            return "Z"
        if self.kind is GroupKind.CYCLIC:
            return f"Z/{self.modulus}Z"
        return f"(Z/{self.modulus}Z)^{self.rank}"

    def contains(self, element: Any) -> bool:
        if self.kind is GroupKind.VECTORS:
            return (isinstance(element, tuple) and len(element) == self.rank
                    and all(isinstance(c, int) and 0 <= c < self.modulus for c in element))
        if not isinstance(element, int) or isinstance(element, bool):
            return False
        return self.kind is GroupKind.INTEGERS or 0 <= element < self.modulus

    @property
    def zero(self) -> Element:
        return (0,) * self.rank if self.kind is GroupKind.VECTORS else 0

    def add(self, a: Element, b: Element) -> Element:
        if self.kind is GroupKind.VECTORS:
            return tuple((x + y) % self.modulus for x, y in zip(a, b))  # type: ignore[arg-type]
        total = a + b  # type: ignore[operator]
        return total if self.kind is GroupKind.INTEGERS else total % self.modulus

    def scale(self, k: int, a: Element) -> Element:
        if self.kind is GroupKind.VECTORS:
            return tuple((k * x) % self.modulus for x in a)  # type: ignore[union-attr]
        value = k * a  # type: ignore[operator]
        return value if self.kind is GroupKind.INTEGERS else value % self.modulus

    def total(self, elements: Sequence[Element]) -> Element:
        acc = self.zero
        for e in elements:
            acc = self.add(acc, e)
        return acc

    def descriptor(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "modulus": self.modulus, "rank": self.rank}

    @classmethod
    def from_descriptor(cls, data: Dict[str, Any]) -> "Group":
        return cls(GroupKind(data["kind"]), int(data.get("modulus", 0)), int(data.get("rank", 1)))

    def to_json(self, element: Element) -> Any:
        return list(element) if isinstance(element, tuple) else element

    def from_json(self, value: Any) -> Element:
        return tuple(int(c) for c in value) if self.kind is GroupKind.VECTORS else int(value)


@dataclass(frozen=True)
class SubsetSumInstance:
    group: Group
    elements: Tuple[Element, ...]
    target: Element

    def __post_init__(self) -> None:
        for i, e in enumerate(self.elements):
            if not self.group.contains(e):
                raise ReductionError(f"element {i} = {e!r} is not in {self.group}")
        if not self.group.contains(self.target):
            raise ReductionError(f"target {self.target!r} is not in {self.group}")

    def __len__(self) -> int:
        return len(self.elements)

    def subset_sum(self, subset: Sequence[int]) -> Element:
        return self.group.total([self.elements[i] for i in subset])

    def is_solution(self, subset: Sequence[int]) -> bool:
        indices = list(subset)
        if len(set(indices)) != len(indices) or any(not 0 <= i < len(self.elements) for i in indices):
            return False
        return self.subset_sum(indices) == self.target

    def to_json(self) -> Dict[str, Any]:
        return {
            "group": self.group.descriptor(),
            "elements": [self.group.to_json(e) for e in self.elements],
            "target": self.group.to_json(self.target),
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "SubsetSumInstance":
        group = Group.from_descriptor(data["group"])
        return cls(group, tuple(group.from_json(e) for e in data["elements"]), group.from_json(data["target"]))


# -- gadgets -----------------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class Gadget:
    """Per-clause constants in (Z/mZ)^r: literal weights c_1..c_3, slack d_1..d_k and clause target t.

    Without a modulus the constants are summed exactly over Z.
    """

    name: str
    r: int
    literal_weights: Tuple[Tuple[int, ...], ...]
    slack: Tuple[Tuple[int, ...], ...]
    target: Tuple[int, ...]
    modulus: Optional[int] = None

    def _sum(self, vectors: Sequence[Tuple[int, ...]]) -> Tuple[int, ...]:
        total = [sum(v[i] for v in vectors) for i in range(self.r)]
        if self.modulus is not None:
            total = [c % self.modulus for c in total]
        return tuple(total)

    def reduced(self, vector: Sequence[int]) -> Tuple[int, ...]:
        return tuple(vector) if self.modulus is None else tuple(c % self.modulus for c in vector)


def _ternary_gadget() -> Gadget:
    c1, c2, c3 = (2, 1, 2), (2, 2, 2), (2, 0, 1)
    t = (2, 0, 1)

    def minus(*vectors: Tuple[int, ...]) -> Tuple[int, ...]:
        return tuple((t[i] - sum(v[i] for v in vectors)) % 3 for i in range(3))

    slack = (minus(c1), minus(c2), minus(c1, c2), minus(c1, c3), minus(c2, c3))
    return Gadget("ternary", 3, (c1, c2, c3), slack, t, 3)


TERNARY_GADGET = _ternary_gadget()


def unit_gadget(modulus: Optional[int]) -> Gadget:
    """r = 1, c_i = 1, d_1 = d_2 = 1, t = 3: valid modulo any m >= 4 and over Z."""
    return Gadget("unit", 1, ((1,), (1,), (1,)), ((1,), (1,)), (3,), modulus)


def gadget_for(m: int) -> Gadget:
    if m < 3:
        raise ReductionError(f"subset sum over (Z/{m}Z)^r is linear algebra; the reduction needs m >= 3")
    return TERNARY_GADGET if m == 3 else unit_gadget(m)


@dataclass
class GadgetAudit:
    gadget: Gadget
    uncovered: List[Tuple[int, ...]]
    slack_hits: List[Tuple[int, ...]]
    combinations: int

    @property
    def holds(self) -> bool:
        return not self.uncovered and not self.slack_hits


def audit_gadget(gadget: Gadget) -> GadgetAudit:
    """Every nonempty choice of literal weights is completed to t by some slack subset,
    and no slack subset reaches t on its own."""
    k = len(gadget.slack)
    slack_sums: Dict[Tuple[int, ...], Tuple[int, ...]] = {}
    for mask in itertools.product((0, 1), repeat=k):
        chosen = [d for d, bit in zip(gadget.slack, mask) if bit]
        slack_sums.setdefault(gadget._sum(chosen), mask)
    target = gadget.reduced(gadget.target)
    uncovered = []
    combinations = 0
    for mask in itertools.product((0, 1), repeat=len(gadget.literal_weights)):
        if not any(mask):
            continue
        base = gadget._sum([c for c, bit in zip(gadget.literal_weights, mask) if bit])
        need = gadget.reduced([target[i] - base[i] for i in range(gadget.r)])
        combinations += 2 ** k
        if need not in slack_sums:
            uncovered.append(mask)
    slack_hits = [mask for total, mask in slack_sums.items() if total == target]
    audit = GadgetAudit(gadget, uncovered, slack_hits, combinations + 2 ** k)
    if not audit.holds:
        logging.error(f"Gadget {gadget.name} fails: uncovered {uncovered}, slack-only hits {slack_hits}")
    return audit


# -- certificates ------------------------------------------------------------------------------------------------


class Stage(str, Enum):
    SAT_TO_SUBSET_MODM = "sat-to-subset-modm"
    SAT_TO_SUBSET_Z = "sat-to-subset-z"
    SUBSET_TO_EC = "subset-to-sumpoly-ec"
    SUBSET_TO_CUSP = "subset-to-sumpoly-cusp"


@dataclass(frozen=True)
class ReductionCertificate:
    """One reduction step: both instances plus the JSON-ready data needed to pull witnesses back."""

    stage: Stage
    upstream: Union[SatInstance, SubsetSumInstance]
    downstream: Union[SubsetSumInstance, SummationInstance]
    data: Dict[str, Any] = field(default_factory=dict)
    notes: Tuple[str, ...] = ()


def summation_instance_to_json(instance: SummationInstance) -> Dict[str, Any]:
    return {"curve": instance.model.descriptor(), "inputs": [x.to_json() for x in instance.inputs]}


def summation_instance_from_json(data: Dict[str, Any]) -> SummationInstance:
    model = WeierstrassModel.from_descriptor(data["curve"])
    return SummationInstance(model, tuple(model.field.from_coords(x) for x in data["inputs"]))


def relation_witness_to_json(witness: RelationWitness) -> Dict[str, Any]:
    return {"curve": witness.model.descriptor(), "signs": list(witness.signs),
            "points": [P.to_json() for P in witness.points]}


def _point_from_json(model: WeierstrassModel, data: Any) -> CurvePoint:
    if data == "inf":
        return CurvePoint()
    F = model.field
    return CurvePoint(F.from_coords(data["x"]), F.from_coords(data["y"]))


def relation_witness_from_json(data: Dict[str, Any]) -> RelationWitness:
    model = WeierstrassModel.from_descriptor(data["curve"])
    return RelationWitness(model, tuple(int(s) for s in data["signs"]),
                           tuple(_point_from_json(model, P) for P in data["points"]))


def _instance_to_json(instance: Union[SatInstance, SubsetSumInstance, SummationInstance]) -> Dict[str, Any]:
    if isinstance(instance, SummationInstance):
        return summation_instance_to_json(instance)
    return instance.to_json()


def certificate_to_json(certificate: ReductionCertificate) -> Dict[str, Any]:
    return {
        "stage": certificate.stage.value,
        "upstream": _instance_to_json(certificate.upstream),
        "downstream": _instance_to_json(certificate.downstream),
        "data": certificate.data,
        "notes": list(certificate.notes),
    }


def certificate_from_json(data: Dict[str, Any]) -> ReductionCertificate:
    stage = Stage(data["stage"])
    upstream: Union[SatInstance, SubsetSumInstance]
    downstream: Union[SubsetSumInstance, SummationInstance]
    if stage in (Stage.SAT_TO_SUBSET_MODM, Stage.SAT_TO_SUBSET_Z):
        up = data["upstream"]
        upstream = SatInstance(int(up["num_vars"]), tuple(tuple(c) for c in up["clauses"]))
        downstream = SubsetSumInstance.from_json(data["downstream"])
    else:
        upstream = SubsetSumInstance.from_json(data["upstream"])
        downstream = summation_instance_from_json(data["downstream"])
    return ReductionCertificate(stage, upstream, downstream, dict(data.get("data", {})), tuple(data.get("notes", ())))


# -- 3-SAT -> subset sum -----------------------------------------------------------------------------------------


def _literal_order(sat: SatInstance) -> List[int]:
    s = sat.num_vars
    return list(range(1, s + 1)) + [-i for i in range(1, s + 1)]


def _clause_vectors(sat: SatInstance, gadget: Gadget) -> Tuple[List[Tuple[int, ...]], Tuple[int, ...], List[List[int]]]:
    """Literal vectors v_x, then slack vectors h_{j,i}, over coordinates e_1..e_s followed by one r-block per clause."""
    s, r = sat.num_vars, gadget.r
    dim = s + r * sat.num_clauses
    vectors = []
    for literal in _literal_order(sat):
        v = [0] * dim
        v[abs(literal) - 1] = 1
        for j, clause in enumerate(sat.clauses):
            if literal in clause:
                weight = gadget.literal_weights[clause.index(literal)]
                for t in range(r):
                    v[s + j * r + t] += weight[t]
        vectors.append(tuple(v))
    slack_labels = []
    for j in range(sat.num_clauses):
        for i, d in enumerate(gadget.slack, start=1):
            v = [0] * dim
            v[s + j * r:s + (j + 1) * r] = d
            vectors.append(tuple(v))
            slack_labels.append([j + 1, i])
    target = tuple([1] * s + list(gadget.target) * sat.num_clauses)
    return vectors, target, slack_labels


def _sat_certificate_data(sat: SatInstance, gadget: Gadget, slack_labels: List[List[int]]) -> Dict[str, Any]:
    return {
        "literals": _literal_order(sat),
        "slack": slack_labels,
        "gadget": {"name": gadget.name, "r": gadget.r, "c": [list(c) for c in gadget.literal_weights],
                   "d": [list(d) for d in gadget.slack], "t": list(gadget.target)},
    }


def sat_to_subsetsum_modm(sat: SatInstance, m: int = DEFAULT_P) -> Tuple[SubsetSumInstance, ReductionCertificate]:
    """Subset sum over (Z/mZ)^(s + r w): satisfiable exactly when some subset hits the target."""
    gadget = gadget_for(m)
    vectors, target, slack_labels = _clause_vectors(sat, gadget)
    dim = len(target)
    group = Group.vectors(m, dim)
    instance = SubsetSumInstance(group, tuple(tuple(c % m for c in v) for v in vectors), tuple(c % m for c in target))
    data = _sat_certificate_data(sat, gadget, slack_labels)
    data["m"] = m
    logging.info(f"Reduced 3-SAT ({sat.num_vars} variables, {sat.num_clauses} clauses) to subset sum over "
                 f"{group} with {len(instance)} elements")
    return instance, ReductionCertificate(Stage.SAT_TO_SUBSET_MODM, sat, instance, data)


def _pack(vector: Sequence[int]) -> int:
    return sum(c * RADIX ** i for i, c in enumerate(vector))


def sat_to_subsetsum_z(sat: SatInstance, cyclic: bool = False) -> Tuple[SubsetSumInstance, ReductionCertificate]:
    """Integer subset sum by packing the unit-gadget vectors into base-RADIX digits.

    Column sums never exceed 5 < RADIX, so digit-wise and integer equality coincide;
    with `cyclic` the same numbers are read in Z/nZ for n = RADIX^dim, which no sum reaches.
    """
    gadget = unit_gadget(None)
    vectors, target, slack_labels = _clause_vectors(sat, gadget)
    dim = len(target)
    group = Group.cyclic(RADIX ** dim) if cyclic else Group.integers()
    instance = SubsetSumInstance(group, tuple(_pack(v) for v in vectors), _pack(target))
    data = _sat_certificate_data(sat, gadget, slack_labels)
    data["radix"] = RADIX
    logging.info(f"Reduced 3-SAT ({sat.num_vars} variables, {sat.num_clauses} clauses) to subset sum over "
                 f"{group} with {len(instance)} elements")
    return instance, ReductionCertificate(Stage.SAT_TO_SUBSET_Z, sat, instance, data)


# -- subset sum -> summation polynomials --------------------------------------------------------------------------


def _strip_zeros(instance: SubsetSumInstance) -> Tuple[List[int], List[int], List[str]]:
    kept, stripped, notes = [], [], []
    for i, e in enumerate(instance.elements):
        if e == instance.group.zero:
            stripped.append(i)
            notes.append(f"element {i} is zero and was removed; it never changes a subset sum")
        else:
            kept.append(i)
    return kept, stripped, notes


def _direct_subset(instance: SubsetSumInstance, kept: Sequence[int]) -> Optional[Subset]:
    """Lexicographically first solution of an instance with at most one nonzero element."""
    candidates: List[Subset] = [()] + ([(kept[0],)] if kept else [])
    return next((subset for subset in candidates if instance.is_solution(subset)), None)


def _direct_notes(notes: List[str], subset: Optional[Subset]) -> Tuple[str, ...]:
    verdict = "solvable" if subset is not None else "unsolvable"
    return tuple(notes + [f"at most one nonzero term: decided directly as {verdict}, encoded as S_2"])


def subsetsum_to_sumpoly_ec(instance: SubsetSumInstance, rng: Optional[np.random.Generator] = None,
                            order_bound: Optional[int] = None) -> Tuple[SummationInstance, ReductionCertificate]:
    """Integer subset sum -> S_{A,r}(x(v_1 P), ..., x(v_k P)[, x(w' P)]) with w' = 2w - sum v_i.

    P has order at least 1 + 2 sum |v_i| + 2 |w|, so a signed relation among the
    multiples of P is an integer identity sum n_i v_i = w'.
    """
    if instance.group.kind is not GroupKind.INTEGERS:
        raise ReductionError(f"the elliptic route takes subset sum over Z, got {instance.group}")
    kept, stripped, notes = _strip_zeros(instance)
    values = [int(instance.elements[i]) for i in kept]  # type: ignore[arg-type]
    target = int(instance.target)  # type: ignore[arg-type]
    w_prime = 2 * target - sum(values)
    needed = 1 + 2 * sum(abs(v) for v in values) + 2 * abs(target)
    bound = max(needed, order_bound or 0)
    if bound > ORDER_BOUND_MAX:
        raise ResourceCapError(f"order bound {bound} exceeds the supported {ORDER_BOUND_MAX}")
    scalars = values + ([w_prime] if w_prime else [])
    if len(scalars) < 2:
        # S_2(x(P), x(P)) vanishes, S_2(x(P), x(2P)) does not once P has order >= 5
        subset = _direct_subset(instance, kept)
        found = find_curve_with_large_order_point(max(bound, 5), rng if rng is not None else np.random.default_rng(0))
        model, P = found.model, found.point
        Q = P if subset is not None else model.scalar_mul(2, P)
        downstream = SummationInstance(model, (P.x, Q.x))  # type: ignore[arg-type]
        data = {"kept": kept, "stripped": stripped, "scalars": scalars, "w_prime": w_prime, "point": P.to_json(),
                "order": found.order, "order_bound": max(bound, 5), "direct": True,
                "subset": None if subset is None else list(subset)}
        logging.info(f"Subset sum with {len(instance)} elements decided directly: {subset is not None}")
        return downstream, ReductionCertificate(Stage.SUBSET_TO_EC, instance, downstream, data,
                                                _direct_notes(notes, subset))
    if not w_prime:
        notes.append("w' = 0: the target point is omitted and S_r is used on the elements alone")
    found = find_curve_with_large_order_point(bound, rng if rng is not None else np.random.default_rng(0))
    model, P = found.model, found.point
    xs = tuple(model.scalar_mul(abs(k), P).x for k in scalars)
    downstream = SummationInstance(model, xs)  # type: ignore[arg-type]
    data = {"kept": kept, "stripped": stripped, "scalars": scalars, "w_prime": w_prime,
            "point": P.to_json(), "order": found.order, "order_bound": bound}
    logging.info(f"Subset sum with {len(instance)} elements -> S_{downstream.r} on {model} (point order {found.order})")
    return downstream, ReductionCertificate(Stage.SUBSET_TO_EC, instance, downstream, data, tuple(notes))


def _vectors_of(instance: SubsetSumInstance) -> Tuple[int, int, List[Tuple[int, ...]], Tuple[int, ...]]:
    group = instance.group
    if group.kind is GroupKind.VECTORS:
        return group.modulus, group.rank, list(instance.elements), instance.target  # type: ignore[return-value]
    if group.kind is GroupKind.CYCLIC:
        return group.modulus, 1, [(e,) for e in instance.elements], (instance.target,)  # type: ignore[list-item]
    raise ReductionError(f"the cuspidal route takes subset sum over (Z/pZ)^m, got {group}")


def subsetsum_to_sumpoly_cusp(instance: SubsetSumInstance,
                              p: Optional[int] = None) -> Tuple[SummationInstance, ReductionCertificate]:
    """Subset sum over (Z/pZ)^m, p odd -> S on y^2 = x^3 over GF(p^m) at 1/v_i^2 and 1/w'^2.

    Coordinates are read as power-basis coordinates; the parametrization
    t -> (1/t^2, 1/t^3) turns signed point relations into sum n_i v_i = w'.
    """
    m, dim, vectors, target = _vectors_of(instance)
    if p is not None and p != m:
        raise ReductionError(f"instance lives over Z/{m}Z, not Z/{p}Z")
    if m == 2:
        raise ReductionError("the cuspidal route needs p odd; over GF(2) the signs collapse")
    if not sympy.isprime(m):
        raise ReductionError(f"the cuspidal route needs a prime modulus, got {m}")
    kept, stripped, notes = _strip_zeros(instance)
    w_prime = tuple((2 * target[c] - sum(vectors[i][c] for i in kept)) % m for c in range(dim))
    if len(kept) + (1 if any(w_prime) else 0) < 2:
        # t = 1 twice vanishes; t = 1 and a generator of GF(p^2) or larger does not
        subset = _direct_subset(instance, kept)
        F = field_construct(m, max(dim, 2))
        ts = [F.one, F.one if subset is not None else F.gen]
        downstream = SummationInstance(cuspidal_model(F), tuple((t * t).inverse() for t in ts))
        data = {"kept": kept, "stripped": stripped, "w_prime": list(w_prime), "p": m, "direct": True,
                "subset": None if subset is None else list(subset)}
        logging.info(f"Subset sum with {len(instance)} elements decided directly: {subset is not None}")
        return downstream, ReductionCertificate(Stage.SUBSET_TO_CUSP, instance, downstream, data,
                                                _direct_notes(notes, subset))
    F = field_construct(m, dim)
    ts = [F.from_coords(vectors[i]) for i in kept]
    if any(w_prime):
        ts.append(F.from_coords(w_prime))
    else:
        notes.append("w' = 0: the target input is omitted and S_r is used on the elements alone")
    downstream = SummationInstance(cuspidal_model(F), tuple((t * t).inverse() for t in ts))
    data = {"kept": kept, "stripped": stripped, "w_prime": list(w_prime), "p": m}
    logging.info(f"Subset sum with {len(instance)} elements -> S_{downstream.r} on the cuspidal model over {F!r}")
    return downstream, ReductionCertificate(Stage.SUBSET_TO_CUSP, instance, downstream, data, tuple(notes))


# -- oracles -----------------------------------------------------------------------------------------------------


def sat_solve(sat: SatInstance, max_vars: Optional[int] = None) -> Optional[Assignment]:
    """First satisfying assignment in lexicographic order (False < True, x_1 first), or None."""
    cap = SAT_MAX_VARS if max_vars is None else max_vars
    s = sat.num_vars
    if s > cap:
        raise ResourceCapError(f"SAT oracle is capped at {cap} variables, got {s}")
    total = 1 << s
    for start in range(0, total, SAT_CHUNK):
        a = np.arange(start, min(total, start + SAT_CHUNK), dtype=np.int64)
        ok = np.ones(a.shape, dtype=bool)
        for clause in sat.clauses:
            hit = np.zeros(a.shape, dtype=bool)
            for lit in clause:
                hit |= ((a >> (s - abs(lit))) & 1) == (1 if lit > 0 else 0)
            ok &= hit
        found = np.flatnonzero(ok)
        if found.size:
            index = start + int(found[0])
            return tuple(bool((index >> (s - i)) & 1) for i in range(1, s + 1))
    return None


def _digit_rows(instance: SubsetSumInstance) -> Tuple[np.ndarray, np.ndarray, Optional[int]]:
    group = instance.group
    if group.kind is GroupKind.VECTORS:
        if group.modulus ** group.rank >= 1 << 62:
            raise ResourceCapError(f"subset oracle cannot encode {group}")
        rows = np.array(instance.elements, dtype=np.int64).reshape(len(instance), group.rank)
        return rows, np.array(instance.target, dtype=np.int64), group.modulus
    values = [int(e) for e in instance.elements]  # type: ignore[arg-type]
    bound = sum(abs(v) for v in values) + abs(int(instance.target))  # type: ignore[arg-type]
    if bound >= 1 << 62 or (group.kind is GroupKind.CYCLIC and group.modulus >= 1 << 62):
        raise ResourceCapError("subset oracle needs sums below 2^62")
    rows = np.array(values, dtype=np.int64).reshape(len(values), 1)
    modulus = group.modulus if group.kind is GroupKind.CYCLIC else None
    return rows, np.array([int(instance.target)], dtype=np.int64), modulus  # type: ignore[arg-type]


def _subset_sums(rows: np.ndarray, modulus: Optional[int]) -> np.ndarray:
    """All 2^k subset sums; index bit k-1-i selects row i, so row 0 is the most significant."""
    digit = np.int16 if modulus is not None and modulus < 1 << 14 else np.int64
    acc = np.zeros((1, rows.shape[1]), dtype=digit)
    for v in rows[::-1]:
        acc = np.concatenate([acc, acc + v.astype(digit)])
        if modulus is not None:
            acc %= modulus
    return acc


def _codes(sums: np.ndarray, modulus: Optional[int]) -> np.ndarray:
    if sums.shape[1] == 1:
        return sums[:, 0].astype(np.int64)
    codes = np.zeros(sums.shape[0], dtype=np.int64)
    for j in range(sums.shape[1] - 1, -1, -1):
        codes = codes * modulus + sums[:, j]  # type: ignore[operator]
    return codes


def _index_subset(index: int, width: int, offset: int) -> List[int]:
    return [offset + i for i in range(width) if (index >> (width - 1 - i)) & 1]


def subset_solve(instance: SubsetSumInstance, max_elements: Optional[int] = None) -> Optional[Subset]:
    """Exhaustive meet-in-the-middle search; returns the lexicographically first solution.

    Solutions are compared by their 0/1 indicator vectors, element 0 first, so
    leaving early elements out wins ties.
    """
    cap = SUBSET_MAX_ELEMENTS if max_elements is None else max_elements
    k = len(instance)
    if k > cap:
        raise ResourceCapError(f"subset oracle is capped at {cap} elements, got {k}")
    rows, target, modulus = _digit_rows(instance)
    h = k // 2
    left = _codes(_subset_sums(rows[:h], modulus), modulus)
    right_sums = target.reshape(1, -1) - _subset_sums(rows[h:], modulus)
    if modulus is not None:
        right_sums %= modulus
    right = _codes(right_sums, modulus)
    hits = np.flatnonzero(np.isin(left, right))
    if hits.size == 0:
        return None
    i = int(hits[0])
    j = int(np.flatnonzero(right == left[i])[0])
    subset = tuple(_index_subset(i, h, 0) + _index_subset(j, k - h, h))
    if not instance.is_solution(subset):
        raise ReductionError(f"subset oracle produced a non-solution {subset}")  # unreachable
    return subset


@dataclass
class SumpolyVerdict:
    vanishes: bool
    witness: Optional[RelationWitness]
    value: Optional[FieldElement]


def decide_vanishing(instance: SummationInstance) -> SumpolyVerdict:
    """Vanishing of S at the instance inputs, with a relation witness when it vanishes.

    The relation search decides every arity; up to the literal-evaluation cap the
    value of S is computed as well and must agree.
    """
    witness = find_relation(instance.model, instance.inputs)
    value = None
    if instance.r <= sumpoly.LITERAL_MAX_ARITY:
        value = instance.evaluate()
        if value.is_zero() != (witness is not None):
            raise ReductionError(f"S_{instance.r} value {value} disagrees with the relation search")
    return SumpolyVerdict(witness is not None, witness, value)


# -- witness pull-back -------------------------------------------------------------------------------------------


def _subset_from(witness: Any) -> Subset:
    try:
        return tuple(int(i) for i in witness)
    except (TypeError, ValueError):
        raise WitnessError("expected a list of element indices", "subset") from None


def _pull_back_subset(certificate: ReductionCertificate, witness: Any) -> Assignment:
    instance = certificate.downstream
    sat = certificate.upstream
    assert isinstance(instance, SubsetSumInstance) and isinstance(sat, SatInstance)
    subset = _subset_from(witness)
    if not instance.is_solution(subset):
        raise WitnessError("the chosen elements do not sum to the target", "subset")
    chosen = set(subset)
    s = sat.num_vars
    assignment = []
    for i in range(1, s + 1):
        positive, negative = i - 1, s + i - 1
        if (positive in chosen) == (negative in chosen):
            raise WitnessError(f"exactly one of x{i} and -x{i} must be chosen", "assignment")
        assignment.append(positive in chosen)
    if not sat.is_satisfied(assignment):
        raise WitnessError("the recovered assignment does not satisfy the formula", "assignment")
    return tuple(assignment)


def check_relation(instance: SummationInstance, witness: Any) -> RelationWitness:
    """A signed relation on the instance curve over exactly the instance inputs, or `WitnessError`."""
    if not isinstance(witness, RelationWitness):
        raise WitnessError("expected a signed point relation", "relation")
    if len(witness.signs) != instance.r or len(witness.points) != instance.r:
        raise WitnessError(f"relation has {len(witness.signs)} terms, the instance has {instance.r}", "relation")
    if any(s not in (1, -1) for s in witness.signs):
        raise WitnessError("signs must be +1 or -1", "relation")
    if witness.model != instance.model:
        raise WitnessError("relation is not on the instance curve", "relation")
    try:
        holds = witness.verify()
    except InvalidPointError as e:
        raise WitnessError(str(e), "relation") from None
    if not holds:
        raise WitnessError("signed points do not sum to zero", "relation")
    if any(P.x != x for P, x in zip(witness.points, instance.inputs)):
        raise WitnessError("point x-coordinates differ from the instance inputs", "relation")
    return witness


def _orientations(certificate: ReductionCertificate, witness: RelationWitness) -> List[int]:
    """+1 where a witness point is the multiple (or field element) it was built from, -1 where it is its negative."""
    model = witness.model
    out = []
    if certificate.stage is Stage.SUBSET_TO_EC:
        P = _point_from_json(model, certificate.data["point"])
        for k, Q in zip(certificate.data["scalars"], witness.points):
            kP = model.scalar_mul(int(k), P)
            if Q == kP:
                out.append(1)
            elif Q == model.point_neg(kP):
                out.append(-1)
            else:
                raise WitnessError(f"point {Q} is neither {k}P nor -{k}P", "signs")
        return out
    upstream = certificate.upstream
    assert isinstance(upstream, SubsetSumInstance)
    _, _, vectors, _ = _vectors_of(upstream)
    F = model.field
    ts = [F.from_coords(vectors[i]) for i in certificate.data["kept"]]
    w_prime = certificate.data["w_prime"]
    if any(w_prime):
        ts.append(F.from_coords(w_prime))
    for t, Q in zip(ts, witness.points):
        u = cuspidal_param_inv(Q, F)
        if u == t:
            out.append(1)
        elif u == -t:
            out.append(-1)
        else:
            raise WitnessError(f"point {Q} does not come from {t} under the cuspidal parametrization", "signs")
    return out


def _pull_back_relation(certificate: ReductionCertificate, witness: Any) -> Subset:
    instance = certificate.downstream
    upstream = certificate.upstream
    assert isinstance(instance, SummationInstance) and isinstance(upstream, SubsetSumInstance)
    relation = check_relation(instance, witness)
    if certificate.data.get("direct"):
        recorded = certificate.data.get("subset")
        subset = () if recorded is None else tuple(int(i) for i in recorded)
        if recorded is None or not upstream.is_solution(subset):
            raise WitnessError("the directly decided instance has no recorded solution", "subset")
        return subset
    coefficients = [s * o for s, o in zip(relation.signs, _orientations(certificate, relation))]
    kept: List[int] = list(certificate.data["kept"])
    if len(coefficients) > len(kept):
        # sum c_i v_i + c_w w' = 0  =>  sum (-c_w c_i) v_i = w'
        tau = coefficients[-1]
        signs = [-tau * c for c in coefficients[:-1]]
    else:
        signs = coefficients
    group = upstream.group
    if group.kind is GroupKind.INTEGERS:
        w_prime: Element = int(certificate.data["w_prime"])
    elif group.kind is GroupKind.CYCLIC:
        w_prime = int(certificate.data["w_prime"][0])
    else:
        w_prime = tuple(int(c) for c in certificate.data["w_prime"])
    signed = group.total([group.scale(n, upstream.elements[i]) for n, i in zip(signs, kept)])
    if signed != w_prime:
        raise WitnessError("the sign vector does not combine the elements to w'", "signs")
    subset = tuple(i for n, i in zip(signs, kept) if n == 1)
    if not upstream.is_solution(subset):
        raise WitnessError("the subset read off the signs misses the target", "subset")
    return subset


def pull_back_witness(certificate: ReductionCertificate, witness: Any) -> Union[Subset, Assignment]:
    """Map a downstream witness one stage up, re-verifying every intermediate object.

    Point relations become subsets (via the sign vector n_i = 2 e_i - 1); subsets
    become SAT assignments. Raises `WitnessError` naming the first failing stage.
    """
    if certificate.stage in (Stage.SUBSET_TO_EC, Stage.SUBSET_TO_CUSP):
        return _pull_back_relation(certificate, witness)
    return _pull_back_subset(certificate, witness)


def pull_back_chain(certificates: Sequence[ReductionCertificate], witness: Any) -> Any:
    for certificate in reversed(certificates):
        witness = pull_back_witness(certificate, witness)
    return witness


# -- pipeline and corpus -----------------------------------------------------------------------------------------


class Route(str, Enum):
    EC = "ec"
    CUSP = "cusp"


@dataclass(frozen=True)
class ReductionChain:
    sat: SatInstance
    certificates: Tuple[ReductionCertificate, ...]

    @property
    def subset_instance(self) -> SubsetSumInstance:
        instance = self.certificates[0].downstream
        assert isinstance(instance, SubsetSumInstance)
        return instance

    @property
    def instance(self) -> SummationInstance:
        instance = self.certificates[-1].downstream
        assert isinstance(instance, SummationInstance)
        return instance


def reduce_sat(sat: SatInstance, route: Union[Route, str] = Route.CUSP, p: int = DEFAULT_P,
               rng: Optional[np.random.Generator] = None) -> ReductionChain:
    """3-SAT -> (Z/pZ)^r subset sum -> cuspidal S, or 3-SAT -> Z subset sum -> elliptic S."""
    route = Route(route)
    if route is Route.CUSP:
        subset, first = sat_to_subsetsum_modm(sat, p)
        _, second = subsetsum_to_sumpoly_cusp(subset, p)
    else:
        subset, first = sat_to_subsetsum_z(sat)
        _, second = subsetsum_to_sumpoly_ec(subset, rng)
    return ReductionChain(sat, (first, second))


def random_3sat(num_vars: int, num_clauses: int, rng: np.random.Generator) -> SatInstance:
    """Clauses of one to three distinct variables with random signs, padded to width three.

    Short clauses keep small formulas from being satisfiable by counting alone.
    """
    if num_vars < 1 and num_clauses:
        raise ReductionError("clauses need at least one variable")
    clauses = []
    for _ in range(num_clauses):
        width = int(rng.integers(1, min(3, num_vars) + 1))
        variables = rng.choice(num_vars, size=width, replace=False) + 1
        signs = rng.integers(0, 2, size=width)
        clauses.append([int(v) if s else -int(v) for v, s in zip(variables, signs)])
    return SatInstance.from_clauses(num_vars, clauses)


def verify_corpus(count: int = 200, max_vars: int = 6, max_clauses: int = 6, seed: int = 0,
                  p: int = DEFAULT_P) -> pd.DataFrame:
    """SAT oracle, subset oracle and summation-polynomial verdict on a seeded random corpus.

    Each row records the three verdicts and whether a vanishing relation pulled back
    to a satisfying assignment.
    """
    rows = []
    for index in range(count):
        rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
        num_vars = int(rng.integers(1, max_vars + 1))
        num_clauses = int(rng.integers(1, max_clauses + 1))
        sat = random_3sat(num_vars, num_clauses, rng)
        satisfiable = sat_solve(sat) is not None
        chain = reduce_sat(sat, Route.CUSP, p)
        solvable = subset_solve(chain.subset_instance) is not None
        verdict = decide_vanishing(chain.instance)
        witness_verified = None
        if verdict.witness is not None:
            try:
                witness_verified = sat.is_satisfied(pull_back_chain(chain.certificates, verdict.witness))
            except WitnessError as e:
                logging.error(f"Corpus instance {index}: witness rejected: {e}")
                witness_verified = False
        rows.append({
            "instance": index,
            "num_vars": num_vars,
            "num_clauses": num_clauses,
            "elements": len(chain.subset_instance),
            "arity": chain.instance.r,
            "sat": satisfiable,
            "subset": solvable,
            "sumpoly": verdict.vanishes,
            "agree": satisfiable == solvable == verdict.vanishes,
            "witness_verified": witness_verified,
        })
    df = pd.DataFrame(rows, columns=["instance", "num_vars", "num_clauses", "elements", "arity", "sat", "subset",
                                     "sumpoly", "agree", "witness_verified"])
    if count:
        logging.info(f"Corpus of {count} instances: {int(df['agree'].sum())} agree, {int(df['sat'].sum())} satisfiable")
    return df
