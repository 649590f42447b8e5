"""Sparse multivariate polynomials over a `Field` and Sylvester resultants.

A `MultiPoly` maps exponent tuples to packed field values. With `reduce_q` set
every exponent e >= 1 is kept in [1, q-1] (arithmetic in F[X]/(X^q - X)).
"""
from __future__ import annotations

import heapq
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import FieldMismatchError, PolynomialError
from .fields import Field, FieldElement

Exponent = Tuple[int, ...]
Terms = Dict[Exponent, int]
Coefficient = Union[FieldElement, int]


def _reduce_exponent(e: int, q: int) -> int:
    return e if e == 0 else (e - 1) % (q - 1) + 1


class MultiPoly:
    __slots__ = ("field", "variables", "terms", "reduce_q")

    def __init__(self, field: Field, variables: Sequence[str], terms: Optional[Mapping[Exponent, int]] = None,
                 reduce_q: Optional[int] = None):
        self.field = field
        self.variables: Tuple[str, ...] = tuple(variables)
        self.reduce_q = reduce_q
        clean: Terms = {}
        if terms:
            nvars = len(self.variables)
            add = field._add
            for e, c in terms.items():
                if len(e) != nvars:
                    raise PolynomialError(f"exponent {e} does not match variables {self.variables}")
                if reduce_q is not None:
                    e = tuple(_reduce_exponent(k, reduce_q) for k in e)
                if e in clean:
                    clean[e] = add(clean[e], c)
                else:
                    clean[e] = c
            clean = {e: c for e, c in clean.items() if c}
        self.terms: Terms = clean

    # -- construction -----------------------------------------------------------------

    @classmethod
    def zero(cls, field: Field, variables: Sequence[str], reduce_q: Optional[int] = None) -> "MultiPoly":
        return cls(field, variables, None, reduce_q)

    @classmethod
    def constant(cls, field: Field, variables: Sequence[str], c: Coefficient,
                 reduce_q: Optional[int] = None) -> "MultiPoly":
        value = field.element(c).value
        return cls(field, variables, {(0,) * len(variables): value}, reduce_q)

    @classmethod
    def variable(cls, field: Field, variables: Sequence[str], name: Union[str, int],
                 reduce_q: Optional[int] = None) -> "MultiPoly":
        variables = tuple(variables)
        index = name if isinstance(name, int) else variables.index(name)
        e = [0] * len(variables)
        e[index] = 1
        return cls(field, variables, {tuple(e): 1}, reduce_q)

    @classmethod
    def generators(cls, field: Field, variables: Sequence[str], reduce_q: Optional[int] = None) -> List["MultiPoly"]:
        return [cls.variable(field, variables, i, reduce_q) for i in range(len(variables))]

    def _new(self, terms: Mapping[Exponent, int]) -> "MultiPoly":
        return MultiPoly(self.field, self.variables, terms, self.reduce_q)

    def _index(self, var: Union[str, int]) -> int:
        if isinstance(var, int):
            if not 0 <= var < len(self.variables):
                raise PolynomialError(f"variable index {var} out of range")
            return var
        try:
            return self.variables.index(var)
        except ValueError:
            raise PolynomialError(f"unknown variable {var!r}; have {self.variables}") from None

    def _coerce(self, other: Union["MultiPoly", Coefficient]) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.field != self.field:
                raise FieldMismatchError(f"polynomials over {self.field!r} and {other.field!r}")
            if other.variables != self.variables:
                raise PolynomialError(f"variable lists differ: {self.variables} vs {other.variables}")
            return other
        return MultiPoly.constant(self.field, self.variables, other, self.reduce_q)

    # -- ring operations -----------------------------------------------------------------

    def __add__(self, other: Union["MultiPoly", Coefficient]) -> "MultiPoly":
        other = self._coerce(other)
        terms = dict(self.terms)
        add = self.field._add
        for e, c in other.terms.items():
            terms[e] = add(terms[e], c) if e in terms else c
        return self._new(terms)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        neg = self.field._neg
        return self._new({e: neg(c) for e, c in self.terms.items()})

    def __sub__(self, other: Union["MultiPoly", Coefficient]) -> "MultiPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Union["MultiPoly", Coefficient]) -> "MultiPoly":
        return self._coerce(other) - self

    def __mul__(self, other: Union["MultiPoly", Coefficient]) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        other = self._coerce(other)
        F = self.field
        mul, add = F._mul, F._add
        q = self.reduce_q
        out: Terms = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if q is not None:
                    e = tuple(_reduce_exponent(k, q) for k in e)
                c = mul(c1, c2)
                out[e] = add(out[e], c) if e in out else c
        return self._new(out)

    __rmul__ = __mul__

    def scale(self, c: Coefficient) -> "MultiPoly":
        value = self.field.element(c).value
        if value == 0:
            return self._new({})
        mul = self.field._mul
        return self._new({e: mul(v, value) for e, v in self.terms.items()})

    def __pow__(self, k: int) -> "MultiPoly":
        if k < 0:
            raise PolynomialError("negative powers are not polynomials")
        result = MultiPoly.constant(self.field, self.variables, 1, self.reduce_q)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, MultiPoly) and self.field == other.field
                and self.variables == other.variables and self.terms == other.terms)

    def __hash__(self) -> int:
        return hash((self.field, self.variables, frozenset(self.terms.items())))

    # -- inspection ---------------------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_term(self) -> FieldElement:
        return FieldElement(self.field, self.terms.get((0,) * len(self.variables), 0))

    def coefficient(self, exponent: Exponent) -> FieldElement:
        return FieldElement(self.field, self.terms.get(tuple(exponent), 0))

    def degree(self, var: Union[str, int]) -> int:
        """Degree in one variable; -1 for the zero polynomial."""
        i = self._index(var)
        return max((e[i] for e in self.terms), default=-1)

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def used_variables(self) -> List[str]:
        used = [False] * len(self.variables)
        for e in self.terms:
            for i, k in enumerate(e):
                if k:
                    used[i] = True
        return [v for v, u in zip(self.variables, used) if u]

    def __len__(self) -> int:
        return len(self.terms)

    # -- evaluation and substitution -------------------------------------------------------------

    def _values(self, values: Union[Mapping[Union[str, int], Coefficient], Sequence[Coefficient]]) -> Dict[int, int]:
        out: Dict[int, int] = {}
        items: Iterable[Tuple[Union[str, int], Coefficient]]
        if isinstance(values, Mapping):
            items = values.items()
        else:
            items = enumerate(values)
        for k, v in items:
            out[self._index(k)] = self.field.element(v).value
        return out

    def evaluate(self, values: Union[Mapping[Union[str, int], Coefficient], Sequence[Coefficient]]) -> FieldElement:
        """Evaluate at a point assigning every variable."""
        assignment = self._values(values)
        missing = [self.variables[i] for i in range(len(self.variables)) if i not in assignment]
        if missing:
            raise PolynomialError(f"no value for variable(s) {missing}")
        point = [assignment[i] for i in range(len(self.variables))]
        return FieldElement(self.field, self._evaluate_raw(point))

    def _evaluate_raw(self, point: Sequence[int]) -> int:
        F = self.field
        mul, add, pw = F._mul, F._add, F._pow
        acc = 0
        for e, c in self.terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term = mul(term, pw(x, k))
                    if not term:
                        break
            acc = add(acc, term)
        return acc

    def partial_evaluate(self, values: Mapping[Union[str, int], Coefficient]) -> "MultiPoly":
        """Specialize some variables; they stay in the variable list with exponent 0."""
        assignment = self._values(values)
        F = self.field
        mul, add, pw = F._mul, F._add, F._pow
        out: Terms = {}
        for e, c in self.terms.items():
            term = c
            new_e = list(e)
            for i, x in assignment.items():
                if e[i]:
                    term = mul(term, pw(x, e[i]))
                    new_e[i] = 0
            if term:
                key = tuple(new_e)
                out[key] = add(out[key], term) if key in out else term
        return self._new(out)

    def coefficients_in(self, var: Union[str, int]) -> Dict[int, "MultiPoly"]:
        """f = sum_k c_k var^k with c_k free of var."""
        i = self._index(var)
        buckets: Dict[int, Terms] = {}
        for e, c in self.terms.items():
            k = e[i]
            buckets.setdefault(k, {})[e[:i] + (0,) + e[i + 1:]] = c
        return {k: self._new(t) for k, t in buckets.items()}

    def substitute(self, var: Union[str, int], poly: "MultiPoly") -> "MultiPoly":
        """Replace a variable by a polynomial in the same variable list (Horner in that variable)."""
        poly = self._coerce(poly)
        parts = self.coefficients_in(var)
        if not parts:
            return self._new({})
        top = max(parts)
        result = parts.get(top, self._new({}))
        for k in range(top - 1, -1, -1):
            result = result * poly
            if k in parts:
                result = result + parts[k]
        return result

    def rename(self, variables: Sequence[str], mapping: Optional[Mapping[str, str]] = None) -> "MultiPoly":
        """Re-embed into another variable list; `mapping` sends old names to new ones."""
        mapping = mapping or {}
        variables = tuple(variables)
        targets = []
        for v in self.variables:
            name = mapping.get(v, v)
            if name not in variables:
                if any(e[len(targets)] for e in self.terms):
                    raise PolynomialError(f"variable {v!r} has no place in {variables}")
                targets.append(None)
            else:
                targets.append(variables.index(name))
        out: Terms = {}
        add = self.field._add
        for e, c in self.terms.items():
            new_e = [0] * len(variables)
            for k, t in zip(e, targets):
                if k and t is not None:
                    new_e[t] += k
            key = tuple(new_e)
            out[key] = add(out[key], c) if key in out else c
        return MultiPoly(self.field, variables, out, self.reduce_q)

    def permute(self, order: Sequence[int]) -> "MultiPoly":
        """Variable i of the result is variable order[i] of self."""
        return self._new({tuple(e[j] for j in order): c for e, c in self.terms.items()})

    def map_coefficients(self, fn: Callable[[int], int]) -> "MultiPoly":
        return self._new({e: fn(c) for e, c in self.terms.items()})

    def with_reduction(self, q: Optional[int]) -> "MultiPoly":
        return MultiPoly(self.field, self.variables, self.terms, q)

    # -- exact division ------------------------------------------------------------------------------

    def exact_div(self, divisor: "MultiPoly") -> "MultiPoly":
        """Quotient of an exact division, by lex leading terms; raises if not exact."""
        divisor = self._coerce(divisor)
        if divisor.is_zero():
            raise PolynomialError("division by the zero polynomial")
        F = self.field
        lead = max(divisor.terms)
        lead_inv = F._inv(divisor.terms[lead])
        rest = [(e, c) for e, c in divisor.terms.items() if e != lead]
        rem: Terms = dict(self.terms)
        heap = [tuple(-k for k in e) for e in rem]
        heapq.heapify(heap)
        quotient: Terms = {}
        mul, sub = F._mul, F._sub
        while heap:
            key = heapq.heappop(heap)
            e = tuple(-k for k in key)
            c = rem.pop(e, 0)
            if not c:
                continue
            shift = tuple(a - b for a, b in zip(e, lead))
            if any(k < 0 for k in shift):
                raise PolynomialError("polynomial division is not exact")
            qc = mul(c, lead_inv)
            quotient[shift] = qc
            for de, dc in rest:
                t = tuple(a + b for a, b in zip(shift, de))
                prev = rem.get(t)
                value = sub(prev if prev is not None else 0, mul(qc, dc))
                if prev is None:
                    heapq.heappush(heap, tuple(-k for k in t))
                if value:
                    rem[t] = value
                else:
                    rem.pop(t, None)
        return MultiPoly(self.field, self.variables, quotient, None)

    # -- output -------------------------------------------------------------------------------------------

    def grevlex_terms(self) -> List[Tuple[Exponent, int]]:
        """Terms in descending graded reverse lexicographic order."""
        return sorted(self.terms.items(), key=lambda item: (-sum(item[0]), tuple(reversed(item[0]))))

    def _monomial_text(self, e: Exponent) -> str:
        parts = []
        for name, k in zip(self.variables, e):
            if k == 1:
                parts.append(name)
            elif k > 1:
                parts.append(f"{name}^{k}")
        return "*".join(parts)

    def to_text(self) -> str:
        """Canonical text: grevlex order, prime-field coefficients as signed integers."""
        if not self.terms:
            return "0"
        F = self.field
        pieces: List[str] = []
        for e, c in self.grevlex_terms():
            mono = self._monomial_text(e)
            if F.is_prime_field:
                value = c - F.p if F.p > 2 and c > F.p // 2 else c
                sign = "-" if value < 0 else "+"
                magnitude = abs(value)
                coeff = "" if magnitude == 1 and mono else str(magnitude)
            else:
                sign = "+"
                coeff = "" if c == 1 and mono else f"({F.format_value(c)})"
            body = f"{coeff}*{mono}" if coeff and mono else (coeff or mono)
            if not pieces:
                pieces.append(body if sign == "+" else f"-{body}")
            else:
                pieces.append(f" {sign} {body}")
        return "".join(pieces)

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"MultiPoly[{self.field!r}]({self.to_text()})"

    def to_json(self) -> Dict[str, object]:
        return {
            "field": self.field.descriptor(),
            "vars": list(self.variables),
            "terms": [{"exps": list(e), "coeff": FieldElement(self.field, c).to_json()}
                      for e, c in self.grevlex_terms()],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, object]) -> "MultiPoly":
        field = Field.from_descriptor(data["field"])  # type: ignore[arg-type]
        terms = {tuple(t["exps"]): field.from_coords(t["coeff"]).value for t in data["terms"]}  # type: ignore[union-attr, index]
        return cls(field, data["vars"], terms)  # type: ignore[arg-type]


# -- resultants -----------------------------------------------------------------------------------------------


def sylvester_matrix(f: MultiPoly, g: MultiPoly, var: Union[str, int], m: Optional[int] = None,
                     n: Optional[int] = None) -> List[List[MultiPoly]]:
    """Sylvester matrix in `var` for formal degrees m = deg f, n = deg g."""
    i = f._index(var)
    fc, gc = f.coefficients_in(i), g.coefficients_in(i)
    m = f.degree(i) if m is None else m
    n = g.degree(i) if n is None else n
    if m < f.degree(i) or n < g.degree(i):
        raise PolynomialError("formal degree below actual degree")
    zero = f._new({})
    f_row = [fc.get(k, zero) for k in range(m, -1, -1)]
    g_row = [gc.get(k, zero) for k in range(n, -1, -1)]
    size = m + n
    rows = []
    for k in range(n):
        rows.append([zero] * k + f_row + [zero] * (size - k - m - 1))
    for k in range(m):
        rows.append([zero] * k + g_row + [zero] * (size - k - n - 1))
    return rows


def bareiss_determinant(matrix: List[List[MultiPoly]]) -> MultiPoly:
    """Fraction-free Gaussian elimination; every division is exact."""
    size = len(matrix)
    if size == 0:
        raise PolynomialError("determinant of an empty matrix")
    M = [list(row) for row in matrix]
    base = M[0][0]
    one = MultiPoly.constant(base.field, base.variables, 1, base.reduce_q)
    sign = 1
    prev = one
    for k in range(size - 1):
        if M[k][k].is_zero():
            swap = next((r for r in range(k + 1, size) if not M[r][k].is_zero()), None)
            if swap is None:
                return base._new({})
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        pivot = M[k][k]
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                num = M[i][j] * pivot - M[i][k] * M[k][j]
                M[i][j] = num if prev is one else num.exact_div(prev)
            M[i][k] = base._new({})
        prev = pivot
    det = M[size - 1][size - 1]
    return det if sign == 1 else -det


def resultant(f: MultiPoly, g: MultiPoly, var: Union[str, int], m: Optional[int] = None,
              n: Optional[int] = None) -> MultiPoly:
    """Res_var(f, g) as the Sylvester determinant; the result no longer involves `var`."""
    g = f._coerce(g)
    i = f._index(var)
    if f.degree(i) < 1 or g.degree(i) < 1:
        raise PolynomialError(f"resultant needs positive degree in {f.variables[i]}")
    if f.reduce_q is not None or g.reduce_q is not None:
        raise PolynomialError("resultants are taken in the polynomial ring, not modulo field equations")
    return bareiss_determinant(sylvester_matrix(f, g, i, m, n))


# -- field-level helpers used by specialized evaluation ---------------------------------------------------------


def field_determinant(field: Field, rows: List[List[int]]) -> int:
    """Determinant of a square matrix of packed field values."""
    size = len(rows)
    M = [list(r) for r in rows]
    det = 1
    for k in range(size):
        pivot_row = next((r for r in range(k, size) if M[r][k]), None)
        if pivot_row is None:
            return 0
        if pivot_row != k:
            M[k], M[pivot_row] = M[pivot_row], M[k]
            det = field._neg(det)
        pivot = M[k][k]
        det = field._mul(det, pivot)
        inv = field._inv(pivot)
        for r in range(k + 1, size):
            if M[r][k]:
                factor = field._mul(M[r][k], inv)
                row_r, row_k = M[r], M[k]
                for c in range(k, size):
                    if row_k[c]:
                        row_r[c] = field._sub(row_r[c], field._mul(factor, row_k[c]))
    return det


def field_sylvester(field: Field, f: Sequence[int], g: Sequence[int]) -> List[List[int]]:
    """Sylvester matrix of coefficient lists given lowest degree first (formal degree = len - 1)."""
    m, n = len(f) - 1, len(g) - 1
    size = m + n
    f_row, g_row = list(reversed(f)), list(reversed(g))
    rows = []
    for k in range(n):
        rows.append([0] * k + f_row + [0] * (size - k - m - 1))
    for k in range(m):
        rows.append([0] * k + g_row + [0] * (size - k - n - 1))
    return rows


def field_resultant(field: Field, f: Sequence[int], g: Sequence[int]) -> int:
    return field_determinant(field, field_sylvester(field, f, g))


def interpolate(field: Field, xs: Sequence[int], ys: Sequence[int]) -> List[int]:
    """Coefficients (lowest first) of the polynomial of degree < len(xs) through the points (Newton form)."""
    F = field
    k = len(xs)
    coef = list(ys)
    for j in range(1, k):
        for i in range(k - 1, j - 1, -1):
            coef[i] = F._div(F._sub(coef[i], coef[i - 1]), F._sub(xs[i], xs[i - j]))
    poly = [0] * k
    poly[0] = coef[k - 1]
    deg = 0
    for i in range(k - 2, -1, -1):
        # poly = poly * (X - xs[i]) + coef[i]
        shifted = [0] + poly[: deg + 1]
        for t in range(deg + 1):
            shifted[t] = F._sub(shifted[t], F._mul(poly[t], xs[i]))
        deg += 1
        shifted[0] = F._add(shifted[0], coef[i])
        poly[: deg + 1] = shifted[: deg + 1]
    return poly


def evaluate_univariate(field: Field, coeffs: Sequence[int], x: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = field._add(field._mul(acc, x), c)
    return acc
