"""DIMACS CNF input for 3-SAT instances.

Clauses shorter than three literals are padded by repeating their last literal,
which leaves the set of satisfying assignments unchanged.
"""
import logging
import re
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .errors import DimacsError, ReductionError

CLAUSE_WIDTH = 3
_TOKEN = re.compile(r"\S+")

Clause = Tuple[int, int, int]


@dataclass(frozen=True)
class SatInstance:
    """A 3-CNF formula over variables 1..num_vars; literal -i is the negation of x_i."""

    num_vars: int
    clauses: Tuple[Clause, ...] = ()

    def __post_init__(self) -> None:
        if self.num_vars < 0:
            raise ReductionError(f"variable count must be >= 0, got {self.num_vars}")
        for j, clause in enumerate(self.clauses):
            if len(clause) != CLAUSE_WIDTH:
                raise ReductionError(f"clause {j + 1} has {len(clause)} literals, expected {CLAUSE_WIDTH}")
            for literal in clause:
                if literal == 0 or abs(literal) > self.num_vars:
                    raise ReductionError(f"clause {j + 1}: literal {literal} outside 1..{self.num_vars}")

    @classmethod
    def from_clauses(cls, num_vars: int, clauses: Sequence[Sequence[int]]) -> "SatInstance":
        """Build from clauses of one to three literals, padding short ones."""
        padded = []
        for j, clause in enumerate(clauses):
            if not 1 <= len(clause) <= CLAUSE_WIDTH:
                raise ReductionError(f"clause {j + 1} has {len(clause)} literals; 1 to {CLAUSE_WIDTH} are accepted")
            padded.append(pad_clause(clause))
        return cls(num_vars, tuple(padded))

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def is_satisfied(self, assignment: Sequence[bool]) -> bool:
        if len(assignment) != self.num_vars:
            return False
        return all(any(assignment[abs(lit) - 1] == (lit > 0) for lit in clause) for clause in self.clauses)

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.num_vars} {self.num_clauses}"]
        lines.extend(" ".join(str(lit) for lit in clause) + " 0" for clause in self.clauses)
        return "\n".join(lines) + "\n"

    def to_json(self) -> Dict[str, Any]:
        return {"num_vars": self.num_vars, "clauses": [list(c) for c in self.clauses]}


def pad_clause(clause: Sequence[int]) -> Clause:
    literals = list(clause)
    while len(literals) < CLAUSE_WIDTH:
        literals.append(literals[-1])
    return (literals[0], literals[1], literals[2])


def parse_dimacs(text: str) -> SatInstance:
    """Parse DIMACS CNF text with clauses of at most three literals.

    Comment lines start with 'c'; a line starting with '%' ends the input.
    Clauses end with 0 and may span lines. Errors carry 1-based line and column.
    """
    header: Optional[Tuple[int, int, int]] = None
    clauses: List[Clause] = []
    current: List[int] = []
    clause_line = 0
    last_line = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("c"):
            continue
        if stripped.startswith("%"):
            break
        last_line = lineno
        if stripped.startswith("p"):
            if header is not None:
                raise DimacsError("duplicate problem line", lineno)
            if current:
                raise DimacsError("problem line inside a clause", lineno)
            header = _parse_header(line, lineno)
            continue
        if header is None:
            raise DimacsError("clause before the 'p cnf' problem line", lineno, _first_column(line))
        num_vars = header[0]
        for match in _TOKEN.finditer(line):
            column = match.start() + 1
            try:
                literal = int(match.group())
            except ValueError:
                raise DimacsError(f"expected an integer literal, got {match.group()!r}", lineno, column) from None
            if literal == 0:
                if not current:
                    raise DimacsError("empty clause", lineno, column)
                clauses.append(pad_clause(current))
                current = []
                continue
            if abs(literal) > num_vars:
                raise DimacsError(f"variable {abs(literal)} out of range 1..{num_vars}", lineno, column)
            if not current:
                clause_line = lineno
            current.append(literal)
            if len(current) > CLAUSE_WIDTH:
                raise DimacsError(f"clause longer than {CLAUSE_WIDTH} literals", lineno, column)
    if header is None:
        raise DimacsError("missing 'p cnf' problem line", max(last_line, 1))
    if current:
        raise DimacsError("clause not terminated by 0", clause_line)
    num_vars, declared, header_line = header
    if declared != len(clauses):
        raise DimacsError(f"problem line declares {declared} clauses, found {len(clauses)}", header_line)
    logging.debug(f"Parsed DIMACS formula with {num_vars} variables and {len(clauses)} clauses")
    return SatInstance(num_vars, tuple(clauses))


def _first_column(line: str) -> int:
    match = _TOKEN.search(line)
    return match.start() + 1 if match else 1


def _parse_header(line: str, lineno: int) -> Tuple[int, int, int]:
    tokens = list(_TOKEN.finditer(line))
    words = [t.group() for t in tokens]
    if len(words) != 4 or words[0] != "p" or words[1] != "cnf":
        raise DimacsError("malformed problem line; expected 'p cnf <variables> <clauses>'", lineno, _first_column(line))
    values = []
    for token in tokens[2:]:
        if not token.group().isdigit():
            raise DimacsError(f"expected a non-negative integer, got {token.group()!r}", lineno, token.start() + 1)
        values.append(int(token.group()))
    return values[0], values[1], lineno
