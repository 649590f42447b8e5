"""Exception hierarchy shared by every module, plus the CLI exit-code contract."""
from typing import Optional

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_USAGE = 2
EXIT_RESOURCE_CAP = 3


class SumpolyLabError(Exception):
    """Base class for all domain errors raised by the package."""

    exit_code = EXIT_USAGE


class FieldError(SumpolyLabError):
    pass


class FieldMismatchError(FieldError):
    pass


class CurveError(SumpolyLabError):
    pass


class InvalidPointError(CurveError):
    pass


class PolynomialError(SumpolyLabError):
    pass


class DescentError(SumpolyLabError):
    pass


class ResourceCapError(SumpolyLabError):
    """A configured size, degree, memory or trial cap was hit."""

    exit_code = EXIT_RESOURCE_CAP


class DimacsError(SumpolyLabError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ReductionError(SumpolyLabError):
    pass


class SchemaError(SumpolyLabError):
    """A JSON document is malformed or has another schema version."""


class WitnessError(SumpolyLabError):
    """A witness failed verification; `stage` names the first failing stage."""

    exit_code = EXIT_REFUTED

    def __init__(self, message: str, stage: Optional[str] = None):
        super().__init__(message if stage is None else f"[{stage}] {message}")
        self.stage = stage
