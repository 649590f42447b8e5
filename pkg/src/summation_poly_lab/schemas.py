"""Versioned JSON documents read and written by the command line.

Every document carries `schema_version` and a `kind` tag. Dumps are sorted and
indented so that identical runs produce identical bytes.
"""
import json
from typing import Any, Dict, List, Literal, Optional, Type, TypeVar

from pydantic import BaseModel, ValidationError

from .errors import SchemaError

SCHEMA_VERSION = "1"


class Document(BaseModel):
    schema_version: str = SCHEMA_VERSION


class PolynomialDocument(Document):
    kind: Literal["summation-polynomial"] = "summation-polynomial"
    curve: Dict[str, Any]
    r: int
    text: str
    polynomial: Dict[str, Any]


class DescentCheckDocument(Document):
    kind: Literal["descent-check"] = "descent-check"
    check: Literal["trace-identity", "linear-combination"]
    n: int
    seed: int
    curve: Dict[str, Any]
    point: Any
    holds: bool
    report: Dict[str, Any]


class TrialDocument(Document):
    """Provenance sidecar for one experiment trial."""

    kind: Literal["ffd-trial"] = "ffd-trial"
    n: int
    seed: int
    status: str
    first_fall_degree: Optional[int]
    solving_degree: Optional[int]
    matrix_max_dims: str
    provenance: Dict[str, Any]
    profile: Dict[str, Any]


class FfdSummaryDocument(Document):
    kind: Literal["ffd-summary"] = "ffd-summary"
    n_list: List[int]
    trials: int
    seed: int
    dmax: int
    memory_budget: int
    csv: Optional[str]
    ffd_rate: List[Dict[str, Any]]
    solving_degree_distribution: List[Dict[str, Any]]
    status_counts: List[Dict[str, Any]]


class InstanceDocument(Document):
    kind: Literal["sumpoly-instance"] = "sumpoly-instance"
    route: str
    instance: Dict[str, Any]


class CertificateDocument(Document):
    kind: Literal["reduction-certificate"] = "reduction-certificate"
    route: str
    sat: Dict[str, Any]
    certificates: List[Dict[str, Any]]


class WitnessDocument(Document):
    kind: Literal["relation-witness"] = "relation-witness"
    relation: Dict[str, Any]


class ReduceDocument(Document):
    kind: Literal["reduce-report"] = "reduce-report"
    route: str
    num_vars: int
    num_clauses: int
    elements: int
    arity: int
    vanishes: bool
    files: List[str]


class VerifyDocument(Document):
    kind: Literal["verify-report"] = "verify-report"
    valid: bool
    stage: Optional[str] = None
    message: str = ""
    subset: Optional[List[int]] = None
    assignment: Optional[List[bool]] = None


class CorpusDocument(Document):
    kind: Literal["corpus-report"] = "corpus-report"
    count: int
    seed: int
    p: int
    agree: int
    satisfiable: int
    witnesses_verified: int
    csv: Optional[str]


class ErrorDocument(Document):
    kind: Literal["error"] = "error"
    error: str
    exit_code: int


D = TypeVar("D", bound=Document)


def dump_document(document: Document) -> str:
    return json.dumps(document.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"


def load_document(text: str, model: Type[D]) -> D:
    """Parse and validate a document, rejecting other schema versions."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}") from None
    if not isinstance(data, dict):
        raise SchemaError("expected a JSON object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION!r}")
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise SchemaError(f"invalid {model.__name__}: {e.error_count()} error(s); first: {e.errors()[0]['msg']}") from None
