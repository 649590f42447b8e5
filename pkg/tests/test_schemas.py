import json
import pytest

from src.summation_poly_lab.errors import SchemaError
from src.summation_poly_lab.schemas import (SCHEMA_VERSION, ErrorDocument, VerifyDocument, WitnessDocument,
                                            dump_document, load_document)


def test_dump_is_sorted_and_versioned():
    text = dump_document(VerifyDocument(valid=True, subset=[0, 2]))
    data = json.loads(text)
    assert data["schema_version"] == SCHEMA_VERSION
    assert data["kind"] == "verify-report"
    assert list(data) == sorted(data)
    assert text.endswith("}\n")
    assert dump_document(VerifyDocument(valid=True, subset=[0, 2])) == text


def test_load_round_trip():
    document = WitnessDocument(relation={"signs": [1, -1], "points": ["inf", "inf"]})
    loaded = load_document(dump_document(document), WitnessDocument)
    assert loaded == document


@pytest.mark.parametrize("text", [
    "not json",
    "[1, 2]",
    '{"kind": "relation-witness", "relation": {}}',
    '{"schema_version": "2", "kind": "relation-witness", "relation": {}}',
    '{"schema_version": "1", "kind": "verify-report", "valid": true}',
    '{"schema_version": "1", "kind": "relation-witness"}',
])
def test_load_rejects_bad_documents(text):
    with pytest.raises(SchemaError):
        load_document(text, WitnessDocument)


def test_error_document():
    data = json.loads(dump_document(ErrorDocument(error="boom", exit_code=3)))
    assert data == {"schema_version": "1", "kind": "error", "error": "boom", "exit_code": 3}
