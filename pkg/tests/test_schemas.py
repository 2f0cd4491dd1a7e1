#!/usr/bin/env python3
"""
Tests for JSON document models and loading
"""

import json

import pytest

from chaincx import ChainComplex
from errors import ValidationError
from formcore import UnimodularForm
from qsurgery import QuadraticComplex
from schemas import FormModel, InvariantRow, document_kind, load_document, read_json


@pytest.mark.parametrize("data,kind", [
    ({"gram": [[1]]}, "form"),
    ({"dims": [1], "n": 0}, "quadratic_complex"),
    ({"dims": [1]}, "complex"),
    ({"entries": [[1]]}, "matrix"),
])
def test_document_kind(data, kind):
    assert document_kind(data) == kind


def test_document_kind_rejects_unknown():
    with pytest.raises(ValidationError):
        document_kind({"rows": 2})
    with pytest.raises(ValidationError):
        document_kind([1, 2])


def test_load_each_kind(tmp_path):
    docs = {
        "form": ({"ring": "Z", "flavor": "quadratic", "gram": [[2, 1], [1, 2]]}, UnimodularForm),
        "complex": ({"ring": "Z", "lo": -1, "dims": [1, 1], "differentials": [[[3]]]}, ChainComplex),
        "quadratic_complex": ({"ring": "Z", "lo": 0, "dims": [2], "n": 0, "psi": [{"0": [[0, 1], [0, 0]]}]},
                              QuadraticComplex),
    }
    for name, (payload, cls) in docs.items():
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(payload))
        kind, obj = load_document(str(path))
        assert kind == name
        assert isinstance(obj, cls)


def test_load_reports_field(tmp_path):
    path = tmp_path / "f.json"
    path.write_text(json.dumps({"ring": "Z", "gram": "not a matrix"}))
    with pytest.raises(ValidationError, match="gram"):
        load_document(str(path))


def test_read_json_missing_file(tmp_path):
    with pytest.raises(ValidationError, match="cannot read"):
        read_json(str(tmp_path / "absent.json"))


def test_form_model_round_trip():
    model = FormModel(ring={"Zmod": 3}, gram=[[1, 0], [0, 2]])
    F = model.to_domain()
    assert FormModel.from_domain(F).to_domain() == F


def test_invariant_row_csv():
    row = InvariantRow(rank=8, signature=8, parity="even", det_class="1", witt_class="8")
    assert row.csv_row() == ["8", "8", "even", "1", "8"]
    assert InvariantRow(rank=2).csv_row() == ["2", "", "", "", ""]
