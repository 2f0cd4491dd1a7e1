#!/usr/bin/env python3
"""
JSON document models for the command-line front end

Each model mirrors one JSON schema (matrix, form, chain complex, quadratic
complex) and converts to the library's domain objects with to_domain().
Report models describe what the CLI writes with --out and --csv.
"""

import json
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field
from pydantic import ValidationError as PydanticValidationError

from chaincx import ChainComplex
from errors import ValidationError
from exactalg import Matrix, RingSpec
from formcore import UnimodularForm, form_from_json
from qsurgery import QuadraticComplex

RingField = Union[str, Dict[str, int]]


class MatrixModel(BaseModel):
    """{"ring": "Z" | {"Zmod": n}, "rows": r, "cols": c, "entries": [[...], ...]}"""

    ring: RingField = Field(default="Z", description="Ground ring")
    rows: int = Field(..., ge=0)
    cols: int = Field(..., ge=0)
    entries: List[List[int]] = Field(default_factory=list)

    def to_domain(self) -> Matrix:
        return Matrix(RingSpec.parse(self.ring), self.rows, self.cols, self.entries)

    @classmethod
    def from_domain(cls, A: Matrix) -> "MatrixModel":
        return cls(**A.to_json())


class FormModel(BaseModel):
    """A unimodular form under one of the four flavors"""

    model_config = ConfigDict(extra="forbid")

    ring: RingField = Field(..., description="Ground ring")
    flavor: str = Field(default="symmetric", description="symmetric, quadratic, even or general")
    epsilon: int = Field(default=1, description="+1 or -1")
    gram: List[List[int]] = Field(..., description="Gram matrix of b")
    q: Optional[List[Any]] = Field(default=None, description="q-values on the basis")
    general: Optional[Dict[str, Any]] = Field(default=None, description="Presentation of a general Q")

    def to_domain(self) -> UnimodularForm:
        return form_from_json(self.model_dump(exclude_none=True))

    @classmethod
    def from_domain(cls, F: UnimodularForm) -> "FormModel":
        return cls(**F.to_json())


class ComplexModel(BaseModel):
    """A bounded chain complex: ranks from degree lo upward and d_{lo+1}, .., d_hi"""

    ring: RingField = Field(..., description="Ground ring")
    lo: int
    hi: Optional[int] = None
    dims: List[int] = Field(..., min_length=1)
    differentials: List[Any] = Field(default_factory=list)

    def to_domain(self) -> ChainComplex:
        return ChainComplex.from_json(self.model_dump(exclude_none=True))

    @classmethod
    def from_domain(cls, C: ChainComplex) -> "ComplexModel":
        return cls(**C.to_json())


class QuadraticComplexModel(ComplexModel):
    """A chain complex with quadratic structure layers psi_0, psi_1, .."""

    n: int = Field(..., description="Formal dimension")
    epsilon: int = Field(default=1)
    psi: List[Any] = Field(default_factory=list)

    def to_domain(self) -> QuadraticComplex:
        return QuadraticComplex.from_json(self.model_dump(exclude_none=True))

    @classmethod
    def from_domain(cls, X: QuadraticComplex) -> "QuadraticComplexModel":
        return cls(**X.to_json())


# Reports


class InvariantRow(BaseModel):
    """One line of the invariant table"""

    rank: int
    signature: Optional[int] = None
    parity: Optional[str] = None
    det_class: Optional[str] = None
    witt_class: Optional[str] = None

    @staticmethod
    def csv_header() -> List[str]:
        return ["rank", "signature", "parity", "det-class", "witt-class"]

    def csv_row(self) -> List[str]:
        values = [self.rank, self.signature, self.parity, self.det_class, self.witt_class]
        return ["" if v is None else str(v) for v in values]


class GroupReport(BaseModel):
    command: str
    ring: str
    flavor: str
    epsilon: int
    description: str
    group: Dict[str, Any]


class NormalizeReport(BaseModel):
    form: Dict[str, Any]
    invariants: InvariantRow
    steps: int
    cobordisms: int
    step_log: Optional[str] = None


class CheckReport(BaseModel):
    kind: str
    ok: bool
    details: Dict[str, Any] = Field(default_factory=dict)


# Loading


def read_json(path: str) -> Any:
    """Parse a JSON file; decoding errors report line and column"""
    try:
        with open(path) as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: malformed JSON at line {e.lineno} column {e.colno}: {e.msg}")
    except OSError as e:
        raise ValidationError(f"{path}: cannot read input: {e.strerror}")


def document_kind(data: Any) -> str:
    if not isinstance(data, dict):
        raise ValidationError("Input must be a JSON object")
    if "gram" in data:
        return "form"
    if "psi" in data or "n" in data:
        return "quadratic_complex"
    if "dims" in data:
        return "complex"
    if "entries" in data:
        return "matrix"
    raise ValidationError("Cannot tell the input kind: expected a form, a complex or a matrix")


_MODELS = {
    "form": FormModel,
    "quadratic_complex": QuadraticComplexModel,
    "complex": ComplexModel,
    "matrix": MatrixModel,
}


def load_document(path: str) -> Tuple[str, Any]:
    """Read path and return (kind, domain object); every failure is a ValidationError"""
    data = read_json(path)
    kind = document_kind(data)
    try:
        model = _MODELS[kind].model_validate(data)
    except PydanticValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(x) for x in first["loc"])
        raise ValidationError(f"{path}: invalid {kind} document at '{where}': {first['msg']}")
    return kind, model.to_domain()
