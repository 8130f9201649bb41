"""Request and response schemas for the HTTP service.

Complex numbers travel as [re, im] pairs throughout, matching the
report serialization of the core package, so service payloads and CLI
JSON output share one format.
"""

from typing import Annotated

from pydantic import BaseModel, Field, model_validator

Complex = Annotated[list[float], Field(min_length=2, max_length=2)]
ComplexMap = dict[str, Complex]


def to_pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


class HealthResponse(BaseModel):
    status: str
    version: str


class GammaRequest(BaseModel):
    z: Complex
    q: Complex
    p: Complex


class PochhammerRequest(BaseModel):
    a: Complex
    q: Complex


class ValueResponse(BaseModel):
    value: Complex


class AssignmentModel(BaseModel):
    params: ComplexMap = {}
    vars: ComplexMap = {}


class _SampledRequest(BaseModel):
    """Shared fields for endpoints that take an explicit assignment or
    draw one from a seed (exactly one of the two)."""

    q: Complex
    p: Complex
    assignment: AssignmentModel | None = None
    seed: int | None = None
    moduli_range: tuple[float, float] = (0.4, 0.8)
    target: float | None = None
    n_max: int | None = None

    @model_validator(mode="after")
    def _one_source(self):
        if self.assignment is not None and self.seed is not None:
            raise ValueError("give either an explicit assignment or a "
                             "sampling seed, not both")
        return self


class BetaRequest(_SampledRequest):
    t: Annotated[list[Complex], Field(min_length=5, max_length=5)] | None = None

    @model_validator(mode="after")
    def _t_is_assignment(self):
        if self.t is not None and (self.assignment is not None
                                   or self.seed is not None):
            raise ValueError("give t-values, an assignment, or a seed, "
                             "not a mixture")
        return self


class VerifyRequest(_SampledRequest):
    identity_id: str


class TreeRequest(_SampledRequest):
    word: str


class ReportModel(BaseModel):
    """Mirror of the verification report serialization."""

    identity_id: str
    assignment: AssignmentModel
    lhs: Complex
    rhs: Complex
    abs_err: float
    rel_err: float
    nodes_used: list[int]
    converged: bool
    runtime_ms: float


class TreeReportModel(BaseModel):
    word: str
    assignment: AssignmentModel
    beta: Complex
    residual: Complex
    rel_residual: float
    converged: bool
    est_error: float | None = None
    runtime_ms: float


class ErrorResponse(BaseModel):
    error: str
    detail: str
