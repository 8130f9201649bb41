"""HTTP face of the library.

Every endpoint body lives in a plain handler function that takes a
request model and returns a response model; the FastAPI app is thin
wiring around those handlers plus exception-to-status mapping.  The CLI
calls the same handlers directly when no server address is given, so
both transports run identical code.
"""

from __future__ import annotations

import math
import time

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..bailey import eval_bailey_expr, flatten, pair_residual, seed_pair, \
    TreeWord, tree_pair
from ..ellgamma import BaseParams, elliptic_gamma, qpochhammer_infinite
from ..errors import (ConstraintViolation, DomainError, NotConverged,
                      SamplingExhausted, ShapeError, UnknownSymbol)
from ..expr import Assignment
from ..quadrature import QuadratureConfig
from ..verify import (default_config, identity_sides, sample_params,
                      verify_identity)
from .models import (AssignmentModel, BetaRequest, ErrorResponse,
                     GammaRequest, HealthResponse, PochhammerRequest,
                     ReportModel, TreeReportModel, TreeRequest, ValueResponse,
                     VerifyRequest, to_pair)

__all__ = ["app", "create_app", "run_beta", "run_gamma", "run_pochhammer",
           "run_tree", "run_verify"]


def _cx(pair) -> complex:
    return complex(pair[0], pair[1])


def _assignment(model: AssignmentModel) -> Assignment:
    return Assignment({k: _cx(v) for k, v in model.params.items()},
                      {k: _cx(v) for k, v in model.vars.items()})


def _assignment_model(a: Assignment) -> AssignmentModel:
    return AssignmentModel(
        params={k: to_pair(v) for k, v in sorted(a.params.items())},
        vars={k: to_pair(v) for k, v in sorted(a.vars.items())})


def _budget(dim: int, req) -> QuadratureConfig | None:
    if req.target is None and req.n_max is None:
        return None
    return default_config(dim, n_max=req.n_max, target=req.target)


def run_gamma(req: GammaRequest) -> ValueResponse:
    base = BaseParams(q=_cx(req.q), p=_cx(req.p))
    return ValueResponse(value=to_pair(elliptic_gamma(_cx(req.z), base)))


def run_pochhammer(req: PochhammerRequest) -> ValueResponse:
    return ValueResponse(value=to_pair(
        qpochhammer_infinite(_cx(req.a), _cx(req.q))))


def _resolve_assignment(req, sides, base: BaseParams) -> Assignment:
    if req.assignment is not None:
        return _assignment(req.assignment)
    return sample_params(sides.constraints, req.seed or 0, req.moduli_range,
                         base=base, circle_vars=sides.circle_vars)


def run_verify(req: VerifyRequest) -> ReportModel:
    base = BaseParams(q=_cx(req.q), p=_cx(req.p))
    sides = identity_sides(req.identity_id)
    a = _resolve_assignment(req, sides, base)
    cfg = _budget(max(*sides.dims(), 1), req)
    report = verify_identity(sides.identity_id, a, base, cfg)
    return ReportModel(**report.to_json())


def run_beta(req: BetaRequest) -> ReportModel:
    if req.t is not None:
        req = VerifyRequest(
            identity_id="beta", q=req.q, p=req.p,
            assignment=AssignmentModel(
                params={f"t{m}": v for m, v in enumerate(req.t)}),
            target=req.target, n_max=req.n_max)
    else:
        req = VerifyRequest(identity_id="beta", q=req.q, p=req.p,
                            assignment=req.assignment, seed=req.seed,
                            moduli_range=req.moduli_range,
                            target=req.target, n_max=req.n_max)
    return run_verify(req)


def run_tree(req: TreeRequest) -> TreeReportModel:
    base = BaseParams(q=_cx(req.q), p=_cx(req.p))
    pair = tree_pair(TreeWord.parse(req.word), seed_pair())
    if req.assignment is not None:
        a = _assignment(req.assignment)
    else:
        a = sample_params(pair.constraints, req.seed or 0, req.moduli_range,
                          base=base, circle_vars=(pair.ext_var,))
    dim = max(len(flatten(pair.alpha).int_vars) + 1,
              len(flatten(pair.beta).int_vars), 1)
    cfg = _budget(dim, req) or default_config(dim)
    start = time.perf_counter()
    beta_val, _ = eval_bailey_expr(pair.beta, a, base, cfg)
    est_error = None
    try:
        residual = pair_residual(pair, a, base, cfg)
        converged = True
    except NotConverged as exc:
        residual = complex(exc.best)
        # a cap too small for even one grid doubling leaves no error
        # estimate at all; report that as absent rather than infinite
        est = float(exc.est_error)
        est_error = est if math.isfinite(est) else None
        converged = False
    runtime_ms = (time.perf_counter() - start) * 1e3
    return TreeReportModel(
        word=str(TreeWord.parse(req.word)), assignment=_assignment_model(a),
        beta=to_pair(beta_val), residual=to_pair(residual),
        rel_residual=abs(residual) / max(abs(beta_val), 1e-300),
        converged=converged, est_error=est_error, runtime_ms=runtime_ms)


def run_health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


def _error_response(status: int, kind: str, exc: Exception) -> JSONResponse:
    body = ErrorResponse(error=kind, detail=str(exc))
    return JSONResponse(status_code=status, content=body.model_dump())


def create_app() -> FastAPI:
    app = FastAPI(title="ellbailey", version=__version__)

    @app.exception_handler(ConstraintViolation)
    async def _constraint(_, exc):
        return _error_response(409, "constraint-violation", exc)

    @app.exception_handler(SamplingExhausted)
    async def _exhausted(_, exc):
        return _error_response(409, "sampling-exhausted", exc)

    @app.exception_handler(DomainError)
    async def _domain(_, exc):
        return _error_response(422, "domain", exc)

    @app.exception_handler(ShapeError)
    async def _shape(_, exc):
        return _error_response(422, "shape", exc)

    @app.exception_handler(UnknownSymbol)
    async def _unknown(_, exc):
        return _error_response(422, "unknown-symbol", exc)

    @app.get("/health", response_model=HealthResponse)
    def health():
        return run_health()

    @app.post("/gamma", response_model=ValueResponse)
    def gamma(req: GammaRequest):
        return run_gamma(req)

    @app.post("/pochhammer", response_model=ValueResponse)
    def pochhammer(req: PochhammerRequest):
        return run_pochhammer(req)

    @app.post("/beta", response_model=ReportModel)
    def beta(req: BetaRequest):
        return run_beta(req)

    @app.post("/verify", response_model=ReportModel)
    def verify(req: VerifyRequest):
        return run_verify(req)

    @app.post("/tree", response_model=TreeReportModel)
    def tree(req: TreeRequest):
        return run_tree(req)

    return app


app = create_app()
