"""HTTP facade over one loaded model for the interactive what-if UI.

The service adds no numerics: every response is byte-reproducible through
the library with the same inputs and seeds. One model per process, loaded at
startup and immutable afterwards, so concurrent requests share state safely.
Request bodies follow the JSON schemas documented in docs/schemas.md.

Status codes: 400 malformed request, 422 impossible evidence, 503 no model
loaded, 202 influence job accepted for polling.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import analytics, persist
from .data import Dataset, complete_cases, load_dataset
from .inference import ImpossibleEvidenceError, query
from .model import BayesianNetwork
from .params import ParameterPosterior, posterior_mean_network


class ApiError(Exception):
    def __init__(self, status: int, detail: str):
        self.status = status
        self.detail = detail


@dataclass
class SessionModel:
    posterior: ParameterPosterior
    net: BayesianNetwork
    model_id: str
    positives: Optional[Dataset] = None


@dataclass
class _Job:
    status: str = "running"  # running | done | failed
    result: Optional[dict] = None
    error: Optional[str] = None


class QueryBody(BaseModel):
    evidence: dict[str, Any] = {}
    target: str


class RiskMapBody(BaseModel):
    target: str
    target_state: Any
    condition: dict[str, Any] = {}
    axes: list[str]
    n_param_samples: int = 1000
    level: float = 0.9
    seed: int = 0


class InfluenceBody(BaseModel):
    target: str
    target_state: Any
    iterations: int = 10
    seed: int = 0
    rows: Optional[list[dict[str, Any]]] = None


def load_session(model_path, positives_path=None) -> SessionModel:
    posterior = persist.load_model(model_path)
    positives = None
    if positives_path:
        ds, _ = load_dataset(positives_path, posterior.schema, name="positives")
        positives, _ = complete_cases(ds)
    return SessionModel(
        posterior=posterior,
        net=posterior_mean_network(posterior),
        model_id=persist.model_id(posterior),
        positives=positives,
    )


def create_app(
    model_path=None,
    positives_path=None,
    session: SessionModel | None = None,
    influence_budget: int = 20000,
    ui_dir=None,
    cors_origins: tuple[str, ...] = ("*",),
) -> FastAPI:
    """Build the application; ``session=None`` and no path means 503 everywhere."""
    app = FastAPI(title="bnrisk", version="1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )
    if session is None and model_path is not None:
        session = load_session(model_path, positives_path)
    app.state.session = session
    app.state.jobs = {}
    app.state.jobs_lock = threading.Lock()
    app.state.influence_budget = influence_budget

    @app.exception_handler(RequestValidationError)
    async def _malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": jsonable_encoder(exc.errors())})

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"detail": exc.detail})

    def _session() -> SessionModel:
        if app.state.session is None:
            raise ApiError(503, "no model loaded")
        return app.state.session

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "model_loaded": app.state.session is not None}

    @app.get("/model")
    def model_info():
        s = _session()
        return {
            "model_id": s.model_id,
            "schema": persist.schema_to_obj(s.posterior.schema),
            "dag": persist.dag_to_obj(s.posterior.dag),
            "alpha": s.posterior.alpha,
            "provenance": list(s.posterior.provenance),
            "positives_rows": s.positives.n_rows if s.positives is not None else 0,
        }

    def _coerce_evidence(s: SessionModel, evidence: dict, target: str | None = None) -> dict[str, int]:
        try:
            ev = s.posterior.schema.coerce_evidence(evidence)
        except (KeyError, ValueError) as e:
            raise ApiError(400, str(e))
        if target is not None and target in ev:
            raise ApiError(400, "target variable cannot appear in the evidence")
        return ev

    @app.post("/query")
    def run_query(body: QueryBody):
        s = _session()
        if body.target not in s.posterior.schema:
            raise ApiError(400, f"unknown variable {body.target!r}")
        ev = _coerce_evidence(s, body.evidence, body.target)
        try:
            res = query(s.net, ev, body.target)
        except ImpossibleEvidenceError as e:
            raise ApiError(422, str(e))
        return {
            "target": body.target,
            "states": list(s.posterior.schema.variable(body.target).states),
            "distribution": [float(p) for p in res.distribution],
            "evidence_probability": res.evidence_probability,
        }

    @app.post("/riskmap")
    def run_riskmap(body: RiskMapBody):
        s = _session()
        spec = analytics.RiskMapSpec(
            target=body.target,
            target_state=body.target_state,
            condition=body.condition,
            axes=tuple(body.axes),
            n_param_samples=body.n_param_samples,
            level=body.level,
            seed=body.seed,
        )
        try:
            m = analytics.risk_map(s.posterior, spec)
        except ImpossibleEvidenceError as e:
            raise ApiError(422, str(e))
        except analytics.DegenerateBaselineError as e:
            raise ApiError(422, str(e))
        except (KeyError, ValueError) as e:
            raise ApiError(400, str(e))
        return analytics.riskmap_to_obj(m)

    def _influence_dataset(s: SessionModel, body: InfluenceBody) -> Dataset:
        if body.rows is None:
            if s.positives is None:
                raise ApiError(400, "no rows supplied and no positives loaded")
            return s.positives
        schema = s.posterior.schema
        codes = np.zeros((len(body.rows), len(schema)), dtype=np.int16)
        for i, row in enumerate(body.rows):
            filled = dict(row)
            filled.setdefault(body.target, body.target_state)
            try:
                ev = schema.coerce_evidence(filled)
            except (KeyError, ValueError) as e:
                raise ApiError(400, f"row {i}: {e}")
            missing = [n for n in schema.names if n not in ev]
            if missing:
                raise ApiError(400, f"row {i} misses variables {missing}")
            codes[i] = [ev[n] for n in schema.names]
        return Dataset(schema, codes, np.zeros(len(body.rows), dtype=np.int32), "request")

    def _run_influence(s: SessionModel, body: InfluenceBody, ds: Dataset) -> dict:
        report = analytics.influential_findings(
            s.posterior, ds, body.target, body.target_state,
            iterations=body.iterations, seed=body.seed,
        )
        return analytics.influence_to_obj(report)

    @app.post("/influence")
    def run_influence(body: InfluenceBody):
        s = _session()
        if body.target not in s.posterior.schema:
            raise ApiError(400, f"unknown variable {body.target!r}")
        if body.iterations < 1:
            raise ApiError(400, "iterations must be >= 1")
        ds = _influence_dataset(s, body)
        if ds.n_rows * body.iterations <= app.state.influence_budget:
            try:
                return _run_influence(s, body, ds)
            except (KeyError, ValueError) as e:
                raise ApiError(400, str(e))
        token = uuid.uuid4().hex
        job = _Job()
        with app.state.jobs_lock:
            app.state.jobs[token] = job

        def work():
            try:
                job.result = _run_influence(s, body, ds)
                job.status = "done"
            except Exception as e:  # surfaced via the poll endpoint
                job.error = str(e)
                job.status = "failed"

        threading.Thread(target=work, daemon=True).start()
        return JSONResponse(
            status_code=202,
            content={"job": token, "status": "running", "poll": f"/influence/jobs/{token}"},
        )

    @app.get("/influence/jobs/{token}")
    def influence_job(token: str):
        with app.state.jobs_lock:
            job = app.state.jobs.get(token)
        if job is None:
            raise ApiError(404, "unknown job token")
        if job.status == "running":
            return JSONResponse(status_code=202, content={"job": token, "status": "running"})
        if job.status == "failed":
            return JSONResponse(status_code=500, content={"job": token, "status": "failed", "detail": job.error})
        return job.result

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
