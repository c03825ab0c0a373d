"""Session-scoped HTTP API exposing the four-step workflow.

Each session walks filter -> correlation -> prune -> train over one shared
immutable dataset snapshot loaded at server start.  Re-running an earlier
step invalidates everything after it.  Training runs in a background thread;
the results endpoint answers 202 until the bundle is ready.  Only one
mutating request per session may run at a time (409 otherwise); reads are
always allowed.
"""

from __future__ import annotations

import json
import threading
import uuid
import warnings
from datetime import datetime, timedelta, timezone

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from . import pipeline
from .errors import DataError, SchemaError, StepOrderError, ValidationError
from .features import correlation_matrix
from .report import SCORE_KINDS, build_bundle, dump_json, export_geolayers

DEFAULT_TTL_HOURS = 24.0


class FilterBody(BaseModel):
    years: tuple[int, int]
    hazard_types: list[str] | None = None
    regions: list[str] | None = None
    region_prefixes: list[str] = Field(default_factory=list)
    aggregation: str = "per-year"
    pooled: bool = False
    damage_note: str = ""


class PruneBody(BaseModel):
    mode: str = "threshold"
    threshold: float | None = None
    names: list[str] | None = None


class TrainBody(BaseModel):
    families: list[str] = Field(default_factory=lambda: ["linear"])
    targets: list[str] = Field(default_factory=lambda: ["all"])
    split_fraction: float = 0.8
    seed: int = 42
    cv_folds: int = 5
    run_causal: bool = False
    causal_b: int = 100
    grids: dict | None = None


class SessionNotFound(Exception):
    """Unknown or expired session id; answered with 404."""


class Session:
    def __init__(self, ttl_hours: float):
        self.id = uuid.uuid4().hex
        self.state = "created"
        self.created = datetime.now(timezone.utc)
        self.expires = self.created + timedelta(hours=ttl_hours)
        self.lock = threading.Lock()
        self.filter_params = None
        self.scores = None
        self.layers = None           # kind -> geojson bytes
        self.missing_geometry = None
        self.aligned = None
        self.pruned = None
        self.pruning_report = None
        self.prune_params = None
        self.train_params = None
        self.train_status = "none"   # none | running | complete | failed
        self.train_error = None
        self.job_id = None
        self.bundle = None
        self.train_result = None

    def invalidate_from(self, step: str) -> None:
        if step in ("filter",):
            self.aligned = None
        if step in ("filter", "prune"):
            self.pruned = None
            self.pruning_report = None
            self.prune_params = None
        self.train_params = None
        self.train_status = "none"
        self.train_error = None
        self.job_id = None
        self.bundle = None
        self.train_result = None

    def info(self) -> dict:
        return {
            "session_id": self.id,
            "state": self.state,
            "created": self.created.isoformat(),
            "expires": self.expires.isoformat(),
            "train_status": self.train_status,
        }


def _error_response(exc) -> JSONResponse:
    if isinstance(exc, ValidationError):
        return JSONResponse(status_code=422, content={"detail": [{
            "loc": ["body", exc.field or "params"],
            "msg": str(exc), "type": "value_error",
        }]})
    if isinstance(exc, StepOrderError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})
    if isinstance(exc, (DataError, SchemaError)):
        return JSONResponse(status_code=400, content={"detail": str(exc)})
    raise exc


def create_app(data: pipeline.LoadedData, static_dir=None,
               ttl_hours: float = DEFAULT_TTL_HOURS) -> FastAPI:
    """Build the API over one loaded dataset snapshot."""
    app = FastAPI(title="PRIME resilience service", version=pipeline.VERSION)
    sessions: dict[str, Session] = {}

    @app.exception_handler(ValidationError)
    @app.exception_handler(StepOrderError)
    @app.exception_handler(DataError)
    @app.exception_handler(SchemaError)
    async def _prime_error_handler(request: Request, exc):
        return _error_response(exc)

    @app.exception_handler(SessionNotFound)
    async def _not_found_handler(request: Request, exc):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    def get_session(session_id: str) -> Session:
        sess = sessions.get(session_id)
        if sess is None:
            raise SessionNotFound(f"unknown session {session_id}")
        if datetime.now(timezone.utc) >= sess.expires:
            raise SessionNotFound(f"session {session_id} has expired")
        return sess

    def mutating(sess: Session):
        if not sess.lock.acquire(blocking=False):
            raise StepOrderError("step in progress")
        return sess.lock

    @app.get("/meta")
    def meta():
        return {"coverage": data.coverage(), "version": pipeline.VERSION,
                "score_kinds": list(SCORE_KINDS)}

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        body = await request.body()
        if body:
            try:
                json.loads(body)
            except ValueError:
                return JSONResponse(status_code=400,
                                    content={"detail": "malformed JSON body"})
        sess = Session(ttl_hours)
        sessions[sess.id] = sess
        return {"session_id": sess.id}

    @app.get("/sessions/{session_id}")
    def session_info(session_id: str):
        return get_session(session_id).info()

    @app.post("/sessions/{session_id}/filter")
    def filter_step(session_id: str, body: FilterBody):
        sess = get_session(session_id)
        lock = mutating(sess)
        try:
            params = pipeline.FilterParams(
                years=tuple(body.years), hazard_types=body.hazard_types,
                regions=body.regions, region_prefixes=body.region_prefixes,
                aggregation=body.aggregation, pooled=body.pooled,
                damage_note=body.damage_note)
            scores = pipeline.run_scoring(data, params)
            layers, missing = (None, [])
            if data.geometry is not None:
                layers, missing = export_geolayers(
                    scores.region_values, scores.region_classes, data.geometry)
            sess.filter_params = params
            sess.scores = scores
            sess.layers = {k: dump_json(doc) for k, doc in (layers or {}).items()}
            sess.missing_geometry = missing
            sess.invalidate_from("filter")
            sess.state = "scored"

            stats = {}
            for kind in SCORE_KINDS:
                vals = list(scores.region_values[kind].values())
                stats[kind] = {"min": min(vals), "max": max(vals),
                               "mean": sum(vals) / len(vals)}
            return {
                "state": sess.state,
                "rows": len(scores.display_rows),
                "excluded_region_years": len(scores.excluded),
                "regions": len(scores.region_values["resilience"]),
                "score_stats": stats,
                "layer_urls": {k: f"/sessions/{sess.id}/layers/{k}.geojson"
                               for k in (sess.layers or {})},
                "missing_geometry": missing,
            }
        finally:
            lock.release()

    @app.get("/sessions/{session_id}/layers/{kind}.geojson")
    def layer(session_id: str, kind: str):
        sess = get_session(session_id)
        if sess.state == "created" or not sess.layers:
            raise StepOrderError("run the filter step first")
        if kind not in sess.layers:
            raise ValidationError(f"unknown layer {kind!r}", field="kind")
        return Response(content=sess.layers[kind], media_type="application/geo+json")

    def _ensure_aligned(sess: Session):
        if sess.state == "created":
            raise StepOrderError("run the filter step first")
        if sess.aligned is None:
            sess.aligned = pipeline.build_aligned(data, sess.scores)
        return sess.aligned

    @app.get("/sessions/{session_id}/correlation")
    def correlation(session_id: str):
        sess = get_session(session_id)
        aligned = _ensure_aligned(sess)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            matrix, names = correlation_matrix(aligned)
        current = sess.pruning_report or {"removed": [],
                                          "retained": list(aligned.feature_names)}
        return {
            "names": names,
            "matrix": [[float(v) for v in row] for row in matrix],
            "retained": current["retained"],
            "removed": current["removed"],
        }

    @app.post("/sessions/{session_id}/prune")
    def prune_step(session_id: str, body: PruneBody):
        sess = get_session(session_id)
        lock = mutating(sess)
        try:
            aligned = _ensure_aligned(sess)
            if body.mode not in ("manual", "threshold"):
                raise ValidationError(f"unknown prune mode {body.mode!r}", field="mode")
            threshold = body.threshold if body.threshold is not None else 0.7
            pruned, rep = pipeline.run_pruning(aligned, mode=body.mode,
                                               threshold=threshold, names=body.names)
            sess.invalidate_from("prune")
            sess.pruned = pruned
            sess.pruning_report = rep
            sess.prune_params = {"mode": body.mode, "threshold": body.threshold,
                                 "names": body.names}
            sess.state = "pruned"
            return rep
        finally:
            lock.release()

    @app.post("/sessions/{session_id}/train", status_code=202)
    def train_step(session_id: str, body: TrainBody):
        sess = get_session(session_id)
        if sess.state not in ("scored", "pruned", "trained"):
            raise StepOrderError("run the filter step (and optionally prune) first")
        if sess.train_status == "running":
            return {"job_id": sess.job_id, "status": "running"}  # duplicate submit
        lock = mutating(sess)
        try:
            if not 0.0 < body.split_fraction < 1.0:
                raise ValidationError(
                    f"split_fraction must be in (0, 1), got {body.split_fraction}",
                    field="split_fraction")
            aligned = sess.pruned if sess.pruned is not None else _ensure_aligned(sess)
            tp = pipeline.TrainParams(
                families=list(body.families), targets=list(body.targets),
                split_fraction=body.split_fraction, seed=body.seed,
                run_causal=body.run_causal, cv_folds=body.cv_folds,
                grids=body.grids,
                causal_options={"B": body.causal_b, "seed": body.seed})
            sess.train_params = tp
            sess.train_status = "running"
            sess.train_error = None
            sess.job_id = uuid.uuid4().hex

            def job():
                try:
                    result = pipeline.run_training(aligned, tp)
                    bundle = pipeline.build_output_bundle(
                        data, sess.scores, aligned=aligned,
                        pruning_report=sess.pruning_report, train=result,
                        filter_params=sess.filter_params.to_dict(),
                        prune_params=sess.prune_params,
                        train_params=tp.to_dict())
                    sess.train_result = result
                    sess.bundle = bundle
                    sess.train_status = "complete"
                    sess.state = "trained"
                except Exception as exc:  # noqa: BLE001 - reported via results
                    sess.train_error = f"{type(exc).__name__}: {exc}"
                    sess.train_status = "failed"
                finally:
                    sess.lock.release()

            threading.Thread(target=job, daemon=True).start()
        except BaseException:
            lock.release()
            raise
        return {"job_id": sess.job_id, "status": "running"}

    @app.get("/sessions/{session_id}/results")
    def results(session_id: str):
        sess = get_session(session_id)
        if sess.train_status == "none":
            raise StepOrderError("no training run for this session")
        if sess.train_status == "running":
            return JSONResponse(status_code=202,
                                content={"job_id": sess.job_id, "status": "running"})
        if sess.train_status == "failed":
            return JSONResponse(status_code=500,
                                content={"status": "failed",
                                         "error": sess.train_error})
        files = {rel: content.decode("utf-8") for rel, content in sess.bundle.items()}
        return {
            "status": "complete",
            "job_id": sess.job_id,
            "metrics": json.loads(files["metrics.json"]),
            "metrics_text": files["metrics.txt"],
            "explanations": {rel.split("/", 1)[1].removesuffix(".json"):
                             json.loads(content)
                             for rel, content in files.items()
                             if rel.startswith("explanations/")},
            "dags": {rel.split("/", 1)[1].removesuffix(".json"):
                     json.loads(content)
                     for rel, content in files.items()
                     if rel.startswith("dag/") and rel.endswith(".json")},
            "manifest": json.loads(files["manifest.json"]),
            "files": files,
        }

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="workbench")

    return app
