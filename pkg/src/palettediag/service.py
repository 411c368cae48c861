"""HTTP analysis service: upload ensembles, run analyses, fetch diagrams.

Everything lives under /v1.  Ensemble ids are content hashes, so uploads
are idempotent and every analysis is addressed by (ensemble id, config
hash).  Responses for a given config are stored as bytes and replayed
verbatim; the divergence matrix and the group t-SNE are cached per
ensemble so that changing only the target group count M is cheap, while
changing alpha recomputes both.

Validation is the package's own: a bad ensemble body is a 400 with the
validation message, an infeasible or malformed config is a 422.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field

from anyio import to_thread
from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .ensemble import PartitionEnsemble, load_ensemble
from .errors import (
    ConfigError,
    EmptyGroupError,
    EnsembleValidationError,
    NumericalError,
    PipelineStageError,
)
from .pipeline import (
    DivergenceCache,
    PipelineConfig,
    report_geometry,
    run_pipeline,
)


@dataclass
class _Session:
    ensemble: PartitionEnsemble
    lock: threading.Lock = field(default_factory=threading.Lock)
    cache: DivergenceCache = field(default_factory=DivergenceCache)
    # config hash -> (response bytes, svg_1d bytes, svg_2d bytes)
    analyses: dict[str, tuple[bytes, bytes, bytes]] = field(default_factory=dict)


class SessionStore:
    """In-memory ensembles and analysis caches, optionally directory-backed."""

    def __init__(self, store_dir: str | None = None):
        self._sessions: dict[str, _Session] = {}
        self._registry_lock = threading.Lock()
        self._store_dir = store_dir
        if store_dir is not None:
            os.makedirs(store_dir, exist_ok=True)

    def add(self, ensemble: PartitionEnsemble) -> str:
        eid = ensemble.content_hash()
        with self._registry_lock:
            if eid not in self._sessions:
                self._sessions[eid] = _Session(ensemble=ensemble)
                if self._store_dir is not None:
                    path = os.path.join(self._store_dir, f"{eid}.json")
                    if not os.path.exists(path):
                        with open(path, "w", encoding="utf-8") as fh:
                            json.dump(ensemble.to_dict(), fh)
        return eid

    def get(self, eid: str) -> _Session | None:
        with self._registry_lock:
            session = self._sessions.get(eid)
        if session is None and self._store_dir is not None:
            path = os.path.join(self._store_dir, f"{eid}.json")
            if os.path.exists(path):
                ensemble = load_ensemble(path)
                self.add(ensemble)
                with self._registry_lock:
                    session = self._sessions.get(eid)
        return session

    def clear_caches(self) -> None:
        with self._registry_lock:
            for session in self._sessions.values():
                with session.lock:
                    session.cache.clear()
                    session.analyses.clear()


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"detail": message})


def create_app(store_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="palette analysis service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(store_dir=store_dir)
    app.state.store = store

    @app.get("/v1/health")
    def health():
        return {"status": "ok"}

    @app.post("/v1/ensembles", status_code=201)
    async def upload(request: Request):
        body = await request.body()
        try:
            ensemble = load_ensemble(body)
        except EnsembleValidationError as exc:
            return _error(400, str(exc))
        eid = store.add(ensemble)
        return JSONResponse(status_code=201, content={"id": eid})

    @app.post("/v1/ensembles/{eid}/analyze")
    async def analyze(eid: str, request: Request):
        session = store.get(eid)
        if session is None:
            return _error(404, f"unknown ensemble id {eid!r}")
        try:
            raw = json.loads((await request.body()).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            return _error(422, f"config is not valid JSON: {exc}")
        try:
            cfg = PipelineConfig.from_dict(raw)
        except (ConfigError, TypeError) as exc:
            return _error(422, str(exc))

        chash = cfg.config_hash()
        # compute in the worker pool: the per-ensemble lock serializes
        # identical work without stalling other ensembles' requests
        outcome = await to_thread.run_sync(_analyze_locked, session, cfg, chash)
        if isinstance(outcome, JSONResponse):
            return outcome
        return Response(content=outcome, media_type="application/json")

    @app.get("/v1/ensembles/{eid}/diagram")
    def diagram(eid: str, config_hash: str, kind: str = "1d"):
        session = store.get(eid)
        if session is None:
            return _error(404, f"unknown ensemble id {eid!r}")
        if kind not in ("1d", "2d"):
            return _error(422, f"kind must be '1d' or '2d', not {kind!r}")
        with session.lock:
            cached = session.analyses.get(config_hash)
        if cached is None:
            return _error(
                404, f"no analysis with config hash {config_hash!r}"
            )
        svg = cached[1] if kind == "1d" else cached[2]
        return Response(content=svg, media_type="image/svg+xml")

    return app


def _analyze_locked(session: _Session, cfg: PipelineConfig, chash: str):
    """Serve stored response bytes, or compute and store them."""
    with session.lock:
        cached = session.analyses.get(chash)
        if cached is None:
            try:
                result = run_pipeline(session.ensemble, cfg, cache=session.cache)
            except PipelineStageError as exc:
                return _map_pipeline_error(exc)
            except (ConfigError, EmptyGroupError) as exc:
                return _error(422, str(exc))
            body = json.dumps(
                {
                    "config_hash": chash,
                    "payload": result.report.payload,
                    "geometry": report_geometry(result.report),
                    "runtime": result.report.runtime,
                },
                sort_keys=True,
                separators=(",", ":"),
            ).encode("utf-8")
            cached = (
                body,
                result.svg_1d.encode("utf-8"),
                result.svg_2d.encode("utf-8"),
            )
            session.analyses[chash] = cached
        return cached[0]


def _map_pipeline_error(exc: PipelineStageError) -> JSONResponse:
    cause = exc.cause
    if isinstance(cause, (ConfigError, EmptyGroupError, EnsembleValidationError)):
        return _error(422, str(exc))
    if isinstance(cause, NumericalError):
        return _error(500, str(exc))
    return _error(500, str(exc))
