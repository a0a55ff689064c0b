"""HTTP/JSON service exposing the toolkit: KB ingestion, map building,
inference, what-if sessions, and saved-map persistence.

Endpoints return the MapDocument / InferenceResult / EditSet / MetricsReport
schemas used by the library; every semantic payload equals the corresponding
library call.  Errors use the body {"code", "message", "detail"}.

Environment overrides: CORA_PORT, CORA_KB, CORA_MAPS (and CORA_UI for the
optional static front-end bundle served under /ui).
"""

from __future__ import annotations

import asyncio
import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import builder, inference, kb as kb_mod, metrics as metrics_mod, model as model_mod
from .util import canonical_json


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail=None):
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail
        super().__init__(message)

    def body(self) -> dict:
        return {"code": self.code, "message": self.message, "detail": self.detail}


@dataclass
class ServiceConfig:
    kb_path: str | Path
    maps_dir: str | Path
    port: int = 8000
    ui_dir: str | Path | None = None

    @classmethod
    def from_env(cls, **overrides) -> "ServiceConfig":
        kb_path = overrides.get("kb_path") or os.environ.get("CORA_KB")
        maps_dir = overrides.get("maps_dir") or os.environ.get("CORA_MAPS", "./maps")
        port = int(overrides.get("port") or os.environ.get("CORA_PORT", "8000"))
        ui_dir = overrides.get("ui_dir") or os.environ.get("CORA_UI")
        if not kb_path:
            raise ValueError("no knowledge base configured (set CORA_KB or pass kb_path)")
        return cls(kb_path=kb_path, maps_dir=maps_dir, port=port, ui_dir=ui_dir)


@dataclass
class MapSession:
    map_id: str
    model: model_mod.CausalModel
    revision: int = 0
    last_result: inference.InferenceResult | None = None
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)


class ServiceState:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.kb = kb_mod.KnowledgeBase.load(config.kb_path)
        self.maps_dir = Path(config.maps_dir)
        self.maps_dir.mkdir(parents=True, exist_ok=True)
        self.sessions: dict[str, MapSession] = {}
        self.kb_lock = asyncio.Lock()

    def mint_map_id(self, document: dict) -> str:
        digest = hashlib.sha256(canonical_json(document).encode("utf-8")).hexdigest()
        map_id = digest[:12]
        while map_id in self.sessions or (self.maps_dir / f"{map_id}.json").exists():
            if map_id in self.sessions and canonical_json(
                model_mod.to_json(self.sessions[map_id].model)
            ) == canonical_json(document):
                break
            map_id = digest[: len(map_id) + 4] or digest
        return map_id

    def session(self, map_id: str) -> MapSession:
        found = self.sessions.get(map_id)
        if found is None:
            found = self._load_saved(map_id)
        if found is None:
            raise ApiError(404, "not_found", f"no map with id '{map_id}'")
        return found

    def _load_saved(self, map_id: str) -> MapSession | None:
        path = self.maps_dir / f"{map_id}.json"
        if not path.exists():
            return None
        payload = json.loads(path.read_text(encoding="utf-8"))
        session = MapSession(
            map_id=map_id,
            model=model_mod.from_json(payload["map"]),
            revision=int(payload.get("revision", 0)),
        )
        self.sessions[map_id] = session
        if session.model.scenario and session.model.scenario.target:
            try:
                session.last_result = inference.infer(session.model)
            except inference.InferenceError:
                session.last_result = None
        return session

    def save(self, session: MapSession) -> Path:
        """Write-temp-then-rename so a crash never leaves a torn file."""
        payload = {
            "map_id": session.map_id,
            "revision": session.revision,
            "map": model_mod.to_json(session.model),
            "last_result": session.last_result.to_dict() if session.last_result else None,
        }
        target = self.maps_dir / f"{session.map_id}.json"
        fd, tmp_name = tempfile.mkstemp(dir=self.maps_dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(json.dumps(payload, ensure_ascii=False, indent=2))
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp_name, target)
        finally:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
        return target


def _params_from(raw: dict | None) -> inference.InferenceParams:
    raw = raw or {}
    try:
        return inference.InferenceParams(
            tau=float(raw.get("tau", inference.DEFAULT_TAU)),
            max_path_len=int(raw.get("max_path_len", inference.DEFAULT_MAX_PATH_LEN)),
        )
    except (TypeError, ValueError) as exc:
        raise ApiError(400, "bad_request", f"bad inference params: {exc}")


def _search_params_from(raw: dict | None) -> builder.SearchParams:
    raw = raw or {}
    try:
        beam_width = raw.get("beam_width")
        top_k = raw.get("top_k")
        return builder.SearchParams(
            max_hops=int(raw.get("max_hops", 6)),
            beam_width=None if beam_width is None else int(beam_width),
            top_k=None if top_k is None else int(top_k),
            heuristic=str(raw.get("heuristic", "trigram")),
            min_confidence=float(raw.get("min_confidence", 0.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ApiError(400, "bad_request", f"bad search params: {exc}")


def create_app(config: ServiceConfig) -> FastAPI:
    state = ServiceState(config)
    app = FastAPI(title="cora", version="0.1.0")
    app.state.cora = state

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.body())

    @app.exception_handler(RequestValidationError)
    async def handle_validation(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"code": "bad_request", "message": "invalid request body",
                     "detail": str(exc)},
        )

    def _wrap(exc: Exception) -> ApiError:
        if isinstance(exc, ApiError):
            return exc
        if isinstance(exc, inference.EditRejection):
            return ApiError(422, "edit_rejected", str(exc),
                            {"index": exc.index, "reason": exc.reason})
        if isinstance(exc, model_mod.SchemaError):
            return ApiError(400, "schema_error", str(exc), {"path": exc.path})
        if isinstance(exc, (builder.BuildError, inference.InferenceError,
                            metrics_mod.AnnotationError, kb_mod.KnowledgeBaseError,
                            ValueError)):
            return ApiError(400, "bad_request", str(exc))
        raise exc

    @app.get("/health")
    async def health():
        return {"status": "ok", "kb_events": state.kb.event_count}

    @app.post("/kb/ingest")
    async def kb_ingest(body: dict):
        records = body.get("records")
        if not isinstance(records, list):
            raise ApiError(400, "bad_request", "body needs a 'records' array")
        async with state.kb_lock:
            try:
                report = kb_mod.ingest_events(records, state.kb.path)
                state.kb = kb_mod.KnowledgeBase.load(state.kb.path)
            except Exception as exc:
                raise _wrap(exc)
        return report.to_dict()

    @app.post("/maps/build")
    async def maps_build(body: dict):
        sources = body.get("sources")
        target = body.get("target")
        if not isinstance(sources, list) or not isinstance(target, str):
            raise ApiError(400, "bad_request", "body needs 'sources' (array) and 'target'")
        try:
            result = builder.build_map(
                state.kb, sources, target, params=_search_params_from(body.get("params"))
            )
            run = inference.infer(result.model, _params_from(body.get("infer_params")))
        except Exception as exc:
            raise _wrap(exc)
        document = model_mod.to_json(result.model)
        map_id = state.mint_map_id(document)
        session = MapSession(map_id=map_id, model=result.model, last_result=run)
        state.sessions[map_id] = session
        return {
            "map_id": map_id,
            "revision": session.revision,
            "map": document,
            "result": run.to_dict(),
            "diagnostics": result.diagnostics.to_dict(),
        }

    @app.get("/maps")
    async def maps_list():
        entries = {}
        for path in sorted(state.maps_dir.glob("*.json")):
            entries[path.stem] = {"map_id": path.stem, "saved": True}
        for map_id, session in state.sessions.items():
            entry = entries.setdefault(map_id, {"map_id": map_id, "saved": False})
            entry["revision"] = session.revision
        return {"maps": [entries[k] for k in sorted(entries)]}

    @app.get("/maps/{map_id}")
    async def maps_get(map_id: str):
        session = state.session(map_id)
        return {
            "map_id": session.map_id,
            "revision": session.revision,
            "map": model_mod.to_json(session.model),
            "result": session.last_result.to_dict() if session.last_result else None,
        }

    @app.post("/maps/{map_id}/infer")
    async def maps_infer(map_id: str, body: dict | None = None):
        body = body or {}
        session = state.session(map_id)
        async with session.lock:
            try:
                run = inference.infer(session.model, _params_from(body.get("params")))
            except Exception as exc:
                raise _wrap(exc)
            session.last_result = run
        return run.to_dict()

    @app.post("/maps/{map_id}/whatif")
    async def maps_whatif(map_id: str, body: dict):
        session = state.session(map_id)
        raw_edits = body.get("edits")
        if not isinstance(raw_edits, list):
            raise ApiError(400, "bad_request", "body needs an 'edits' array")
        try:
            edits = inference.parse_edits(raw_edits)
            run = inference.whatif(session.model, edits, _params_from(body.get("params")))
        except Exception as exc:
            raise _wrap(exc)
        return run.to_dict()

    @app.patch("/maps/{map_id}")
    async def maps_patch(map_id: str, body: dict):
        session = state.session(map_id)
        raw_edits = body.get("edits")
        if not isinstance(raw_edits, list):
            raise ApiError(400, "bad_request", "body needs an 'edits' array")
        expected = body.get("expected_revision")
        async with session.lock:
            if expected is not None and int(expected) != session.revision:
                raise ApiError(
                    409, "conflict",
                    f"revision mismatch: expected {expected}, current {session.revision}",
                    {"current_revision": session.revision},
                )
            try:
                edits = inference.parse_edits(raw_edits)
                new_model = inference.apply_edits(session.model, edits)
                run = inference.infer(new_model, _params_from(body.get("params")))
            except Exception as exc:
                raise _wrap(exc)
            session.model = new_model
            session.revision += 1
            session.last_result = run
        return {
            "map_id": session.map_id,
            "revision": session.revision,
            "map": model_mod.to_json(session.model),
            "result": run.to_dict(),
        }

    @app.post("/maps/{map_id}/save")
    async def maps_save(map_id: str):
        session = state.session(map_id)
        async with session.lock:
            path = state.save(session)
        return {"map_id": map_id, "revision": session.revision, "path": str(path)}

    @app.post("/templates/instantiate")
    async def templates_instantiate(body: dict):
        raw_template = body.get("template")
        bindings = body.get("bindings")
        if not isinstance(raw_template, dict) or not isinstance(bindings, dict):
            raise ApiError(400, "bad_request", "body needs 'template' and 'bindings'")
        try:
            template = builder.template_from_json(raw_template)
            instantiated = builder.instantiate_template(template, bindings, state.kb)
        except Exception as exc:
            raise _wrap(exc)
        document = model_mod.to_json(instantiated)
        map_id = state.mint_map_id(document)
        session = MapSession(map_id=map_id, model=instantiated)
        scenario = instantiated.scenario
        if scenario is not None and scenario.target is not None:
            try:
                session.last_result = inference.infer(instantiated)
            except inference.InferenceError:
                session.last_result = None
        state.sessions[map_id] = session
        return {
            "map_id": map_id,
            "revision": session.revision,
            "map": document,
            "result": session.last_result.to_dict() if session.last_result else None,
        }

    @app.post("/interpret")
    async def interpret(body: dict):
        # Extension point: free-text scenario interpretation (extracting the
        # salient source/target concepts from prose) is intentionally not
        # implemented; clients pass structured concepts to /maps/build.
        raise ApiError(
            501,
            "not_implemented",
            "free-text scenario interpretation is an extension point; "
            "POST /maps/build with structured sources and a target instead",
        )

    @app.post("/metrics")
    async def metrics_endpoint(body: dict):
        raw_annotations = body.get("annotations")
        if not isinstance(raw_annotations, list):
            raise ApiError(400, "bad_request", "body needs an 'annotations' array")
        try:
            annotations = metrics_mod.annotations_from_json(raw_annotations)
            complexity = None
            if body.get("complexity") is not None:
                complexity = metrics_mod.complexity_from_json(body["complexity"])
            report = metrics_mod.compute_metrics(
                annotations, complexity,
                count_all_citations=bool(body.get("count_all_citations", False)),
            )
        except Exception as exc:
            raise _wrap(exc)
        return report.to_dict()

    ui_dir = config.ui_dir
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve(config: ServiceConfig) -> None:
    """Run the service; raises on an unloadable knowledge base."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host="127.0.0.1", port=config.port)
