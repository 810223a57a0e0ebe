"""HTTP+JSON API over the session engine.

POST /v1/sessions                     create a session
GET  /v1/sessions/{id}                current session view
POST /v1/sessions/{id}/actions        {field, value, turn}
POST /v1/sessions/{id}/hints
POST /v1/sessions/{id}/expansions     {field, turn}
GET  /v1/students/{id}/skills
GET  /v1/problems/next                outer-loop stub: a problem spec to post back
GET  /ui                              static frontend bundle when configured

Expected answers never cross the wire; incorrect feedback carries only a
generic message. Stale turn tokens answer 409.
"""

from __future__ import annotations

import random
from pathlib import Path
from typing import Optional

from fastapi import Depends, FastAPI, Header, HTTPException
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .bkt import mastery_band
from .config import ServiceConfig, load_config
from .errors import ConfigError, TutorError
from .problems import DomainRegistry, GenerationError
from .scaffolding import AlreadyExpandedError, NotExpandableError, UnknownFieldError
from .sessions import (
    InvalidSessionState,
    SessionEngine,
    SessionNotFound,
    TurnConflict,
    UnknownPolicy,
)


class CreateSessionRequest(BaseModel):
    student_id: str
    domain: str
    params: dict = Field(default_factory=dict)
    seed: int = 0
    policy: str = "adaptive"


class ActionRequest(BaseModel):
    field: str
    value: str
    turn: int


class ExpansionRequest(BaseModel):
    field: str
    turn: int


def create_app(engine: Optional[SessionEngine] = None,
               config: Optional[ServiceConfig] = None) -> FastAPI:
    config = config or (engine.config if engine else ServiceConfig())
    engine = engine or SessionEngine(DomainRegistry(), config)
    app = FastAPI(title="htntutor", version="0.1.0")

    def require_token(authorization: str | None = Header(default=None)) -> None:
        if config.api_token is None:
            return
        if authorization != f"Bearer {config.api_token}":
            raise HTTPException(status_code=401, detail="missing or bad API token")

    guarded = [Depends(require_token)]

    def _session_view(session) -> dict:
        return engine.session_payload(session)

    @app.post("/v1/sessions", dependencies=guarded)
    def create_session(req: CreateSessionRequest) -> dict:
        try:
            session = engine.create_session(req.student_id, req.domain, req.params,
                                            req.seed, req.policy)
        except (UnknownPolicy, GenerationError, ConfigError) as e:
            raise HTTPException(status_code=422, detail=str(e))
        except KeyError as e:
            raise HTTPException(status_code=422, detail=f"unknown domain: {e}")
        return _session_view(session)

    @app.get("/v1/sessions/{session_id}", dependencies=guarded)
    def get_session(session_id: str) -> dict:
        try:
            return _session_view(engine.get_session(session_id))
        except SessionNotFound as e:
            raise HTTPException(status_code=404, detail=str(e))

    @app.post("/v1/sessions/{session_id}/actions", dependencies=guarded)
    def submit_action(session_id: str, req: ActionRequest) -> dict:
        try:
            session, feedback = engine.submit_action(session_id, req.field, req.value, req.turn)
        except SessionNotFound as e:
            raise HTTPException(status_code=404, detail=str(e))
        except TurnConflict as e:
            raise HTTPException(status_code=409, detail=str(e))
        except InvalidSessionState as e:
            raise HTTPException(status_code=409, detail=str(e))
        return {
            "result": {
                "kind": feedback.kind,
                "message": feedback.message,
                "skills": list(feedback.skills),
                "strategy": list(feedback.strategy),
            },
            "session": _session_view(session),
        }

    @app.post("/v1/sessions/{session_id}/hints", dependencies=guarded)
    def request_hint(session_id: str) -> dict:
        try:
            return engine.request_hint(session_id)
        except SessionNotFound as e:
            raise HTTPException(status_code=404, detail=str(e))
        except InvalidSessionState as e:
            raise HTTPException(status_code=409, detail=str(e))

    @app.post("/v1/sessions/{session_id}/expansions", dependencies=guarded)
    def expand(session_id: str, req: ExpansionRequest) -> dict:
        try:
            session = engine.expand_scaffold(session_id, req.field, req.turn)
        except SessionNotFound as e:
            raise HTTPException(status_code=404, detail=str(e))
        except (TurnConflict, InvalidSessionState) as e:
            raise HTTPException(status_code=409, detail=str(e))
        except UnknownFieldError as e:
            raise HTTPException(status_code=404, detail=str(e))
        except (NotExpandableError, AlreadyExpandedError) as e:
            raise HTTPException(status_code=422, detail=str(e))
        return {"session": _session_view(session)}

    @app.get("/v1/students/{student_id}/skills", dependencies=guarded)
    def student_skills(student_id: str) -> dict:
        model = engine.student_model(student_id)
        return {
            "student_id": student_id,
            "skills": [
                {
                    "skill": s,
                    "p_mastery": st.p_mastery,
                    "opportunities": st.opportunities,
                    "band": mastery_band(st, engine.config.bands),
                }
                for s, st in sorted(model.states.items())
            ],
        }

    @app.get("/v1/problems/next", dependencies=guarded)
    def next_problem(student_id: str, domain: str | None = None) -> dict:
        # outer-loop stub: hand back a spec for the configured generator
        name = domain or engine.registry.names()[0]
        if name not in engine.registry.names():
            raise HTTPException(status_code=422, detail=f"unknown domain {name!r}")
        return {"domain": name, "params": {}, "seed": random.randrange(2 ** 31), "policy": "adaptive"}

    ui_dir = config.ui_dir
    if ui_dir and Path(ui_dir).is_dir():
        index = Path(ui_dir) / "index.html"

        @app.get("/ui")
        def ui_index() -> FileResponse:
            return FileResponse(index)

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def serve(config_path: str | None = None) -> None:  # pragma: no cover
    import uvicorn

    config = load_config(config_path)
    engine = SessionEngine(DomainRegistry(), config)
    app = create_app(engine, config)
    host, _, port = config.listen_addr.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
