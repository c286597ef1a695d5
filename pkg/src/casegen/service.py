"""HTTP session service: the teacher platform and the play API.

JSON over HTTP/1.1, everything under ``/api/v1/``.  Teachers upload case
bundles, search them by metadata, create configured sessions and read the
scoreboard; learners join with a code and play through thin authenticated
adapters over the engine.  Error bodies are ``{code, message, details}``;
engine rule violations map to 409, bad tokens to 401.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Header, Request
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .engine import EngineError
from .store import Store, StoreError, config_from_dict


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, details: list | None = None):
        self.status = status
        self.code = code
        self.message = message
        self.details = details or []


class SessionBody(BaseModel):
    case_selection: str = "fixed_order"
    case_ids: list[str]
    feedback: dict = Field(default_factory=dict)
    score_publishing: str = "off"
    allow_free_answers: bool = False
    seed: int | None = None


class JoinBody(BaseModel):
    join_code: str
    display_name: str
    group: str | None = None


class PickBody(BaseModel):
    case_id: str


class PerformBody(BaseModel):
    card_id: str


class AnswerBody(BaseModel):
    card_id: str
    choice_ids: list[str]


class NotebookBody(BaseModel):
    ops: list[dict]


class DiagnoseBody(BaseModel):
    slots: dict[str, dict]


class VisibilityBody(BaseModel):
    hide: bool


def _bearer(authorization: str | None) -> str:
    if not authorization or not authorization.startswith("Bearer "):
        raise ApiError(401, "unauthorized", "missing bearer token")
    return authorization.removeprefix("Bearer ").strip()


def create_app(store: Store, ui_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="casegen session service", version="1")

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "details": exc.details},
        )

    @app.exception_handler(StoreError)
    async def _store_error(request: Request, exc: StoreError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": str(exc), "details": exc.details},
        )

    @app.exception_handler(EngineError)
    async def _engine_error(request: Request, exc: EngineError):
        return JSONResponse(
            status_code=409,
            content={"code": exc.code, "message": str(exc), "details": []},
        )

    def player_of(authorization: str | None):
        token = _bearer(authorization)
        try:
            return store.auth_player(token)
        except StoreError:
            raise ApiError(401, "unauthorized", "unknown token") from None

    # ------------------------------------------------------------- cases

    @app.post("/api/v1/cases")
    async def upload_case(request: Request):
        body = await request.body()
        if not body:
            raise ApiError(422, "invalid_bundle", "empty upload")
        return {"case_id": store.upload_case(body)}

    @app.get("/api/v1/cases")
    def search_cases(
        field: str | None = None,
        difficulty: int | None = None,
        author: str | None = None,
        text: str | None = None,
    ):
        return {
            "cases": store.search_cases(
                field_tag=field, difficulty=difficulty, author=author, text=text
            )
        }

    @app.get("/api/v1/cases/{case_id}/media/{path:path}")
    def case_media(case_id: str, path: str):
        return FileResponse(store.media_file(case_id, path))

    # ---------------------------------------------------------- sessions

    @app.post("/api/v1/sessions")
    def create_session(body: SessionBody):
        config = config_from_dict(body.model_dump())
        session = store.create_session(config)
        return {
            "session_id": session.id,
            "join_code": session.join_code,
            "teacher_token": session.teacher_token,
        }

    @app.post("/api/v1/sessions/{session_id}/join")
    def join_session(session_id: str, body: JoinBody):
        player = store.join_session(
            session_id, body.join_code, body.display_name, body.group
        )
        return {"token": player.token, "player_id": player.id}

    @app.get("/api/v1/sessions/{session_id}/scores")
    def get_scores(session_id: str, authorization: str | None = Header(default=None)):
        token = _bearer(authorization)
        session = store.session(session_id)
        try:
            return store.scoreboard(session, token)
        except StoreError:
            raise ApiError(401, "unauthorized", "token is not part of this session") from None

    # -------------------------------------------------------------- play

    @app.get("/api/v1/play/state")
    def play_state(authorization: str | None = Header(default=None)):
        session, player = player_of(authorization)
        return store.play_state(session, player)

    @app.post("/api/v1/play/pick")
    def play_pick(body: PickBody, authorization: str | None = Header(default=None)):
        session, player = player_of(authorization)
        return store.pick_case(session, player, body.case_id)

    @app.post("/api/v1/play/perform")
    def play_perform(body: PerformBody, authorization: str | None = Header(default=None)):
        session, player = player_of(authorization)
        return store.perform(session, player, body.card_id)

    @app.post("/api/v1/play/answer")
    def play_answer(body: AnswerBody, authorization: str | None = Header(default=None)):
        session, player = player_of(authorization)
        return store.answer(session, player, body.card_id, tuple(body.choice_ids))

    @app.post("/api/v1/play/hint")
    def play_hint(authorization: str | None = Header(default=None)):
        session, player = player_of(authorization)
        return store.hint(session, player)

    @app.post("/api/v1/play/notebook")
    def play_notebook(body: NotebookBody, authorization: str | None = Header(default=None)):
        session, player = player_of(authorization)
        return store.notebook(session, player, body.ops)

    @app.post("/api/v1/play/diagnose")
    def play_diagnose(body: DiagnoseBody, authorization: str | None = Header(default=None)):
        session, player = player_of(authorization)
        return store.diagnose(session, player, body.slots)

    @app.post("/api/v1/play/score-visibility")
    def play_score_visibility(
        body: VisibilityBody, authorization: str | None = Header(default=None)
    ):
        session, player = player_of(authorization)
        return store.set_score_visibility(session, player, body.hide)

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
