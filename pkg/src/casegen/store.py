"""File-backed store: content-addressed case library + event-sourced sessions.

Layout under the store root::

    cases/<storage-id>/case.json        canonical bundle text
    cases/<storage-id>/media/...        bundle media
    sessions/<id>/config.json           teacher configuration + tokens
    sessions/<id>/trace-<player>.jsonl  append-only per-player event log

Nothing else is persisted.  A player's whole play state is rebuilt by
replaying their trace through the engine, which is safe because engine
operations are deterministic given the recorded timestamps.  Every event
is fsynced before the operation is acknowledged.
"""

from __future__ import annotations

import dataclasses
import hashlib
import io
import json
import os
import random
import secrets
import string
import threading
import zipfile
from dataclasses import dataclass, field
from pathlib import Path

from . import engine
from .engine import (
    DiagnosisSubmission,
    FeedbackPolicy,
    GameState,
    SlotAnswer,
    Timing,
)
from .model import (
    BundleError,
    CaseDefinition,
    MediaKind,
    parse_case_bundle,
    serialize_case,
    slugify,
)

CASE_SELECTIONS = ("learner_choice", "random", "fixed_order")
SCORE_PUBLISHING = ("off", "by_group", "by_student")


class StoreError(Exception):
    status = 500
    code = "store_error"

    def __init__(self, message: str, details: list | None = None):
        super().__init__(message)
        self.details = details or []


class NotFound(StoreError):
    status = 404
    code = "not_found"


class Conflict(StoreError):
    status = 409
    code = "conflict"


class Forbidden(StoreError):
    status = 403
    code = "forbidden"


class InvalidBundle(StoreError):
    status = 422
    code = "invalid_bundle"


class BadConfig(StoreError):
    status = 422
    code = "bad_config"


@dataclass(frozen=True)
class SessionConfig:
    case_selection: str
    case_ids: tuple[str, ...]
    feedback: FeedbackPolicy = FeedbackPolicy()
    score_publishing: str = "off"
    allow_free_answers: bool = False
    seed: int | None = None


def config_from_dict(doc: dict) -> SessionConfig:
    selection = doc.get("case_selection", "fixed_order")
    if selection not in CASE_SELECTIONS:
        raise BadConfig(
            f"case_selection '{selection}' is not one of "
            + ", ".join(CASE_SELECTIONS)
        )
    publishing = doc.get("score_publishing", "off")
    if publishing not in SCORE_PUBLISHING:
        raise BadConfig(
            f"score_publishing '{publishing}' is not one of "
            + ", ".join(SCORE_PUBLISHING)
        )
    feedback = doc.get("feedback") or {}
    try:
        policy = FeedbackPolicy(
            answers=Timing(feedback.get("answers", "end")),
            scores=Timing(feedback.get("scores", "end")),
        )
    except ValueError as exc:
        raise BadConfig(f"bad feedback timing: {exc}") from None
    case_ids = tuple(str(c) for c in doc.get("case_ids") or ())
    if not case_ids:
        raise BadConfig("case_ids must not be empty")
    seed = doc.get("seed")
    return SessionConfig(
        case_selection=selection,
        case_ids=case_ids,
        feedback=policy,
        score_publishing=publishing,
        allow_free_answers=bool(doc.get("allow_free_answers", False)),
        seed=None if seed is None else int(seed),
    )


def config_to_dict(config: SessionConfig) -> dict:
    return {
        "case_selection": config.case_selection,
        "case_ids": list(config.case_ids),
        "feedback": {
            "answers": config.feedback.answers.value,
            "scores": config.feedback.scores.value,
        },
        "score_publishing": config.score_publishing,
        "allow_free_answers": config.allow_free_answers,
        "seed": config.seed,
    }


@dataclass
class PlayerRuntime:
    id: str
    display_name: str
    group: str | None
    token: str
    hide_score: bool = False
    case_order: tuple[str, ...] = ()
    completed: list[tuple[str, engine.EvaluationReport]] = field(default_factory=list)
    active_case: str | None = None
    state: GameState | None = None
    seq: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def completed_ids(self) -> set[str]:
        return {case_id for case_id, _ in self.completed}

    def mean_grade(self) -> float | None:
        if not self.completed:
            return None
        return sum(r.grade for _, r in self.completed) / len(self.completed)


@dataclass
class SessionRuntime:
    id: str
    join_code: str
    teacher_token: str
    config: SessionConfig
    players: dict[str, PlayerRuntime] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


def _fsync_write(path: Path, data: str) -> None:
    with path.open("w", encoding="utf-8") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())


def _fsync_append(path: Path, line: str) -> None:
    with path.open("a", encoding="utf-8") as fh:
        fh.write(line)
        fh.flush()
        os.fsync(fh.fileno())


class Store:
    """Case library plus live sessions, all rooted in one directory."""

    def __init__(self, root: Path | str, clock=None):
        self.root = Path(root)
        self.clock = clock or engine.SystemClock()
        self.cases_dir = self.root / "cases"
        self.sessions_dir = self.root / "sessions"
        self.cases_dir.mkdir(parents=True, exist_ok=True)
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self._cases: dict[str, CaseDefinition] = {}
        self._slugs: dict[str, str] = {}
        self._sessions: dict[str, SessionRuntime] = {}
        self._tokens: dict[str, tuple[str, str]] = {}  # token -> (session, player)
        self._teacher_tokens: dict[str, str] = {}
        self._join_codes: dict[str, str] = {}
        self._lock = threading.Lock()
        self._load_cases()
        self._load_sessions()

    # ------------------------------------------------------------- cases

    def _load_cases(self) -> None:
        for case_dir in sorted(self.cases_dir.iterdir()) if self.cases_dir.exists() else []:
            case_file = case_dir / "case.json"
            if not case_file.is_file():
                continue
            case = parse_case_bundle(case_file.read_text(encoding="utf-8"))
            self._cases[case_dir.name] = case
            self._slugs[case.id] = case_dir.name

    def upload_case(self, archive: bytes) -> str:
        """Validate and store a zipped bundle; returns the storage id."""
        try:
            zf = zipfile.ZipFile(io.BytesIO(archive))
        except zipfile.BadZipFile:
            raise InvalidBundle("the uploaded file is not a zip archive") from None
        names = set(zf.namelist())
        if "case.json" not in names:
            raise InvalidBundle("the archive does not contain case.json")
        try:
            case = parse_case_bundle(zf.read("case.json").decode("utf-8"))
        except BundleError as exc:
            raise InvalidBundle("the bundle is invalid", exc.problems) from None
        except UnicodeDecodeError:
            raise InvalidBundle("case.json is not valid UTF-8") from None
        missing = [
            ref.path
            for ref in case.all_media()
            if ref.kind is not MediaKind.WEB_LINK and f"media/{ref.path}" not in names
        ]
        if missing:
            raise InvalidBundle(
                "the bundle is missing media files",
                [f"media path '{p}' does not resolve inside the bundle" for p in missing],
            )

        canonical = serialize_case(case)
        digest = hashlib.sha256(canonical.encode("utf-8"))
        for ref in sorted(
            {r.path for r in case.all_media() if r.kind is not MediaKind.WEB_LINK}
        ):
            digest.update(ref.encode("utf-8"))
            digest.update(hashlib.sha256(zf.read(f"media/{ref}")).digest())
        storage_id = digest.hexdigest()[:16]

        with self._lock:
            if storage_id in self._cases:
                return storage_id  # identical bundle: idempotent
            existing = self._slugs.get(case.id)
            if existing is not None and existing != storage_id:
                raise Conflict(f"a different case with id '{case.id}' already exists")
            case_dir = self.cases_dir / storage_id
            (case_dir / "media").mkdir(parents=True, exist_ok=True)
            for ref in case.all_media():
                if ref.kind is MediaKind.WEB_LINK:
                    continue
                target = case_dir / "media" / ref.path
                target.parent.mkdir(parents=True, exist_ok=True)
                target.write_bytes(zf.read(f"media/{ref.path}"))
            _fsync_write(case_dir / "case.json", canonical)
            self._cases[storage_id] = case
            self._slugs[case.id] = storage_id
        return storage_id

    def case(self, storage_id: str) -> CaseDefinition:
        case = self._cases.get(storage_id)
        if case is None:
            raise NotFound(f"unknown case '{storage_id}'")
        return case

    def media_file(self, storage_id: str, rel_path: str) -> Path:
        self.case(storage_id)
        base = (self.cases_dir / storage_id / "media").resolve()
        target = (base / rel_path).resolve()
        if not str(target).startswith(str(base) + os.sep) or not target.is_file():
            raise NotFound(f"no media '{rel_path}' in case '{storage_id}'")
        return target

    def search_cases(
        self,
        field_tag: str | None = None,
        difficulty: int | None = None,
        author: str | None = None,
        text: str | None = None,
    ) -> list[dict]:
        rows = []
        for storage_id, case in self._cases.items():
            meta = case.meta
            if field_tag is not None and meta.field.lower() != field_tag.lower():
                continue
            if difficulty is not None and meta.difficulty != difficulty:
                continue
            if author is not None and meta.author.lower() != author.lower():
                continue
            if text is not None:
                needle = text.lower()
                if needle not in meta.name.lower() and needle not in meta.description.lower():
                    continue
            rows.append(
                {
                    "case_id": storage_id,
                    "slug": case.id,
                    "name": meta.name,
                    "created": meta.created,
                    "author": meta.author,
                    "difficulty": meta.difficulty,
                    "field": meta.field,
                    "description": meta.description,
                    "suggestions": meta.suggestions,
                }
            )
        rows.sort(key=lambda r: (r["name"], r["case_id"]))
        return rows

    # ---------------------------------------------------------- sessions

    def _session_path(self, session_id: str) -> Path:
        return self.sessions_dir / session_id

    def create_session(self, config: SessionConfig) -> SessionRuntime:
        for case_id in config.case_ids:
            if case_id not in self._cases:
                raise NotFound(f"unknown case '{case_id}'")
        if config.case_selection == "random" and config.seed is None:
            config = dataclasses.replace(config, seed=secrets.randbelow(2**31))
        with self._lock:
            session_id = secrets.token_hex(6)
            alphabet = string.ascii_uppercase + "23456789"
            join_code = "".join(secrets.choice(alphabet) for _ in range(6))
            teacher_token = secrets.token_urlsafe(24)
            session = SessionRuntime(
                id=session_id,
                join_code=join_code,
                teacher_token=teacher_token,
                config=config,
            )
            path = self._session_path(session_id)
            path.mkdir(parents=True, exist_ok=True)
            _fsync_write(
                path / "config.json",
                json.dumps(
                    {
                        "id": session_id,
                        "join_code": join_code,
                        "teacher_token": teacher_token,
                        "config": config_to_dict(config),
                    },
                    sort_keys=True,
                    indent=2,
                )
                + "\n",
            )
            self._sessions[session_id] = session
            self._join_codes[join_code] = session_id
            self._teacher_tokens[teacher_token] = session_id
        return session

    def session(self, session_id: str) -> SessionRuntime:
        session = self._sessions.get(session_id)
        if session is None:
            raise NotFound(f"unknown session '{session_id}'")
        return session

    def _case_order_for(self, config: SessionConfig, player_id: str) -> tuple[str, ...]:
        if config.case_selection == "fixed_order":
            return config.case_ids
        if config.case_selection == "random":
            order = list(config.case_ids)
            random.Random(f"{config.seed}:{player_id}").shuffle(order)
            return tuple(order)
        return ()  # learner_choice: picks drive the order

    def join_session(
        self, session_id: str, join_code: str, display_name: str, group: str | None
    ) -> PlayerRuntime:
        session = self.session(session_id)
        if join_code != session.join_code:
            raise NotFound("unknown join code")
        display_name = display_name.strip()
        if not display_name:
            raise BadConfig("display_name must not be empty")
        player_id = slugify(display_name)
        with session.lock:
            for player in session.players.values():
                if player.display_name == display_name or player.id == player_id:
                    raise Conflict(
                        f"display name '{display_name}' is already taken"
                    )
            token = secrets.token_urlsafe(24)
            player = PlayerRuntime(
                id=player_id,
                display_name=display_name,
                group=group or None,
                token=token,
                case_order=self._case_order_for(session.config, player_id),
            )
            session.players[player_id] = player
            self._tokens[token] = (session.id, player_id)
            self._append_event(
                session,
                player,
                "join",
                {
                    "display_name": display_name,
                    "group": player.group,
                    "token": token,
                },
                self.clock.now(),
            )
        return player

    def auth_player(self, token: str) -> tuple[SessionRuntime, PlayerRuntime]:
        entry = self._tokens.get(token)
        if entry is None:
            raise NotFound("unknown token")
        session = self._sessions[entry[0]]
        return session, session.players[entry[1]]

    def auth_teacher(self, token: str) -> SessionRuntime | None:
        session_id = self._teacher_tokens.get(token)
        return self._sessions.get(session_id) if session_id else None

    # ------------------------------------------------------------ events

    def _trace_path(self, session: SessionRuntime, player: PlayerRuntime) -> Path:
        return self._session_path(session.id) / f"trace-{player.id}.jsonl"

    def _append_event(
        self,
        session: SessionRuntime,
        player: PlayerRuntime,
        op: str,
        payload: dict,
        at: float,
        report_hash: str | None = None,
    ) -> None:
        player.seq += 1
        event = {
            "seq": player.seq,
            "at": at,
            "op": op,
            "case": player.active_case,
            "payload": payload,
        }
        if report_hash is not None:
            event["report_hash"] = report_hash
        _fsync_append(
            self._trace_path(session, player),
            json.dumps(event, sort_keys=True) + "\n",
        )

    # Play operations: compute the transition first, append the event, then
    # commit — an event is on disk before the response ever leaves.

    def _start_case(
        self, session: SessionRuntime, player: PlayerRuntime, case_id: str,
        at: float, record: bool,
    ) -> None:
        case = self.case(case_id)
        state = engine.start_session(
            case, session.config.feedback, engine.ManualClock(at)
        )
        if record:
            self._append_event(session, player, "start", {"case_id": case_id}, at)
        player.active_case = case_id
        player.state = state

    def _auto_start(
        self, session: SessionRuntime, player: PlayerRuntime, at: float,
        record: bool = True,
    ) -> None:
        """Begin the next prescribed case, if any (fixed_order / random)."""
        if player.active_case is not None:
            return
        if session.config.case_selection == "learner_choice":
            return
        done = player.completed_ids()
        for case_id in player.case_order:
            if case_id not in done:
                self._start_case(session, player, case_id, at, record)
                return

    def pick_case(
        self, session: SessionRuntime, player: PlayerRuntime, case_id: str,
        at: float | None = None, record: bool = True,
    ) -> dict:
        at = self.clock.now() if at is None else at
        with player.lock:
            if session.config.case_selection != "learner_choice":
                raise Forbidden(
                    "cases are chosen by the session, not the player"
                )
            if case_id not in session.config.case_ids:
                raise Forbidden(f"case '{case_id}' is not part of this session")
            if player.active_case is not None:
                raise Conflict("a case is already in progress")
            if case_id in player.completed_ids():
                raise Conflict(f"case '{case_id}' was already completed")
            if record:
                self._append_event(session, player, "pick", {"case_id": case_id}, at)
            self._start_case(session, player, case_id, at, record=False)
            return self.state_response(session, player, auto_start=False)

    def play_state(self, session: SessionRuntime, player: PlayerRuntime) -> dict:
        with player.lock:
            return self.state_response(session, player, auto_start=True)

    def state_response(
        self, session: SessionRuntime, player: PlayerRuntime, auto_start: bool
    ) -> dict:
        if auto_start and player.active_case is None:
            self._auto_start(session, player, self.clock.now())
        config = session.config
        completed = [
            {
                "case_id": case_id,
                "case_name": self.case(case_id).meta.name,
                "grade": report.grade,
                "report": engine.report_to_dict(report),
            }
            for case_id, report in player.completed
        ]
        doc: dict = {
            "session_id": session.id,
            "player_id": player.id,
            "display_name": player.display_name,
            "group": player.group,
            "hide_score": player.hide_score,
            "case_selection": config.case_selection,
            "completed": completed,
            "active": None,
            "awaiting_pick": False,
            "finished": False,
        }
        if player.active_case is not None:
            case = self.case(player.active_case)
            view = engine.render_view(case, player.state, config.feedback)
            view["storage_id"] = player.active_case
            doc["active"] = view
        elif config.case_selection == "learner_choice":
            remaining = [
                {"case_id": cid, "name": self.case(cid).meta.name,
                 "description": self.case(cid).meta.description}
                for cid in config.case_ids
                if cid not in player.completed_ids()
            ]
            doc["awaiting_pick"] = bool(remaining)
            doc["available_cases"] = remaining
            doc["finished"] = not remaining
        else:
            doc["finished"] = len(player.completed) >= len(player.case_order)
        return doc

    def _require_active(self, player: PlayerRuntime) -> CaseDefinition:
        if player.active_case is None or player.state is None:
            raise Conflict("no case is in progress")
        return self.case(player.active_case)

    def perform(
        self, session: SessionRuntime, player: PlayerRuntime, card_id: str,
        at: float | None = None, record: bool = True,
    ) -> dict:
        at = self.clock.now() if at is None else at
        with player.lock:
            if player.active_case is None and record:
                self._auto_start(session, player, at)
            case = self._require_active(player)
            new_state, outcome = engine.perform_action(
                case, player.state, card_id, at
            )
            if record:
                self._append_event(session, player, "perform", {"card_id": card_id}, at)
            player.state = new_state
            return {
                "outcome": engine.outcome_to_dict(outcome),
                "view": self._active_view(session, player),
            }

    def answer(
        self, session: SessionRuntime, player: PlayerRuntime, card_id: str,
        choice_ids: tuple[str, ...], at: float | None = None, record: bool = True,
    ) -> dict:
        at = self.clock.now() if at is None else at
        with player.lock:
            case = self._require_active(player)
            new_state, feedback = engine.answer_question(
                case, player.state, card_id, tuple(choice_ids),
                session.config.feedback, at,
            )
            if record:
                self._append_event(
                    session, player, "answer",
                    {"card_id": card_id, "choices": list(choice_ids)}, at,
                )
            player.state = new_state
            return {
                "feedback": engine.feedback_to_dict(feedback),
                "view": self._active_view(session, player),
            }

    def hint(
        self, session: SessionRuntime, player: PlayerRuntime,
        at: float | None = None, record: bool = True,
    ) -> dict:
        at = self.clock.now() if at is None else at
        with player.lock:
            case = self._require_active(player)
            new_state, text = engine.request_hint(case, player.state)
            if record:
                self._append_event(session, player, "hint", {}, at)
            player.state = new_state
            return {"hint": text, "view": self._active_view(session, player)}

    def notebook(
        self, session: SessionRuntime, player: PlayerRuntime, ops: list[dict],
        at: float | None = None, record: bool = True,
    ) -> dict:
        at = self.clock.now() if at is None else at
        with player.lock:
            self._require_active(player)
            parsed = tuple(engine.notebook_op_from_dict(op) for op in ops)
            new_state = engine.edit_notebook(player.state, parsed)
            if record:
                self._append_event(session, player, "note", {"ops": ops}, at)
            player.state = new_state
            return {"view": self._active_view(session, player)}

    def diagnose(
        self, session: SessionRuntime, player: PlayerRuntime, slots: dict,
        at: float | None = None, record: bool = True,
    ) -> dict:
        at = self.clock.now() if at is None else at
        with player.lock:
            case = self._require_active(player)
            submission = DiagnosisSubmission(
                slots={
                    str(slot_id): SlotAnswer(
                        chosen=tuple(str(c) for c in (entry or {}).get("chosen") or ()),
                        free_texts=tuple(
                            str(t) for t in (entry or {}).get("free_texts") or ()
                        ),
                    )
                    for slot_id, entry in slots.items()
                }
            )
            new_state, report = engine.submit_diagnosis(
                case, player.state, submission, at,
                allow_free_anywhere=session.config.allow_free_answers,
            )
            if record:
                self._append_event(
                    session, player, "diagnose",
                    {
                        "slots": {
                            sid: {
                                "chosen": list(ans.chosen),
                                "free_texts": list(ans.free_texts),
                            }
                            for sid, ans in submission.slots.items()
                        }
                    },
                    at,
                    report_hash=engine.report_hash(report),
                )
            player.completed.append((player.active_case, report))
            player.active_case = None
            player.state = None
            return {
                "report": engine.report_to_dict(report),
                "view": self.state_response(session, player, auto_start=False),
            }

    def set_score_visibility(
        self, session: SessionRuntime, player: PlayerRuntime, hide: bool,
        at: float | None = None, record: bool = True,
    ) -> dict:
        at = self.clock.now() if at is None else at
        with player.lock:
            if record:
                self._append_event(
                    session, player, "score_visibility", {"hide": bool(hide)}, at
                )
            player.hide_score = bool(hide)
            return {"hide_score": player.hide_score}

    def _active_view(self, session: SessionRuntime, player: PlayerRuntime) -> dict:
        case = self.case(player.active_case)
        view = engine.render_view(case, player.state, session.config.feedback)
        view["storage_id"] = player.active_case
        return view

    # ------------------------------------------------------------ scores

    def scoreboard(self, session: SessionRuntime, token: str) -> dict:
        teacher_session = self.auth_teacher(token)
        if teacher_session is not None and teacher_session.id == session.id:
            rows = [
                {
                    "player_id": p.id,
                    "display_name": p.display_name,
                    "group": p.group,
                    "hide_score": p.hide_score,
                    "completed": len(p.completed),
                    "grade": p.mean_grade(),
                }
                for p in sorted(
                    session.players.values(), key=lambda p: p.display_name
                )
            ]
            return {
                "role": "teacher",
                "mode": session.config.score_publishing,
                "rows": rows,
            }

        entry = self._tokens.get(token)
        if entry is None or entry[0] != session.id:
            raise NotFound("unknown token for this session")
        me = session.players[entry[1]]
        mode = session.config.score_publishing

        def row(player: PlayerRuntime) -> dict:
            return {
                "player_id": player.id,
                "display_name": player.display_name,
                "group": player.group,
                "completed": len(player.completed),
                "grade": player.mean_grade(),
                "you": player.id == me.id,
            }

        if mode == "off":
            rows = [row(me)]
        elif mode == "by_student":
            rows = [
                row(p)
                for p in sorted(session.players.values(), key=lambda p: p.display_name)
                if not p.hide_score or p.id == me.id
            ]
        else:  # by_group
            groups: dict[str, list[PlayerRuntime]] = {}
            for p in session.players.values():
                groups.setdefault(p.group or "", []).append(p)
            rows = []
            for name in sorted(groups):
                members = groups[name]
                grades = [g for g in (p.mean_grade() for p in members) if g is not None]
                rows.append(
                    {
                        "group": name or None,
                        "players": len(members),
                        "grade": sum(grades) / len(grades) if grades else None,
                    }
                )
        return {"role": "learner", "mode": mode, "rows": rows}

    # ------------------------------------------------------------ replay

    def _load_sessions(self) -> None:
        if not self.sessions_dir.exists():
            return
        for session_dir in sorted(self.sessions_dir.iterdir()):
            config_file = session_dir / "config.json"
            if not config_file.is_file():
                continue
            doc = json.loads(config_file.read_text(encoding="utf-8"))
            session = SessionRuntime(
                id=doc["id"],
                join_code=doc["join_code"],
                teacher_token=doc["teacher_token"],
                config=config_from_dict(doc["config"]),
            )
            self._sessions[session.id] = session
            self._join_codes[session.join_code] = session.id
            self._teacher_tokens[session.teacher_token] = session.id
            for trace_file in sorted(session_dir.glob("trace-*.jsonl")):
                self._replay_trace(session, trace_file)

    def _replay_trace(self, session: SessionRuntime, trace_file: Path) -> None:
        player: PlayerRuntime | None = None
        with trace_file.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                op, payload, at = event["op"], event["payload"], event["at"]
                if op == "join":
                    player = PlayerRuntime(
                        id=trace_file.stem.removeprefix("trace-"),
                        display_name=payload["display_name"],
                        group=payload.get("group"),
                        token=payload["token"],
                        seq=event["seq"],
                    )
                    player.case_order = self._case_order_for(session.config, player.id)
                    session.players[player.id] = player
                    self._tokens[player.token] = (session.id, player.id)
                    continue
                if player is None:
                    raise StoreError(f"{trace_file} does not start with a join event")
                player.seq = event["seq"]
                if op == "start":
                    self._start_case(
                        session, player, payload["case_id"], at, record=False
                    )
                elif op == "pick":
                    self._start_case(
                        session, player, payload["case_id"], at, record=False
                    )
                elif op == "perform":
                    self.perform(session, player, payload["card_id"], at, record=False)
                elif op == "answer":
                    self.answer(
                        session, player, payload["card_id"],
                        tuple(payload["choices"]), at, record=False,
                    )
                elif op == "hint":
                    self.hint(session, player, at, record=False)
                elif op == "note":
                    self.notebook(session, player, payload["ops"], at, record=False)
                elif op == "diagnose":
                    result = self.diagnose(
                        session, player, payload["slots"], at, record=False
                    )
                    expected = event.get("report_hash")
                    _, report = player.completed[-1]
                    if expected and engine.report_hash(report) != expected:
                        raise StoreError(
                            f"replay of {trace_file} diverged: report hash mismatch"
                        )
                    del result
                elif op == "score_visibility":
                    self.set_score_visibility(
                        session, player, payload["hide"], at, record=False
                    )
                else:
                    raise StoreError(f"unknown trace op '{op}' in {trace_file}")

    def find_session_by_code(self, join_code: str) -> SessionRuntime:
        session_id = self._join_codes.get(join_code)
        if session_id is None:
            raise NotFound("unknown join code")
        return self._sessions[session_id]
