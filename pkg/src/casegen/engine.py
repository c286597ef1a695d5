"""Play state machine: investigation, notebook, diagnosis and evaluation.

Every operation is a pure transition: it takes the case, the current
GameState and an explicit timestamp, and returns a new state plus the
learner-facing result.  A failed operation raises before any new state is
built, so the caller's state is untouched.  Time never comes from the wall
clock here — callers inject it — which makes scripted replays byte-exact.

The only learner-visible correctness data flows through AnswerFeedback and
render_view, both of which are filtered by the session's FeedbackPolicy.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field, replace
from enum import Enum

from . import triggers
from .model import (
    ActionCard,
    CardState,
    CaseDefinition,
    MediaRef,
    SlotMode,
    Usefulness,
    canonical_json,
)


class Phase(str, Enum):
    INVESTIGATING = "investigating"
    DIAGNOSED = "diagnosed"


class Timing(str, Enum):
    IMMEDIATE = "immediate"
    END = "end"


@dataclass(frozen=True)
class FeedbackPolicy:
    answers: Timing = Timing.END
    scores: Timing = Timing.END


class EngineError(Exception):
    code = "engine_error"


class IllegalMove(EngineError):
    code = "illegal_move"


class AlreadyPerformed(EngineError):
    code = "already_performed"


class SessionClosed(EngineError):
    code = "session_closed"


class UnknownId(EngineError):
    code = "unknown_id"


class NoPendingQuestion(EngineError):
    code = "no_pending_question"


class HintsExhausted(EngineError):
    code = "hints_exhausted"


class BadSubmission(EngineError):
    code = "bad_submission"


class BadNotebookRef(EngineError):
    code = "bad_notebook_ref"


@dataclass(frozen=True)
class PerformedAction:
    card_id: str
    at: float


@dataclass(frozen=True)
class DirectoryEntry:
    card_id: str
    at: float
    text: str
    media: tuple[MediaRef, ...] = ()


@dataclass(frozen=True)
class NotebookMark:
    sign: str  # "+" or "-"
    note: str
    directory_ref: int | None = None


@dataclass(frozen=True)
class NotebookLine:
    target: str  # solution id or free text
    marks: tuple[NotebookMark, ...] = ()


# Notebook edit operations ---------------------------------------------------

@dataclass(frozen=True)
class AddLine:
    target: str


@dataclass(frozen=True)
class RemoveLine:
    index: int


@dataclass(frozen=True)
class AddMark:
    line: int
    sign: str
    note: str
    directory_ref: int | None = None


NotebookOp = AddLine | RemoveLine | AddMark


def notebook_op_from_dict(doc: dict) -> NotebookOp:
    kind = doc.get("op")
    if kind == "add_line":
        return AddLine(target=str(doc.get("target", "")))
    if kind == "remove_line":
        return RemoveLine(index=int(doc.get("index", -1)))
    if kind == "add_mark":
        ref = doc.get("directory_ref")
        return AddMark(
            line=int(doc.get("line", -1)),
            sign=str(doc.get("sign", "")),
            note=str(doc.get("note", "")),
            directory_ref=None if ref is None else int(ref),
        )
    raise BadNotebookRef(f"unknown notebook op {kind!r}")


@dataclass(frozen=True)
class SlotAnswer:
    chosen: tuple[str, ...] = ()
    free_texts: tuple[str, ...] = ()


@dataclass(frozen=True)
class DiagnosisSubmission:
    slots: dict[str, SlotAnswer] = field(default_factory=dict)


@dataclass(frozen=True)
class SlotResult:
    slot_id: str
    chosen: tuple[str, ...]
    correct: tuple[str, ...]
    hit: tuple[str, ...]
    miss: tuple[str, ...]
    false_positive: tuple[str, ...]


@dataclass(frozen=True)
class EvaluationReport:
    case_id: str
    slots: tuple[SlotResult, ...]
    missed_required: tuple[str, ...]
    useless_performed: tuple[str, ...]
    order_violations: tuple[tuple[str, str], ...]  # (card, unmet prerequisite)
    wrong_answers: tuple[str, ...]
    free_answers_pending: tuple[tuple[str, str], ...]  # (slot, text)
    item_finals: dict[str, float]
    elapsed_seconds: float
    grade: float


@dataclass(frozen=True)
class GameState:
    case_id: str
    card_states: dict[str, CardState]
    performed: tuple[PerformedAction, ...] = ()
    answers: dict[str, frozenset[str]] = field(default_factory=dict)
    directory: tuple[DirectoryEntry, ...] = ()
    notebook: tuple[NotebookLine, ...] = ()
    item_values: dict[str, float] = field(default_factory=dict)
    phase: Phase = Phase.INVESTIGATING
    started_at: float = 0.0
    hints_used: int = 0
    report: EvaluationReport | None = None

    def performed_ids(self) -> tuple[str, ...]:
        return tuple(p.card_id for p in self.performed)


@dataclass(frozen=True)
class QuestionView:
    """Learner-facing slice of an analysis question: never the answer key."""

    card_id: str
    prompt: str
    choices: tuple[tuple[str, str], ...]  # (id, text)


@dataclass(frozen=True)
class ActionOutcome:
    card_id: str
    text: str
    media: tuple[MediaRef, ...]
    question: QuestionView | None = None


@dataclass(frozen=True)
class AnswerFeedback:
    card_id: str
    acknowledged: bool = True
    correct: bool | None = None
    correct_choice_ids: tuple[str, ...] | None = None
    explanation: str | None = None


# ---------------------------------------------------------------------------
# Clocks

class ManualClock:
    """Deterministic clock advanced explicitly (scripts, replays, tests)."""

    def __init__(self, start: float = 0.0):
        self._now = float(start)

    def now(self) -> float:
        return self._now

    def tick(self, seconds: float) -> None:
        self._now += seconds


class SystemClock:
    def now(self) -> float:
        return time.time()


# ---------------------------------------------------------------------------
# Operations

def start_session(
    case: CaseDefinition, policy: FeedbackPolicy, clock
) -> GameState:
    return GameState(
        case_id=case.id,
        card_states={card.id: card.initial_state for card in case.actions},
        item_values={item.id: item.initial for item in case.scoring.items},
        started_at=clock.now(),
    )


def _require_open(state: GameState) -> None:
    if state.phase is Phase.DIAGNOSED:
        raise SessionClosed("the case has already been diagnosed")


def _card_or_raise(case: CaseDefinition, card_id: str) -> ActionCard:
    card = case.action_by_id(card_id)
    if card is None:
        raise UnknownId(f"unknown card '{card_id}'")
    return card


def _apply_effects(
    effects: tuple[triggers.Effect, ...],
    card_states: dict[str, CardState],
    item_values: dict[str, float],
) -> None:
    # Duplicate state commands resolve last-write-wins by application order.
    for eff in effects:
        if isinstance(eff, triggers.CardEffect):
            card_states[eff.card] = {
                "show": CardState.VISIBLE,
                "hide": CardState.INVISIBLE,
                "enable": CardState.VISIBLE,
                "disable": CardState.DISABLED,
            }[eff.op]
        else:
            item_values[eff.item] = item_values.get(eff.item, 0.0) + eff.amount


def _question_view(card: ActionCard) -> QuestionView | None:
    if card.question is None:
        return None
    return QuestionView(
        card_id=card.id,
        prompt=card.question.prompt,
        choices=tuple((c.id, c.text) for c in card.question.choices),
    )


def perform_action(
    case: CaseDefinition, state: GameState, card_id: str, now: float
) -> tuple[GameState, ActionOutcome]:
    _require_open(state)
    card = _card_or_raise(case, card_id)
    if card_id in state.performed_ids():
        raise AlreadyPerformed(f"card '{card_id}' was already performed")
    if state.card_states[card_id] is not CardState.VISIBLE:
        raise IllegalMove(
            f"card '{card_id}' is {state.card_states[card_id].value}"
        )

    card_states = dict(state.card_states)
    item_values = dict(state.item_values)
    if card.question is None:
        # No question: deltas and trigger apply right away, atomically.
        for item_id, delta in card.score_deltas.items():
            item_values[item_id] = item_values.get(item_id, 0.0) + delta
        if card.trigger:
            program = triggers.parse_trigger(card.trigger)
            _apply_effects(
                triggers.eval_trigger(program, "no_question"),
                card_states,
                item_values,
            )

    entry = DirectoryEntry(
        card_id=card_id, at=now, text=card.content_text, media=card.media
    )
    new_state = replace(
        state,
        card_states=card_states,
        item_values=item_values,
        performed=state.performed + (PerformedAction(card_id=card_id, at=now),),
        directory=state.directory + (entry,),
    )
    outcome = ActionOutcome(
        card_id=card_id,
        text=card.content_text,
        media=card.media,
        question=_question_view(card),
    )
    return new_state, outcome


def answer_question(
    case: CaseDefinition,
    state: GameState,
    card_id: str,
    choice_ids: tuple[str, ...],
    policy: FeedbackPolicy,
    now: float,
) -> tuple[GameState, AnswerFeedback]:
    _require_open(state)
    card = _card_or_raise(case, card_id)
    if card.question is None:
        raise NoPendingQuestion(f"card '{card_id}' has no analysis question")
    if card_id not in state.performed_ids():
        raise NoPendingQuestion(f"card '{card_id}' has not been performed")
    if card_id in state.answers:
        raise NoPendingQuestion(f"card '{card_id}' question was already answered")
    question = card.question
    known = set(question.choice_ids())
    for cid in choice_ids:
        if cid not in known:
            raise UnknownId(f"unknown choice '{cid}' for card '{card_id}'")

    chosen = frozenset(choice_ids)
    is_correct = chosen == question.correct

    card_states = dict(state.card_states)
    item_values = dict(state.item_values)
    for item_id, delta in card.score_deltas.items():
        item_values[item_id] = item_values.get(item_id, 0.0) + delta
    for cid in choice_ids:
        for item_id, delta in question.choice_deltas.get(cid, {}).items():
            item_values[item_id] = item_values.get(item_id, 0.0) + delta
    if card.trigger:
        program = triggers.parse_trigger(card.trigger)
        outcome = "correct" if is_correct else "wrong"
        _apply_effects(
            triggers.eval_trigger(program, outcome), card_states, item_values
        )

    new_state = replace(
        state,
        card_states=card_states,
        item_values=item_values,
        answers={**state.answers, card_id: chosen},
    )
    if policy.answers is Timing.IMMEDIATE:
        feedback = AnswerFeedback(
            card_id=card_id,
            correct=is_correct,
            correct_choice_ids=tuple(sorted(question.correct)),
            explanation=question.explanation,
        )
    else:
        feedback = AnswerFeedback(card_id=card_id)
    return new_state, feedback


def request_hint(
    case: CaseDefinition, state: GameState
) -> tuple[GameState, str]:
    _require_open(state)
    if state.hints_used >= len(case.help):
        raise HintsExhausted(
            "no hints left" if case.help else "this case defines no hints"
        )
    hint = case.help[state.hints_used]
    return replace(state, hints_used=state.hints_used + 1), hint


def edit_notebook(
    state: GameState, ops: tuple[NotebookOp, ...]
) -> GameState:
    _require_open(state)
    lines = list(state.notebook)
    for op in ops:
        if isinstance(op, AddLine):
            lines.append(NotebookLine(target=op.target))
        elif isinstance(op, RemoveLine):
            if not 0 <= op.index < len(lines):
                raise BadNotebookRef(f"notebook line {op.index} does not exist")
            del lines[op.index]
        elif isinstance(op, AddMark):
            if not 0 <= op.line < len(lines):
                raise BadNotebookRef(f"notebook line {op.line} does not exist")
            if op.sign not in ("+", "-"):
                raise BadNotebookRef(f"mark sign must be + or -, got {op.sign!r}")
            if op.directory_ref is not None and not (
                0 <= op.directory_ref < len(state.directory)
            ):
                raise BadNotebookRef(
                    f"directory entry {op.directory_ref} does not exist"
                )
            line = lines[op.line]
            mark = NotebookMark(
                sign=op.sign, note=op.note, directory_ref=op.directory_ref
            )
            lines[op.line] = replace(line, marks=line.marks + (mark,))
        else:
            raise BadNotebookRef(f"unknown notebook op {op!r}")
    return replace(state, notebook=tuple(lines))


def _validate_submission(
    case: CaseDefinition,
    submission: DiagnosisSubmission,
    allow_free_anywhere: bool,
) -> None:
    for slot_id, answer in submission.slots.items():
        slot = case.slot_by_id(slot_id)
        if slot is None:
            raise BadSubmission(f"unknown diagnosis slot '{slot_id}'")
        options = set(slot.option_ids())
        for sol_id in answer.chosen:
            if sol_id not in options:
                raise BadSubmission(
                    f"slot '{slot_id}' has no solution '{sol_id}'"
                )
        if slot.mode is SlotMode.SINGLE and len(set(answer.chosen)) > 1:
            raise BadSubmission(
                f"slot '{slot_id}' is single-choice but got "
                f"{len(set(answer.chosen))} solutions"
            )
        if answer.free_texts and not (slot.allow_free_text or allow_free_anywhere):
            raise BadSubmission(
                f"slot '{slot_id}' does not accept free-text answers"
            )


def evaluate(
    case: CaseDefinition,
    state: GameState,
    submission: DiagnosisSubmission,
    now: float,
) -> EvaluationReport:
    """Score a finished investigation against the authored solution."""
    performed = state.performed_ids()
    performed_set = set(performed)

    slot_results = []
    diagnosis_errors = 0
    free_pending: list[tuple[str, str]] = []
    for slot in case.diagnosis.slots:
        answer = submission.slots.get(slot.id, SlotAnswer())
        chosen: list[str] = []
        for sol_id in answer.chosen:  # dedupe, keep submission order
            if sol_id not in chosen:
                chosen.append(sol_id)
        chosen_set = set(chosen)
        hit = sorted(chosen_set & slot.correct)
        miss = sorted(slot.correct - chosen_set)
        false_positive = sorted(chosen_set - slot.correct)
        diagnosis_errors += len(miss) + len(false_positive)
        slot_results.append(
            SlotResult(
                slot_id=slot.id,
                chosen=tuple(chosen),
                correct=tuple(sorted(slot.correct)),
                hit=tuple(hit),
                miss=tuple(miss),
                false_positive=tuple(false_positive),
            )
        )
        for text in answer.free_texts:
            free_pending.append((slot.id, text))

    missed_required = tuple(
        card.id
        for card in case.actions
        if card.usefulness is Usefulness.REQUIRED and card.id not in performed_set
    )
    useless_performed = tuple(
        card_id
        for card_id in performed
        if case.action_by_id(card_id).usefulness is Usefulness.USELESS
    )

    order_violations: list[tuple[str, str]] = []
    seen: set[str] = set()
    for card_id in performed:
        card = case.action_by_id(card_id)
        for prereq in sorted(card.prerequisites):
            if prereq not in seen:
                order_violations.append((card_id, prereq))
        seen.add(card_id)

    wrong_answers = []
    for card_id in performed:
        question = case.action_by_id(card_id).question
        if question is None:
            continue
        answered = state.answers.get(card_id)
        if answered is None or answered != question.correct:
            wrong_answers.append(card_id)

    elapsed = now - state.started_at
    item_finals = dict(state.item_values)
    seconds_item = case.scoring.seconds_item()
    if seconds_item is not None:
        item_finals[seconds_item.id] = elapsed

    p = case.penalties
    raw_grade = p.grade_max - (
        len(missed_required) * p.missed_required
        + len(useless_performed) * p.useless_performed
        + len(order_violations) * p.order_violation
        + len(wrong_answers) * p.wrong_analysis_answer
        + diagnosis_errors * p.diagnosis_error
        + state.hints_used * p.help_used
    )
    grade = min(max(raw_grade, p.grade_min), p.grade_max)

    return EvaluationReport(
        case_id=case.id,
        slots=tuple(slot_results),
        missed_required=missed_required,
        useless_performed=useless_performed,
        order_violations=tuple(order_violations),
        wrong_answers=tuple(wrong_answers),
        free_answers_pending=tuple(free_pending),
        item_finals=item_finals,
        elapsed_seconds=elapsed,
        grade=grade,
    )


def submit_diagnosis(
    case: CaseDefinition,
    state: GameState,
    submission: DiagnosisSubmission,
    now: float,
    allow_free_anywhere: bool = False,
) -> tuple[GameState, EvaluationReport]:
    _require_open(state)
    _validate_submission(case, submission, allow_free_anywhere)
    report = evaluate(case, state, submission, now)
    new_state = replace(state, phase=Phase.DIAGNOSED, report=report)
    return new_state, report


# ---------------------------------------------------------------------------
# Report serialization

def report_to_dict(report: EvaluationReport) -> dict:
    return {
        "case_id": report.case_id,
        "slots": [
            {
                "slot_id": s.slot_id,
                "chosen": list(s.chosen),
                "correct": list(s.correct),
                "hit": list(s.hit),
                "miss": list(s.miss),
                "false_positive": list(s.false_positive),
            }
            for s in report.slots
        ],
        "missed_required": list(report.missed_required),
        "useless_performed": list(report.useless_performed),
        "order_violations": [list(v) for v in report.order_violations],
        "wrong_answers": list(report.wrong_answers),
        "free_answers_pending": [list(f) for f in report.free_answers_pending],
        "item_finals": {k: report.item_finals[k] for k in sorted(report.item_finals)},
        "elapsed_seconds": report.elapsed_seconds,
        "grade": report.grade,
    }


def report_json(report: EvaluationReport) -> str:
    return canonical_json(report_to_dict(report))


def report_hash(report: EvaluationReport) -> str:
    return hashlib.sha256(report_json(report).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Views

def feedback_to_dict(feedback: AnswerFeedback) -> dict:
    """Wire form of answer feedback; correctness fields only when present."""
    doc: dict = {"card_id": feedback.card_id, "acknowledged": feedback.acknowledged}
    if feedback.correct is not None:
        doc["correct"] = feedback.correct
        doc["correct_choice_ids"] = list(feedback.correct_choice_ids or ())
        if feedback.explanation is not None:
            doc["explanation"] = feedback.explanation
    return doc


def outcome_to_dict(outcome: ActionOutcome) -> dict:
    doc: dict = {
        "card_id": outcome.card_id,
        "text": outcome.text,
        "media": [
            {"kind": m.kind.value, "path": m.path, "caption": m.caption}
            for m in outcome.media
        ],
    }
    if outcome.question is not None:
        doc["question"] = {
            "card_id": outcome.question.card_id,
            "prompt": outcome.question.prompt,
            "choices": [{"id": c, "text": t} for c, t in outcome.question.choices],
        }
    return doc


def render_view(
    case: CaseDefinition, state: GameState, policy: FeedbackPolicy
) -> dict:
    """Learner-facing projection of the state, filtered by policy.

    Invisible cards are wholly absent.  Disabled cards show their name only.
    Scoring item values appear only when policy.scores is immediate or the
    case is diagnosed; correctness data only when policy.answers permits.
    """
    cards = []
    pending_questions = []
    performed_set = set(state.performed_ids())
    for card in case.actions:
        st = state.card_states[card.id]
        if st is CardState.INVISIBLE:
            continue
        entry = {
            "id": card.id,
            "name": card.name,
            "category": card.category,
            "state": st.value,
            "performed": card.id in performed_set,
        }
        cards.append(entry)
        if (
            card.id in performed_set
            and card.question is not None
            and card.id not in state.answers
        ):
            view = _question_view(card)
            pending_questions.append(
                {
                    "card_id": view.card_id,
                    "prompt": view.prompt,
                    "choices": [{"id": c, "text": t} for c, t in view.choices],
                }
            )

    diagnosed = state.phase is Phase.DIAGNOSED
    doc: dict = {
        "case_id": case.id,
        "case_name": case.meta.name,
        "phase": state.phase.value,
        "labels": case.labels.resolved(),
        "problem": {
            "text": case.problem.text,
            "media": [
                {"kind": m.kind.value, "path": m.path, "caption": m.caption}
                for m in case.problem.media
            ],
        },
        "cards": cards,
        "pending_questions": pending_questions,
        "directory": [
            {
                "card_id": e.card_id,
                "at": e.at,
                "text": e.text,
                "media": [
                    {"kind": m.kind.value, "path": m.path, "caption": m.caption}
                    for m in e.media
                ],
            }
            for e in state.directory
        ],
        "notebook": [
            {
                "target": line.target,
                "marks": [
                    {"sign": m.sign, "note": m.note, "directory_ref": m.directory_ref}
                    for m in line.marks
                ],
            }
            for line in state.notebook
        ],
        "diagnosis_form": [
            {
                "slot_id": slot.id,
                "label": slot.label,
                "mode": slot.mode.value,
                "options": [{"id": s.id, "text": s.text} for s in slot.options],
                "allow_free_text": slot.allow_free_text,
            }
            for slot in case.diagnosis.slots
        ],
        "hints_remaining": len(case.help) - state.hints_used,
        "answered_cards": sorted(state.answers),
    }
    if policy.scores is Timing.IMMEDIATE or diagnosed:
        doc["items"] = {
            item.id: {
                "display_name": item.display_name,
                "value": state.item_values.get(item.id, item.initial),
                "unit": item.unit.value,
                "direction": item.direction.value,
            }
            for item in case.scoring.items
        }
    if policy.answers is Timing.IMMEDIATE and not diagnosed:
        doc["answer_results"] = {
            card_id: {
                "correct": state.answers[card_id]
                == case.action_by_id(card_id).question.correct
            }
            for card_id in sorted(state.answers)
        }
    if diagnosed and state.report is not None:
        doc["report"] = report_to_dict(state.report)
    return doc


# ---------------------------------------------------------------------------
# Convenience wrapper binding (case, policy, clock)

class PlaySession:
    """Single-writer wrapper around the pure transition functions."""

    def __init__(
        self,
        case: CaseDefinition,
        policy: FeedbackPolicy | None = None,
        clock=None,
        allow_free_anywhere: bool = False,
    ):
        self.case = case
        self.policy = policy or FeedbackPolicy()
        self.clock = clock or SystemClock()
        self.allow_free_anywhere = allow_free_anywhere
        self.state = start_session(case, self.policy, self.clock)

    def perform(self, card_id: str, at: float | None = None) -> ActionOutcome:
        now = self.clock.now() if at is None else at
        self.state, outcome = perform_action(self.case, self.state, card_id, now)
        return outcome

    def answer(
        self, card_id: str, choice_ids: tuple[str, ...], at: float | None = None
    ) -> AnswerFeedback:
        now = self.clock.now() if at is None else at
        self.state, feedback = answer_question(
            self.case, self.state, card_id, tuple(choice_ids), self.policy, now
        )
        return feedback

    def hint(self) -> str:
        self.state, text = request_hint(self.case, self.state)
        return text

    def note(self, ops: tuple[NotebookOp, ...]) -> None:
        self.state = edit_notebook(self.state, ops)

    def diagnose(
        self, submission: DiagnosisSubmission, at: float | None = None
    ) -> EvaluationReport:
        now = self.clock.now() if at is None else at
        self.state, report = submit_diagnosis(
            self.case,
            self.state,
            submission,
            now,
            allow_free_anywhere=self.allow_free_anywhere,
        )
        return report

    def view(self) -> dict:
        return render_view(self.case, self.state, self.policy)
