"""Scripted play traces: one operation per line.

Format (blank lines and ``#`` comments ignored)::

    tick <seconds>
    perform <card>
    answer <card> <choice,choice>
    hint
    note add <target ...>
    note remove <index>
    note mark <index> <+|-> [ref:<n>] <text ...>
    diagnose <slot>=<id,id|free:text>[;<slot>=...]

``tick`` advances the injected clock; everything else maps 1:1 onto an
engine operation.  A ``free:`` value submits the remainder of the segment
as a free-text answer for that slot.  Repeating a slot merges into one
submission, so ids and free text can be combined.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .engine import (
    AddLine,
    AddMark,
    DiagnosisSubmission,
    EvaluationReport,
    FeedbackPolicy,
    ManualClock,
    NotebookOp,
    PlaySession,
    RemoveLine,
    SlotAnswer,
)
from .model import CaseDefinition


class ScriptError(Exception):
    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


@dataclass(frozen=True)
class TraceOp:
    line_no: int
    op: str  # tick | perform | answer | hint | note | diagnose
    payload: dict = field(default_factory=dict)


def _parse_diagnose(rest: str, line_no: int) -> DiagnosisSubmission:
    chosen: dict[str, list[str]] = {}
    free: dict[str, list[str]] = {}
    order: list[str] = []
    for segment in rest.split(";"):
        segment = segment.strip()
        if not segment:
            continue
        if "=" not in segment:
            raise ScriptError(line_no, f"expected slot=value, got '{segment}'")
        slot_id, value = segment.split("=", 1)
        slot_id = slot_id.strip()
        if not slot_id:
            raise ScriptError(line_no, "empty slot id")
        if slot_id not in order:
            order.append(slot_id)
            chosen[slot_id] = []
            free[slot_id] = []
        value = value.strip()
        if value.startswith("free:"):
            free[slot_id].append(value[len("free:"):])
        elif value:
            chosen[slot_id].extend(
                v.strip() for v in value.split(",") if v.strip()
            )
    return DiagnosisSubmission(
        slots={
            slot_id: SlotAnswer(
                chosen=tuple(chosen[slot_id]), free_texts=tuple(free[slot_id])
            )
            for slot_id in order
        }
    )


def _parse_note(rest: str, line_no: int) -> NotebookOp:
    parts = rest.split(None, 1)
    if not parts:
        raise ScriptError(line_no, "note needs a sub-operation")
    sub, tail = parts[0], parts[1] if len(parts) > 1 else ""
    if sub == "add":
        if not tail:
            raise ScriptError(line_no, "note add needs a target")
        return AddLine(target=tail)
    if sub == "remove":
        try:
            return RemoveLine(index=int(tail))
        except ValueError:
            raise ScriptError(line_no, f"bad line index '{tail}'") from None
    if sub == "mark":
        fields = tail.split(None, 2)
        if len(fields) < 3:
            raise ScriptError(line_no, "note mark needs: <index> <+|-> <text>")
        try:
            line_index = int(fields[0])
        except ValueError:
            raise ScriptError(line_no, f"bad line index '{fields[0]}'") from None
        sign = fields[1]
        text = fields[2]
        ref = None
        if text.startswith("ref:"):
            ref_text, _, text = text.partition(" ")
            try:
                ref = int(ref_text[len("ref:"):])
            except ValueError:
                raise ScriptError(line_no, f"bad directory ref '{ref_text}'") from None
        return AddMark(line=line_index, sign=sign, note=text, directory_ref=ref)
    raise ScriptError(line_no, f"unknown note sub-operation '{sub}'")


def parse_script(text: str) -> list[TraceOp]:
    ops: list[TraceOp] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 1)
        op, rest = parts[0], parts[1] if len(parts) > 1 else ""
        if op == "tick":
            try:
                seconds = float(rest)
            except ValueError:
                raise ScriptError(line_no, f"bad tick amount '{rest}'") from None
            ops.append(TraceOp(line_no, "tick", {"seconds": seconds}))
        elif op == "perform":
            if not rest:
                raise ScriptError(line_no, "perform needs a card id")
            ops.append(TraceOp(line_no, "perform", {"card_id": rest}))
        elif op == "answer":
            fields = rest.split(None, 1)
            if len(fields) < 2:
                raise ScriptError(line_no, "answer needs: <card> <choice,choice>")
            choices = tuple(c.strip() for c in fields[1].split(",") if c.strip())
            ops.append(
                TraceOp(line_no, "answer", {"card_id": fields[0], "choices": choices})
            )
        elif op == "hint":
            ops.append(TraceOp(line_no, "hint", {}))
        elif op == "note":
            ops.append(TraceOp(line_no, "note", {"op": _parse_note(rest, line_no)}))
        elif op == "diagnose":
            ops.append(
                TraceOp(
                    line_no,
                    "diagnose",
                    {"submission": _parse_diagnose(rest, line_no)},
                )
            )
        else:
            raise ScriptError(line_no, f"unknown operation '{op}'")
    return ops


def run_script(
    case: CaseDefinition,
    script: str,
    policy: FeedbackPolicy | None = None,
    start_time: float = 0.0,
    allow_free_anywhere: bool = False,
) -> tuple[EvaluationReport | None, PlaySession]:
    """Run a script against a fresh session under a manual clock.

    Returns the report from the (last) diagnose operation, or None when
    the script never diagnoses.
    """
    clock = ManualClock(start=start_time)
    session = PlaySession(
        case, policy, clock, allow_free_anywhere=allow_free_anywhere
    )
    report: EvaluationReport | None = None
    for op in parse_script(script):
        if op.op == "tick":
            clock.tick(op.payload["seconds"])
        elif op.op == "perform":
            session.perform(op.payload["card_id"])
        elif op.op == "answer":
            session.answer(op.payload["card_id"], op.payload["choices"])
        elif op.op == "hint":
            session.hint()
        elif op.op == "note":
            session.note((op.payload["op"],))
        elif op.op == "diagnose":
            report = session.diagnose(op.payload["submission"])
    return report, session
