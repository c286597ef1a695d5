"""Case data model: the compiled, playable representation of a case study.

A case bundles everything the play engine needs: the problem statement, the
deck of action cards, the diagnosis form with its correct solutions, scoring
items, penalty weights, interface labels and help hints.  Cases serialize to
a canonical JSON document (``case.json``) that sits next to a ``media/``
directory; the pair (zipped) is the interchange unit between the authoring
tools, the session service and the player UI.

Values are immutable after construction.  Parsing and serialization are pure:
equal cases serialize to byte-identical text, and ``parse_case_bundle``
rejects any document that violates a model invariant with a message naming
the offending id.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from pathlib import Path

from . import triggers

FORMAT_VERSION = 1

LABEL_KEYS = (
    "problem",
    "solutions",
    "help",
    "repository",
    "diagnosis",
    "notebook",
    "validate",
)

DEFAULT_LABELS = {
    "problem": "Problem",
    "solutions": "Solutions",
    "help": "Help",
    "repository": "Directory",
    "diagnosis": "Diagnosis",
    "notebook": "Notebook",
    "validate": "Validate",
}


class CardState(str, Enum):
    VISIBLE = "visible"
    INVISIBLE = "invisible"
    DISABLED = "disabled"


class Usefulness(str, Enum):
    REQUIRED = "required"
    OPTIONAL = "optional"
    USELESS = "useless"


class MediaKind(str, Enum):
    IMAGE = "image"
    VIDEO = "video"
    SOUND = "sound"
    WEB_LINK = "web_link"


class SlotMode(str, Enum):
    SINGLE = "single"
    MULTI = "multi"


class Direction(str, Enum):
    HIGHER_BETTER = "higher_better"
    LOWER_BETTER = "lower_better"


class Unit(str, Enum):
    POINTS = "points"
    SECONDS = "seconds"
    CURRENCY = "currency"


class CaseValidationError(Exception):
    """A case violates one or more model invariants."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class BundleError(Exception):
    """A bundle document is malformed or invalid."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class MediaRef:
    kind: MediaKind
    path: str
    caption: str | None = None


@dataclass(frozen=True)
class CaseMeta:
    name: str
    created: str  # ISO-8601 date
    author: str
    difficulty: int  # 1..5
    field: str = ""
    description: str = ""
    suggestions: str = ""


@dataclass(frozen=True)
class LabelSet:
    """Interface label overrides; unset keys fall back to the defaults."""

    overrides: dict[str, str] = field(default_factory=dict)

    def get(self, key: str) -> str:
        return self.overrides.get(key, DEFAULT_LABELS[key])

    def resolved(self) -> dict[str, str]:
        return {key: self.get(key) for key in LABEL_KEYS}


@dataclass(frozen=True)
class ProblemStatement:
    text: str
    media: tuple[MediaRef, ...] = ()


@dataclass(frozen=True)
class Choice:
    id: str
    text: str


@dataclass(frozen=True)
class AnalysisQuestion:
    prompt: str
    choices: tuple[Choice, ...]
    correct: frozenset[str]
    explanation: str | None = None
    # choice id -> (item id -> delta), applied when that choice is picked
    choice_deltas: dict[str, dict[str, float]] = field(default_factory=dict)

    def choice_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.choices)


@dataclass(frozen=True)
class ActionCard:
    id: str
    name: str
    initial_state: CardState = CardState.VISIBLE
    category: str | None = None
    content_text: str = ""
    media: tuple[MediaRef, ...] = ()
    question: AnalysisQuestion | None = None
    usefulness: Usefulness = Usefulness.OPTIONAL
    prerequisites: frozenset[str] = frozenset()
    score_deltas: dict[str, float] = field(default_factory=dict)
    trigger: str | None = None


@dataclass(frozen=True)
class Solution:
    id: str
    text: str


@dataclass(frozen=True)
class DiagnosisSlot:
    id: str
    label: str
    mode: SlotMode = SlotMode.SINGLE
    options: tuple[Solution, ...] = ()
    correct: frozenset[str] = frozenset()
    allow_free_text: bool = False

    def option_ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.options)


@dataclass(frozen=True)
class DiagnosisForm:
    slots: tuple[DiagnosisSlot, ...]


@dataclass(frozen=True)
class ScoringItem:
    id: str
    display_name: str
    direction: Direction = Direction.HIGHER_BETTER
    initial: float = 0.0
    unit: Unit = Unit.POINTS


@dataclass(frozen=True)
class ScoringSpec:
    items: tuple[ScoringItem, ...] = ()

    def item_ids(self) -> tuple[str, ...]:
        return tuple(i.id for i in self.items)

    def seconds_item(self) -> ScoringItem | None:
        for item in self.items:
            if item.unit is Unit.SECONDS:
                return item
        return None


@dataclass(frozen=True)
class PenaltyConfig:
    missed_required: float = 10.0
    useless_performed: float = 5.0
    order_violation: float = 5.0
    wrong_analysis_answer: float = 5.0
    diagnosis_error: float = 10.0
    help_used: float = 5.0
    grade_max: float = 100.0
    grade_min: float = 0.0


PENALTY_KEYS = (
    "missed_required",
    "useless_performed",
    "order_violation",
    "wrong_analysis_answer",
    "diagnosis_error",
    "help_used",
    "grade_max",
    "grade_min",
)


@dataclass(frozen=True)
class CaseDefinition:
    id: str
    meta: CaseMeta
    labels: LabelSet
    problem: ProblemStatement
    actions: tuple[ActionCard, ...]
    diagnosis: DiagnosisForm
    scoring: ScoringSpec = ScoringSpec()
    penalties: PenaltyConfig = PenaltyConfig()
    help: tuple[str, ...] = ()

    def action_by_id(self, card_id: str) -> ActionCard | None:
        for card in self.actions:
            if card.id == card_id:
                return card
        return None

    def slot_by_id(self, slot_id: str) -> DiagnosisSlot | None:
        for slot in self.diagnosis.slots:
            if slot.id == slot_id:
                return slot
        return None

    def card_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.actions)

    def all_media(self) -> tuple[MediaRef, ...]:
        refs = list(self.problem.media)
        for card in self.actions:
            refs.extend(card.media)
        return tuple(refs)


def slugify(name: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")
    return slug or "case"


# ---------------------------------------------------------------------------
# Validation

def _check_duplicates(ids: list[str], what: str, problems: list[str]) -> None:
    seen: set[str] = set()
    for item_id in ids:
        if item_id in seen:
            problems.append(f"duplicate {what} id '{item_id}'")
        seen.add(item_id)


def _prerequisite_cycle(actions: tuple[ActionCard, ...]) -> list[str] | None:
    """Return one cycle through the prerequisite relation, if any."""
    graph = {c.id: sorted(c.prerequisites) for c in actions}
    WHITE, GREY, BLACK = 0, 1, 2
    color = {cid: WHITE for cid in graph}
    stack: list[str] = []

    def visit(node: str) -> list[str] | None:
        color[node] = GREY
        stack.append(node)
        for dep in graph.get(node, ()):  # unknown deps reported separately
            if dep not in graph:
                continue
            if color[dep] == GREY:
                return stack[stack.index(dep):] + [dep]
            if color[dep] == WHITE:
                cycle = visit(dep)
                if cycle is not None:
                    return cycle
        stack.pop()
        color[node] = BLACK
        return None

    for cid in graph:
        if color[cid] == WHITE:
            cycle = visit(cid)
            if cycle is not None:
                return cycle
    return None


def validate_case(case: CaseDefinition) -> list[str]:
    """Check every model invariant; returns human-readable problems."""
    problems: list[str] = []

    if not case.id:
        problems.append("case id is empty")
    if not case.meta.name.strip():
        problems.append("meta name is empty")
    if not 1 <= case.meta.difficulty <= 5:
        problems.append(f"difficulty {case.meta.difficulty} outside 1..5")
    try:
        date.fromisoformat(case.meta.created)
    except ValueError:
        problems.append(f"created date '{case.meta.created}' is not ISO-8601")

    for key, value in case.labels.overrides.items():
        if key not in LABEL_KEYS:
            problems.append(f"unknown label key '{key}'")
        elif not value.strip():
            problems.append(f"label override '{key}' is empty")

    if not case.problem.text.strip():
        problems.append("problem text is empty")

    item_ids = list(case.scoring.item_ids())
    _check_duplicates(item_ids, "scoring item", problems)
    declared_items = set(item_ids)
    seconds_items = [i.id for i in case.scoring.items if i.unit is Unit.SECONDS]
    if len(seconds_items) > 1:
        problems.append(
            "more than one scoring item with unit=seconds: "
            + ", ".join(f"'{i}'" for i in seconds_items)
        )
    for item in case.scoring.items:
        if not math.isfinite(item.initial):
            problems.append(f"scoring item '{item.id}' initial is not finite")

    card_ids = list(case.card_ids())
    _check_duplicates(card_ids, "card", problems)
    declared_cards = set(card_ids)

    for card in case.actions:
        if card.id in card.prerequisites:
            problems.append(f"card '{card.id}' is its own prerequisite")
        for dep in sorted(card.prerequisites):
            if dep not in declared_cards:
                problems.append(
                    f"card '{card.id}' prerequisite '{dep}' is not a declared card"
                )
        for item_id in sorted(card.score_deltas):
            if item_id not in declared_items:
                problems.append(
                    f"card '{card.id}' score delta targets undeclared item '{item_id}'"
                )
        if card.question is not None:
            q = card.question
            if len(q.choices) < 2:
                problems.append(f"card '{card.id}' question has fewer than 2 choices")
            choice_ids = list(q.choice_ids())
            _check_duplicates(choice_ids, f"card '{card.id}' choice", problems)
            if not q.correct:
                problems.append(f"card '{card.id}' question has no correct choice")
            for cid in sorted(q.correct):
                if cid not in choice_ids:
                    problems.append(
                        f"card '{card.id}' correct choice '{cid}' is not a declared choice"
                    )
            for cid in sorted(q.choice_deltas):
                if cid not in choice_ids:
                    problems.append(
                        f"card '{card.id}' choice delta for unknown choice '{cid}'"
                    )
                for item_id in sorted(q.choice_deltas[cid]):
                    if item_id not in declared_items:
                        problems.append(
                            f"card '{card.id}' choice '{cid}' delta targets "
                            f"undeclared item '{item_id}'"
                        )
        if card.trigger is not None:
            try:
                program = triggers.parse_trigger(card.trigger)
            except triggers.TriggerSyntaxError as exc:
                problems.append(
                    f"card '{card.id}' trigger does not parse: {exc} "
                    f"(offset {exc.offset})"
                )
            else:
                problems.extend(
                    _validate_trigger_refs(
                        program,
                        card,
                        declared_cards,
                        declared_items,
                    )
                )

    cycle = _prerequisite_cycle(case.actions)
    if cycle is not None:
        problems.append("prerequisite cycle: " + " -> ".join(cycle))

    slot_ids = [s.id for s in case.diagnosis.slots]
    if not slot_ids:
        problems.append("diagnosis form has no slots")
    _check_duplicates(slot_ids, "slot", problems)
    for slot in case.diagnosis.slots:
        option_ids = list(slot.option_ids())
        _check_duplicates(option_ids, f"slot '{slot.id}' solution", problems)
        if not option_ids and not slot.allow_free_text:
            problems.append(
                f"slot '{slot.id}' has no options and does not allow free text"
            )
        for sol in slot.options:
            if not sol.text.strip():
                problems.append(f"slot '{slot.id}' solution '{sol.id}' text is empty")
        for cid in sorted(slot.correct):
            if cid not in option_ids:
                problems.append(
                    f"slot '{slot.id}' correct solution '{cid}' is not an option"
                )
        if slot.mode is SlotMode.SINGLE and len(slot.correct) > 1:
            problems.append(
                f"slot '{slot.id}' is single-choice but has "
                f"{len(slot.correct)} correct solutions"
            )

    if case.penalties.grade_min > case.penalties.grade_max:
        problems.append(
            f"grade_min {case.penalties.grade_min} exceeds "
            f"grade_max {case.penalties.grade_max}"
        )
    for key in PENALTY_KEYS[:6]:
        if getattr(case.penalties, key) < 0:
            problems.append(f"penalty '{key}' is negative")

    return problems


def _validate_trigger_refs(
    program: triggers.TriggerProgram,
    card: ActionCard,
    declared_cards: set[str],
    declared_items: set[str],
) -> list[str]:
    problems: list[str] = []
    for stmt in triggers.walk(program):
        if isinstance(stmt, triggers.CardCommand):
            if stmt.card not in declared_cards:
                problems.append(
                    f"card '{card.id}' trigger references undeclared card '{stmt.card}'"
                )
        elif isinstance(stmt, triggers.AddDelta):
            if stmt.item not in declared_items:
                problems.append(
                    f"card '{card.id}' trigger adds to undeclared item '{stmt.item}'"
                )
        elif isinstance(stmt, triggers.Conditional):
            if card.question is None:
                problems.append(
                    f"card '{card.id}' trigger uses on_{stmt.branch} but the card "
                    "has no analysis question"
                )
    return problems


def check_case(case: CaseDefinition) -> CaseDefinition:
    problems = validate_case(case)
    if problems:
        raise CaseValidationError(problems)
    return case


# ---------------------------------------------------------------------------
# Serialization

def canonical_json(doc: object) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, newline at EOF."""
    return json.dumps(doc, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def _media_to_doc(ref: MediaRef) -> dict:
    doc: dict = {"kind": ref.kind.value, "path": ref.path}
    if ref.caption is not None:
        doc["caption"] = ref.caption
    return doc


def case_to_doc(case: CaseDefinition) -> dict:
    actions = []
    for card in case.actions:
        entry: dict = {
            "id": card.id,
            "name": card.name,
            "initial_state": card.initial_state.value,
            "usefulness": card.usefulness.value,
            "text": card.content_text,
            "media": [_media_to_doc(m) for m in card.media],
            "prerequisites": sorted(card.prerequisites),
            "deltas": {k: card.score_deltas[k] for k in sorted(card.score_deltas)},
        }
        if card.category is not None:
            entry["category"] = card.category
        if card.trigger is not None:
            entry["trigger"] = card.trigger
        if card.question is not None:
            q = card.question
            qdoc: dict = {
                "prompt": q.prompt,
                "choices": [{"id": c.id, "text": c.text} for c in q.choices],
                "answer_key": sorted(q.correct),
            }
            if q.explanation is not None:
                qdoc["explanation"] = q.explanation
            if q.choice_deltas:
                qdoc["choice_deltas"] = {
                    cid: {k: v[k] for k in sorted(v)}
                    for cid, v in sorted(q.choice_deltas.items())
                }
            entry["question"] = qdoc
        actions.append(entry)

    return {
        "format_version": FORMAT_VERSION,
        "id": case.id,
        "meta": {
            "name": case.meta.name,
            "created": case.meta.created,
            "author": case.meta.author,
            "difficulty": case.meta.difficulty,
            "field": case.meta.field,
            "description": case.meta.description,
            "suggestions": case.meta.suggestions,
        },
        "labels": {k: case.labels.overrides[k] for k in sorted(case.labels.overrides)},
        "problem": {
            "text": case.problem.text,
            "media": [_media_to_doc(m) for m in case.problem.media],
        },
        "actions": actions,
        "diagnosis": {
            "slots": [
                {
                    "id": slot.id,
                    "label": slot.label,
                    "mode": slot.mode.value,
                    "options": [{"id": s.id, "text": s.text} for s in slot.options],
                    "answer_key": sorted(slot.correct),
                    "allow_free_text": slot.allow_free_text,
                }
                for slot in case.diagnosis.slots
            ]
        },
        "scoring": {
            "items": [
                {
                    "id": item.id,
                    "display_name": item.display_name,
                    "direction": item.direction.value,
                    "initial": item.initial,
                    "unit": item.unit.value,
                }
                for item in case.scoring.items
            ]
        },
        "penalties": {key: getattr(case.penalties, key) for key in PENALTY_KEYS},
        "help": list(case.help),
    }


def serialize_case(case: CaseDefinition) -> str:
    """Canonical bundle text; equal cases serialize byte-identically."""
    return canonical_json(case_to_doc(case))


class _DocReader:
    """Walks a parsed JSON document collecting problems instead of raising."""

    def __init__(self) -> None:
        self.problems: list[str] = []

    def fail(self, message: str) -> None:
        self.problems.append(message)

    def enum(self, cls, value, where: str):
        try:
            return cls(value)
        except ValueError:
            allowed = ", ".join(m.value for m in cls)
            self.fail(f"{where}: '{value}' is not one of {allowed}")
            return None

    def media_list(self, docs, where: str) -> tuple[MediaRef, ...]:
        refs = []
        for i, doc in enumerate(docs or []):
            kind = self.enum(MediaKind, doc.get("kind"), f"{where} media[{i}] kind")
            path = doc.get("path")
            if not isinstance(path, str) or not path:
                self.fail(f"{where} media[{i}] has no path")
                continue
            if kind is not None:
                refs.append(MediaRef(kind=kind, path=path, caption=doc.get("caption")))
        return tuple(refs)


def case_from_doc(doc: dict) -> CaseDefinition:
    """Build a CaseDefinition from a parsed bundle document.

    Raises BundleError on structural problems; the result still has to pass
    validate_case (parse_case_bundle does both).
    """
    r = _DocReader()
    if not isinstance(doc, dict):
        raise BundleError(["bundle document is not a JSON object"])
    if doc.get("format_version") != FORMAT_VERSION:
        r.fail(f"unsupported format_version {doc.get('format_version')!r}")

    meta_doc = doc.get("meta") or {}
    try:
        difficulty = int(meta_doc.get("difficulty", 0))
    except (TypeError, ValueError):
        difficulty = 0
        r.fail(f"meta difficulty {meta_doc.get('difficulty')!r} is not an integer")
    meta = CaseMeta(
        name=str(meta_doc.get("name", "")),
        created=str(meta_doc.get("created", "")),
        author=str(meta_doc.get("author", "")),
        difficulty=difficulty,
        field=str(meta_doc.get("field", "")),
        description=str(meta_doc.get("description", "")),
        suggestions=str(meta_doc.get("suggestions", "")),
    )

    labels_doc = doc.get("labels") or {}
    labels = LabelSet(overrides={str(k): str(v) for k, v in labels_doc.items()})

    problem_doc = doc.get("problem") or {}
    problem = ProblemStatement(
        text=str(problem_doc.get("text", "")),
        media=r.media_list(problem_doc.get("media"), "problem"),
    )

    actions = []
    for adoc in doc.get("actions") or []:
        card_id = str(adoc.get("id", ""))
        where = f"action '{card_id}'"
        state = r.enum(
            CardState, adoc.get("initial_state", "visible"), f"{where} initial_state"
        )
        usefulness = r.enum(
            Usefulness, adoc.get("usefulness", "optional"), f"{where} usefulness"
        )
        question = None
        qdoc = adoc.get("question")
        if qdoc is not None:
            choices = tuple(
                Choice(id=str(c.get("id", "")), text=str(c.get("text", "")))
                for c in qdoc.get("choices") or []
            )
            choice_deltas = {
                str(cid): {str(k): float(v) for k, v in (deltas or {}).items()}
                for cid, deltas in (qdoc.get("choice_deltas") or {}).items()
            }
            question = AnalysisQuestion(
                prompt=str(qdoc.get("prompt", "")),
                choices=choices,
                correct=frozenset(str(c) for c in qdoc.get("answer_key") or []),
                explanation=qdoc.get("explanation"),
                choice_deltas=choice_deltas,
            )
        deltas = {}
        for key, value in (adoc.get("deltas") or {}).items():
            try:
                deltas[str(key)] = float(value)
            except (TypeError, ValueError):
                r.fail(f"{where} delta '{key}' value {value!r} is not a number")
        actions.append(
            ActionCard(
                id=card_id,
                name=str(adoc.get("name", "")),
                initial_state=state or CardState.VISIBLE,
                category=adoc.get("category"),
                content_text=str(adoc.get("text", "")),
                media=r.media_list(adoc.get("media"), where),
                question=question,
                usefulness=usefulness or Usefulness.OPTIONAL,
                prerequisites=frozenset(
                    str(p) for p in adoc.get("prerequisites") or []
                ),
                score_deltas=deltas,
                trigger=adoc.get("trigger"),
            )
        )

    slots = []
    for sdoc in (doc.get("diagnosis") or {}).get("slots") or []:
        slot_id = str(sdoc.get("id", ""))
        mode = r.enum(SlotMode, sdoc.get("mode", "single"), f"slot '{slot_id}' mode")
        slots.append(
            DiagnosisSlot(
                id=slot_id,
                label=str(sdoc.get("label", "")),
                mode=mode or SlotMode.SINGLE,
                options=tuple(
                    Solution(id=str(o.get("id", "")), text=str(o.get("text", "")))
                    for o in sdoc.get("options") or []
                ),
                correct=frozenset(str(c) for c in sdoc.get("answer_key") or []),
                allow_free_text=bool(sdoc.get("allow_free_text", False)),
            )
        )

    items = []
    for idoc in (doc.get("scoring") or {}).get("items") or []:
        item_id = str(idoc.get("id", ""))
        direction = r.enum(
            Direction,
            idoc.get("direction", "higher_better"),
            f"scoring item '{item_id}' direction",
        )
        unit = r.enum(Unit, idoc.get("unit", "points"), f"scoring item '{item_id}' unit")
        try:
            initial = float(idoc.get("initial", 0.0))
        except (TypeError, ValueError):
            initial = 0.0
            r.fail(f"scoring item '{item_id}' initial is not a number")
        items.append(
            ScoringItem(
                id=item_id,
                display_name=str(idoc.get("display_name", item_id)),
                direction=direction or Direction.HIGHER_BETTER,
                initial=initial,
                unit=unit or Unit.POINTS,
            )
        )

    pdoc = doc.get("penalties") or {}
    penalty_kwargs = {}
    for key in PENALTY_KEYS:
        if key in pdoc:
            try:
                penalty_kwargs[key] = float(pdoc[key])
            except (TypeError, ValueError):
                r.fail(f"penalty '{key}' value {pdoc[key]!r} is not a number")
    for key in pdoc:
        if key not in PENALTY_KEYS:
            r.fail(f"unknown penalty key '{key}'")

    if r.problems:
        raise BundleError(r.problems)

    return CaseDefinition(
        id=str(doc.get("id", "")),
        meta=meta,
        labels=labels,
        problem=problem,
        actions=tuple(actions),
        diagnosis=DiagnosisForm(slots=tuple(slots)),
        scoring=ScoringSpec(items=tuple(items)),
        penalties=PenaltyConfig(**penalty_kwargs),
        help=tuple(str(h) for h in doc.get("help") or []),
    )


def parse_case_bundle(text: str) -> CaseDefinition:
    """Parse canonical bundle text into a validated CaseDefinition."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BundleError([f"malformed bundle document: {exc}"]) from exc
    case = case_from_doc(doc)
    problems = validate_case(case)
    if problems:
        raise BundleError(problems)
    return case


def missing_media(case: CaseDefinition, media_dir: Path) -> list[str]:
    """Paths of non-link media that do not resolve inside media_dir."""
    missing = []
    for ref in case.all_media():
        if ref.kind is MediaKind.WEB_LINK:
            continue
        target = media_dir / ref.path
        if not target.is_file():
            missing.append(ref.path)
    return missing


def load_case_bundle(bundle_dir: Path) -> CaseDefinition:
    """Load and validate case.json + media/ from a bundle directory."""
    case_file = bundle_dir / "case.json"
    if not case_file.is_file():
        raise BundleError([f"no case.json in {bundle_dir}"])
    case = parse_case_bundle(case_file.read_text(encoding="utf-8"))
    missing = missing_media(case, bundle_dir / "media")
    if missing:
        raise BundleError(
            [f"media path '{p}' does not resolve inside the bundle" for p in missing]
        )
    return case
