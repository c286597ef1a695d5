"""Workbook compiler: teacher-authored CSV sheets in, validated case out.

A workbook is a directory of UTF-8 RFC-4180 CSV sheets (``meta.csv``,
``labels.csv``, ``problem.csv``, ``solutions.csv``, ``actions.csv``, plus
optional ``scoring.csv``, ``help.csv`` and ``penalties.csv``) next to a
``media/`` directory.  Every problem is reported as a Diagnostic carrying
the sheet, the 1-based row (0 for sheet-level issues) and the column header,
so authors can fix the exact cell.  Warnings never block compilation.
"""

from __future__ import annotations

import csv
import shutil
from dataclasses import dataclass
from datetime import date
from pathlib import Path

from . import triggers
from .model import (
    ActionCard,
    AnalysisQuestion,
    CardState,
    CaseDefinition,
    CaseMeta,
    Choice,
    DiagnosisForm,
    DiagnosisSlot,
    Direction,
    LabelSet,
    LABEL_KEYS,
    MediaKind,
    MediaRef,
    PenaltyConfig,
    PENALTY_KEYS,
    ProblemStatement,
    ScoringItem,
    ScoringSpec,
    SlotMode,
    Solution,
    Unit,
    Usefulness,
    _prerequisite_cycle,
    slugify,
    validate_case,
)
from .skins import ACTION_HEADERS, SCORING_HEADERS, SOLUTION_HEADERS, SKINS

SHEET_HEADERS: dict[str, tuple[str, ...]] = {
    "meta": ("key", "value"),
    "labels": ("key", "value"),
    "problem": ("text", "media"),
    "solutions": SOLUTION_HEADERS,
    "actions": ACTION_HEADERS,
    "scoring": SCORING_HEADERS,
    "help": ("hint",),
    "penalties": ("key", "value"),
}

REQUIRED_SHEETS = ("meta", "labels", "problem", "solutions", "actions")
OPTIONAL_SHEETS = ("scoring", "help", "penalties")

_MEDIA_EXTENSIONS = {
    ".png": MediaKind.IMAGE,
    ".jpg": MediaKind.IMAGE,
    ".mp4": MediaKind.VIDEO,
    ".mp3": MediaKind.SOUND,
    ".wav": MediaKind.SOUND,
}

_TRUE_WORDS = {"true", "yes", "1", "x"}
_FALSE_WORDS = {"false", "no", "0"}


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    sheet: str
    row: int  # 1-based file row; 0 for sheet-level issues
    column: str
    message: str

    def __str__(self) -> str:
        where = f"{self.sheet}.csv:{self.row}"
        if self.column:
            where += f":{self.column}"
        return f"{self.severity}: {where}: {self.message}"


class _Collector:
    def __init__(self) -> None:
        self.diagnostics: list[Diagnostic] = []

    def error(self, sheet: str, row: int, column: str, message: str) -> None:
        self.diagnostics.append(Diagnostic("error", sheet, row, column, message))

    def warning(self, sheet: str, row: int, column: str, message: str) -> None:
        self.diagnostics.append(Diagnostic("warning", sheet, row, column, message))

    @property
    def has_errors(self) -> bool:
        return any(d.severity == "error" for d in self.diagnostics)

    def sorted(self) -> list[Diagnostic]:
        return sorted(
            self.diagnostics, key=lambda d: (d.sheet, d.row, d.column, d.severity)
        )


@dataclass
class _Row:
    number: int  # 1-based file row
    cells: dict[str, str]

    def get(self, column: str) -> str:
        return self.cells.get(column, "").strip()


def _read_sheet(
    workbook: Path, name: str, diags: _Collector
) -> list[_Row] | None:
    """Read one sheet; returns None when the sheet is absent."""
    path = workbook / f"{name}.csv"
    if not path.is_file():
        return None
    expected = SHEET_HEADERS[name]
    try:
        with path.open(encoding="utf-8-sig", newline="") as fh:
            records = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        diags.error(name, 0, "", f"cannot read sheet: {exc}")
        return []
    if not records:
        diags.error(name, 0, "", "sheet is empty, expected a header row")
        return []
    header = [h.strip() for h in records[0]]
    for column in expected:
        if column not in header:
            diags.error(name, 1, column, f"missing required column '{column}'")
    for column in header:
        if column and column not in expected:
            diags.warning(name, 1, column, f"unknown column '{column}' is ignored")
    rows: list[_Row] = []
    for idx, record in enumerate(records[1:], start=2):
        if not any(cell.strip() for cell in record):
            continue
        if len(record) > len(header):
            diags.warning(
                name, idx, "", "row has more cells than the header; extras ignored"
            )
        cells = {header[i]: record[i] for i in range(min(len(header), len(record)))}
        rows.append(_Row(number=idx, cells=cells))
    return rows


def _parse_bool(
    raw: str, diags: _Collector, sheet: str, row: int, column: str
) -> bool | None:
    """Blank means absent (None); anything else must be a yes/no word."""
    if not raw:
        return None
    lowered = raw.lower()
    if lowered in _TRUE_WORDS:
        return True
    if lowered in _FALSE_WORDS:
        return False
    diags.error(sheet, row, column, f"'{raw}' is not a yes/no value")
    return None


def _parse_media_cell(
    raw: str,
    media_dir: Path,
    diags: _Collector,
    sheet: str,
    row: int,
    column: str,
) -> tuple[MediaRef, ...]:
    refs: list[MediaRef] = []
    for part in raw.split("|"):
        part = part.strip()
        if not part:
            continue
        if part.startswith(("http://", "https://")):
            refs.append(MediaRef(kind=MediaKind.WEB_LINK, path=part))
            continue
        ext = Path(part).suffix.lower()
        kind = _MEDIA_EXTENSIONS.get(ext)
        if kind is None:
            known = ", ".join(sorted(_MEDIA_EXTENSIONS))
            diags.error(
                sheet, row, column,
                f"cannot infer media kind of '{part}' (known extensions: {known})",
            )
            continue
        if not (media_dir / part).is_file():
            diags.error(
                sheet, row, column, f"media path '{part}' not found under media/"
            )
            continue
        refs.append(MediaRef(kind=kind, path=part))
    return tuple(refs)


def _parse_deltas_cell(
    raw: str,
    declared_items: set[str],
    diags: _Collector,
    sheet: str,
    row: int,
    column: str,
) -> dict[str, float]:
    deltas: dict[str, float] = {}
    for part in raw.split("|"):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            diags.error(
                sheet, row, column,
                f"'{part}' is not of the form item:+n or item:-n",
            )
            continue
        name, _, number = part.partition(":")
        name, number = name.strip(), number.strip()
        try:
            value = float(number)
        except ValueError:
            diags.error(sheet, row, column, f"'{number}' is not a number")
            continue
        if name not in declared_items:
            diags.error(
                sheet, row, column, f"undeclared scoring item '{name}'"
            )
            continue
        if name in deltas:
            diags.error(sheet, row, column, f"duplicate delta for item '{name}'")
            continue
        deltas[name] = value
    return deltas


def _compile_meta(rows: list[_Row], diags: _Collector) -> CaseMeta:
    known = ("name", "created", "author", "difficulty",
             "field", "description", "suggestions")
    values: dict[str, str] = {}
    for row in rows:
        key = row.get("key")
        if key not in known:
            diags.error("meta", row.number, "key", f"unknown meta key '{key}'")
            continue
        if key in values:
            diags.error("meta", row.number, "key", f"duplicate meta key '{key}'")
            continue
        values[key] = row.get("value")
        if key in ("name", "created", "author", "difficulty") and not values[key]:
            diags.error("meta", row.number, "value", f"meta '{key}' is empty")
    rows_by_key = {row.get("key"): row for row in rows}
    for key in ("name", "created", "author", "difficulty"):
        if key not in values:
            diags.error("meta", 0, "", f"missing required meta key '{key}'")
    difficulty = 0
    raw = values.get("difficulty", "")
    if raw:
        try:
            difficulty = int(raw)
        except ValueError:
            diags.error(
                "meta", rows_by_key["difficulty"].number, "value",
                f"difficulty '{raw}' is not an integer",
            )
        else:
            if not 1 <= difficulty <= 5:
                diags.error(
                    "meta", rows_by_key["difficulty"].number, "value",
                    f"difficulty {difficulty} outside 1..5",
                )
    created = values.get("created", "")
    if created:
        try:
            date.fromisoformat(created)
        except ValueError:
            diags.error(
                "meta", rows_by_key["created"].number, "value",
                f"created date '{created}' is not ISO-8601 (yyyy-mm-dd)",
            )
    return CaseMeta(
        name=values.get("name", ""),
        created=created,
        author=values.get("author", ""),
        difficulty=difficulty,
        field=values.get("field", ""),
        description=values.get("description", ""),
        suggestions=values.get("suggestions", ""),
    )


def _compile_labels(rows: list[_Row], diags: _Collector) -> LabelSet:
    overrides: dict[str, str] = {}
    for row in rows:
        key = row.get("key")
        if key not in LABEL_KEYS:
            allowed = ", ".join(LABEL_KEYS)
            diags.error(
                "labels", row.number, "key",
                f"unknown label key '{key}' (allowed: {allowed})",
            )
            continue
        if key in overrides:
            diags.error("labels", row.number, "key", f"duplicate label key '{key}'")
            continue
        value = row.get("value")
        if not value:
            diags.error("labels", row.number, "value", f"label '{key}' is empty")
            continue
        overrides[key] = value
    return LabelSet(overrides=overrides)


def _compile_problem(
    rows: list[_Row], media_dir: Path, diags: _Collector
) -> ProblemStatement:
    if not rows:
        diags.error("problem", 0, "", "problem sheet has no content row")
        return ProblemStatement(text="")
    if len(rows) > 1:
        diags.error(
            "problem", rows[1].number, "",
            "problem sheet must contain a single content row",
        )
    row = rows[0]
    text = row.get("text")
    if not text:
        diags.error("problem", row.number, "text", "problem text is empty")
    media = _parse_media_cell(
        row.get("media"), media_dir, diags, "problem", row.number, "media"
    )
    return ProblemStatement(text=text, media=media)


def _compile_scoring(
    rows: list[_Row], diags: _Collector
) -> tuple[ScoringSpec, dict[str, int]]:
    items: list[ScoringItem] = []
    item_rows: dict[str, int] = {}
    seconds_seen: str | None = None
    for row in rows:
        item_id = row.get("item_id")
        if not item_id:
            diags.error("scoring", row.number, "item_id", "item id is empty")
            continue
        if item_id in item_rows:
            diags.error(
                "scoring", row.number, "item_id", f"duplicate item id '{item_id}'"
            )
            continue
        direction = Direction.HIGHER_BETTER
        raw = row.get("direction")
        if raw:
            try:
                direction = Direction(raw)
            except ValueError:
                diags.error(
                    "scoring", row.number, "direction",
                    f"'{raw}' is not one of higher_better, lower_better",
                )
        unit = Unit.POINTS
        raw = row.get("unit")
        if raw:
            try:
                unit = Unit(raw)
            except ValueError:
                diags.error(
                    "scoring", row.number, "unit",
                    f"'{raw}' is not one of points, seconds, currency",
                )
        if unit is Unit.SECONDS:
            if seconds_seen is not None:
                diags.error(
                    "scoring", row.number, "unit",
                    f"a second item with unit=seconds ('{seconds_seen}' already is)",
                )
            seconds_seen = item_id
        initial = 0.0
        raw = row.get("initial")
        if raw:
            try:
                initial = float(raw)
            except ValueError:
                diags.error(
                    "scoring", row.number, "initial", f"'{raw}' is not a number"
                )
        item_rows[item_id] = row.number
        items.append(
            ScoringItem(
                id=item_id,
                display_name=row.get("display_name") or item_id,
                direction=direction,
                initial=initial,
                unit=unit,
            )
        )
    return ScoringSpec(items=tuple(items)), item_rows


def _compile_solutions(
    rows: list[_Row], diags: _Collector
) -> DiagnosisForm:
    slots: list[dict] = []
    current: dict | None = None
    seen_slots: set[str] = set()
    for row in rows:
        slot_id = row.get("slot_id")
        if not slot_id:
            diags.error("solutions", row.number, "slot_id", "slot id is empty")
            continue
        if current is None or current["id"] != slot_id:
            if slot_id in seen_slots:
                diags.error(
                    "solutions", row.number, "slot_id",
                    f"rows for slot '{slot_id}' must be contiguous",
                )
                continue
            seen_slots.add(slot_id)
            current = {
                "id": slot_id,
                "label": "",
                "mode": None,
                "allow_free_text": None,
                "options": [],
                "correct": [],
                "row": row.number,
            }
            slots.append(current)
        label = row.get("slot_label")
        if label:
            if current["label"] and current["label"] != label:
                diags.error(
                    "solutions", row.number, "slot_label",
                    f"conflicting labels for slot '{slot_id}'",
                )
            else:
                current["label"] = label
        raw_mode = row.get("mode")
        if raw_mode:
            try:
                mode = SlotMode(raw_mode)
            except ValueError:
                diags.error(
                    "solutions", row.number, "mode",
                    f"'{raw_mode}' is not one of single, multi",
                )
            else:
                if current["mode"] is not None and current["mode"] is not mode:
                    diags.error(
                        "solutions", row.number, "mode",
                        f"conflicting modes for slot '{slot_id}'",
                    )
                current["mode"] = mode
        free = _parse_bool(
            row.get("allow_free_text"), diags, "solutions", row.number,
            "allow_free_text",
        )
        if free is not None:
            if (
                current["allow_free_text"] is not None
                and current["allow_free_text"] != free
            ):
                diags.error(
                    "solutions", row.number, "allow_free_text",
                    f"conflicting allow_free_text for slot '{slot_id}'",
                )
            current["allow_free_text"] = free
        option_id = row.get("option_id")
        option_text = row.get("option_text")
        if not option_id and not option_text:
            continue  # slot-declaration row without an option
        if not option_id:
            diags.error(
                "solutions", row.number, "option_id",
                "option text without an option id",
            )
            continue
        if not option_text:
            diags.error(
                "solutions", row.number, "option_text",
                f"option '{option_id}' has no text",
            )
            continue
        if any(o.id == option_id for o in current["options"]):
            diags.error(
                "solutions", row.number, "option_id",
                f"duplicate option id '{option_id}' in slot '{slot_id}'",
            )
            continue
        current["options"].append(Solution(id=option_id, text=option_text))
        if _parse_bool(row.get("correct"), diags, "solutions", row.number, "correct"):
            current["correct"].append(option_id)

    built: list[DiagnosisSlot] = []
    for slot in slots:
        mode = slot["mode"] or SlotMode.SINGLE
        allow_free = bool(slot["allow_free_text"])
        if slot["options"] and not slot["correct"]:
            diags.error(
                "solutions", slot["row"], "correct",
                f"slot '{slot['id']}' marks no option as correct",
            )
        if not slot["options"] and not allow_free:
            diags.error(
                "solutions", slot["row"], "option_id",
                f"slot '{slot['id']}' has no options and does not allow free text",
            )
        if mode is SlotMode.SINGLE and len(slot["correct"]) > 1:
            diags.error(
                "solutions", slot["row"], "correct",
                f"slot '{slot['id']}' is single-choice but marks "
                f"{len(slot['correct'])} options correct",
            )
        built.append(
            DiagnosisSlot(
                id=slot["id"],
                label=slot["label"] or slot["id"],
                mode=mode,
                options=tuple(slot["options"]),
                correct=frozenset(slot["correct"]),
                allow_free_text=allow_free,
            )
        )
    if not built:
        diags.error("solutions", 0, "", "the diagnosis form needs at least one slot")
    return DiagnosisForm(slots=tuple(built))


def _compile_actions(
    rows: list[_Row],
    declared_items: set[str],
    media_dir: Path,
    diags: _Collector,
) -> tuple[tuple[ActionCard, ...], dict[str, int]]:
    # First pass: collect card ids so prerequisites and triggers can refer
    # to cards declared further down the sheet.
    card_rows: dict[str, int] = {}
    for row in rows:
        card_id = row.get("id")
        if not card_id:
            diags.error("actions", row.number, "id", "card id is empty")
        elif card_id in card_rows:
            diags.error(
                "actions", row.number, "id", f"duplicate card id '{card_id}'"
            )
        else:
            card_rows[card_id] = row.number
    declared_cards = set(card_rows)

    cards: list[ActionCard] = []
    for row in rows:
        card_id = row.get("id")
        if not card_id or card_rows.get(card_id) != row.number:
            continue  # empty or duplicate id already reported
        name = row.get("name")
        if not name:
            diags.error("actions", row.number, "name", f"card '{card_id}' has no name")
        state = CardState.VISIBLE
        raw = row.get("initial_state")
        if raw:
            try:
                state = CardState(raw)
            except ValueError:
                diags.error(
                    "actions", row.number, "initial_state",
                    f"'{raw}' is not a valid initial state "
                    "(allowed: visible, invisible, disabled)",
                )
        usefulness = Usefulness.OPTIONAL
        raw = row.get("usefulness")
        if raw:
            try:
                usefulness = Usefulness(raw)
            except ValueError:
                diags.error(
                    "actions", row.number, "usefulness",
                    f"'{raw}' is not a valid usefulness "
                    "(allowed: required, optional, useless)",
                )
        prerequisites: set[str] = set()
        for dep in row.get("prerequisites").split("|"):
            dep = dep.strip()
            if not dep:
                continue
            if dep == card_id:
                diags.error(
                    "actions", row.number, "prerequisites",
                    f"card '{card_id}' cannot be its own prerequisite",
                )
            elif dep not in declared_cards:
                diags.error(
                    "actions", row.number, "prerequisites",
                    f"unknown prerequisite card '{dep}'",
                )
            else:
                prerequisites.add(dep)

        text = row.get("text")
        media = _parse_media_cell(
            row.get("media"), media_dir, diags, "actions", row.number, "media"
        )
        if not text and not media:
            diags.warning(
                "actions", row.number, "text",
                f"card '{card_id}' reveals neither text nor media",
            )

        question = None
        prompt = row.get("question")
        if prompt:
            choices = [c.strip() for c in row.get("choices").split("|") if c.strip()]
            if len(choices) < 2:
                diags.error(
                    "actions", row.number, "choices",
                    "an analysis question needs at least 2 choices",
                )
            correct_ids: list[str] = []
            raw = row.get("correct")
            if not raw:
                diags.error(
                    "actions", row.number, "correct",
                    "an analysis question needs at least one correct choice",
                )
            else:
                for index_text in raw.split("|"):
                    index_text = index_text.strip()
                    if not index_text:
                        continue
                    try:
                        index = int(index_text)
                    except ValueError:
                        diags.error(
                            "actions", row.number, "correct",
                            f"'{index_text}' is not a 1-based choice index",
                        )
                        continue
                    if not 1 <= index <= len(choices):
                        diags.error(
                            "actions", row.number, "correct",
                            f"choice index {index} outside 1..{len(choices)}",
                        )
                        continue
                    cid = f"c{index}"
                    if cid in correct_ids:
                        diags.error(
                            "actions", row.number, "correct",
                            f"choice index {index} listed twice",
                        )
                        continue
                    correct_ids.append(cid)
            question = AnalysisQuestion(
                prompt=prompt,
                choices=tuple(
                    Choice(id=f"c{i}", text=c) for i, c in enumerate(choices, 1)
                ),
                correct=frozenset(correct_ids),
                explanation=row.get("explanation") or None,
            )
        else:
            for column in ("choices", "correct", "explanation"):
                if row.get(column):
                    diags.error(
                        "actions", row.number, column,
                        f"'{column}' given but the 'question' cell is empty",
                    )

        deltas = _parse_deltas_cell(
            row.get("deltas"), declared_items, diags, "actions", row.number, "deltas"
        )

        trigger = row.get("trigger") or None
        if trigger:
            try:
                program = triggers.parse_trigger(trigger)
            except triggers.TriggerSyntaxError as exc:
                diags.error(
                    "actions", row.number, "trigger", f"trigger syntax: {exc}"
                )
                trigger = None
            else:
                for stmt in triggers.walk(program):
                    if isinstance(stmt, triggers.CardCommand):
                        if stmt.card not in declared_cards:
                            diags.error(
                                "actions", row.number, "trigger",
                                f"trigger references unknown card '{stmt.card}'",
                            )
                    elif isinstance(stmt, triggers.AddDelta):
                        if stmt.item not in declared_items:
                            diags.error(
                                "actions", row.number, "trigger",
                                f"trigger adds to undeclared item '{stmt.item}'",
                            )
                    elif isinstance(stmt, triggers.Conditional) and question is None:
                        diags.error(
                            "actions", row.number, "trigger",
                            f"on_{stmt.branch} used but the card has no question",
                        )

        cards.append(
            ActionCard(
                id=card_id,
                name=name,
                initial_state=state,
                category=row.get("category") or None,
                content_text=text,
                media=media,
                question=question,
                usefulness=usefulness,
                prerequisites=frozenset(prerequisites),
                score_deltas=deltas,
                trigger=trigger,
            )
        )

    cycle = _prerequisite_cycle(tuple(cards))
    if cycle is not None:
        diags.error(
            "actions", card_rows.get(cycle[0], 0), "prerequisites",
            "prerequisite cycle: " + " -> ".join(cycle),
        )
    return tuple(cards), card_rows


def _compile_help(rows: list[_Row], diags: _Collector) -> tuple[str, ...]:
    hints = []
    for row in rows:
        hint = row.get("hint")
        if not hint:
            diags.warning("help", row.number, "hint", "empty hint row ignored")
            continue
        hints.append(hint)
    return tuple(hints)


def _compile_penalties(rows: list[_Row], diags: _Collector) -> PenaltyConfig:
    values: dict[str, float] = {}
    for row in rows:
        key = row.get("key")
        if key not in PENALTY_KEYS:
            allowed = ", ".join(PENALTY_KEYS)
            diags.error(
                "penalties", row.number, "key",
                f"unknown penalty key '{key}' (allowed: {allowed})",
            )
            continue
        if key in values:
            diags.error("penalties", row.number, "key", f"duplicate key '{key}'")
            continue
        raw = row.get("value")
        try:
            value = float(raw)
        except ValueError:
            diags.error("penalties", row.number, "value", f"'{raw}' is not a number")
            continue
        if key not in ("grade_max", "grade_min") and value < 0:
            diags.error(
                "penalties", row.number, "value",
                f"penalty '{key}' cannot be negative",
            )
            continue
        values[key] = value
    config = PenaltyConfig(**values)
    if config.grade_min > config.grade_max:
        diags.error(
            "penalties", 0, "",
            f"grade_min {config.grade_min} exceeds grade_max {config.grade_max}",
        )
    return config


def compile_workbook(
    workbook_path: Path | str,
) -> tuple[CaseDefinition | None, list[Diagnostic]]:
    """Compile a workbook directory; the case is None when errors remain."""
    workbook = Path(workbook_path)
    diags = _Collector()
    if not workbook.is_dir():
        diags.error("workbook", 0, "", f"'{workbook}' is not a directory")
        return None, diags.sorted()

    sheets: dict[str, list[_Row] | None] = {
        name: _read_sheet(workbook, name, diags) for name in SHEET_HEADERS
    }
    for name in REQUIRED_SHEETS:
        if sheets[name] is None:
            diags.error(name, 0, "", f"missing required sheet '{name}.csv'")

    media_dir = workbook / "media"
    meta = _compile_meta(sheets["meta"] or [], diags)
    labels = _compile_labels(sheets["labels"] or [], diags)
    problem = _compile_problem(sheets["problem"] or [], media_dir, diags)
    scoring, _ = _compile_scoring(sheets["scoring"] or [], diags)
    diagnosis = _compile_solutions(sheets["solutions"] or [], diags)
    actions, _ = _compile_actions(
        sheets["actions"] or [], set(scoring.item_ids()), media_dir, diags
    )
    help_entries = _compile_help(sheets["help"] or [], diags)
    penalties = _compile_penalties(sheets["penalties"] or [], diags)

    if diags.has_errors:
        return None, diags.sorted()

    case = CaseDefinition(
        id=slugify(meta.name),
        meta=meta,
        labels=labels,
        problem=problem,
        actions=actions,
        diagnosis=diagnosis,
        scoring=scoring,
        penalties=penalties,
        help=help_entries,
    )
    # Safety net: anything the cell checks above missed still blocks here,
    # so a compiled case can never violate a model invariant.
    for problem_text in validate_case(case):
        diags.error("case", 0, "", problem_text)
    if diags.has_errors:
        return None, diags.sorted()
    return case, diags.sorted()


# ---------------------------------------------------------------------------
# Lint

def _performable_closure(case: CaseDefinition) -> set[str]:
    """Cards that can ever be performed: initially visible ones plus every
    card some reachable trigger shows or enables (both branches counted)."""
    edges: dict[str, set[str]] = {}
    for card in case.actions:
        targets: set[str] = set()
        if card.trigger:
            for stmt in triggers.walk(triggers.parse_trigger(card.trigger)):
                if isinstance(stmt, triggers.CardCommand) and stmt.op in (
                    "show",
                    "enable",
                ):
                    targets.add(stmt.card)
        edges[card.id] = targets
    reachable = {
        card.id for card in case.actions if card.initial_state is CardState.VISIBLE
    }
    frontier = list(reachable)
    while frontier:
        current = frontier.pop()
        for target in edges.get(current, ()):
            if target not in reachable:
                reachable.add(target)
                frontier.append(target)
    return reachable


def lint_workbook(workbook_path: Path | str) -> list[Diagnostic]:
    """Compile diagnostics plus advisory warnings; never raises."""
    workbook = Path(workbook_path)
    case, diagnostics = compile_workbook(workbook)
    if case is None:
        return diagnostics

    diags = _Collector()
    diags.diagnostics.extend(diagnostics)

    rows = _read_sheet(workbook, "actions", _Collector()) or []
    action_rows = {row.get("id"): row.number for row in rows}
    scoring_rows = _read_sheet(workbook, "scoring", _Collector()) or []
    item_rows = {row.get("item_id"): row.number for row in scoring_rows}

    reachable = _performable_closure(case)
    for card in case.actions:
        if card.id in reachable:
            continue
        row = action_rows.get(card.id, 0)
        diags.warning(
            "actions", row, "initial_state",
            f"unreachable card '{card.id}': initially "
            f"{card.initial_state.value} and never shown or enabled by a "
            "reachable card",
        )
        if card.usefulness is Usefulness.REQUIRED:
            diags.warning(
                "actions", row, "usefulness",
                f"required card '{card.id}' has no path to visibility",
            )

    for card in case.actions:
        if card.question and len(card.question.correct) == len(card.question.choices):
            diags.warning(
                "actions", action_rows.get(card.id, 0), "correct",
                f"card '{card.id}' question marks every choice correct",
            )

    used: set[str] = set()
    for card in case.actions:
        used.update(card.score_deltas)
        if card.question:
            for deltas in card.question.choice_deltas.values():
                used.update(deltas)
        if card.trigger:
            for stmt in triggers.walk(triggers.parse_trigger(card.trigger)):
                if isinstance(stmt, triggers.AddDelta):
                    used.add(stmt.item)
    for item in case.scoring.items:
        if item.unit is Unit.SECONDS:
            continue  # fed by the elapsed-time copy at evaluation
        if item.id not in used:
            diags.warning(
                "scoring", item_rows.get(item.id, 0), "item_id",
                f"scoring item '{item.id}' is never referenced by a delta "
                "or trigger",
            )
    return diags.sorted()


# ---------------------------------------------------------------------------
# Scaffold

def scaffold_workbook(target_path: Path | str, skin_key: str = "generic") -> Path:
    """Write a compile-clean starter workbook for the given domain skin."""
    if skin_key not in SKINS:
        allowed = ", ".join(sorted(SKINS))
        raise ValueError(f"unknown skin '{skin_key}' (allowed: {allowed})")
    skin = SKINS[skin_key]
    target = Path(target_path)
    if target.exists() and any(target.iterdir()):
        raise FileExistsError(f"'{target}' already exists and is not empty")
    target.mkdir(parents=True, exist_ok=True)
    (target / "media").mkdir(exist_ok=True)

    def write(name: str, header: tuple[str, ...], rows: list[list[str]]) -> None:
        with (target / f"{name}.csv").open(
            "w", encoding="utf-8", newline=""
        ) as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)

    write("meta", SHEET_HEADERS["meta"], [[k, v] for k, v in skin.meta.items()])
    write("labels", SHEET_HEADERS["labels"], [[k, v] for k, v in skin.labels.items()])
    write("problem", SHEET_HEADERS["problem"], [[skin.problem, ""]])
    write("scoring", SHEET_HEADERS["scoring"], [list(item) for item in skin.items])
    write("solutions", SHEET_HEADERS["solutions"], [list(r) for r in skin.solutions])
    write(
        "actions",
        SHEET_HEADERS["actions"],
        [[row[h] for h in ACTION_HEADERS] for row in skin.actions],
    )
    write("help", SHEET_HEADERS["help"], [[hint] for hint in skin.help])
    write(
        "penalties",
        SHEET_HEADERS["penalties"],
        [[key, _format_default(key)] for key in PENALTY_KEYS],
    )
    return target


def _format_default(key: str) -> str:
    value = getattr(PenaltyConfig(), key)
    return str(int(value)) if value == int(value) else str(value)


def write_bundle(
    case: CaseDefinition,
    workbook_path: Path | str,
    output_path: Path | str,
) -> Path:
    """Write case.json + referenced media files as a bundle directory."""
    from .model import serialize_case

    workbook = Path(workbook_path)
    output = Path(output_path)
    output.mkdir(parents=True, exist_ok=True)
    (output / "case.json").write_text(serialize_case(case), encoding="utf-8")
    media_out = output / "media"
    media_out.mkdir(exist_ok=True)
    for ref in case.all_media():
        if ref.kind is MediaKind.WEB_LINK:
            continue
        source = workbook / "media" / ref.path
        destination = media_out / ref.path
        destination.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(source, destination)
    return output
