"""Compiler: fixture fidelity, cell-precise diagnostics, lint, scaffolds."""

import csv
import shutil
from pathlib import Path

import pytest

from casegen import FIXTURE_NAMES, fixture_path, triggers
from casegen.model import CardState, serialize_case
from casegen.skins import SKINS
from casegen.workbook import (
    compile_workbook,
    lint_workbook,
    scaffold_workbook,
    write_bundle,
)


def _copy_fixture(tmp_path: Path, name: str = "medical_emergency") -> Path:
    target = tmp_path / name
    shutil.copytree(fixture_path(name), target)
    return target


def _rewrite_cell(workbook: Path, sheet: str, row: int, column: str, value) -> None:
    """Set one cell (None deletes the row); row is the 1-based file row."""
    path = workbook / f"{sheet}.csv"
    with path.open(encoding="utf-8", newline="") as fh:
        records = list(csv.reader(fh))
    header = records[0]
    if value is None:
        del records[row - 1]
    else:
        records[row - 1][header.index(column)] = value
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerows(records)


def _append_row(workbook: Path, sheet: str, cells: dict) -> int:
    path = workbook / f"{sheet}.csv"
    with path.open(encoding="utf-8", newline="") as fh:
        records = list(csv.reader(fh))
    header = records[0]
    records.append([cells.get(h, "") for h in header])
    with path.open("w", encoding="utf-8", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(records)
    return len(records)


# ---------------------------------------------------------------------------
# Fixture fidelity


def test_all_fixtures_compile_clean():
    for name in FIXTURE_NAMES:
        case, diagnostics = compile_workbook(fixture_path(name))
        assert case is not None, (name, diagnostics)
        assert diagnostics == [], (name, diagnostics)


def test_medical_fixture_diagnosis_slots():
    case, _ = compile_workbook(fixture_path("medical_emergency"))
    assert [slot.id for slot in case.diagnosis.slots] == [
        "pathology",
        "medical_ward",
        "prescription",
        "pre_emergency_care",
    ]
    free_slot = case.slot_by_id("pre_emergency_care")
    assert free_slot.allow_free_text


def test_law_fixture_labels():
    case, _ = compile_workbook(fixture_path("law"))
    resolved = case.labels.resolved()
    assert resolved["problem"] == "Problem"
    assert resolved["solutions"] == "Legal qualifications"
    assert resolved["help"] == "Use a joker"
    assert resolved["repository"] == "Client file"


def test_fixture_cells_survive_into_the_case():
    # golden-style spot checks: semantic cells appear in the compiled case
    case, _ = compile_workbook(fixture_path("medical_emergency"))
    ecg = case.action_by_id("record_ecg")
    assert ecg.media[0].path == "ecg.png"
    assert ecg.question.prompt == "What does the trace show?"
    assert ecg.question.correct == {"c1"}
    assert ecg.score_deltas == {"accuracy": 10.0}
    assert ecg.prerequisites == {"check_vitals"}
    program = triggers.parse_trigger(ecg.trigger)
    assert isinstance(program.statements[0], triggers.Conditional)
    assert case.action_by_id("call_cathlab").initial_state is CardState.INVISIBLE
    assert case.help[0].startswith("Check the cardiac enzymes")
    assert case.penalties.missed_required == 10.0


def test_compile_is_deterministic():
    first_case, first_diags = compile_workbook(fixture_path("law"))
    second_case, second_diags = compile_workbook(fixture_path("law"))
    assert serialize_case(first_case) == serialize_case(second_case)
    assert first_diags == second_diags


# ---------------------------------------------------------------------------
# Broken workbook corpus: every defect yields the expected cell-level error
#
# Rows below reference the shipped medical_emergency fixture: actions.csv has
# its header on row 1 and cards on rows 2..9 (record_ecg on row 5); meta.csv
# has difficulty on row 5 and created on row 3.

CORPUS = [
    pytest.param(
        lambda wb: (wb / "actions.csv").unlink(),
        ("actions", 0, "", "missing required sheet"),
        id="missing-sheet",
    ),
    pytest.param(
        lambda wb: _rewrite_cell(wb, "actions", 2, "initial_state", "hiden"),
        ("actions", 2, "initial_state", "not a valid initial state"),
        id="bad-enum-initial-state",
    ),
    pytest.param(
        lambda wb: _rewrite_cell(wb, "actions", 3, "prerequisites", "ghost_card"),
        ("actions", 3, "prerequisites", "unknown prerequisite card 'ghost_card'"),
        id="dangling-prerequisite",
    ),
    pytest.param(
        lambda wb: _rewrite_cell(wb, "actions", 5, "media", "ghost.png"),
        ("actions", 5, "media", "media path 'ghost.png' not found"),
        id="dangling-media",
    ),
    pytest.param(
        lambda wb: _rewrite_cell(wb, "actions", 5, "media", "scan.tiff"),
        ("actions", 5, "media", "cannot infer media kind"),
        id="unknown-media-extension",
    ),
    pytest.param(
        lambda wb: _rewrite_cell(wb, "actions", 3, "id", "check_vitals"),
        ("actions", 3, "id", "duplicate card id 'check_vitals'"),
        id="duplicate-card-id",
    ),
    pytest.param(
        lambda wb: _rewrite_cell(wb, "actions", 5, "trigger", "show("),
        ("actions", 5, "trigger", "trigger syntax"),
        id="trigger-parse-failure",
    ),
    pytest.param(
        lambda wb: _rewrite_cell(wb, "actions", 5, "trigger", "show(nobody)"),
        ("actions", 5, "trigger", "unknown card 'nobody'"),
        id="dangling-trigger-reference",
    ),
    pytest.param(
        lambda wb: _rewrite_cell(wb, "actions", 2, "deltas", "speed:+1"),
        ("actions", 2, "deltas", "undeclared scoring item 'speed'"),
        id="delta-on-undeclared-item",
    ),
    pytest.param(
        lambda wb: (
            _rewrite_cell(wb, "actions", 2, "prerequisites", "give_oxygen"),
        ),
        ("actions", 2, "prerequisites", "prerequisite cycle"),
        id="prerequisite-cycle",
    ),
    pytest.param(
        lambda wb: _rewrite_cell(wb, "meta", 5, "value", "7"),
        ("meta", 5, "value", "difficulty 7 outside 1..5"),
        id="difficulty-out-of-range",
    ),
    pytest.param(
        lambda wb: _rewrite_cell(wb, "meta", 3, "value", "March 2024"),
        ("meta", 3, "value", "not ISO-8601"),
        id="bad-created-date",
    ),
    pytest.param(
        lambda wb: _rewrite_cell(wb, "meta", 2, "key", "title"),
        ("meta", 2, "key", "unknown meta key 'title'"),
        id="unknown-meta-key",
    ),
    pytest.param(
        lambda wb: _append_row(wb, "labels", {"key": "sidebar", "value": "X"}),
        ("labels", 6, "key", "unknown label key 'sidebar'"),
        id="unknown-label-key",
    ),
    pytest.param(
        lambda wb: (
            _rewrite_cell(wb, "problem", 2, "text", ""),
            _rewrite_cell(wb, "problem", 2, "media", "https://example.org/brief"),
        ),
        ("problem", 2, "text", "problem text is empty"),
        id="empty-problem-text",
    ),
    pytest.param(
        lambda wb: _rewrite_cell(wb, "solutions", 3, "correct", "true"),
        ("solutions", 2, "correct", "single-choice but marks 2 options"),
        id="single-slot-two-corrects",
    ),
    pytest.param(
        lambda wb: _rewrite_cell(wb, "solutions", 2, "correct", "false"),
        ("solutions", 2, "correct", "marks no option as correct"),
        id="slot-without-correct-option",
    ),
    pytest.param(
        lambda wb: _rewrite_cell(wb, "actions", 5, "choices", "Only one"),
        ("actions", 5, "choices", "at least 2 choices"),
        id="question-with-one-choice",
    ),
    pytest.param(
        lambda wb: _rewrite_cell(wb, "actions", 5, "correct", "9"),
        ("actions", 5, "correct", "choice index 9 outside 1..3"),
        id="correct-index-out-of-range",
    ),
    pytest.param(
        lambda wb: _append_row(
            wb,
            "scoring",
            {
                "item_id": "more_time",
                "display_name": "More time",
                "direction": "lower_better",
                "initial": "0",
                "unit": "seconds",
            },
        ),
        ("scoring", 4, "unit", "unit=seconds"),
        id="two-elapsed-time-items",
    ),
    pytest.param(
        lambda wb: _rewrite_cell(
            wb, "actions", 2, "trigger", "on_correct { add(accuracy, 1) }"
        ),
        ("actions", 2, "trigger", "has no question"),
        id="conditional-without-question",
    ),
    pytest.param(
        lambda wb: _rewrite_cell(wb, "penalties", 9, "value", "200"),
        ("penalties", 0, "", "exceeds grade_max"),
        id="grade-min-above-max",
    ),
    pytest.param(
        lambda wb: _rewrite_cell(wb, "actions", 2, "usefulness", "pointless"),
        ("actions", 2, "usefulness", "not a valid usefulness"),
        id="bad-enum-usefulness",
    ),
]


@pytest.mark.parametrize("mutate, expected", CORPUS)
def test_broken_workbooks_yield_cell_precise_errors(tmp_path, mutate, expected):
    workbook = _copy_fixture(tmp_path)
    mutate(workbook)
    case, diagnostics = compile_workbook(workbook)
    sheet, row, column, needle = expected
    errors = [d for d in diagnostics if d.severity == "error"]
    assert case is None
    assert errors, diagnostics
    matching = [
        d
        for d in errors
        if d.sheet == sheet and d.row == row and d.column == column
        and needle in d.message
    ]
    assert matching, (expected, [str(d) for d in errors])


def test_diagnostics_are_sorted_and_stable(tmp_path):
    workbook = _copy_fixture(tmp_path)
    _rewrite_cell(workbook, "actions", 5, "trigger", "show(")
    _rewrite_cell(workbook, "meta", 5, "value", "7")
    _rewrite_cell(workbook, "actions", 2, "deltas", "speed:+1")
    _, first = compile_workbook(workbook)
    _, second = compile_workbook(workbook)
    assert first == second
    keys = [(d.sheet, d.row, d.column) for d in first]
    assert keys == sorted(keys)


def test_unknown_extra_column_is_a_warning_not_an_error(tmp_path):
    workbook = _copy_fixture(tmp_path)
    path = workbook / "meta.csv"
    with path.open(encoding="utf-8", newline="") as fh:
        records = list(csv.reader(fh))
    records[0].append("comment")
    with path.open("w", encoding="utf-8", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(records)
    case, diagnostics = compile_workbook(workbook)
    assert case is not None
    warnings = [d for d in diagnostics if d.severity == "warning"]
    assert any("unknown column 'comment'" in d.message for d in warnings)


# ---------------------------------------------------------------------------
# Lint


def _independent_reachability(case) -> set[str]:
    """Fixpoint computed the slow way, independent of the lint closure."""
    performable = {
        card.id for card in case.actions if card.initial_state is CardState.VISIBLE
    }
    changed = True
    while changed:
        changed = False
        for card in case.actions:
            if card.id not in performable or not card.trigger:
                continue
            for stmt in triggers.walk(triggers.parse_trigger(card.trigger)):
                if (
                    isinstance(stmt, triggers.CardCommand)
                    and stmt.op in ("show", "enable")
                    and stmt.card not in performable
                ):
                    performable.add(stmt.card)
                    changed = True
    return performable


def test_unreachable_card_warning(tmp_path):
    workbook = _copy_fixture(tmp_path)
    # cut the only path to call_cathlab (the record_ecg on_correct show)
    _rewrite_cell(wb := workbook, "actions", 5, "trigger", "on_wrong { add(accuracy, -5) }")
    diagnostics = lint_workbook(wb)
    assert any(
        d.severity == "warning" and "unreachable card 'call_cathlab'" in d.message
        for d in diagnostics
    )
    assert any(
        d.severity == "warning"
        and "required card 'call_cathlab' has no path to visibility" in d.message
        for d in diagnostics
    )
    # the lint verdict agrees with an independently computed closure
    case, _ = compile_workbook(wb)
    reachable = _independent_reachability(case)
    flagged = {
        d.message.split("'")[1]
        for d in diagnostics
        if "unreachable card" in d.message
    }
    assert flagged == {c.id for c in case.actions} - reachable


def test_lint_reachability_matches_oracle_on_random_triggers(tmp_path):
    import random

    from .oracle import random_case
    from casegen.workbook import _performable_closure

    for seed in range(80):
        case = random_case(random.Random(seed * 31 + 5))
        assert _performable_closure(case) == _independent_reachability(case)


def test_fully_valid_fixture_has_no_lint_errors():
    for name in FIXTURE_NAMES:
        diagnostics = lint_workbook(fixture_path(name))
        assert [d for d in diagnostics if d.severity == "error"] == []
        assert diagnostics == [], (name, [str(d) for d in diagnostics])


def test_unused_scoring_item_warning(tmp_path):
    workbook = _copy_fixture(tmp_path)
    row = _append_row(
        workbook,
        "scoring",
        {
            "item_id": "style",
            "display_name": "Style points",
            "direction": "higher_better",
            "initial": "0",
            "unit": "points",
        },
    )
    diagnostics = lint_workbook(workbook)
    assert any(
        d.severity == "warning"
        and d.sheet == "scoring"
        and d.row == row
        and "'style' is never referenced" in d.message
        for d in diagnostics
    )


def test_all_correct_question_warning(tmp_path):
    workbook = _copy_fixture(tmp_path)
    _rewrite_cell(workbook, "actions", 5, "correct", "1|2|3")
    diagnostics = lint_workbook(workbook)
    assert any(
        "marks every choice correct" in d.message and d.severity == "warning"
        for d in diagnostics
    )


def test_lint_never_raises_on_broken_workbooks(tmp_path):
    workbook = _copy_fixture(tmp_path)
    (workbook / "actions.csv").unlink()
    diagnostics = lint_workbook(workbook)
    assert any(d.severity == "error" for d in diagnostics)


# ---------------------------------------------------------------------------
# Scaffold


def test_every_skin_scaffold_compiles_with_zero_diagnostics(tmp_path):
    for key in SKINS:
        target = tmp_path / key
        scaffold_workbook(target, key)
        case, diagnostics = compile_workbook(target)
        assert case is not None
        assert diagnostics == [], (key, [str(d) for d in diagnostics])
        assert lint_workbook(target) == []


def test_mechanics_scaffold_labels():
    import tempfile

    with tempfile.TemporaryDirectory() as td:
        target = Path(td) / "wb"
        scaffold_workbook(target, "mechanics")
        case, _ = compile_workbook(target)
        resolved = case.labels.resolved()
        assert resolved["problem"] == "Machine failure"
        assert resolved["solutions"] == "Investigation leads"
        assert resolved["repository"] == "Technical report"


def test_general_practitioner_scaffold_scoring_items(tmp_path):
    scaffold_workbook(tmp_path / "gp", "general_practitioner")
    case, _ = compile_workbook(tmp_path / "gp")
    assert [item.id for item in case.scoring.items] == ["accuracy", "time", "cost"]


def test_scaffold_refuses_to_overwrite(tmp_path):
    target = tmp_path / "wb"
    scaffold_workbook(target, "generic")
    with pytest.raises(FileExistsError):
        scaffold_workbook(target, "generic")
    with pytest.raises(ValueError):
        scaffold_workbook(tmp_path / "other", "martian")


def test_write_bundle_copies_media(tmp_path):
    case, _ = compile_workbook(fixture_path("medical_emergency"))
    bundle = tmp_path / "bundle"
    write_bundle(case, fixture_path("medical_emergency"), bundle)
    assert (bundle / "case.json").is_file()
    assert (bundle / "media" / "ecg.png").is_file()
