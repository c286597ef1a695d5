"""Trigger language: grammar, positioned errors, evaluation, round-trips."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from casegen import triggers
from casegen.triggers import (
    AddDelta,
    CardCommand,
    Conditional,
    TriggerProgram,
    TriggerSyntaxError,
    eval_trigger,
    format_trigger,
    parse_trigger,
)

from .oracle import engine_effects_as_tuples, naive_effects, random_program


def test_two_commands():
    program = parse_trigger("show(ecg); add(accuracy, -2)")
    assert program.statements == (
        CardCommand(op="show", card="ecg"),
        AddDelta(item="accuracy", amount=-2.0),
    )


def test_two_conditionals():
    program = parse_trigger(
        "on_correct { enable(ward_transfer) }; on_wrong { add(accuracy, -5) }"
    )
    assert len(program.statements) == 2
    first, second = program.statements
    assert isinstance(first, Conditional) and first.branch == "correct"
    assert first.body.statements == (CardCommand(op="enable", card="ward_transfer"),)
    assert isinstance(second, Conditional) and second.branch == "wrong"
    assert second.body.statements == (AddDelta(item="accuracy", amount=-5.0),)


def test_unknown_command_is_positioned_at_offset_zero():
    with pytest.raises(TriggerSyntaxError) as exc:
        parse_trigger("explode(x)")
    assert exc.value.offset == 0
    assert "unknown command" in str(exc.value)


@pytest.mark.parametrize(
    "source, expected_offset",
    [
        ("show(", 5),
        ("show)", 4),
        ("add(x 1)", 6),
        ("add(x, )", 7),
        ("on_correct { show(a) ", 21),
        ("show(a) show(b)", 8),
        ("add(x, 1e999)", 7),
    ],
)
def test_syntax_errors_carry_offsets(source, expected_offset):
    with pytest.raises(TriggerSyntaxError) as exc:
        parse_trigger(source)
    assert exc.value.offset == expected_offset
    assert exc.value.expected  # the expected-token set is never empty


def test_trailing_semicolon_and_whitespace_are_fine():
    assert parse_trigger("  show(a) ;  ") == parse_trigger("show(a)")
    assert parse_trigger("") == TriggerProgram()


def test_eval_plain_add():
    program = parse_trigger("add(cost, 10)")
    effects = eval_trigger(program, "no_question")
    assert engine_effects_as_tuples(effects) == [("add", "cost", 10.0)]


def test_eval_selects_matching_branch_only():
    program = parse_trigger("on_correct{show(a)}; on_wrong{show(b)}")
    assert engine_effects_as_tuples(eval_trigger(program, "correct")) == [
        ("card", "show", "a")
    ]
    assert engine_effects_as_tuples(eval_trigger(program, "wrong")) == [
        ("card", "show", "b")
    ]
    assert eval_trigger(program, "no_question") == ()


def test_eval_matches_naive_oracle_on_random_programs():
    rng = random.Random(7)
    for _ in range(500):
        program = random_program(rng)
        for outcome in ("correct", "wrong", "no_question"):
            assert engine_effects_as_tuples(
                eval_trigger(program, outcome)
            ) == naive_effects(program, outcome)


def _strip_wrong_branches(program: TriggerProgram) -> TriggerProgram:
    kept = []
    for stmt in program.statements:
        if isinstance(stmt, Conditional):
            if stmt.branch == "wrong":
                continue
            kept.append(Conditional(stmt.branch, _strip_wrong_branches(stmt.body)))
        else:
            kept.append(stmt)
    return TriggerProgram(tuple(kept))


def test_conditional_exclusivity():
    # Effects under "correct" never include anything sourced from an
    # on_wrong block: stripping those blocks changes nothing.
    rng = random.Random(11)
    for _ in range(300):
        program = random_program(rng)
        assert eval_trigger(program, "correct") == eval_trigger(
            _strip_wrong_branches(program), "correct"
        )


def test_format_round_trips_spec_examples():
    for source in (
        "show(ecg); add(accuracy, -2)",
        "on_correct { enable(ward_transfer) }; on_wrong { add(accuracy, -5) }",
    ):
        program = parse_trigger(source)
        assert parse_trigger(format_trigger(program)) == program


def test_format_is_canonical_and_idempotent():
    program = parse_trigger("on_correct{show(a);on_wrong{add(x,-1.5)}};hide(b)")
    canon = format_trigger(program)
    assert parse_trigger(canon) == program
    assert format_trigger(parse_trigger(canon)) == canon
    # nested bodies re-indent
    assert "\n    show(a)" in canon


def test_format_round_trips_random_asts():
    rng = random.Random(23)
    for _ in range(2000):
        program = random_program(rng)
        assert parse_trigger(format_trigger(program)) == program


def test_eval_is_deterministic():
    program = parse_trigger("on_wrong { add(a, 1); show(x) }; add(b, 2)")
    assert eval_trigger(program, "wrong") == eval_trigger(program, "wrong")


@settings(max_examples=150, deadline=None)
@given(st.text(max_size=80))
def test_parser_is_total_on_text(source):
    try:
        parse_trigger(source)
    except TriggerSyntaxError as exc:
        assert 0 <= exc.offset <= len(source.encode("utf-8", "ignore")) + 1


def test_parser_is_total_on_random_bytes():
    rng = random.Random(99)
    for _ in range(2000):
        blob = bytes(rng.randrange(256) for _ in range(rng.randrange(0, 40)))
        source = blob.decode("utf-8", "replace")
        try:
            parse_trigger(source)
        except TriggerSyntaxError:
            pass
