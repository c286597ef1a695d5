"""Mini-language for per-card effects, run when a learner picks an action.

Grammar (whitespace insignificant, identifiers ``[a-z_][a-z0-9_]*``)::

    program := stmt (";" stmt)* [";"]
    stmt    := cmd | cond
    cmd     := IDENT "(" args ")"
    cond    := ("on_correct" | "on_wrong") "{" program "}"

Commands: ``show(card)``, ``hide(card)``, ``enable(card)``, ``disable(card)``
and ``add(item, number)``.  Conditionals gate their body on the outcome of
the card's analysis question.  There are no loops, variables or host calls,
so every program terminates and is statically analyzable.

Parsing is total: any input yields either an AST or a TriggerSyntaxError
carrying the byte offset and the expected-token set.  Evaluation is pure:
it produces an ordered effect list and never mutates anything itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Literal, Union

CARD_OPS = ("show", "hide", "enable", "disable")
COMMANDS = CARD_OPS + ("add",)


class TriggerSyntaxError(Exception):
    def __init__(self, offset: int, expected: tuple[str, ...], found: str):
        self.offset = offset
        self.expected = expected
        self.found = found
        super().__init__(
            f"expected {' or '.join(expected)} but found {found} at offset {offset}"
        )


@dataclass(frozen=True)
class CardCommand:
    op: str  # one of CARD_OPS
    card: str


@dataclass(frozen=True)
class AddDelta:
    item: str
    amount: float


@dataclass(frozen=True)
class Conditional:
    branch: Literal["correct", "wrong"]
    body: "TriggerProgram"


Statement = Union[CardCommand, AddDelta, Conditional]


@dataclass(frozen=True)
class TriggerProgram:
    statements: tuple[Statement, ...] = ()


@dataclass(frozen=True)
class CardEffect:
    op: str  # one of CARD_OPS
    card: str


@dataclass(frozen=True)
class ItemEffect:
    item: str
    amount: float


Effect = Union[CardEffect, ItemEffect]

Outcome = Literal["correct", "wrong", "no_question"]


# ---------------------------------------------------------------------------
# Lexer

_IDENT_START = set("abcdefghijklmnopqrstuvwxyz_")
_IDENT_CONT = _IDENT_START | set("0123456789")
_NUM_START = set("+-0123456789.")


@dataclass(frozen=True)
class _Token:
    kind: str  # ident | number | punct | end
    text: str
    offset: int


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _IDENT_START:
            start = i
            while i < n and source[i] in _IDENT_CONT:
                i += 1
            tokens.append(_Token("ident", source[start:i], start))
            continue
        if ch in _NUM_START:
            start = i
            i += 1
            while i < n and (source[i].isdigit() or source[i] in ".eE+-"):
                # exponent signs only directly after e/E
                if source[i] in "+-" and source[i - 1] not in "eE":
                    break
                i += 1
            tokens.append(_Token("number", source[start:i], start))
            continue
        if ch in "();{},":
            tokens.append(_Token("punct", ch, i))
            i += 1
            continue
        tokens.append(_Token("bad", ch, i))
        i += 1
    tokens.append(_Token("end", "", n))
    return tokens


# ---------------------------------------------------------------------------
# Parser

class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, expected: tuple[str, ...]) -> TriggerSyntaxError:
        tok = self.peek()
        found = f"'{tok.text}'" if tok.kind != "end" else "end of input"
        return TriggerSyntaxError(tok.offset, expected, found)

    def expect_punct(self, text: str) -> None:
        tok = self.peek()
        if tok.kind == "punct" and tok.text == text:
            self.advance()
            return
        raise self.error((f"'{text}'",))

    def parse_program(self, closing: str | None = None) -> TriggerProgram:
        statements: list[Statement] = []
        while True:
            tok = self.peek()
            if tok.kind == "end" or (
                closing and tok.kind == "punct" and tok.text == closing
            ):
                break
            statements.append(self.parse_statement())
            tok = self.peek()
            if tok.kind == "punct" and tok.text == ";":
                self.advance()
                continue
            break
        tok = self.peek()
        if closing is None:
            if tok.kind != "end":
                raise self.error(("';'", "end of input"))
        else:
            if not (tok.kind == "punct" and tok.text == closing):
                raise self.error(("';'", f"'{closing}'"))
        return TriggerProgram(tuple(statements))

    def parse_statement(self) -> Statement:
        tok = self.peek()
        if tok.kind != "ident":
            raise self.error(("command", "'on_correct'", "'on_wrong'"))
        if tok.text in ("on_correct", "on_wrong"):
            self.advance()
            self.expect_punct("{")
            body = self.parse_program(closing="}")
            self.expect_punct("}")
            return Conditional(branch=tok.text.removeprefix("on_"), body=body)
        if tok.text not in COMMANDS:
            raise TriggerSyntaxError(
                tok.offset,
                tuple(COMMANDS) + ("on_correct", "on_wrong"),
                f"unknown command '{tok.text}'",
            )
        name = self.advance().text
        self.expect_punct("(")
        if name == "add":
            item = self.expect_ident()
            self.expect_punct(",")
            amount = self.expect_number()
            self.expect_punct(")")
            return AddDelta(item=item, amount=amount)
        card = self.expect_ident()
        self.expect_punct(")")
        return CardCommand(op=name, card=card)

    def expect_ident(self) -> str:
        tok = self.peek()
        if tok.kind != "ident":
            raise self.error(("identifier",))
        return self.advance().text

    def expect_number(self) -> float:
        tok = self.peek()
        if tok.kind != "number":
            raise self.error(("number",))
        try:
            value = float(tok.text)
        except ValueError:
            raise self.error(("number",)) from None
        if not math.isfinite(value):
            raise self.error(("finite number",))
        self.advance()
        return value


def parse_trigger(source: str) -> TriggerProgram:
    """Parse trigger source into an AST, or raise a positioned syntax error."""
    return _Parser(source).parse_program()


# ---------------------------------------------------------------------------
# Formatting

def _format_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _format_statement(stmt: Statement, indent: int) -> str:
    pad = "    " * indent
    if isinstance(stmt, CardCommand):
        return f"{pad}{stmt.op}({stmt.card})"
    if isinstance(stmt, AddDelta):
        return f"{pad}add({stmt.item}, {_format_number(stmt.amount)})"
    inner = _format_block(stmt.body, indent + 1)
    if not inner:
        return f"{pad}on_{stmt.branch} {{ }}"
    return f"{pad}on_{stmt.branch} {{\n{inner}\n{pad}}}"


def _format_block(program: TriggerProgram, indent: int) -> str:
    return ";\n".join(_format_statement(s, indent) for s in program.statements)


def format_trigger(program: TriggerProgram) -> str:
    """Canonical source text; parse(format(p)) is structurally p."""
    return _format_block(program, 0)


# ---------------------------------------------------------------------------
# Evaluation

def eval_trigger(program: TriggerProgram, outcome: Outcome) -> tuple[Effect, ...]:
    """Resolve a program to its ordered effect list for the given outcome."""
    effects: list[Effect] = []
    _eval_into(program, outcome, effects)
    return tuple(effects)


def _eval_into(program: TriggerProgram, outcome: Outcome, out: list[Effect]) -> None:
    for stmt in program.statements:
        if isinstance(stmt, CardCommand):
            out.append(CardEffect(op=stmt.op, card=stmt.card))
        elif isinstance(stmt, AddDelta):
            out.append(ItemEffect(item=stmt.item, amount=stmt.amount))
        elif stmt.branch == outcome:
            _eval_into(stmt.body, outcome, out)


def walk(program: TriggerProgram) -> Iterator[Statement]:
    """Every statement in the program, conditional bodies included."""
    for stmt in program.statements:
        yield stmt
        if isinstance(stmt, Conditional):
            yield from walk(stmt.body)
