"""Structured-English DSL for authoring causal models.

Statements, each terminated by a period; ``#`` starts a line comment:

    quantity "inflation".
    quantity "bond yields" typed "Economic Indicator".
    state "high inflation" of "inflation".
    "inflation" influences "bond yields" directly with weight 0.8.
    "high inflation" triggers increase of "inflation" with weight 0.9.
    "recession fears" triggers "flight to safety".
    states "boom", "recession" are mutually exclusive.
    assume "high inflation".
    assume "economic growth" decreasing.
    query "bond yields".

Omitted weights default to 0.5.  Node identity is the normalized label, so
re-declaring a label is an error.  Parsing is total: any input yields either
a valid model or a list of positioned errors, never an uncaught exception.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .model import (
    ACTIVATE,
    DECREASE,
    DIRECT,
    INCREASE,
    INVERSE,
    Assumption,
    CausalModel,
    Influence,
    MutexConstraint,
    Quantity,
    Scenario,
    State,
    Trigger,
    influence_id,
    trigger_id,
)
from .util import normalize_label


@dataclass(frozen=True)
class ParseError:
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.message}"


class ModelSyntaxError(Exception):
    """Raised by parse_model; carries all collected ParseErrors."""

    def __init__(self, errors: list[ParseError]):
        self.errors = errors
        summary = "; ".join(str(e) for e in errors[:5])
        if len(errors) > 5:
            summary += f"; ... ({len(errors)} errors)"
        super().__init__(summary)


# ---------------------------------------------------------------------------
# Tokenizer

_STRING, _NUMBER, _WORD, _DOT, _COMMA = "string", "number", "word", "dot", "comma"

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}
_REVERSE_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t"}


@dataclass(frozen=True)
class _Token:
    kind: str
    value: str
    line: int
    column: int


def _tokenize(text: str, errors: list[ParseError]) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(text)

    def bump(ch: str) -> None:
        nonlocal line, col
        if ch == "\n":
            line += 1
            col = 1
        else:
            col += 1

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            bump(ch)
            i += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
                col += 1
            continue
        start_line, start_col = line, col
        if ch == ".":
            tokens.append(_Token(_DOT, ".", line, col))
            i += 1
            col += 1
            continue
        if ch == ",":
            tokens.append(_Token(_COMMA, ",", line, col))
            i += 1
            col += 1
            continue
        if ch == '"':
            i += 1
            col += 1
            parts: list[str] = []
            closed = False
            while i < n:
                c = text[i]
                if c == "\n":
                    break
                if c == "\\" and i + 1 < n and text[i + 1] in _ESCAPES:
                    parts.append(_ESCAPES[text[i + 1]])
                    i += 2
                    col += 2
                    continue
                if c == '"':
                    i += 1
                    col += 1
                    closed = True
                    break
                parts.append(c)
                i += 1
                col += 1
            if not closed:
                errors.append(ParseError(start_line, start_col, "unterminated string"))
                continue
            tokens.append(_Token(_STRING, "".join(parts), start_line, start_col))
            continue
        if ch.isdigit():
            j = i
            while j < n and (text[j].isdigit() or text[j] in ".eE+-"):
                # Stop the number before a statement terminator like "0.8."
                if text[j] == "." and not (j + 1 < n and text[j + 1].isdigit()):
                    break
                if text[j] in "+-" and text[j - 1] not in "eE":
                    break
                j += 1
            literal = text[i:j]
            try:
                float(literal)
            except ValueError:
                errors.append(
                    ParseError(start_line, start_col, f"bad number literal '{literal}'")
                )
                literal = "0"
            tokens.append(_Token(_NUMBER, literal, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_-"):
                j += 1
            tokens.append(_Token(_WORD, text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        errors.append(ParseError(line, col, f"unexpected character {ch!r}"))
        i += 1
        col += 1
    return tokens


# ---------------------------------------------------------------------------
# Parser

class _Cursor:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> _Token | None:
        tok = self.peek()
        if tok is not None:
            self.pos += 1
        return tok


class _StatementError(Exception):
    def __init__(self, error: ParseError):
        self.error = error


def _fail(tok: _Token | None, fallback: _Token, message: str):
    anchor = tok or fallback
    raise _StatementError(ParseError(anchor.line, anchor.column, message))


def _expect_string(cur: _Cursor, anchor: _Token, what: str) -> _Token:
    tok = cur.next()
    if tok is None or tok.kind != _STRING:
        _fail(tok, anchor, f"expected {what} in quotes")
    return tok


def _expect_word(cur: _Cursor, anchor: _Token, *words: str) -> _Token:
    tok = cur.next()
    if tok is None or tok.kind != _WORD or tok.value not in words:
        expected = " or ".join(f"'{w}'" for w in words)
        _fail(tok, anchor, f"expected {expected}")
    return tok


def _maybe_weight(cur: _Cursor, anchor: _Token) -> float:
    tok = cur.peek()
    if tok is None or not (tok.kind == _WORD and tok.value == "with"):
        return 0.5
    cur.next()
    _expect_word(cur, anchor, "weight")
    num = cur.next()
    if num is None or num.kind != _NUMBER:
        _fail(num, anchor, "expected a weight value")
    value = float(num.value)
    if not 0.0 < value <= 1.0:
        raise _StatementError(
            ParseError(num.line, num.column, "weight out of range (0,1]")
        )
    return value


def _maybe_typed(cur: _Cursor, anchor: _Token) -> str | None:
    tok = cur.peek()
    if tok is not None and tok.kind == _WORD and tok.value == "typed":
        cur.next()
        return _expect_string(cur, anchor, "a type label").value
    return None


def _end_statement(cur: _Cursor, anchor: _Token) -> None:
    tok = cur.next()
    if tok is None or tok.kind != _DOT:
        _fail(tok, anchor, "expected '.'")


def _parse_statement(cur: _Cursor) -> tuple | None:
    """One statement into an AST tuple, or None at end of input."""
    tok = cur.next()
    if tok is None:
        return None
    if tok.kind == _DOT:  # stray period
        raise _StatementError(ParseError(tok.line, tok.column, "empty statement"))

    if tok.kind == _WORD and tok.value == "quantity":
        label = _expect_string(cur, tok, "a quantity label")
        ctype = _maybe_typed(cur, tok)
        _end_statement(cur, tok)
        return ("quantity", label, ctype)

    if tok.kind == _WORD and tok.value == "state":
        label = _expect_string(cur, tok, "a state label")
        linked = None
        nxt = cur.peek()
        if nxt is not None and nxt.kind == _WORD and nxt.value == "of":
            cur.next()
            linked = _expect_string(cur, tok, "a quantity label")
        ctype = _maybe_typed(cur, tok)
        _end_statement(cur, tok)
        return ("state", label, linked, ctype)

    if tok.kind == _WORD and tok.value == "states":
        members = [_expect_string(cur, tok, "a state label")]
        while True:
            nxt = cur.peek()
            if nxt is not None and nxt.kind == _COMMA:
                cur.next()
                members.append(_expect_string(cur, tok, "a state label"))
            else:
                break
        _expect_word(cur, tok, "are")
        _expect_word(cur, tok, "mutually")
        _expect_word(cur, tok, "exclusive")
        _end_statement(cur, tok)
        return ("mutex", members)

    if tok.kind == _WORD and tok.value == "assume":
        node = _expect_string(cur, tok, "a node label")
        direction = None
        nxt = cur.peek()
        if nxt is not None and nxt.kind == _WORD and nxt.value in (
            "increasing", "decreasing", "steady",
        ):
            cur.next()
            direction = nxt.value
        _end_statement(cur, tok)
        return ("assume", node, direction)

    if tok.kind == _WORD and tok.value == "query":
        node = _expect_string(cur, tok, "a node label")
        _end_statement(cur, tok)
        return ("query", node)

    if tok.kind == _STRING:
        verb = cur.next()
        if verb is None or verb.kind != _WORD or verb.value not in ("influences", "triggers"):
            _fail(verb, tok, "expected 'influences' or 'triggers'")
        if verb.value == "influences":
            target = _expect_string(cur, tok, "a quantity label")
            pol_tok = _expect_word(cur, tok, "directly", "inversely")
            polarity = DIRECT if pol_tok.value == "directly" else INVERSE
            weight = _maybe_weight(cur, tok)
            _end_statement(cur, tok)
            return ("influence", tok, target, polarity, weight)
        nxt = cur.peek()
        if nxt is not None and nxt.kind == _WORD and nxt.value in ("increase", "decrease"):
            cur.next()
            _expect_word(cur, tok, "of")
            target = _expect_string(cur, tok, "a quantity label")
            effect = INCREASE if nxt.value == "increase" else DECREASE
        else:
            target = _expect_string(cur, tok, "a state label")
            effect = ACTIVATE
        weight = _maybe_weight(cur, tok)
        _end_statement(cur, tok)
        return ("trigger", tok, target, effect, weight)

    raise _StatementError(ParseError(tok.line, tok.column, "malformed statement"))


def _skip_to_dot(cur: _Cursor) -> None:
    while True:
        tok = cur.next()
        if tok is None or tok.kind == _DOT:
            return


def try_parse(text: str) -> tuple[CausalModel | None, list[ParseError]]:
    """Parse DSL text; returns (model, []) on success or (None, errors)."""
    errors: list[ParseError] = []
    tokens = _tokenize(text, errors)
    cur = _Cursor(tokens)
    statements: list[tuple] = []
    while cur.peek() is not None:
        try:
            stmt = _parse_statement(cur)
        except _StatementError as exc:
            errors.append(exc.error)
            _skip_to_dot(cur)
            continue
        if stmt is None:
            break
        statements.append(stmt)

    model = _build_model(statements, text, errors)
    if errors:
        return None, sorted(errors, key=lambda e: (e.line, e.column))
    return model, []


def parse_model(text: str) -> CausalModel:
    """Parse DSL text into a CausalModel; raises ModelSyntaxError on failure."""
    model, errors = try_parse(text)
    if model is None:
        raise ModelSyntaxError(errors)
    return model


def _build_model(
    statements: list[tuple], source_text: str, errors: list[ParseError]
) -> CausalModel | None:
    quantities: dict[str, Quantity] = {}
    states: dict[str, State] = {}
    # Declaration pass: node statements only, so edges may reference nodes
    # declared later in the document.
    pending_links: list[tuple[str, _Token]] = []
    for stmt in statements:
        if stmt[0] == "quantity":
            tok, ctype = stmt[1], stmt[2]
            node_id = normalize_label(tok.value)
            if not node_id:
                errors.append(ParseError(tok.line, tok.column, "empty label"))
                continue
            if node_id in quantities or node_id in states:
                errors.append(
                    ParseError(tok.line, tok.column, f'duplicate declaration of "{tok.value}"')
                )
                continue
            quantities[node_id] = Quantity(node_id, tok.value, ctype)
        elif stmt[0] == "state":
            tok, linked_tok, ctype = stmt[1], stmt[2], stmt[3]
            node_id = normalize_label(tok.value)
            if not node_id:
                errors.append(ParseError(tok.line, tok.column, "empty label"))
                continue
            if node_id in quantities or node_id in states:
                errors.append(
                    ParseError(tok.line, tok.column, f'duplicate declaration of "{tok.value}"')
                )
                continue
            linked = None
            if linked_tok is not None:
                linked = normalize_label(linked_tok.value)
                pending_links.append((node_id, linked_tok))
            states[node_id] = State(node_id, tok.value, linked, ctype)

    def lookup(tok: _Token) -> str | None:
        node_id = normalize_label(tok.value)
        if node_id in quantities or node_id in states:
            return node_id
        errors.append(ParseError(tok.line, tok.column, f'unknown node "{tok.value}"'))
        return None

    for state_id, linked_tok in pending_links:
        linked = normalize_label(linked_tok.value)
        if linked not in quantities:
            errors.append(
                ParseError(
                    linked_tok.line,
                    linked_tok.column,
                    f'unknown quantity "{linked_tok.value}"',
                )
            )
            states.pop(state_id, None)

    influences: dict[str, Influence] = {}
    triggers: dict[str, Trigger] = {}
    mutexes: list[MutexConstraint] = []
    assumptions: dict[str, Assumption] = {}
    target: str | None = None
    has_scenario = False

    for stmt in statements:
        kind = stmt[0]
        if kind == "influence":
            src_tok, tgt_tok, polarity, weight = stmt[1], stmt[2], stmt[3], stmt[4]
            src, tgt = lookup(src_tok), lookup(tgt_tok)
            if src is None or tgt is None:
                continue
            for end, tok in ((src, src_tok), (tgt, tgt_tok)):
                if end in states:
                    errors.append(
                        ParseError(
                            tok.line, tok.column,
                            f'influence endpoints must be quantities: "{tok.value}" is a state',
                        )
                    )
            if src in states or tgt in states:
                continue
            edge_id = influence_id(src, tgt, polarity)
            if edge_id in influences:
                errors.append(
                    ParseError(
                        src_tok.line, src_tok.column,
                        f'duplicate influence "{src_tok.value}" -> "{tgt_tok.value}"',
                    )
                )
                continue
            influences[edge_id] = Influence(edge_id, src, tgt, polarity, weight)
        elif kind == "trigger":
            src_tok, tgt_tok, effect, weight = stmt[1], stmt[2], stmt[3], stmt[4]
            src, tgt = lookup(src_tok), lookup(tgt_tok)
            if src is None or tgt is None:
                continue
            if src not in states:
                errors.append(
                    ParseError(
                        src_tok.line, src_tok.column,
                        f'trigger source must be a state: "{src_tok.value}" is a quantity',
                    )
                )
                continue
            if effect == ACTIVATE and tgt not in states:
                errors.append(
                    ParseError(
                        tgt_tok.line, tgt_tok.column,
                        f'trigger target "{tgt_tok.value}" must be a state '
                        "(use 'triggers increase/decrease of' for quantities)",
                    )
                )
                continue
            if effect in (INCREASE, DECREASE) and tgt not in quantities:
                errors.append(
                    ParseError(
                        tgt_tok.line, tgt_tok.column,
                        f'"{tgt_tok.value}" must be a quantity for increase/decrease',
                    )
                )
                continue
            edge_id = trigger_id(src, tgt, effect)
            if edge_id in triggers:
                errors.append(
                    ParseError(
                        src_tok.line, src_tok.column,
                        f'duplicate trigger "{src_tok.value}" -> "{tgt_tok.value}"',
                    )
                )
                continue
            triggers[edge_id] = Trigger(edge_id, src, tgt, effect, weight)
        elif kind == "mutex":
            member_ids: list[str] = []
            ok = True
            for tok in stmt[1]:
                node_id = lookup(tok)
                if node_id is None:
                    ok = False
                    continue
                if node_id not in states:
                    errors.append(
                        ParseError(
                            tok.line, tok.column,
                            f'mutex members must be states: "{tok.value}" is a quantity',
                        )
                    )
                    ok = False
                    continue
                member_ids.append(node_id)
            if ok and len(set(member_ids)) < 2:
                tok = stmt[1][0]
                errors.append(
                    ParseError(tok.line, tok.column, "mutex needs at least 2 distinct states")
                )
                ok = False
            if ok:
                mutexes.append(MutexConstraint(tuple(member_ids)))
        elif kind == "assume":
            tok, direction = stmt[1], stmt[2]
            has_scenario = True
            node_id = lookup(tok)
            if node_id is None:
                continue
            if node_id in assumptions:
                errors.append(
                    ParseError(tok.line, tok.column, f'"{tok.value}" assumed twice')
                )
                continue
            if node_id in states:
                if direction is not None:
                    errors.append(
                        ParseError(
                            tok.line, tok.column,
                            f'state assumption "{tok.value}" takes no direction',
                        )
                    )
                    continue
                assumptions[node_id] = Assumption(node_id, "active")
            else:
                if direction is None:
                    errors.append(
                        ParseError(
                            tok.line, tok.column,
                            f'quantity assumption "{tok.value}" needs increasing/decreasing/steady',
                        )
                    )
                    continue
                assumptions[node_id] = Assumption(node_id, direction)
        elif kind == "query":
            tok = stmt[1]
            has_scenario = True
            node_id = lookup(tok)
            if node_id is None:
                continue
            if target is not None:
                errors.append(ParseError(tok.line, tok.column, "duplicate query"))
                continue
            target = node_id

    if errors:
        return None

    scenario = None
    if has_scenario:
        scenario = Scenario(tuple(assumptions.values()), target)
    digest = hashlib.sha256(source_text.encode("utf-8")).hexdigest()
    return CausalModel(
        quantities=tuple(quantities.values()),
        states=tuple(states.values()),
        influences=tuple(influences.values()),
        triggers=tuple(triggers.values()),
        mutexes=tuple(mutexes),
        scenario=scenario,
        provenance={"dsl_sha256": digest},
    )


# ---------------------------------------------------------------------------
# Serializer

def _quote(label: str) -> str:
    escaped = "".join(_REVERSE_ESCAPES.get(ch, ch) for ch in label)
    return f'"{escaped}"'


def _format_weight(weight: float) -> str:
    return repr(weight)


def serialize_model(model: CausalModel) -> str:
    """Emit DSL text; parse_model(serialize_model(m)) is structurally equal to m.

    Node declarations come out in lexicographic id order, edges in edge-id
    order, so equal models serialize byte-identically.  Evidence lists are
    not representable in the DSL; use the JSON document for lossless storage.

    The DSL's node identity is the normalized label.  A JSON-imported model
    whose ids deviate from that scheme round-trips modulo the renaming, and
    one with two nodes sharing a normalized label has no DSL form at all.
    """
    lines: list[str] = []
    for node in sorted(list(model.quantities) + list(model.states), key=lambda n: n.id):
        if isinstance(node, Quantity):
            stmt = f"quantity {_quote(node.label)}"
        else:
            stmt = f"state {_quote(node.label)}"
            if node.linked_quantity is not None:
                stmt += f" of {_quote(model.label_of(node.linked_quantity))}"
        if node.concept_type is not None:
            stmt += f" typed {_quote(node.concept_type)}"
        lines.append(stmt + ".")

    for edge in sorted(
        list(model.influences) + list(model.triggers), key=lambda e: e.edge_id
    ):
        src = _quote(model.label_of(edge.source))
        if isinstance(edge, Influence):
            adverb = "directly" if edge.polarity == DIRECT else "inversely"
            stmt = f"{src} influences {_quote(model.label_of(edge.target))} {adverb}"
        elif edge.effect == ACTIVATE:
            stmt = f"{src} triggers {_quote(model.label_of(edge.target))}"
        else:
            effect_word = "increase" if edge.effect == INCREASE else "decrease"
            stmt = f"{src} triggers {effect_word} of {_quote(model.label_of(edge.target))}"
        stmt += f" with weight {_format_weight(edge.weight)}"
        lines.append(stmt + ".")

    for mutex in model.mutexes:
        labels = ", ".join(_quote(model.label_of(m)) for m in mutex.members)
        lines.append(f"states {labels} are mutually exclusive.")

    if model.scenario is not None:
        for a in model.scenario.assumptions:
            if a.value == "active":
                lines.append(f"assume {_quote(model.label_of(a.node))}.")
            else:
                lines.append(f"assume {_quote(model.label_of(a.node))} {a.value}.")
        if model.scenario.target is not None:
            lines.append(f"query {_quote(model.label_of(model.scenario.target))}.")

    return "\n".join(lines) + ("\n" if lines else "")
