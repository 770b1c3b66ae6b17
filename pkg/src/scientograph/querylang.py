"""Cypher-subset query language: MATCH / WHERE / RETURN over the graph.

Grammar (keywords case-insensitive):

    query := MATCH pattern (',' pattern)* (WHERE pred)? RETURN proj (',' proj)*
    pattern := node (rel node)*
    node  := '(' ident? (':' ident)? ')'
    rel   := '-' '[' ident? (':' ident)? ']' ('->' | '-')
           | '<-' '[' ident? (':' ident)? ']' '-'
    pred  := term (AND term)*
    term  := ident '.' ident (IN '[' string (',' string)* ']' | '=' literal)
    proj  := ident '.' ident

A parenthesized bare identifier such as (Journal) is a variable, not a
label; labels filter only via the ':Label' form. Strings are
single-quoted with '' as the escaped quote. Matching follows Cypher MATCH
semantics: relationship-isomorphic bindings (no relationship reused within
one match), undirected hops match either storage direction, duplicates are
preserved, row order is unspecified.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from typing import Iterator

from .graphstore import Node, PropertyGraph, PropertyValue

KEYWORDS = ("MATCH", "WHERE", "RETURN", "IN", "AND")

_PUNCT_NAMES = {
    "(": "'('",
    ")": "')'",
    "[": "'['",
    "]": "']'",
    ":": "':'",
    ",": "','",
    ".": "'.'",
    "=": "'='",
    "-": "'-'",
    "->": "'->'",
    "<-": "'<-'",
}


class QueryError(ValueError):
    """Base for query parsing/validation failures."""


class QuerySyntaxError(QueryError):
    """Malformed query text; carries a 1-based character position."""

    def __init__(self, position: int, expected: tuple[str, ...], found: str):
        self.position = position
        self.expected = expected
        self.found = found
        super().__init__(
            f"syntax error at position {position}: "
            f"expected {' or '.join(expected)}; found {found}"
        )


class QueryValidationError(QueryError):
    """Structurally valid query that references variables illegally."""


# -- AST --------------------------------------------------------------------


@dataclass(frozen=True)
class NodePattern:
    variable: str | None = None
    label: str | None = None


@dataclass(frozen=True)
class RelPattern:
    variable: str | None = None
    type: str | None = None
    direction: str = "undirected"  # "left" | "right" | "undirected"


@dataclass(frozen=True)
class PathPattern:
    """Alternating node/relationship patterns; len(nodes) == len(rels) + 1."""

    nodes: tuple[NodePattern, ...]
    rels: tuple[RelPattern, ...] = ()


@dataclass(frozen=True)
class InPredicate:
    variable: str
    prop: str
    values: tuple[str, ...]


@dataclass(frozen=True)
class EqPredicate:
    variable: str
    prop: str
    literal: str | int | float


@dataclass(frozen=True)
class AndPredicate:
    left: "Predicate"
    right: "Predicate"


Predicate = InPredicate | EqPredicate | AndPredicate


@dataclass(frozen=True)
class Projection:
    variable: str
    prop: str


@dataclass(frozen=True)
class QueryAst:
    match_patterns: tuple[PathPattern, ...]
    where: Predicate | None
    projections: tuple[Projection, ...]


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[tuple]

    def to_csv_text(self) -> str:
        import csv

        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow(["" if v is None else _csv_cell(v) for v in row])
        return buf.getvalue()

    def to_json_text(self) -> str:
        objs = [dict(zip(self.columns, row)) for row in self.rows]
        return json.dumps(objs, ensure_ascii=False, indent=2) + "\n"


def _csv_cell(value: PropertyValue) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return json.dumps(value, ensure_ascii=False)
    return str(value)


# -- lexer --------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # keyword, IDENT, STRING, NUMBER, punctuation, EOF
    value: str | int | float
    pos: int  # 1-based character offset


def _describe(token: Token) -> str:
    if token.kind == "EOF":
        return "end of input"
    if token.kind == "IDENT":
        return f"identifier {token.value!r}"
    if token.kind == "STRING":
        return "string"
    if token.kind == "NUMBER":
        return "number"
    if token.kind in KEYWORDS:
        return token.kind
    return _PUNCT_NAMES.get(token.kind, repr(token.kind))


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        pos = i + 1
        if ch in "()[]:,.=":
            tokens.append(Token(ch, ch, pos))
            i += 1
        elif ch == "-":
            if i + 1 < n and text[i + 1] == ">":
                tokens.append(Token("->", "->", pos))
                i += 2
            else:
                tokens.append(Token("-", "-", pos))
                i += 1
        elif ch == "<":
            if i + 1 < n and text[i + 1] == "-":
                tokens.append(Token("<-", "<-", pos))
                i += 2
            else:
                raise QuerySyntaxError(pos, ("'<-'",), f"character {ch!r}")
        elif ch == "'":
            i += 1
            parts: list[str] = []
            while True:
                if i >= n:
                    raise QuerySyntaxError(pos, ("closing \"'\"",), "end of input")
                if text[i] == "'":
                    if i + 1 < n and text[i + 1] == "'":
                        parts.append("'")
                        i += 2
                        continue
                    i += 1
                    break
                parts.append(text[i])
                i += 1
            tokens.append(Token("STRING", "".join(parts), pos))
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
                tokens.append(Token("NUMBER", float(text[i:j]), pos))
            else:
                tokens.append(Token("NUMBER", int(text[i:j]), pos))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            upper = word.upper()
            if upper in KEYWORDS:
                tokens.append(Token(upper, upper, pos))
            else:
                tokens.append(Token("IDENT", word, pos))
            i = j
        else:
            raise QuerySyntaxError(pos, ("a query token",), f"character {ch!r}")
    tokens.append(Token("EOF", "", n + 1))
    return tokens


# -- parser -------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        token = self.tokens[self.i]
        self.i += 1
        return token

    def fail(self, *expected: str) -> QuerySyntaxError:
        return QuerySyntaxError(self.current.pos, expected, _describe(self.current))

    def expect(self, kind: str, expected_name: str | None = None) -> Token:
        if self.current.kind != kind:
            raise self.fail(expected_name or _PUNCT_NAMES.get(kind, kind))
        return self.advance()

    def parse(self) -> QueryAst:
        self.expect("MATCH")
        patterns = [self.parse_pattern()]
        while self.current.kind == ",":
            self.advance()
            patterns.append(self.parse_pattern())
        where = None
        if self.current.kind == "WHERE":
            self.advance()
            where = self.parse_predicate()
        self.expect("RETURN")
        projections = [self.parse_projection()]
        while self.current.kind == ",":
            self.advance()
            projections.append(self.parse_projection())
        if self.current.kind != "EOF":
            raise self.fail("','", "end of input")
        return QueryAst(tuple(patterns), where, tuple(projections))

    def parse_pattern(self) -> PathPattern:
        nodes = [self.parse_node()]
        rels: list[RelPattern] = []
        while self.current.kind in ("-", "<-"):
            rels.append(self.parse_rel())
            nodes.append(self.parse_node())
        return PathPattern(tuple(nodes), tuple(rels))

    def parse_node(self) -> NodePattern:
        self.expect("(")
        variable = None
        label = None
        if self.current.kind == "IDENT":
            variable = str(self.advance().value)
        if self.current.kind == ":":
            self.advance()
            label = str(self.expect("IDENT", "identifier").value)
        self.expect(")")
        return NodePattern(variable, label)

    def parse_rel(self) -> RelPattern:
        if self.current.kind == "<-":
            self.advance()
            variable, rel_type = self.parse_rel_body()
            self.expect("-")
            return RelPattern(variable, rel_type, "left")
        self.expect("-")
        variable, rel_type = self.parse_rel_body()
        if self.current.kind == "->":
            self.advance()
            return RelPattern(variable, rel_type, "right")
        if self.current.kind == "-":
            self.advance()
            return RelPattern(variable, rel_type, "undirected")
        raise self.fail("'->'", "'-'")

    def parse_rel_body(self) -> tuple[str | None, str | None]:
        self.expect("[")
        variable = None
        rel_type = None
        if self.current.kind == "IDENT":
            variable = str(self.advance().value)
        if self.current.kind == ":":
            self.advance()
            rel_type = str(self.expect("IDENT", "identifier").value)
        self.expect("]")
        return variable, rel_type

    def parse_predicate(self) -> Predicate:
        pred: Predicate = self.parse_term()
        while self.current.kind == "AND":
            self.advance()
            pred = AndPredicate(pred, self.parse_term())
        return pred

    def parse_term(self) -> Predicate:
        variable = str(self.expect("IDENT", "identifier").value)
        self.expect(".")
        prop = str(self.expect("IDENT", "identifier").value)
        if self.current.kind == "IN":
            self.advance()
            self.expect("[")
            values = [str(self.expect("STRING", "string").value)]
            while self.current.kind == ",":
                self.advance()
                values.append(str(self.expect("STRING", "string").value))
            self.expect("]")
            return InPredicate(variable, prop, tuple(values))
        if self.current.kind == "=":
            self.advance()
            return EqPredicate(variable, prop, self.parse_literal())
        raise self.fail("IN", "'='")

    def parse_literal(self) -> str | int | float:
        if self.current.kind == "STRING":
            return str(self.advance().value)
        if self.current.kind == "NUMBER":
            value = self.advance().value
            assert isinstance(value, (int, float))
            return value
        if self.current.kind == "-":
            self.advance()
            value = self.expect("NUMBER", "number").value
            assert isinstance(value, (int, float))
            return -value
        raise self.fail("string", "number")

    def parse_projection(self) -> Projection:
        variable = str(self.expect("IDENT", "identifier").value)
        self.expect(".")
        prop = str(self.expect("IDENT", "identifier").value)
        return Projection(variable, prop)


def parse_query(text: str) -> QueryAst:
    """Parse and validate query text; raises QuerySyntaxError or
    QueryValidationError."""
    ast = _Parser(text).parse()
    validate_query(ast)
    return ast


def _predicate_terms(pred: Predicate) -> Iterator[InPredicate | EqPredicate]:
    if isinstance(pred, AndPredicate):
        yield from _predicate_terms(pred.left)
        yield from _predicate_terms(pred.right)
    else:
        yield pred


def validate_query(ast: QueryAst) -> None:
    """Every referenced variable must be bound by a pattern; relationship
    variables must be unique and must not collide with node variables."""
    node_vars: set[str] = set()
    rel_vars: set[str] = set()
    for pattern in ast.match_patterns:
        for np in pattern.nodes:
            if np.variable is not None:
                node_vars.add(np.variable)
        for rp in pattern.rels:
            if rp.variable is None:
                continue
            if rp.variable in rel_vars:
                raise QueryValidationError(
                    f"relationship variable {rp.variable!r} bound more than once"
                )
            rel_vars.add(rp.variable)
    clash = node_vars & rel_vars
    if clash:
        raise QueryValidationError(
            f"variable used for both nodes and relationships: {sorted(clash)}"
        )
    bound = node_vars | rel_vars
    if ast.where is not None:
        for term in _predicate_terms(ast.where):
            if term.variable not in bound:
                raise QueryValidationError(f"unbound variable {term.variable!r} in WHERE")
    for proj in ast.projections:
        if proj.variable not in bound:
            raise QueryValidationError(f"unbound variable {proj.variable!r} in RETURN")


# -- rendering ----------------------------------------------------------------


def escape_string(value: str) -> str:
    return "'" + value.replace("'", "''") + "'"


def _render_literal(value: str | int | float) -> str:
    if isinstance(value, str):
        return escape_string(value)
    return repr(value)


def _render_node(np: NodePattern) -> str:
    inner = np.variable or ""
    if np.label is not None:
        inner += f":{np.label}"
    return f"({inner})"


def _render_rel(rp: RelPattern) -> str:
    body = rp.variable or ""
    if rp.type is not None:
        body += f":{rp.type}"
    if rp.direction == "left":
        return f"<-[{body}]-"
    if rp.direction == "right":
        return f"-[{body}]->"
    return f"-[{body}]-"


def _render_pred(pred: Predicate) -> str:
    if isinstance(pred, AndPredicate):
        return f"{_render_pred(pred.left)} AND {_render_pred(pred.right)}"
    if isinstance(pred, InPredicate):
        values = ", ".join(escape_string(v) for v in pred.values)
        return f"{pred.variable}.{pred.prop} IN [{values}]"
    return f"{pred.variable}.{pred.prop} = {_render_literal(pred.literal)}"


def render_query(ast: QueryAst) -> str:
    """Canonical textual form; reparsing yields an equal AST."""
    parts = []
    for pattern in ast.match_patterns:
        piece = _render_node(pattern.nodes[0])
        for rp, np in zip(pattern.rels, pattern.nodes[1:]):
            piece += _render_rel(rp) + _render_node(np)
        parts.append(piece)
    text = "MATCH " + ", ".join(parts)
    if ast.where is not None:
        text += " WHERE " + _render_pred(ast.where)
    text += " RETURN " + ", ".join(f"{p.variable}.{p.prop}" for p in ast.projections)
    return text


def format_error_context(text: str, err: QuerySyntaxError) -> str:
    """Multi-line caret diagnostic pointing at the error position."""
    offset = min(err.position, len(text) + 1) - 1
    line_start = text.rfind("\n", 0, offset) + 1
    line_end = text.find("\n", offset)
    if line_end == -1:
        line_end = len(text)
    column = offset - line_start
    return (
        f"{err}\n  {text[line_start:line_end]}\n  " + " " * column + "^"
    )


# -- evaluation ---------------------------------------------------------------


def _node_matches(np: NodePattern, node: Node, env: dict[str, int]) -> bool:
    if np.label is not None and node.label != np.label:
        return False
    if np.variable is not None and np.variable in env and env[np.variable] != node.id:
        return False
    return True


def _first_candidates(
    graph: PropertyGraph, np: NodePattern, env: dict[str, int]
) -> Iterator[Node]:
    if np.variable is not None and np.variable in env:
        node = graph.node(env[np.variable])
        if np.label is None or node.label == np.label:
            yield node
        return
    if np.label is not None:
        yield from graph.nodes_by_label(np.label)
        return
    yield from graph.nodes()


_HOP_DIRECTION = {"right": "out", "left": "in", "undirected": "both"}


def _lookup(
    graph: PropertyGraph,
    node_env: dict[str, int],
    rel_env: dict[str, int],
    variable: str,
    prop: str,
) -> PropertyValue | None:
    if variable in node_env:
        return graph.node(node_env[variable]).properties.get(prop)
    if variable in rel_env:
        return graph.relationship(rel_env[variable]).properties.get(prop)
    return None


def _eval_predicate(
    pred: Predicate,
    graph: PropertyGraph,
    node_env: dict[str, int],
    rel_env: dict[str, int],
) -> bool:
    if isinstance(pred, AndPredicate):
        return _eval_predicate(pred.left, graph, node_env, rel_env) and _eval_predicate(
            pred.right, graph, node_env, rel_env
        )
    value = _lookup(graph, node_env, rel_env, pred.variable, pred.prop)
    if isinstance(pred, InPredicate):
        return value in pred.values
    return value is not None and value == pred.literal


def execute_query(graph: PropertyGraph, ast: QueryAst) -> ResultTable:
    """All bindings of the MATCH patterns, filtered and projected.

    Missing properties project as None. No implicit DISTINCT; a self-loop
    relationship matches an undirected hop once.
    """
    validate_query(ast)
    columns = [f"{p.variable}.{p.prop}" for p in ast.projections]
    rows: list[tuple] = []
    patterns = ast.match_patterns
    node_env: dict[str, int] = {}
    rel_env: dict[str, int] = {}
    used_rels: set[int] = set()

    def emit() -> None:
        if ast.where is None or _eval_predicate(ast.where, graph, node_env, rel_env):
            rows.append(
                tuple(
                    _lookup(graph, node_env, rel_env, p.variable, p.prop)
                    for p in ast.projections
                )
            )

    def walk(pattern: PathPattern, hop: int, current_id: int, pi: int) -> None:
        if hop == len(pattern.rels):
            match_pattern(pi + 1)
            return
        rp = pattern.rels[hop]
        next_np = pattern.nodes[hop + 1]
        for rel, other in graph.neighbors(
            current_id, _HOP_DIRECTION[rp.direction], rp.type
        ):
            if rel.id in used_rels:
                continue
            if not _node_matches(next_np, other, node_env):
                continue
            bound_node = next_np.variable is not None and next_np.variable not in node_env
            if bound_node:
                node_env[next_np.variable] = other.id
            if rp.variable is not None:
                rel_env[rp.variable] = rel.id
            used_rels.add(rel.id)
            walk(pattern, hop + 1, other.id, pi)
            used_rels.discard(rel.id)
            if rp.variable is not None:
                del rel_env[rp.variable]
            if bound_node:
                del node_env[next_np.variable]

    def match_pattern(pi: int) -> None:
        if pi == len(patterns):
            emit()
            return
        pattern = patterns[pi]
        first = pattern.nodes[0]
        for node in _first_candidates(graph, first, node_env):
            bound = first.variable is not None and first.variable not in node_env
            if bound:
                node_env[first.variable] = node.id
            walk(pattern, 0, node.id, pi)
            if bound:
                del node_env[first.variable]

    match_pattern(0)
    return ResultTable(columns, rows)


def run_query(graph: PropertyGraph, text: str) -> ResultTable:
    """Parse + execute in one step."""
    return execute_query(graph, parse_query(text))
