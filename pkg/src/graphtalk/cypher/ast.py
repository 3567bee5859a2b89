"""Typed syntax tree for the supported Cypher subset.

All nodes are immutable; structural equality is plain dataclass equality,
with source positions excluded so two parses of equivalent text compare
equal regardless of formatting.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Optional, Tuple, Union

LiteralValue = Union[str, int, float, bool, None]


class Direction(enum.Enum):
    LEFT_TO_RIGHT = "->"
    RIGHT_TO_LEFT = "<-"
    UNDIRECTED = "--"


# --- value expressions -----------------------------------------------------


@dataclass(frozen=True)
class Literal:
    value: LiteralValue


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class PropertyAccess:
    variable: str
    key: str


@dataclass(frozen=True)
class Aggregate:
    """COUNT / COLLECT / SUM. ``arg is None`` means ``COUNT(*)``."""

    kind: str  # "COUNT" | "COLLECT" | "SUM"
    arg: Optional["ValueExpr"]
    distinct: bool = False


@dataclass(frozen=True)
class CaseExpr:
    whens: Tuple[Tuple["BoolExpr", "ValueExpr"], ...]
    default: Optional["ValueExpr"] = None


@dataclass(frozen=True)
class Arithmetic:
    op: str  # "+" | "-" | "*" | "/"
    lhs: "ValueExpr"
    rhs: "ValueExpr"


@dataclass(frozen=True)
class FunctionCall:
    name: str
    args: Tuple["ValueExpr", ...]


ValueExpr = Union[Literal, Variable, PropertyAccess, Aggregate, CaseExpr, Arithmetic, FunctionCall]


# --- boolean expressions ---------------------------------------------------


@dataclass(frozen=True)
class Compare:
    op: str  # "=", "<>", "<", "<=", ">", ">="
    lhs: ValueExpr
    rhs: ValueExpr


@dataclass(frozen=True)
class Contains:
    lhs: ValueExpr
    rhs: ValueExpr


@dataclass(frozen=True)
class And:
    terms: Tuple["BoolExpr", ...]


@dataclass(frozen=True)
class Or:
    terms: Tuple["BoolExpr", ...]


@dataclass(frozen=True)
class Not:
    term: "BoolExpr"


@dataclass(frozen=True)
class IsNull:
    expr: ValueExpr


@dataclass(frozen=True)
class IsNotNull:
    expr: ValueExpr


@dataclass(frozen=True)
class PatternPredicate:
    pattern: "Pattern"


BoolExpr = Union[Compare, Contains, And, Or, Not, IsNull, IsNotNull, PatternPredicate]


# --- patterns ---------------------------------------------------------------


@dataclass(frozen=True)
class NodePattern:
    variable: Optional[str] = None
    label: Optional[str] = None
    properties: Tuple[Tuple[str, Literal], ...] = ()


@dataclass(frozen=True)
class RelPattern:
    variable: Optional[str] = None
    rel_type: Optional[str] = None
    direction: Direction = Direction.LEFT_TO_RIGHT


@dataclass(frozen=True)
class Pattern:
    """Alternating (node, rel, node, rel, ..., node); length is odd."""

    elements: Tuple[Union[NodePattern, RelPattern], ...]

    def nodes(self) -> Tuple[NodePattern, ...]:
        return tuple(e for e in self.elements if isinstance(e, NodePattern))

    def rels(self) -> Tuple[RelPattern, ...]:
        return tuple(e for e in self.elements if isinstance(e, RelPattern))

    def hops(self) -> Iterator[Tuple[NodePattern, RelPattern, NodePattern]]:
        """Yield (left node, relationship, right node) per traversal step."""
        for i in range(1, len(self.elements), 2):
            yield self.elements[i - 1], self.elements[i], self.elements[i + 1]  # type: ignore[misc]


# --- clauses ----------------------------------------------------------------


@dataclass(frozen=True)
class Projection:
    expr: ValueExpr
    alias: Optional[str] = None


@dataclass(frozen=True)
class OrderItem:
    expr: ValueExpr
    descending: bool = False


@dataclass(frozen=True)
class MatchClause:
    patterns: Tuple[Pattern, ...]
    optional: bool = False


@dataclass(frozen=True)
class WhereClause:
    expr: BoolExpr


@dataclass(frozen=True)
class WithClause:
    projections: Tuple[Projection, ...]
    where: Optional[BoolExpr] = None


@dataclass(frozen=True)
class ReturnClause:
    projections: Tuple[Projection, ...]
    distinct: bool = False
    order_by: Tuple[OrderItem, ...] = ()
    limit: Optional[int] = None


Clause = Union[MatchClause, WhereClause, WithClause, ReturnClause]


@dataclass(frozen=True)
class QueryAst:
    clauses: Tuple[Clause, ...]
    source_span: Optional[Tuple[int, int]] = field(default=None, compare=False)

    def match_clauses(self) -> Tuple[MatchClause, ...]:
        return tuple(c for c in self.clauses if isinstance(c, MatchClause))

    def return_clause(self) -> ReturnClause:
        last = self.clauses[-1]
        assert isinstance(last, ReturnClause)
        return last


def hop_count(ast: QueryAst) -> int:
    """Total relationship traversals across all MATCH clauses."""
    return sum(len(p.rels()) for m in ast.match_clauses() for p in m.patterns)


Expr = Union[ValueExpr, BoolExpr]

_VALUE_TYPES = (Literal, Variable, PropertyAccess, Aggregate, CaseExpr, Arithmetic, FunctionCall)
_BOOL_TYPES = (Compare, Contains, And, Or, Not, IsNull, IsNotNull, PatternPredicate)


def _expr_children(node: Expr) -> Tuple[Expr, ...]:
    if isinstance(node, Aggregate):
        return (node.arg,) if node.arg is not None else ()
    if isinstance(node, CaseExpr):
        children: list[Expr] = []
        for cond, value in node.whens:
            children.append(cond)
            children.append(value)
        if node.default is not None:
            children.append(node.default)
        return tuple(children)
    if isinstance(node, Arithmetic):
        return (node.lhs, node.rhs)
    if isinstance(node, FunctionCall):
        return node.args
    if isinstance(node, (Compare, Contains)):
        return (node.lhs, node.rhs)
    if isinstance(node, (And, Or)):
        return node.terms
    if isinstance(node, Not):
        return (node.term,)
    if isinstance(node, (IsNull, IsNotNull)):
        return (node.expr,)
    return ()


def walk_expr(root: Expr) -> Iterator[Expr]:
    """Depth-first walk yielding every expression node exactly once."""
    stack: list[Expr] = [root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(_expr_children(node)))


def walk_values(root: Expr) -> Iterator[ValueExpr]:
    for node in walk_expr(root):
        if isinstance(node, _VALUE_TYPES):
            yield node  # type: ignore[misc]


def walk_bool(root: Expr) -> Iterator[BoolExpr]:
    for node in walk_expr(root):
        if isinstance(node, _BOOL_TYPES):
            yield node  # type: ignore[misc]


def contains_aggregate(expr: ValueExpr) -> bool:
    return any(isinstance(e, Aggregate) for e in walk_expr(expr))


def _clause_expr_roots(clause: Clause) -> Tuple[Expr, ...]:
    if isinstance(clause, WhereClause):
        return (clause.expr,)
    if isinstance(clause, WithClause):
        roots: Tuple[Expr, ...] = tuple(p.expr for p in clause.projections)
        if clause.where is not None:
            roots += (clause.where,)
        return roots
    if isinstance(clause, ReturnClause):
        roots = tuple(p.expr for p in clause.projections)
        roots += tuple(o.expr for o in clause.order_by)
        return roots
    return ()


def query_patterns(ast: QueryAst) -> Iterator[Tuple[Pattern, bool]]:
    """Yield every pattern in the query with an is-predicate flag.

    Covers MATCH / OPTIONAL MATCH patterns and pattern predicates nested
    anywhere in WHERE, WITH, RETURN, or CASE conditions.
    """
    for clause in ast.clauses:
        if isinstance(clause, MatchClause):
            for pattern in clause.patterns:
                yield pattern, False
        else:
            for root in _clause_expr_roots(clause):
                for node in walk_expr(root):
                    if isinstance(node, PatternPredicate):
                        yield node.pattern, True
