"""In-memory property graph and evaluator for the supported Cypher subset.

Pattern matching is homomorphic (one graph node may bind several pattern
variables), results use bag semantics, and WHERE follows three-valued
logic with null comparisons filtering the row out. Row order is
unspecified unless ORDER BY is present; nulls sort last either direction.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from . import cypher
from .cypher import ast
from .errors import ExecutionError, GraphFormatError, SchemaViolation
from .schema import GraphSchema, load_preset, rel_lookup


@dataclass(frozen=True)
class NodeRef:
    id: str


@dataclass(frozen=True)
class EdgeRef:
    id: str


Value = Union[None, bool, int, float, str, list, NodeRef, EdgeRef]
Binding = Dict[str, Value]


@dataclass
class Node:
    id: str
    labels: frozenset
    properties: Dict[str, object]


@dataclass
class Edge:
    id: str
    rel_type: str
    from_node: str
    to_node: str
    properties: Dict[str, object]


@dataclass
class PropertyGraph:
    schema_name: Optional[str] = None
    nodes: Dict[str, Node] = field(default_factory=dict)
    edges: Dict[str, Edge] = field(default_factory=dict)
    out_edges: Dict[str, List[str]] = field(default_factory=dict)
    in_edges: Dict[str, List[str]] = field(default_factory=dict)

    def add_node(self, node: Node) -> None:
        if node.id in self.nodes:
            raise GraphFormatError(f"duplicate node id {node.id!r}")
        self.nodes[node.id] = node
        self.out_edges.setdefault(node.id, [])
        self.in_edges.setdefault(node.id, [])

    def add_edge(self, edge: Edge) -> None:
        if edge.id in self.edges:
            raise GraphFormatError(f"duplicate edge id {edge.id!r}")
        for endpoint in (edge.from_node, edge.to_node):
            if endpoint not in self.nodes:
                raise GraphFormatError(
                    f"edge {edge.id!r} references missing node {endpoint!r}"
                )
        self.edges[edge.id] = edge
        self.out_edges[edge.from_node].append(edge.id)
        self.in_edges[edge.to_node].append(edge.id)

    def label_count(self, label: str) -> int:
        return sum(1 for n in self.nodes.values() if label in n.labels)


@dataclass
class ResultTable:
    columns: List[str]
    rows: List[Tuple[Value, ...]]

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ExecutionError("row arity does not match column count")

    def sorted_rows(self) -> List[Tuple[Value, ...]]:
        """Rows in a canonical order, for order-insensitive comparison."""
        return sorted(self.rows, key=lambda row: [value_key(v) for v in row])


# --- fixture files -----------------------------------------------------------

_NODE_RE = re.compile(r"^node\s+(\S+)\s+:(\w+)\s*(\{.*\})?\s*$")
_EDGE_RE = re.compile(r"^edge\s+(\S+)\s+(\S+)\s+-\[:(\w+)\s*(\{.*?\})?\]->\s+(\S+)\s*$")


def _parse_props(text: Optional[str], lineno: int) -> Dict[str, object]:
    if not text:
        return {}
    try:
        pairs = cypher.parse_property_map(text)
    except Exception as exc:
        raise GraphFormatError(f"line {lineno}: bad property map: {exc}") from exc
    return {key: literal.value for key, literal in pairs}


def parse_graph(text: str, schema: Optional[GraphSchema] = None) -> PropertyGraph:
    """Parse fixture text; validates against its declared schema preset."""
    graph = PropertyGraph()
    declared: Optional[GraphSchema] = schema
    pending_edges: List[Tuple[int, Edge]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("schema:"):
            name = line.split(":", 1)[1].strip()
            if declared is None:
                declared = load_preset(name)
            graph.schema_name = name
            continue
        match = _NODE_RE.match(line)
        if match:
            node_id, label, props = match.groups()
            graph.add_node(Node(node_id, frozenset([label]), _parse_props(props, lineno)))
            continue
        match = _EDGE_RE.match(line)
        if match:
            edge_id, from_id, rel_type, props, to_id = match.groups()
            pending_edges.append(
                (lineno, Edge(edge_id, rel_type, from_id, to_id, _parse_props(props, lineno)))
            )
            continue
        raise GraphFormatError(f"line {lineno}: cannot parse graph line {raw!r}")
    for lineno, edge in pending_edges:
        try:
            graph.add_edge(edge)
        except GraphFormatError as exc:
            raise GraphFormatError(f"line {lineno}: {exc}") from exc
        if declared is not None:
            from_labels = graph.nodes[edge.from_node].labels
            to_labels = graph.nodes[edge.to_node].labels
            pairs = rel_lookup(declared, edge.rel_type)
            if not any(f in from_labels and t in to_labels for f, t in pairs):
                raise SchemaViolation(
                    f"line {lineno}: edge {edge.id!r} ({edge.rel_type}) does not match "
                    f"any schema relationship"
                )
    return graph


def load_graph(path: Union[str, Path]) -> PropertyGraph:
    return parse_graph(Path(path).read_text(encoding="utf-8"))


def load_fixture(name: str) -> PropertyGraph:
    from importlib import resources

    text = resources.files("graphtalk.data.fixtures").joinpath(f"{name}.graph").read_text("utf-8")
    return parse_graph(text)


# --- value helpers -----------------------------------------------------------


def is_number(value: object) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def values_equal(a: Value, b: Value) -> Optional[bool]:
    """Cypher equality; None when either side is null."""
    if a is None or b is None:
        return None
    if is_number(a) and is_number(b):
        return a == b
    if isinstance(a, bool) and isinstance(b, bool):
        return a == b
    if isinstance(a, str) and isinstance(b, str):
        return a == b
    if isinstance(a, NodeRef) and isinstance(b, NodeRef):
        return a.id == b.id
    if isinstance(a, EdgeRef) and isinstance(b, EdgeRef):
        return a.id == b.id
    if isinstance(a, list) and isinstance(b, list):
        if len(a) != len(b):
            return False
        for x, y in zip(a, b):
            eq = values_equal(x, y)
            if eq is not True:
                return False if eq is False else None
        return True
    return False


def value_key(value: Value):
    """Hashable key identifying a value for DISTINCT and grouping."""
    if value is None:
        return ("null",)
    if isinstance(value, bool):
        return ("bool", value)
    if is_number(value):
        return ("num", value)
    if isinstance(value, str):
        return ("str", value)
    if isinstance(value, NodeRef):
        return ("node", value.id)
    if isinstance(value, EdgeRef):
        return ("edge", value.id)
    if isinstance(value, list):
        return ("list", tuple(value_key(v) for v in value))
    raise ExecutionError(f"unsupported value: {value!r}")


_SORT_RANK = {"num": 0, "str": 1, "bool": 2, "list": 3, "node": 4, "edge": 5}


def _compare_sort(a: Value, b: Value) -> int:
    ka, kb = value_key(a), value_key(b)
    ra, rb = _SORT_RANK[ka[0]], _SORT_RANK[kb[0]]
    if ra != rb:
        return -1 if ra < rb else 1
    if ka[0] == "list":
        for x, y in zip(a, b):  # type: ignore[arg-type]
            if x is None or y is None:
                if x is None and y is None:
                    continue
                return 1 if x is None else -1
            inner = _compare_sort(x, y)
            if inner:
                return inner
        return (len(a) > len(b)) - (len(a) < len(b))  # type: ignore[arg-type]
    va, vb = ka[1], kb[1]
    return (va > vb) - (va < vb)


# --- expression evaluation ----------------------------------------------------


class _Evaluator:
    def __init__(self, graph: PropertyGraph):
        self.graph = graph

    def value(self, expr: ast.ValueExpr, binding: Binding, group: Optional[List[Binding]] = None) -> Value:
        if isinstance(expr, ast.Literal):
            return expr.value
        if isinstance(expr, ast.Variable):
            if expr.name not in binding:
                raise ExecutionError(f"unknown variable {expr.name}")
            return binding[expr.name]
        if isinstance(expr, ast.PropertyAccess):
            if expr.variable not in binding:
                raise ExecutionError(f"unknown variable {expr.variable}")
            target = binding[expr.variable]
            if target is None:
                return None
            if isinstance(target, NodeRef):
                return self.graph.nodes[target.id].properties.get(expr.key)
            if isinstance(target, EdgeRef):
                return self.graph.edges[target.id].properties.get(expr.key)
            raise ExecutionError(f"cannot read property {expr.key} of a scalar value")
        if isinstance(expr, ast.Aggregate):
            if group is None:
                raise ExecutionError(f"{expr.kind} used outside a projection")
            return self._aggregate(expr, group)
        if isinstance(expr, ast.CaseExpr):
            for cond, value in expr.whens:
                if self.boolean(cond, binding) is True:
                    return self.value(value, binding, group)
            if expr.default is not None:
                return self.value(expr.default, binding, group)
            return None
        if isinstance(expr, ast.Arithmetic):
            lhs = self.value(expr.lhs, binding, group)
            rhs = self.value(expr.rhs, binding, group)
            if lhs is None or rhs is None:
                return None
            if not (is_number(lhs) and is_number(rhs)):
                raise ExecutionError(
                    f"arithmetic {expr.op} requires numbers, got {lhs!r} and {rhs!r}"
                )
            if expr.op == "+":
                return lhs + rhs
            if expr.op == "-":
                return lhs - rhs
            if expr.op == "*":
                return lhs * rhs
            if rhs == 0:
                raise ExecutionError("division by zero")
            return lhs / rhs  # integer division yields a float
        if isinstance(expr, ast.FunctionCall):
            if expr.name == "toFloat":
                arg = self.value(expr.args[0], binding, group)
                if arg is None:
                    return None
                if is_number(arg):
                    return float(arg)
                if isinstance(arg, str):
                    try:
                        return float(arg)
                    except ValueError:
                        return None
                return None
            raise ExecutionError(f"unsupported function {expr.name}")
        raise ExecutionError(f"cannot evaluate {expr!r}")

    def _aggregate(self, expr: ast.Aggregate, group: List[Binding]) -> Value:
        if expr.arg is None:  # COUNT(*)
            return len(group)
        values = [self.value(expr.arg, b) for b in group]
        values = [v for v in values if v is not None]
        if expr.distinct:
            seen = set()
            unique = []
            for v in values:
                key = value_key(v)
                if key not in seen:
                    seen.add(key)
                    unique.append(v)
            values = unique
        if expr.kind == "COUNT":
            return len(values)
        if expr.kind == "COLLECT":
            return list(values)
        total: Union[int, float] = 0
        for v in values:
            if not is_number(v):
                raise ExecutionError(f"SUM over non-numeric value {v!r}")
            total += v
        return total

    def boolean(self, expr: ast.BoolExpr, binding: Binding) -> Optional[bool]:
        if isinstance(expr, ast.Compare):
            lhs = self.value(expr.lhs, binding)
            rhs = self.value(expr.rhs, binding)
            return self._compare(expr.op, lhs, rhs)
        if isinstance(expr, ast.Contains):
            lhs = self.value(expr.lhs, binding)
            rhs = self.value(expr.rhs, binding)
            if lhs is None or rhs is None:
                return None
            if not isinstance(lhs, str) or not isinstance(rhs, str):
                raise ExecutionError(
                    f"CONTAINS requires string operands, got {lhs!r} and {rhs!r}"
                )
            return rhs in lhs
        if isinstance(expr, ast.And):
            saw_null = False
            for term in expr.terms:
                result = self.boolean(term, binding)
                if result is False:
                    return False
                if result is None:
                    saw_null = True
            return None if saw_null else True
        if isinstance(expr, ast.Or):
            saw_null = False
            for term in expr.terms:
                result = self.boolean(term, binding)
                if result is True:
                    return True
                if result is None:
                    saw_null = True
            return None if saw_null else False
        if isinstance(expr, ast.Not):
            result = self.boolean(expr.term, binding)
            return None if result is None else not result
        if isinstance(expr, ast.IsNull):
            return self.value(expr.expr, binding) is None
        if isinstance(expr, ast.IsNotNull):
            return self.value(expr.expr, binding) is not None
        if isinstance(expr, ast.PatternPredicate):
            for _ in match_pattern(self.graph, expr.pattern, binding):
                return True
            return False
        raise ExecutionError(f"cannot evaluate predicate {expr!r}")

    @staticmethod
    def _compare(op: str, lhs: Value, rhs: Value) -> Optional[bool]:
        if lhs is None or rhs is None:
            return None
        if op in ("=", "<>"):
            eq = values_equal(lhs, rhs)
            if eq is None:
                return None
            return eq if op == "=" else not eq
        comparable = (is_number(lhs) and is_number(rhs)) or (
            isinstance(lhs, str) and isinstance(rhs, str)
        )
        if not comparable:
            return None  # cross-type ordered comparison has no answer
        if op == "<":
            return lhs < rhs
        if op == "<=":
            return lhs <= rhs
        if op == ">":
            return lhs > rhs
        return lhs >= rhs


# --- pattern matching ---------------------------------------------------------


def _node_matches(graph: PropertyGraph, node_id: str, pattern: ast.NodePattern) -> bool:
    node = graph.nodes[node_id]
    if pattern.label is not None and pattern.label not in node.labels:
        return False
    for key, literal in pattern.properties:
        stored = node.properties.get(key)
        if values_equal(stored, literal.value) is not True:
            return False
    return True


def match_pattern(graph: PropertyGraph, pattern: ast.Pattern, binding: Binding) -> Iterator[Binding]:
    """All homomorphic embeddings of ``pattern`` extending ``binding``."""
    elements = pattern.elements
    first = elements[0]
    assert isinstance(first, ast.NodePattern)

    def start_candidates() -> Iterator[str]:
        if first.variable and first.variable in binding:
            bound = binding[first.variable]
            if isinstance(bound, NodeRef) and _node_matches(graph, bound.id, first):
                yield bound.id
            return
        for node_id in graph.nodes:
            if _node_matches(graph, node_id, first):
                yield node_id

    def extend(index: int, current: Binding, at_node: str) -> Iterator[Binding]:
        if index >= len(elements):
            yield current
            return
        rel = elements[index]
        node = elements[index + 1]
        assert isinstance(rel, ast.RelPattern) and isinstance(node, ast.NodePattern)
        if rel.direction is ast.Direction.LEFT_TO_RIGHT:
            moves = [(edge_id, "out") for edge_id in graph.out_edges[at_node]]
        elif rel.direction is ast.Direction.RIGHT_TO_LEFT:
            moves = [(edge_id, "in") for edge_id in graph.in_edges[at_node]]
        else:
            moves = [(e, "out") for e in graph.out_edges[at_node]] + [
                (e, "in") for e in graph.in_edges[at_node]
            ]
        for edge_id, orientation in moves:
            edge = graph.edges[edge_id]
            if rel.rel_type is not None and edge.rel_type != rel.rel_type:
                continue
            next_node = edge.to_node if orientation == "out" else edge.from_node
            if not _node_matches(graph, next_node, node):
                continue
            extended = current
            if rel.variable is not None:
                existing = current.get(rel.variable)
                if existing is not None:
                    if not (isinstance(existing, EdgeRef) and existing.id == edge_id):
                        continue
                else:
                    extended = dict(extended)
                    extended[rel.variable] = EdgeRef(edge_id)
            if node.variable is not None:
                existing = extended.get(node.variable)
                if existing is not None:
                    if not (isinstance(existing, NodeRef) and existing.id == next_node):
                        continue
                else:
                    if extended is current:
                        extended = dict(extended)
                    extended[node.variable] = NodeRef(next_node)
            yield from extend(index + 2, extended, next_node)

    for start in start_candidates():
        current = binding
        if first.variable is not None and first.variable not in binding:
            current = dict(binding)
            current[first.variable] = NodeRef(start)
        yield from extend(1, current, start)


def pattern_variables(patterns: Sequence[ast.Pattern]) -> List[str]:
    names: List[str] = []
    for pattern in patterns:
        for element in pattern.elements:
            if element.variable is not None and element.variable not in names:
                names.append(element.variable)
    return names


# --- clause pipeline -----------------------------------------------------------


def _match_all(graph: PropertyGraph, patterns: Sequence[ast.Pattern], binding: Binding) -> List[Binding]:
    bindings = [binding]
    for pattern in patterns:
        bindings = [ext for b in bindings for ext in match_pattern(graph, pattern, b)]
        if not bindings:
            break
    return bindings


def _project(
    evaluator: _Evaluator,
    bindings: List[Binding],
    projections: Sequence[ast.Projection],
) -> Tuple[List[str], List[List[Value]]]:
    names = [p.alias or cypher.print_value(p.expr) for p in projections]
    if not any(cypher.contains_aggregate(p.expr) for p in projections):
        rows = [[evaluator.value(p.expr, b) for p in projections] for b in bindings]
        return names, rows
    group_positions = [i for i, p in enumerate(projections) if not cypher.contains_aggregate(p.expr)]
    groups: Dict[tuple, Tuple[Binding, List[Binding], List[Value]]] = {}
    order: List[tuple] = []
    for binding in bindings:
        key_values = [evaluator.value(projections[i].expr, binding) for i in group_positions]
        key = tuple(value_key(v) for v in key_values)
        if key not in groups:
            groups[key] = (binding, [], key_values)
            order.append(key)
        groups[key][1].append(binding)
    if not group_positions and not bindings:
        groups[()] = ({}, [], [])
        order.append(())
    rows = []
    for key in order:
        representative, members, key_values = groups[key]
        row: List[Value] = []
        key_iter = iter(key_values)
        for i, projection in enumerate(projections):
            if i in group_positions:
                row.append(next(key_iter))
            else:
                row.append(evaluator.value(projection.expr, representative, group=members))
        rows.append(row)
    return names, rows


def _order_index(
    item: ast.OrderItem, names: List[str], projections: Sequence[ast.Projection]
) -> int:
    if isinstance(item.expr, ast.Variable) and item.expr.name in names:
        return names.index(item.expr.name)
    printed = cypher.print_value(item.expr)
    if printed in names:
        return names.index(printed)
    for i, projection in enumerate(projections):
        if projection.expr == item.expr:
            return i
    raise ExecutionError(f"ORDER BY key {printed} is not among the returned columns")


def _sort_rows(rows: List[List[Value]], keys: List[Tuple[int, bool]]) -> List[List[Value]]:
    def compare(a: List[Value], b: List[Value]) -> int:
        for index, descending in keys:
            va, vb = a[index], b[index]
            if va is None or vb is None:
                if va is None and vb is None:
                    continue
                return 1 if va is None else -1  # nulls last, either direction
            result = _compare_sort(va, vb)
            if result:
                return -result if descending else result
        return 0

    return sorted(rows, key=functools.cmp_to_key(compare))


def execute(query: ast.QueryAst, graph: PropertyGraph) -> ResultTable:
    """Evaluate ``query`` against ``graph``.

    Raises ExecutionError for unbound variables and runtime type errors;
    reading a missing property yields null rather than an error.
    """
    unbound = cypher.unbound_variables(query)
    if unbound:
        raise ExecutionError(f"unknown variable {unbound[0]}")
    evaluator = _Evaluator(graph)
    bindings: List[Binding] = [{}]
    table: Optional[ResultTable] = None
    for clause in query.clauses:
        if isinstance(clause, ast.MatchClause):
            if clause.optional:
                new_bindings: List[Binding] = []
                new_vars = pattern_variables(clause.patterns)
                for binding in bindings:
                    extensions = _match_all(graph, clause.patterns, binding)
                    if extensions:
                        new_bindings.extend(extensions)
                    else:
                        padded = dict(binding)
                        for name in new_vars:
                            padded.setdefault(name, None)
                        new_bindings.append(padded)
                bindings = new_bindings
            else:
                bindings = [
                    ext for b in bindings for ext in _match_all(graph, clause.patterns, b)
                ]
        elif isinstance(clause, ast.WhereClause):
            bindings = [b for b in bindings if evaluator.boolean(clause.expr, b) is True]
        elif isinstance(clause, ast.WithClause):
            names, rows = _project(evaluator, bindings, clause.projections)
            bindings = [dict(zip(names, row)) for row in rows]
            if clause.where is not None:
                bindings = [b for b in bindings if evaluator.boolean(clause.where, b) is True]
        elif isinstance(clause, ast.ReturnClause):
            names, rows = _project(evaluator, bindings, clause.projections)
            if clause.distinct:
                seen = set()
                unique = []
                for row in rows:
                    key = tuple(value_key(v) for v in row)
                    if key not in seen:
                        seen.add(key)
                        unique.append(row)
                rows = unique
            if clause.order_by:
                keys = [
                    (_order_index(item, names, clause.projections), item.descending)
                    for item in clause.order_by
                ]
                rows = _sort_rows(rows, keys)
            if clause.limit is not None:
                rows = rows[: clause.limit]
            table = ResultTable(names, [tuple(row) for row in rows])
    assert table is not None  # grammar guarantees a terminal RETURN
    return table


# --- value rendering (interface layer) -----------------------------------------


def render_value(value: Value, graph: PropertyGraph):
    """JSON-ready rendering; node and edge references become pattern strings."""
    if isinstance(value, NodeRef):
        node = graph.nodes[value.id]
        label = ":" + ":".join(sorted(node.labels)) if node.labels else ""
        return f"({label} {_render_props(node.properties)})"
    if isinstance(value, EdgeRef):
        edge = graph.edges[value.id]
        return f"[:{edge.rel_type} {_render_props(edge.properties)}]"
    if isinstance(value, list):
        return [render_value(v, graph) for v in value]
    return value


def _render_props(properties: Dict[str, object]) -> str:
    pairs = ", ".join(
        f"{key}: {cypher.print_literal(value)}" for key, value in sorted(properties.items())
    )
    return "{" + pairs + "}"
