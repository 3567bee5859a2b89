"""Regenerates the 90-query explanation benchmark over the movie schema.

The grid is 15 base queries ({1,2,3} hops x {match, optional_match,
with_chain, where, case}); each base yields one clean case plus five
perturbed ones, one per fault family. Generation is a pure function of
(schema, seed): the same seed reproduces the same cases byte for byte.
"""

from __future__ import annotations

import dataclasses
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from . import cypher
from .cypher import ast
from .errors import BenchmarkError
from .schema import GraphSchema
from .validator import PerturbationKind

CLAUSE_TYPES = ("match", "optional_match", "with_chain", "where", "case")

NONSENSE_REL_POOL = ("EATS", "SOLVES", "DRINKS")
NONSENSE_LABEL_POOL = ("Food", "Airplane", "Cloud")

_REQUIRED_LABELS = {"Person", "Movie", "Critic", "City"}
_REQUIRED_RELS = {"ACTED_IN", "DIRECTED", "HAS_FAVORITE", "BIRTH_CITY"}


@dataclass(frozen=True)
class FactSet:
    """What a complete one-sentence summary of a query must mention."""

    entities: Tuple[Tuple[str, str], ...]  # (variable, label)
    relations: Tuple[Tuple[str, str, str], ...]  # (rel_type, from_var, to_var)
    filters: Tuple[str, ...]  # normalized predicates
    returns: Tuple[str, ...]  # printed projection expressions
    year_constraint: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "entities": [list(e) for e in self.entities],
            "relations": [list(r) for r in self.relations],
            "filters": list(self.filters),
            "returns": list(self.returns),
            "year_constraint": self.year_constraint,
        }

    @classmethod
    def from_json(cls, data: dict) -> "FactSet":
        return cls(
            entities=tuple(tuple(e) for e in data["entities"]),
            relations=tuple(tuple(r) for r in data["relations"]),
            filters=tuple(data["filters"]),
            returns=tuple(data["returns"]),
            year_constraint=data.get("year_constraint"),
        )


@dataclass(frozen=True)
class BenchmarkCase:
    id: str
    query_text: str
    hops: int
    extra_hop: bool
    clause_type: str
    injected_kind: PerturbationKind
    has_year: bool
    gold_summary_facts: FactSet

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "query": self.query_text,
            "hops": self.hops,
            "extra_hop": self.extra_hop,
            "clause_type": self.clause_type,
            "perturbation": self.injected_kind.value,
            "has_year": self.has_year,
            "gold_facts": self.gold_summary_facts.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "BenchmarkCase":
        return cls(
            id=data["id"],
            query_text=data["query"],
            hops=data["hops"],
            extra_hop=data["extra_hop"],
            clause_type=data["clause_type"],
            injected_kind=PerturbationKind(data["perturbation"]),
            has_year=data["has_year"],
            gold_summary_facts=FactSet.from_json(data["gold_facts"]),
        )


# --- gold facts ---------------------------------------------------------------


def gold_facts(base_ast: ast.QueryAst) -> FactSet:
    """Derive the summary ground truth from a clean query."""
    entities: List[Tuple[str, str]] = []
    relations: List[Tuple[str, str, str]] = []
    filters: List[str] = []
    for pattern, is_predicate in cypher.query_patterns(base_ast):
        if is_predicate:
            continue
        for node in pattern.nodes():
            if node.variable and node.label and (node.variable, node.label) not in entities:
                entities.append((node.variable, node.label))
            for key, literal in node.properties:
                if node.variable:
                    filters.append(
                        f"{node.variable}.{key} = {cypher.print_literal(literal.value)}"
                    )
        for left, rel, right in pattern.hops():
            if rel.rel_type is None or left.variable is None or right.variable is None:
                continue
            if rel.direction is ast.Direction.RIGHT_TO_LEFT:
                relations.append((rel.rel_type, right.variable, left.variable))
            else:
                relations.append((rel.rel_type, left.variable, right.variable))
    year_constraint = None
    for clause in base_ast.clauses:
        roots: List[ast.Expr] = []
        if isinstance(clause, ast.WhereClause):
            roots.append(clause.expr)
        elif isinstance(clause, ast.WithClause):
            if clause.where is not None:
                roots.append(clause.where)
            roots.extend(p.expr for p in clause.projections)
        elif isinstance(clause, ast.ReturnClause):
            roots.extend(p.expr for p in clause.projections)
        for root in roots:
            for node in cypher.walk_bool(root):
                if not isinstance(node, ast.Compare):
                    continue
                if isinstance(clause, ast.WhereClause):
                    filters.append(cypher.print_bool(node))
                if (
                    isinstance(node.lhs, ast.PropertyAccess)
                    and "year" in node.lhs.key.lower()
                    and isinstance(node.rhs, ast.Literal)
                    and isinstance(node.rhs.value, int)
                    and year_constraint is None
                ):
                    year_constraint = (
                        f"{node.lhs.key} {node.op} {cypher.print_literal(node.rhs.value)}"
                    )
    returns = tuple(cypher.print_projection(p) for p in base_ast.return_clause().projections)
    # Filters picked up both from inline property maps and WHERE comparisons.
    unique_filters = tuple(dict.fromkeys(filters))
    return FactSet(tuple(entities), tuple(relations), unique_filters, returns, year_constraint)


# --- base query construction ----------------------------------------------------


def _node(var: Optional[str], label: Optional[str], **props) -> ast.NodePattern:
    properties = tuple((k, ast.Literal(v)) for k, v in props.items())
    return ast.NodePattern(var, label, properties)


def _rel(rel_type: str, direction: ast.Direction) -> ast.RelPattern:
    return ast.RelPattern(None, rel_type, direction)


def _prop(var: str, key: str) -> ast.PropertyAccess:
    return ast.PropertyAccess(var, key)


def _base_path(hops: int) -> ast.Pattern:
    ltr, rtl = ast.Direction.LEFT_TO_RIGHT, ast.Direction.RIGHT_TO_LEFT
    person = _node("p", "Person", name="Alice")
    movie = _node("m", "Movie")
    if hops == 1:
        return ast.Pattern((person, _rel("ACTED_IN", ltr), movie))
    critic = _node("c", "Critic")
    if hops == 2:
        return ast.Pattern(
            (person, _rel("ACTED_IN", ltr), movie, _rel("HAS_FAVORITE", rtl), critic)
        )
    city = _node("ci", "City")
    return ast.Pattern(
        (
            city,
            _rel("BIRTH_CITY", rtl),
            person,
            _rel("ACTED_IN", ltr),
            movie,
            _rel("HAS_FAVORITE", rtl),
            critic,
        )
    )


def _base_returns(hops: int) -> List[ast.Projection]:
    projections = [ast.Projection(_prop("p", "name")), ast.Projection(_prop("m", "title"))]
    if hops >= 2:
        projections.append(ast.Projection(_prop("c", "name")))
    if hops >= 3:
        projections.append(ast.Projection(_prop("ci", "name")))
    return projections


def build_base(hops: int, clause_type: str) -> ast.QueryAst:
    """The clean benchmark query for one grid cell."""
    ltr, rtl = ast.Direction.LEFT_TO_RIGHT, ast.Direction.RIGHT_TO_LEFT
    path = _base_path(hops)
    match = ast.MatchClause((path,))
    projections = _base_returns(hops)
    if clause_type == "match":
        clauses: List[ast.Clause] = [match, ast.ReturnClause(tuple(projections))]
    elif clause_type == "optional_match":
        if hops < 3:
            extension = ast.Pattern(
                (_node("p", None), _rel("BIRTH_CITY", ltr), _node("ci", "City"))
            )
            extra = ast.Projection(_prop("ci", "name"))
        else:
            extension = ast.Pattern(
                (_node("m", None), _rel("DIRECTED", rtl), _node("d", "Person"))
            )
            extra = ast.Projection(_prop("d", "name"))
        clauses = [
            match,
            ast.MatchClause((extension,), optional=True),
            ast.ReturnClause(tuple(projections + [extra])),
        ]
    elif clause_type == "with_chain":
        carried = [ast.Projection(ast.Variable(v)) for v in _path_variables(path)]
        second = ast.MatchClause(
            (ast.Pattern((_node("d", "Person"), _rel("DIRECTED", ltr), _node("m", None))),)
        )
        clauses = [
            match,
            ast.WithClause(tuple(carried)),
            second,
            ast.ReturnClause(tuple(projections + [ast.Projection(_prop("d", "name"))])),
        ]
    elif clause_type == "where":
        where = ast.WhereClause(ast.Compare(">", _prop("m", "release_year"), ast.Literal(2000)))
        clauses = [match, where, ast.ReturnClause(tuple(projections))]
    elif clause_type == "case":
        case = ast.CaseExpr(
            whens=(
                (
                    ast.Compare("<", _prop("m", "release_year"), ast.Literal(2010)),
                    ast.Literal("old"),
                ),
            ),
            default=ast.Literal("new"),
        )
        clauses = [
            match,
            ast.ReturnClause(tuple(projections + [ast.Projection(case, alias="movie_age")])),
        ]
    else:
        raise BenchmarkError(f"unknown clause type {clause_type!r}")
    return ast.QueryAst(tuple(clauses))


def _path_variables(path: ast.Pattern) -> List[str]:
    return [n.variable for n in path.nodes() if n.variable is not None]


# --- AST surgery for perturbations ----------------------------------------------


def _replace_path(query: ast.QueryAst, new_path: ast.Pattern) -> ast.QueryAst:
    first = query.clauses[0]
    assert isinstance(first, ast.MatchClause)
    new_match = dataclasses.replace(first, patterns=(new_path,) + first.patterns[1:])
    return ast.QueryAst((new_match,) + query.clauses[1:])


def _flip_rel(path: ast.Pattern, rel_index: int) -> ast.Pattern:
    flipped = {
        ast.Direction.LEFT_TO_RIGHT: ast.Direction.RIGHT_TO_LEFT,
        ast.Direction.RIGHT_TO_LEFT: ast.Direction.LEFT_TO_RIGHT,
        ast.Direction.UNDIRECTED: ast.Direction.UNDIRECTED,
    }
    elements = list(path.elements)
    position = 2 * rel_index + 1
    rel = elements[position]
    assert isinstance(rel, ast.RelPattern)
    elements[position] = dataclasses.replace(rel, direction=flipped[rel.direction])
    return ast.Pattern(tuple(elements))


def _set_rel_type(path: ast.Pattern, rel_index: int, rel_type: str) -> ast.Pattern:
    elements = list(path.elements)
    position = 2 * rel_index + 1
    rel = elements[position]
    assert isinstance(rel, ast.RelPattern)
    elements[position] = dataclasses.replace(rel, rel_type=rel_type)
    return ast.Pattern(tuple(elements))


def _set_node_label(path: ast.Pattern, node_index: int, label: Optional[str]) -> ast.Pattern:
    elements = list(path.elements)
    position = 2 * node_index
    node = elements[position]
    assert isinstance(node, ast.NodePattern)
    elements[position] = dataclasses.replace(node, label=label)
    return ast.Pattern(tuple(elements))


def rename_variable(node, old: str, new: str):
    """Rebuild any AST node with every reference to ``old`` renamed."""
    if isinstance(node, ast.QueryAst):
        return ast.QueryAst(tuple(rename_variable(c, old, new) for c in node.clauses))
    if isinstance(node, ast.MatchClause):
        return dataclasses.replace(
            node, patterns=tuple(rename_variable(p, old, new) for p in node.patterns)
        )
    if isinstance(node, ast.WhereClause):
        return ast.WhereClause(rename_variable(node.expr, old, new))
    if isinstance(node, ast.WithClause):
        return ast.WithClause(
            tuple(rename_variable(p, old, new) for p in node.projections),
            None if node.where is None else rename_variable(node.where, old, new),
        )
    if isinstance(node, ast.ReturnClause):
        return dataclasses.replace(
            node,
            projections=tuple(rename_variable(p, old, new) for p in node.projections),
            order_by=tuple(rename_variable(o, old, new) for o in node.order_by),
        )
    if isinstance(node, ast.Projection):
        return dataclasses.replace(node, expr=rename_variable(node.expr, old, new))
    if isinstance(node, ast.OrderItem):
        return dataclasses.replace(node, expr=rename_variable(node.expr, old, new))
    if isinstance(node, ast.Pattern):
        return ast.Pattern(tuple(rename_variable(e, old, new) for e in node.elements))
    if isinstance(node, (ast.NodePattern, ast.RelPattern)):
        if node.variable == old:
            return dataclasses.replace(node, variable=new)
        return node
    if isinstance(node, ast.Variable):
        return ast.Variable(new) if node.name == old else node
    if isinstance(node, ast.PropertyAccess):
        return ast.PropertyAccess(new, node.key) if node.variable == old else node
    if isinstance(node, ast.Literal):
        return node
    if isinstance(node, ast.Aggregate):
        return dataclasses.replace(
            node, arg=None if node.arg is None else rename_variable(node.arg, old, new)
        )
    if isinstance(node, ast.CaseExpr):
        return ast.CaseExpr(
            tuple(
                (rename_variable(c, old, new), rename_variable(v, old, new))
                for c, v in node.whens
            ),
            None if node.default is None else rename_variable(node.default, old, new),
        )
    if isinstance(node, ast.Arithmetic):
        return ast.Arithmetic(
            node.op, rename_variable(node.lhs, old, new), rename_variable(node.rhs, old, new)
        )
    if isinstance(node, ast.FunctionCall):
        return ast.FunctionCall(node.name, tuple(rename_variable(a, old, new) for a in node.args))
    if isinstance(node, ast.Compare):
        return ast.Compare(
            node.op, rename_variable(node.lhs, old, new), rename_variable(node.rhs, old, new)
        )
    if isinstance(node, ast.Contains):
        return ast.Contains(rename_variable(node.lhs, old, new), rename_variable(node.rhs, old, new))
    if isinstance(node, ast.And):
        return ast.And(tuple(rename_variable(t, old, new) for t in node.terms))
    if isinstance(node, ast.Or):
        return ast.Or(tuple(rename_variable(t, old, new) for t in node.terms))
    if isinstance(node, ast.Not):
        return ast.Not(rename_variable(node.term, old, new))
    if isinstance(node, ast.IsNull):
        return ast.IsNull(rename_variable(node.expr, old, new))
    if isinstance(node, ast.IsNotNull):
        return ast.IsNotNull(rename_variable(node.expr, old, new))
    if isinstance(node, ast.PatternPredicate):
        return ast.PatternPredicate(rename_variable(node.pattern, old, new))
    raise TypeError(f"cannot rename inside {node!r}")


def _insert_where(query: ast.QueryAst, expr: ast.BoolExpr) -> ast.QueryAst:
    clauses = list(query.clauses)
    clauses.insert(1, ast.WhereClause(expr))
    return ast.QueryAst(tuple(clauses))


# --- perturbation application -----------------------------------------------------


def _apply_perturbation(
    base: ast.QueryAst,
    schema: GraphSchema,
    kind: PerturbationKind,
    rng: random.Random,
) -> ast.QueryAst:
    first = base.clauses[0]
    assert isinstance(first, ast.MatchClause)
    path = first.patterns[0]
    rels = path.rels()
    nodes = path.nodes()
    if kind is PerturbationKind.FLIPPED_DIRECTION:
        return _replace_path(base, _flip_rel(path, rng.randrange(len(rels))))
    if kind is PerturbationKind.NONSENSE_REL_LABEL:
        index = rng.randrange(len(rels))
        return _replace_path(base, _set_rel_type(path, index, rng.choice(NONSENSE_REL_POOL)))
    if kind is PerturbationKind.NONSENSE_NODE_LABEL:
        index = rng.randrange(len(nodes))
        return _replace_path(base, _set_node_label(path, index, rng.choice(NONSENSE_LABEL_POOL)))
    if kind is PerturbationKind.MISSING_NODE_TYPE_MISLEADING_NAME:
        index = rng.randrange(len(nodes))
        node = nodes[index]
        assert node.variable is not None and node.label is not None
        other_labels = sorted(schema.labels() - {node.label})
        misleading = rng.choice(other_labels).lower()
        without_label = _replace_path(base, _set_node_label(path, index, None))
        return rename_variable(without_label, node.variable, misleading)
    if kind is PerturbationKind.CONTRADICTORY_WHERE:
        contradiction = ast.And(
            (
                ast.Compare(">", _prop("m", "release_year"), ast.Literal(2020)),
                ast.Compare("<", _prop("m", "release_year"), ast.Literal(2019)),
            )
        )
        clauses = list(base.clauses)
        where_positions = [
            i for i, c in enumerate(clauses) if isinstance(c, ast.WhereClause)
        ]
        assert where_positions, "contradiction applies to WHERE bases only"
        clauses[where_positions[0]] = ast.WhereClause(contradiction)
        return ast.QueryAst(tuple(clauses))
    if kind is PerturbationKind.ILLOGICAL_WHERE_VALUE:
        return _insert_where(
            base, ast.Compare("=", _prop("m", "release_year"), ast.Literal(-1))
        )
    if kind is PerturbationKind.ILL_FORMED_VALUE_TEST:
        return _insert_where(base, ast.Compare(">", _prop("m", "title"), ast.Literal(2020)))
    raise BenchmarkError(f"cannot inject {kind}")


# --- generation --------------------------------------------------------------------


def generate_benchmark(schema: GraphSchema, seed: int) -> List[BenchmarkCase]:
    """All 90 cases: 15 clean plus 75 perturbed, deterministic in ``seed``."""
    missing_labels = _REQUIRED_LABELS - schema.labels()
    missing_rels = _REQUIRED_RELS - {r.rel_type for r in schema.rel_types}
    if missing_labels or missing_rels:
        raise BenchmarkError(
            f"schema {schema.name!r} lacks required elements: "
            f"labels {sorted(missing_labels)}, relationships {sorted(missing_rels)}"
        )
    grid = [(hops, clause) for hops in (1, 2, 3) for clause in CLAUSE_TYPES]
    family_rng = random.Random(f"{seed}:family-v")
    offset = family_rng.randrange(2)
    non_where = [(h, c) for h, c in grid if c != "where"]
    value_kind: Dict[Tuple[int, str], PerturbationKind] = {}
    for i, cell in enumerate(non_where):
        value_kind[cell] = (
            PerturbationKind.ILLOGICAL_WHERE_VALUE,
            PerturbationKind.ILL_FORMED_VALUE_TEST,
        )[(i + offset) % 2]
    cases: List[BenchmarkCase] = []
    for hops, clause in grid:
        base = build_base(hops, clause)
        facts = gold_facts(base)
        has_year = clause in ("where", "case")
        extra_hop = clause in ("optional_match", "with_chain")
        families = [
            PerturbationKind.NONE,
            PerturbationKind.FLIPPED_DIRECTION,
            PerturbationKind.NONSENSE_REL_LABEL,
            PerturbationKind.NONSENSE_NODE_LABEL,
            PerturbationKind.MISSING_NODE_TYPE_MISLEADING_NAME,
            PerturbationKind.CONTRADICTORY_WHERE if clause == "where" else value_kind[(hops, clause)],
        ]
        for kind in families:
            if kind is PerturbationKind.NONE:
                query = base
            else:
                rng = random.Random(f"{seed}:h{hops}:{clause}:{kind.value}")
                query = _apply_perturbation(base, schema, kind, rng)
            case_id = f"h{hops}-{clause}-{'clean' if kind is PerturbationKind.NONE else kind.value}"
            cases.append(
                BenchmarkCase(
                    id=case_id,
                    query_text=cypher.print_query(query),
                    hops=hops,
                    extra_hop=extra_hop,
                    clause_type=clause,
                    injected_kind=kind,
                    has_year=has_year,
                    gold_summary_facts=facts,
                )
            )
    cases.sort(key=lambda c: c.id)
    return cases


# --- export / import -----------------------------------------------------------------


def export_benchmark(cases: Sequence[BenchmarkCase], path: Union[str, Path]) -> None:
    """One JSON record per line, ordered by case id; same input, same bytes."""
    ordered = sorted(cases, key=lambda c: c.id)
    lines = [json.dumps(c.to_json(), sort_keys=True, ensure_ascii=False) for c in ordered]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def import_benchmark(path: Union[str, Path]) -> List[BenchmarkCase]:
    cases = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            cases.append(BenchmarkCase.from_json(json.loads(line)))
    return cases
