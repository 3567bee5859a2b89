"""Schema-aware fault detection for parsed queries.

Implements the perturbation taxonomy as deterministic checks: flipped
relationship directions, relationship types and node labels the schema
does not know, unlabeled nodes with misleading variable names,
contradictory WHERE conjunctions, values outside a property's plausible
domain, and ordered comparisons across incompatible types.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from . import cypher
from .cypher import ast
from .errors import UnknownVariable
from .schema import NON_NUMERIC_TEXT, GraphSchema, NumericRange, rel_lookup, value_domain


class PerturbationKind(enum.Enum):
    FLIPPED_DIRECTION = "flipped_direction"
    NONSENSE_REL_LABEL = "nonsense_rel_label"
    NONSENSE_NODE_LABEL = "nonsense_node_label"
    MISSING_NODE_TYPE_MISLEADING_NAME = "missing_node_type_misleading_name"
    CONTRADICTORY_WHERE = "contradictory_where"
    ILLOGICAL_WHERE_VALUE = "illogical_where_value"
    ILL_FORMED_VALUE_TEST = "ill_formed_value_test"
    NONE = "none"


# Highest severity first; classify() picks the first kind present.
CLASSIFY_PRIORITY = (
    PerturbationKind.FLIPPED_DIRECTION,
    PerturbationKind.NONSENSE_REL_LABEL,
    PerturbationKind.NONSENSE_NODE_LABEL,
    PerturbationKind.CONTRADICTORY_WHERE,
    PerturbationKind.ILL_FORMED_VALUE_TEST,
    PerturbationKind.ILLOGICAL_WHERE_VALUE,
    PerturbationKind.MISSING_NODE_TYPE_MISLEADING_NAME,
)


@dataclass(frozen=True)
class Diagnostic:
    kind: PerturbationKind
    location: str
    message: str
    evidence: dict = field(default_factory=dict)

    def __post_init__(self):
        assert self.kind is not PerturbationKind.NONE


def classify(diagnostics: List[Diagnostic]) -> PerturbationKind:
    """The dominant perturbation kind under the fixed priority order."""
    present = {d.kind for d in diagnostics}
    for kind in CLASSIFY_PRIORITY:
        if kind in present:
            return kind
    return PerturbationKind.NONE


def validate(query: ast.QueryAst, schema: GraphSchema) -> List[Diagnostic]:
    """All detected faults, one Diagnostic per fault; empty when clean.

    Raises UnknownVariable when an expression references a variable no
    pattern or WITH projection binds.
    """
    unbound = cypher.unbound_variables(query)
    if unbound:
        raise UnknownVariable(unbound[0])
    checker = _Checker(query, schema)
    return checker.run()


def _describe_endpoint(node: ast.NodePattern, resolved: Optional[str]) -> str:
    if resolved:
        return resolved
    if node.variable:
        return f"({node.variable})"
    return "()"


class _Checker:
    def __init__(self, query: ast.QueryAst, schema: GraphSchema):
        self.query = query
        self.schema = schema
        self.diagnostics: List[Diagnostic] = []
        # First explicit label wins when a variable is labeled more than once.
        self.var_labels: Dict[str, str] = {}
        for pattern, _ in cypher.query_patterns(query):
            for node in pattern.nodes():
                if node.variable and node.label and node.variable not in self.var_labels:
                    self.var_labels[node.variable] = node.label

    def run(self) -> List[Diagnostic]:
        patterns = list(cypher.query_patterns(self.query))
        for index, (pattern, is_predicate) in enumerate(patterns):
            prefix = f"predicate[{index}]" if is_predicate else f"pattern[{index}]"
            self._check_pattern_edges(pattern, prefix)
        self._check_isolated_labels(patterns)
        self._check_unlabeled_names(patterns)
        self._check_value_tests()
        self._check_contradictions()
        return self.diagnostics

    # --- pattern structure ---

    def _resolve(self, node: ast.NodePattern) -> Optional[str]:
        if node.label is not None:
            return node.label
        if node.variable is not None:
            return self.var_labels.get(node.variable)
        return None

    def _check_pattern_edges(self, pattern: ast.Pattern, prefix: str) -> None:
        for hop_index, (left, rel, right) in enumerate(pattern.hops()):
            location = f"{prefix}.rel[{hop_index}]"
            if rel.rel_type is None:
                continue  # untyped relationships match anything
            pairs = rel_lookup(self.schema, rel.rel_type)
            left_label = self._resolve(left)
            right_label = self._resolve(right)
            if not pairs:
                left_desc = _describe_endpoint(left, left_label)
                right_desc = _describe_endpoint(right, right_label)
                self.diagnostics.append(
                    Diagnostic(
                        PerturbationKind.NONSENSE_REL_LABEL,
                        location,
                        f"relationship {rel.rel_type} does not exist between "
                        f"{left_desc} and {right_desc} in the schema",
                        {"rel_type": rel.rel_type, "endpoints": [left_label, right_label]},
                    )
                )
                continue
            if rel.direction is ast.Direction.LEFT_TO_RIGHT:
                source_label, target_label = left_label, right_label
            elif rel.direction is ast.Direction.RIGHT_TO_LEFT:
                source_label, target_label = right_label, left_label
            else:
                # Undirected patterns accept either orientation.
                if self._fits(pairs, left_label, right_label) or self._fits(
                    pairs, right_label, left_label
                ):
                    continue
                self._nonsense_node(location, rel, pairs, left_label, right_label)
                continue
            if self._fits(pairs, source_label, target_label):
                continue
            if self._fits(pairs, target_label, source_label):
                expected = sorted(pairs)
                self.diagnostics.append(
                    Diagnostic(
                        PerturbationKind.FLIPPED_DIRECTION,
                        location,
                        f"relationship {rel.rel_type} points the wrong way: the schema "
                        f"defines (:{expected[0][0]})-[:{rel.rel_type}]->(:{expected[0][1]})",
                        {
                            "rel_type": rel.rel_type,
                            "found": [source_label, target_label],
                            "expected_pairs": [list(p) for p in expected],
                        },
                    )
                )
                continue
            self._nonsense_node(location, rel, pairs, source_label, target_label)

    @staticmethod
    def _fits(pairs: Set[Tuple[str, str]], source: Optional[str], target: Optional[str]) -> bool:
        return any(
            (source is None or source == f) and (target is None or target == t) for f, t in pairs
        )

    def _nonsense_node(self, location, rel, pairs, source_label, target_label) -> None:
        from_labels = {f for f, _ in pairs}
        to_labels = {t for _, t in pairs}
        offending = []
        if source_label is not None and source_label not in from_labels:
            offending.append((source_label, sorted(from_labels)))
        if target_label is not None and target_label not in to_labels:
            offending.append((target_label, sorted(to_labels)))
        label, expected = offending[0] if offending else (source_label or target_label, [])
        self.diagnostics.append(
            Diagnostic(
                PerturbationKind.NONSENSE_NODE_LABEL,
                location,
                f"label {label} does not fit relationship {rel.rel_type}; "
                f"the schema allows {' or '.join(expected) if expected else 'no label here'}",
                {
                    "rel_type": rel.rel_type,
                    "found": [source_label, target_label],
                    "offending": [o[0] for o in offending],
                    "expected_pairs": sorted([list(p) for p in pairs]),
                },
            )
        )

    def _check_isolated_labels(self, patterns) -> None:
        # A label the schema does not know, on a node with no relationship
        # to judge it by (edge-adjacent unknown labels are reported through
        # the relationship checks).
        adjacent: Set[str] = set()
        for pattern, _ in patterns:
            for left, _, right in pattern.hops():
                for node in (left, right):
                    if node.variable:
                        adjacent.add(node.variable)
        known = self.schema.labels()
        seen: Set[Tuple[Optional[str], str]] = set()
        for index, (pattern, _) in enumerate(patterns):
            if len(pattern.elements) > 1:
                continue
            node = pattern.nodes()[0]
            if node.label is None or node.label in known:
                continue
            if node.variable and node.variable in adjacent:
                continue
            key = (node.variable, node.label)
            if key in seen:
                continue
            seen.add(key)
            self.diagnostics.append(
                Diagnostic(
                    PerturbationKind.NONSENSE_NODE_LABEL,
                    f"pattern[{index}].node[0]",
                    f"label {node.label} is not in the schema",
                    {"label": node.label, "known_labels": sorted(known)},
                )
            )

    # --- unlabeled nodes with misleading names ---

    def _check_unlabeled_names(self, patterns) -> None:
        # Deliberately conservative: flag only when the variable name points
        # at some schema label while the adjacent relationships imply a
        # different one.
        inferred: Dict[str, Set[str]] = {}
        flagged: Set[str] = set()
        for pattern, _ in patterns:
            for left, rel, right in pattern.hops():
                if rel.rel_type is None:
                    continue
                pairs = rel_lookup(self.schema, rel.rel_type)
                if not pairs:
                    continue
                if rel.direction is ast.Direction.LEFT_TO_RIGHT:
                    source, target = left, right
                elif rel.direction is ast.Direction.RIGHT_TO_LEFT:
                    source, target = right, left
                else:
                    continue
                target_label = self._resolve(target)
                source_label = self._resolve(source)
                if source.variable and source_label is None:
                    admissible = {f for f, t in pairs if target_label in (None, t)}
                    self._intersect(inferred, source.variable, admissible)
                if target.variable and target_label is None:
                    admissible = {t for f, t in pairs if source_label in (None, f)}
                    self._intersect(inferred, target.variable, admissible)
        for variable, labels in inferred.items():
            if variable in flagged or variable in self.var_labels or not labels:
                continue
            suggested = self._name_suggests(variable)
            if suggested and not (suggested & labels):
                flagged.add(variable)
                self.diagnostics.append(
                    Diagnostic(
                        PerturbationKind.MISSING_NODE_TYPE_MISLEADING_NAME,
                        f"variable[{variable}]",
                        f"node {variable} has no label; its name suggests "
                        f"{' or '.join(sorted(suggested))} but the pattern implies "
                        f"{' or '.join(sorted(labels))}",
                        {"variable": variable, "suggests": sorted(suggested), "implied": sorted(labels)},
                    )
                )

    @staticmethod
    def _intersect(inferred: Dict[str, Set[str]], variable: str, labels: Set[str]) -> None:
        if variable in inferred:
            inferred[variable] &= labels
        else:
            inferred[variable] = set(labels)

    def _name_suggests(self, variable: str) -> Set[str]:
        normalized = re.sub(r"\d+", "", variable).lower()
        if not normalized:
            return set()
        return {
            label for label in self.schema.labels() if label.lower().startswith(normalized)
        }

    # --- value tests -------------------------------------------------------

    def _bool_roots(self) -> List[Tuple[str, ast.BoolExpr]]:
        roots: List[Tuple[str, ast.BoolExpr]] = []
        for index, clause in enumerate(self.query.clauses):
            if isinstance(clause, ast.WhereClause):
                roots.append((f"clause[{index}].where", clause.expr))
            elif isinstance(clause, ast.WithClause):
                if clause.where is not None:
                    roots.append((f"clause[{index}].where", clause.where))
                for p_index, proj in enumerate(clause.projections):
                    roots.extend(self._case_conditions(f"clause[{index}].proj[{p_index}]", proj.expr))
            elif isinstance(clause, ast.ReturnClause):
                for p_index, proj in enumerate(clause.projections):
                    roots.extend(self._case_conditions(f"clause[{index}].proj[{p_index}]", proj.expr))
        return roots

    @staticmethod
    def _case_conditions(location: str, expr: ast.ValueExpr) -> List[Tuple[str, ast.BoolExpr]]:
        roots = []
        for node in cypher.walk_expr(expr):
            if isinstance(node, ast.CaseExpr):
                for w_index, (cond, _) in enumerate(node.whens):
                    roots.append((f"{location}.when[{w_index}]", cond))
        return roots

    def _typed_comparison(
        self, compare: ast.Compare
    ) -> Optional[Tuple[str, str, str, Optional[str], object]]:
        """Normalize to (variable, key, op, property type, literal value)."""
        prop, literal, op = None, None, compare.op
        if isinstance(compare.lhs, ast.PropertyAccess) and isinstance(compare.rhs, ast.Literal):
            prop, literal = compare.lhs, compare.rhs
        elif isinstance(compare.rhs, ast.PropertyAccess) and isinstance(compare.lhs, ast.Literal):
            prop, literal = compare.rhs, compare.lhs
            op = {"<": ">", "<=": ">=", ">": "<", ">=": "<="}.get(op, op)
        if prop is None:
            return None
        label = self.var_labels.get(prop.variable)
        prop_type = self.schema.prop_type(label, prop.key) if label else None
        return prop.variable, prop.key, op, prop_type, literal.value

    def _check_value_tests(self) -> None:
        for location, root in self._bool_roots():
            for node in cypher.walk_bool(root):
                if not isinstance(node, ast.Compare):
                    continue
                normalized = self._typed_comparison(node)
                if normalized is None:
                    continue
                variable, key, op, prop_type, value = normalized
                is_number = isinstance(value, (int, float)) and not isinstance(value, bool)
                ordered = op in ("<", "<=", ">", ">=")
                if ordered and prop_type == "String" and is_number:
                    self.diagnostics.append(
                        Diagnostic(
                            PerturbationKind.ILL_FORMED_VALUE_TEST,
                            location,
                            f"ordered comparison between string property {variable}.{key} "
                            f"and number {value!r}",
                            {"property": f"{variable}.{key}", "op": op, "value": value},
                        )
                    )
                    continue
                if ordered and prop_type in ("Integer", "Float") and isinstance(value, str):
                    self.diagnostics.append(
                        Diagnostic(
                            PerturbationKind.ILL_FORMED_VALUE_TEST,
                            location,
                            f"ordered comparison between numeric property {variable}.{key} "
                            f"and string {value!r}",
                            {"property": f"{variable}.{key}", "op": op, "value": value},
                        )
                    )
                    continue
                label = self.var_labels.get(variable)
                domain = value_domain(self.schema.name, label, key) if label else None
                if domain is None:
                    continue
                if isinstance(domain, NumericRange) and is_number and not domain.contains(value):
                    self.diagnostics.append(
                        Diagnostic(
                            PerturbationKind.ILLOGICAL_WHERE_VALUE,
                            location,
                            f"value {value!r} is outside the plausible range "
                            f"[{domain.low:g}, {domain.high:g}] for {label}.{key}",
                            {"property": f"{variable}.{key}", "op": op, "value": value},
                        )
                    )
                elif domain == NON_NUMERIC_TEXT and is_number and op in ("=", "<>"):
                    self.diagnostics.append(
                        Diagnostic(
                            PerturbationKind.ILLOGICAL_WHERE_VALUE,
                            location,
                            f"{label}.{key} holds text; comparing it with number {value!r} "
                            "cannot match anything",
                            {"property": f"{variable}.{key}", "op": op, "value": value},
                        )
                    )

    # --- contradictory conjunctions -----------------------------------------

    def _check_contradictions(self) -> None:
        for index, clause in enumerate(self.query.clauses):
            expr = None
            if isinstance(clause, ast.WhereClause):
                expr = clause.expr
            elif isinstance(clause, ast.WithClause) and clause.where is not None:
                expr = clause.where
            if expr is None:
                continue
            terms = expr.terms if isinstance(expr, ast.And) else (expr,)
            groups: Dict[Tuple[str, str], List[Tuple[str, object]]] = {}
            for term in terms:
                if not isinstance(term, ast.Compare):
                    continue
                normalized = self._typed_comparison(term)
                if normalized is None:
                    continue
                variable, key, op, prop_type, value = normalized
                if not isinstance(value, (int, float)) or isinstance(value, bool):
                    continue
                groups.setdefault((variable, key, prop_type), []).append((op, value))  # type: ignore[arg-type]
            for (variable, key, prop_type), constraints in groups.items():  # type: ignore[misc]
                if len(constraints) < 2:
                    continue
                integral = prop_type == "Integer"
                if not interval_satisfiable(constraints, integral=integral):
                    rendered = " AND ".join(f"{key} {op} {v!r}" for op, v in constraints)
                    self.diagnostics.append(
                        Diagnostic(
                            PerturbationKind.CONTRADICTORY_WHERE,
                            f"clause[{index}].where",
                            f"constraints on {variable}.{key} cannot all hold: {rendered}",
                            {
                                "property": f"{variable}.{key}",
                                "constraints": [[op, v] for op, v in constraints],
                            },
                        )
                    )


def interval_satisfiable(constraints: List[Tuple[str, float]], integral: bool) -> bool:
    """Whether a conjunction of single-property comparisons has a solution.

    Exact over the integers when ``integral``; otherwise over the reals.
    """
    if integral:
        low: Optional[int] = None
        high: Optional[int] = None
        eqs: List[float] = []
        neqs: Set[int] = set()
        for op, value in constraints:
            if op == ">":
                bound = math.floor(value) + 1
                low = bound if low is None else max(low, bound)
            elif op == ">=":
                bound = math.ceil(value)
                low = bound if low is None else max(low, bound)
            elif op == "<":
                bound = math.ceil(value) - 1
                high = bound if high is None else min(high, bound)
            elif op == "<=":
                bound = math.floor(value)
                high = bound if high is None else min(high, bound)
            elif op == "=":
                eqs.append(value)
            elif op == "<>":
                if float(value).is_integer():
                    neqs.add(int(value))
        if eqs:
            first = eqs[0]
            if any(e != first for e in eqs) or not float(first).is_integer():
                return False
            point = int(first)
            if point in neqs:
                return False
            return (low is None or point >= low) and (high is None or point <= high)
        if low is not None and high is not None:
            if low > high:
                return False
            excluded = sum(1 for n in neqs if low <= n <= high)
            return (high - low + 1) > excluded
        return True
    # Real-valued semantics: track strictness of each bound.
    low_value, low_strict = -math.inf, False
    high_value, high_strict = math.inf, False
    eqs = []
    neq_values: Set[float] = set()
    for op, value in constraints:
        if op == ">":
            if value > low_value or (value == low_value and not low_strict):
                low_value, low_strict = value, True
        elif op == ">=":
            if value > low_value:
                low_value, low_strict = value, False
        elif op == "<":
            if value < high_value or (value == high_value and not high_strict):
                high_value, high_strict = value, True
        elif op == "<=":
            if value < high_value:
                high_value, high_strict = value, False
        elif op == "=":
            eqs.append(value)
        elif op == "<>":
            neq_values.add(value)
    if eqs:
        first = eqs[0]
        if any(e != first for e in eqs) or first in neq_values:
            return False
        if first < low_value or (first == low_value and low_strict):
            return False
        if first > high_value or (first == high_value and high_strict):
            return False
        return True
    if low_value > high_value:
        return False
    if low_value == high_value:
        if low_strict or high_strict:
            return False
        return low_value not in neq_values
    return True
