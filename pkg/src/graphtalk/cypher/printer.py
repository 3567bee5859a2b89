"""Canonical single-line rendering of query syntax trees.

Canonical form: single spacing, uppercase keywords, double-quoted strings,
no trailing semicolon. ``parse_query(print_query(a))`` is structurally
equal to ``a``.
"""

from __future__ import annotations

from . import ast

_ARITH_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}


def print_literal(value: ast.LiteralValue) -> str:
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    return repr(value)


def print_value(expr: ast.ValueExpr) -> str:
    return _value(expr, 0)


def _value(expr: ast.ValueExpr, parent_precedence: int) -> str:
    if isinstance(expr, ast.Literal):
        return print_literal(expr.value)
    if isinstance(expr, ast.Variable):
        return expr.name
    if isinstance(expr, ast.PropertyAccess):
        return f"{expr.variable}.{expr.key}"
    if isinstance(expr, ast.Aggregate):
        inner = "*" if expr.arg is None else _value(expr.arg, 0)
        if expr.distinct:
            inner = f"DISTINCT {inner}"
        return f"{expr.kind}({inner})"
    if isinstance(expr, ast.FunctionCall):
        args = ", ".join(_value(a, 0) for a in expr.args)
        return f"{expr.name}({args})"
    if isinstance(expr, ast.CaseExpr):
        parts = ["CASE"]
        for cond, value in expr.whens:
            parts.append(f"WHEN {print_bool(cond)} THEN {_value(value, 0)}")
        if expr.default is not None:
            parts.append(f"ELSE {_value(expr.default, 0)}")
        parts.append("END")
        return " ".join(parts)
    if isinstance(expr, ast.Arithmetic):
        prec = _ARITH_PRECEDENCE[expr.op]
        lhs = _value(expr.lhs, prec)
        # Right operand needs parens at equal precedence: a - (b - c).
        rhs = _value(expr.rhs, prec + 1)
        text = f"{lhs} {expr.op} {rhs}"
        if prec < parent_precedence:
            return f"({text})"
        return text
    raise TypeError(f"not a value expression: {expr!r}")


# Boolean precedence: OR(1) < AND(2) < NOT(3) < atoms(4).


def print_bool(expr: ast.BoolExpr) -> str:
    return _bool(expr, 1)


def _bool(expr: ast.BoolExpr, parent_precedence: int) -> str:
    if isinstance(expr, ast.Or):
        text = " OR ".join(_bool(t, 2) for t in expr.terms)
        return f"({text})" if parent_precedence > 1 else text
    if isinstance(expr, ast.And):
        text = " AND ".join(_bool(t, 3) for t in expr.terms)
        return f"({text})" if parent_precedence > 2 else text
    if isinstance(expr, ast.Not):
        return f"NOT {_bool(expr.term, 4)}"
    if isinstance(expr, ast.Compare):
        return f"{_value(expr.lhs, 0)} {expr.op} {_value(expr.rhs, 0)}"
    if isinstance(expr, ast.Contains):
        return f"{_value(expr.lhs, 0)} CONTAINS {_value(expr.rhs, 0)}"
    if isinstance(expr, ast.IsNull):
        return f"{_value(expr.expr, 0)} IS NULL"
    if isinstance(expr, ast.IsNotNull):
        return f"{_value(expr.expr, 0)} IS NOT NULL"
    if isinstance(expr, ast.PatternPredicate):
        return print_pattern(expr.pattern)
    raise TypeError(f"not a boolean expression: {expr!r}")


def print_properties(properties: tuple[tuple[str, ast.Literal], ...]) -> str:
    pairs = ", ".join(f"{key}: {print_literal(lit.value)}" for key, lit in properties)
    return "{" + pairs + "}"


def print_node(node: ast.NodePattern) -> str:
    text = node.variable or ""
    if node.label is not None:
        text += f":{node.label}"
    if node.properties:
        sep = " " if text else ""
        text += sep + print_properties(node.properties)
    return f"({text})"


def print_rel(rel: ast.RelPattern) -> str:
    body = rel.variable or ""
    if rel.rel_type is not None:
        body += f":{rel.rel_type}"
    if rel.direction is ast.Direction.LEFT_TO_RIGHT:
        return f"-[{body}]->"
    if rel.direction is ast.Direction.RIGHT_TO_LEFT:
        return f"<-[{body}]-"
    return f"-[{body}]-"


def print_pattern(pattern: ast.Pattern) -> str:
    parts = []
    for element in pattern.elements:
        if isinstance(element, ast.NodePattern):
            parts.append(print_node(element))
        else:
            parts.append(print_rel(element))
    return "".join(parts)


def print_projection(proj: ast.Projection) -> str:
    text = print_value(proj.expr)
    if proj.alias is not None:
        text += f" AS {proj.alias}"
    return text


def print_query(query: ast.QueryAst) -> str:
    parts: list[str] = []
    for clause in query.clauses:
        if isinstance(clause, ast.MatchClause):
            keyword = "OPTIONAL MATCH" if clause.optional else "MATCH"
            patterns = ", ".join(print_pattern(p) for p in clause.patterns)
            parts.append(f"{keyword} {patterns}")
        elif isinstance(clause, ast.WhereClause):
            parts.append(f"WHERE {print_bool(clause.expr)}")
        elif isinstance(clause, ast.WithClause):
            projections = ", ".join(print_projection(p) for p in clause.projections)
            text = f"WITH {projections}"
            if clause.where is not None:
                text += f" WHERE {print_bool(clause.where)}"
            parts.append(text)
        elif isinstance(clause, ast.ReturnClause):
            projections = ", ".join(print_projection(p) for p in clause.projections)
            text = "RETURN "
            if clause.distinct:
                text += "DISTINCT "
            text += projections
            if clause.order_by:
                keys = ", ".join(
                    print_value(o.expr) + (" DESC" if o.descending else "") for o in clause.order_by
                )
                text += f" ORDER BY {keys}"
            if clause.limit is not None:
                text += f" LIMIT {clause.limit}"
            parts.append(text)
        else:
            raise TypeError(f"not a clause: {clause!r}")
    return " ".join(parts)
