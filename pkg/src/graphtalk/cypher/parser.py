"""Recursive-descent parser producing the typed syntax tree."""

from __future__ import annotations

from typing import Optional, Tuple

from ..errors import CypherSyntaxError, UnsupportedFeature
from . import ast
from .lexer import Token, tokenize

_UNSUPPORTED_CLAUSES = {
    "CALL": "procedure calls",
    "CREATE": "write clauses",
    "MERGE": "write clauses",
    "DELETE": "write clauses",
    "DETACH": "write clauses",
    "SET": "write clauses",
    "REMOVE": "write clauses",
    "UNWIND": "UNWIND",
    "UNION": "UNION",
    "FOREACH": "FOREACH",
    "SKIP": "SKIP",
}

_COMPARE_OPS = {"EQ": "=", "NEQ": "<>", "LT": "<", "LE": "<=", "GT": ">", "GE": ">="}

_AGGREGATE_KINDS = {"COUNT", "COLLECT", "SUM"}

# Scalar functions accepted by the subset, keyed by lowercased name.
_FUNCTIONS = {"tofloat": "toFloat"}


class _Backtrack(Exception):
    """Internal: abandon a speculative parse branch."""

# Expression nesting bound: keeps adversarial inputs from exhausting the
# interpreter stack; far beyond any query the system generates.
_MAX_DEPTH = 100


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0

    # --- token plumbing ---

    def peek(self, ahead: int = 0) -> Token:
        i = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[i]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at(self, *kinds: str) -> bool:
        return self.peek().kind in kinds

    def accept(self, kind: str) -> Optional[Token]:
        if self.at(kind):
            return self.next()
        return None

    def expect(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise self.error(f"expected {what}", tok)
        return self.next()

    def error(self, message: str, tok: Optional[Token] = None) -> CypherSyntaxError:
        tok = tok or self.peek()
        shown = tok.lexeme if tok.kind != "EOF" else "end of input"
        return CypherSyntaxError(f"{message}, got {shown!r}", tok.line, tok.column, tok.lexeme)

    def unsupported(self, feature: str, tok: Optional[Token] = None) -> UnsupportedFeature:
        tok = tok or self.peek()
        return UnsupportedFeature(f"unsupported Cypher feature: {feature}", tok.line, tok.column, tok.lexeme)

    # --- entry point ---

    def parse_query(self) -> ast.QueryAst:
        clauses: list[ast.Clause] = []
        while True:
            tok = self.peek()
            if tok.kind in ("MATCH", "OPTIONAL"):
                clauses.append(self._parse_match())
            elif tok.kind == "WHERE":
                if not clauses or not isinstance(clauses[-1], ast.MatchClause):
                    raise self.error("WHERE must follow a MATCH clause", tok)
                self.next()
                clauses.append(ast.WhereClause(self._parse_bool()))
            elif tok.kind == "WITH":
                self.next()
                clauses.append(self._parse_with())
            elif tok.kind == "RETURN":
                self.next()
                clauses.append(self._parse_return())
                break
            elif tok.kind in _UNSUPPORTED_CLAUSES:
                raise self.unsupported(_UNSUPPORTED_CLAUSES[tok.kind], tok)
            elif tok.kind == "EOF":
                raise self.error("expected RETURN before end of query", tok)
            else:
                raise self.error("expected a clause keyword", tok)
        self.accept("SEMI")
        tok = self.peek()
        if tok.kind != "EOF":
            if tok.kind in _UNSUPPORTED_CLAUSES:
                raise self.unsupported(_UNSUPPORTED_CLAUSES[tok.kind], tok)
            raise self.error("unexpected input after RETURN clause", tok)
        span = (0, self.tokens[-1].offset)
        return ast.QueryAst(tuple(clauses), source_span=span)

    # --- clauses ---

    def _parse_match(self) -> ast.MatchClause:
        optional = bool(self.accept("OPTIONAL"))
        self.expect("MATCH", "MATCH")
        patterns = [self._parse_pattern()]
        while self.accept("COMMA"):
            patterns.append(self._parse_pattern())
        return ast.MatchClause(tuple(patterns), optional=optional)

    def _parse_with(self) -> ast.WithClause:
        projections = self._parse_projections()
        for proj in projections:
            if proj.alias is None and not isinstance(proj.expr, ast.Variable):
                raise self.error("WITH projection requires an AS alias unless it is a bare variable")
        if self.at("ORDER"):
            raise self.unsupported("ORDER BY inside WITH")
        where = None
        if self.accept("WHERE"):
            where = self._parse_bool()
        return ast.WithClause(tuple(projections), where=where)

    def _parse_return(self) -> ast.ReturnClause:
        distinct = bool(self.accept("DISTINCT"))
        projections = self._parse_projections()
        order_by: list[ast.OrderItem] = []
        if self.accept("ORDER"):
            self.expect("BY", "BY after ORDER")
            while True:
                expr = self._parse_value()
                descending = False
                if self.accept("DESC") or self.accept("DESCENDING"):
                    descending = True
                elif self.accept("ASC") or self.accept("ASCENDING"):
                    descending = False
                order_by.append(ast.OrderItem(expr, descending))
                if not self.accept("COMMA"):
                    break
        limit = None
        if self.accept("LIMIT"):
            tok = self.expect("INT", "a non-negative integer after LIMIT")
            limit = int(tok.value)  # type: ignore[arg-type]
        return ast.ReturnClause(tuple(projections), distinct=distinct, order_by=tuple(order_by), limit=limit)

    def _parse_projections(self) -> list[ast.Projection]:
        projections = [self._parse_projection()]
        while self.accept("COMMA"):
            projections.append(self._parse_projection())
        return projections

    def _parse_projection(self) -> ast.Projection:
        expr = self._parse_value()
        alias = None
        if self.accept("AS"):
            alias = self._expect_name("an alias after AS")
        return ast.Projection(expr, alias)

    # --- patterns ---

    def _parse_pattern(self) -> ast.Pattern:
        elements: list[object] = [self._parse_node()]
        while self.at("MINUS", "LARROW"):
            rel, node = self._parse_hop()
            elements.append(rel)
            elements.append(node)
        return ast.Pattern(tuple(elements))  # type: ignore[arg-type]

    def _parse_node(self) -> ast.NodePattern:
        self.expect("LPAREN", "'(' to open a node pattern")
        variable = None
        if self.at("IDENT"):
            variable = self.next().lexeme
        label = None
        if self.accept("COLON"):
            label = self._expect_name("a node label after ':'")
        properties: Tuple[Tuple[str, ast.Literal], ...] = ()
        if self.at("LBRACE"):
            properties = self.parse_property_map()
        self.expect("RPAREN", "')' to close the node pattern")
        return ast.NodePattern(variable, label, properties)

    def _parse_hop(self) -> Tuple[ast.RelPattern, ast.NodePattern]:
        if self.accept("LARROW"):
            variable, rel_type = self._parse_rel_body()
            self.expect("MINUS", "'-' after the relationship bracket")
            node = self._parse_node()
            return ast.RelPattern(variable, rel_type, ast.Direction.RIGHT_TO_LEFT), node
        self.expect("MINUS", "'-' to open a relationship")
        variable, rel_type = self._parse_rel_body()
        if self.accept("RARROW"):
            direction = ast.Direction.LEFT_TO_RIGHT
        else:
            self.expect("MINUS", "'->' or '-' after the relationship bracket")
            direction = ast.Direction.UNDIRECTED
        node = self._parse_node()
        return ast.RelPattern(variable, rel_type, direction), node

    def _parse_rel_body(self) -> Tuple[Optional[str], Optional[str]]:
        self.expect("LBRACKET", "'[' to open the relationship")
        variable = None
        if self.at("IDENT"):
            variable = self.next().lexeme
        rel_type = None
        if self.accept("COLON"):
            rel_type = self._expect_name("a relationship type after ':'")
        if self.at("STAR"):
            raise self.unsupported("variable-length relationships")
        if self.at("LBRACE"):
            raise self.unsupported("relationship property maps")
        self.expect("RBRACKET", "']' to close the relationship")
        return variable, rel_type

    def parse_property_map(self) -> Tuple[Tuple[str, ast.Literal], ...]:
        self.expect("LBRACE", "'{' to open a property map")
        pairs: list[Tuple[str, ast.Literal]] = []
        if not self.at("RBRACE"):
            while True:
                key = self._expect_name("a property name")
                self.expect("COLON", "':' after the property name")
                pairs.append((key, self._parse_literal()))
                if not self.accept("COMMA"):
                    break
        self.expect("RBRACE", "'}' to close the property map")
        return tuple(pairs)

    def _parse_literal(self) -> ast.Literal:
        tok = self.peek()
        if tok.kind in ("STRING", "INT", "FLOAT"):
            self.next()
            return ast.Literal(tok.value)  # type: ignore[arg-type]
        if tok.kind == "MINUS":
            self.next()
            num = self.peek()
            if num.kind not in ("INT", "FLOAT"):
                raise self.error("expected a number after '-'", num)
            self.next()
            return ast.Literal(-num.value)  # type: ignore[operator]
        if tok.kind == "TRUE":
            self.next()
            return ast.Literal(True)
        if tok.kind == "FALSE":
            self.next()
            return ast.Literal(False)
        if tok.kind == "NULL":
            self.next()
            return ast.Literal(None)
        raise self.error("expected a literal value", tok)

    def _expect_name(self, what: str) -> str:
        # Property keys and aliases may collide with keywords; accept both.
        tok = self.peek()
        if tok.kind == "IDENT" or tok.kind in ("COUNT", "COLLECT", "SUM", "END", "CONTAINS"):
            self.next()
            return tok.lexeme
        raise self.error(f"expected {what}", tok)

    # --- boolean expressions ---

    def _parse_bool(self) -> ast.BoolExpr:
        self.depth += 1
        if self.depth > _MAX_DEPTH:
            raise self.error("expression nesting too deep")
        try:
            terms = [self._parse_bool_and()]
            while self.accept("OR"):
                terms.append(self._parse_bool_and())
            return terms[0] if len(terms) == 1 else ast.Or(tuple(terms))
        finally:
            self.depth -= 1

    def _parse_bool_and(self) -> ast.BoolExpr:
        terms = [self._parse_bool_not()]
        while self.accept("AND"):
            terms.append(self._parse_bool_not())
        return terms[0] if len(terms) == 1 else ast.And(tuple(terms))

    def _parse_bool_not(self) -> ast.BoolExpr:
        if self.accept("NOT"):
            return ast.Not(self._parse_bool_not())
        return self._parse_bool_atom()

    def _parse_bool_atom(self) -> ast.BoolExpr:
        if self.at("LPAREN"):
            # A '(' may open a pattern predicate, a parenthesized boolean
            # expression, or a parenthesized value; try in that order.
            start = self.pos
            try:
                pattern = self._parse_pattern()
                if len(pattern.rels()) == 0:
                    raise _Backtrack
                return ast.PatternPredicate(pattern)
            except (CypherSyntaxError, _Backtrack):
                self.pos = start
            try:
                self.expect("LPAREN", "'('")
                inner = self._parse_bool()
                self.expect("RPAREN", "')'")
                return inner
            except CypherSyntaxError:
                self.pos = start
        return self._parse_comparison()

    def _parse_comparison(self) -> ast.BoolExpr:
        lhs = self._parse_value()
        tok = self.peek()
        if tok.kind in _COMPARE_OPS:
            self.next()
            return ast.Compare(_COMPARE_OPS[tok.kind], lhs, self._parse_value())
        if tok.kind == "CONTAINS":
            self.next()
            return ast.Contains(lhs, self._parse_value())
        if tok.kind == "IS":
            self.next()
            negated = bool(self.accept("NOT"))
            self.expect("NULL", "NULL after IS")
            return ast.IsNotNull(lhs) if negated else ast.IsNull(lhs)
        raise self.error("expected a comparison operator, CONTAINS, or IS [NOT] NULL", tok)

    # --- value expressions ---

    def _parse_value(self) -> ast.ValueExpr:
        self.depth += 1
        if self.depth > _MAX_DEPTH:
            raise self.error("expression nesting too deep")
        try:
            expr = self._parse_term()
            while self.at("PLUS", "MINUS"):
                op = "+" if self.next().kind == "PLUS" else "-"
                expr = ast.Arithmetic(op, expr, self._parse_term())
            return expr
        finally:
            self.depth -= 1

    def _parse_term(self) -> ast.ValueExpr:
        expr = self._parse_unary()
        while self.at("STAR", "SLASH"):
            op = "*" if self.next().kind == "STAR" else "/"
            expr = ast.Arithmetic(op, expr, self._parse_unary())
        return expr

    def _parse_unary(self) -> ast.ValueExpr:
        if self.at("MINUS"):
            tok = self.peek()
            if self.peek(1).kind in ("INT", "FLOAT"):
                return self._parse_literal()
            raise self.error("unary '-' is only supported on numeric literals", tok)
        return self._parse_atom()

    def _parse_atom(self) -> ast.ValueExpr:
        tok = self.peek()
        if tok.kind in ("STRING", "INT", "FLOAT", "TRUE", "FALSE", "NULL"):
            return self._parse_literal()
        if tok.kind in _AGGREGATE_KINDS:
            return self._parse_aggregate()
        if tok.kind == "CASE":
            return self._parse_case()
        if tok.kind == "IDENT":
            return self._parse_name_expr()
        if tok.kind == "LPAREN":
            self.next()
            inner = self._parse_value()
            self.expect("RPAREN", "')' to close the expression")
            return inner
        raise self.error("expected an expression", tok)

    def _parse_aggregate(self) -> ast.Aggregate:
        kind = self.next().kind
        self.expect("LPAREN", f"'(' after {kind}")
        distinct = bool(self.accept("DISTINCT"))
        if self.at("STAR"):
            if kind != "COUNT":
                raise self.error(f"'*' is only valid inside COUNT, not {kind}")
            self.next()
            arg = None
        else:
            arg = self._parse_value()
        self.expect("RPAREN", f"')' to close {kind}(...)")
        agg = ast.Aggregate(kind, arg, distinct)
        if arg is not None and any(isinstance(e, ast.Aggregate) for e in ast.walk_expr(arg)):
            raise self.unsupported("nested aggregate expressions")
        return agg

    def _parse_case(self) -> ast.CaseExpr:
        self.expect("CASE", "CASE")
        if not self.at("WHEN"):
            raise self.unsupported("simple CASE with a head expression")
        whens: list[Tuple[ast.BoolExpr, ast.ValueExpr]] = []
        while self.accept("WHEN"):
            cond = self._parse_bool()
            self.expect("THEN", "THEN after the WHEN condition")
            whens.append((cond, self._parse_value()))
        default = None
        if self.accept("ELSE"):
            default = self._parse_value()
        self.expect("END", "END to close the CASE expression")
        return ast.CaseExpr(tuple(whens), default)

    def _parse_name_expr(self) -> ast.ValueExpr:
        name_tok = self.next()
        name = name_tok.lexeme
        if self.at("LPAREN"):
            canonical = _FUNCTIONS.get(name.lower())
            if canonical is None:
                raise self.unsupported(f"function {name}", name_tok)
            self.next()
            args = [self._parse_value()]
            while self.accept("COMMA"):
                args.append(self._parse_value())
            self.expect("RPAREN", f"')' to close {name}(...)")
            return ast.FunctionCall(canonical, tuple(args))
        if self.accept("DOT"):
            key = self._expect_name("a property name after '.'")
            if self.at("DOT"):
                raise self.unsupported("qualified names (nested '.' access)", name_tok)
            if self.at("LPAREN"):
                raise self.unsupported(f"procedure or namespaced function {name}.{key}", name_tok)
            return ast.PropertyAccess(name, key)
        return ast.Variable(name)


def parse_query(text: str) -> ast.QueryAst:
    """Parse ``text`` into a query syntax tree.

    Raises CypherSyntaxError with a 1-based position for malformed input and
    UnsupportedFeature for valid Cypher outside the supported subset.
    """
    return Parser(tokenize(text)).parse_query()


def parse_property_map(text: str) -> Tuple[Tuple[str, ast.Literal], ...]:
    """Parse a standalone ``{key: literal, ...}`` map (fixture/schema files)."""
    parser = Parser(tokenize(text))
    pairs = parser.parse_property_map()
    parser.expect("EOF", "end of property map")
    return pairs


def unbound_variables(ast_query: ast.QueryAst) -> list[str]:
    """Variables referenced in expressions but never bound by a pattern or WITH.

    Returned in first-reference order. A query with unbound variables still
    parses; the validator and executor reject it.
    """
    unbound: list[str] = []
    seen: set[str] = set()

    def note(name: str, bound: set[str]) -> None:
        if name not in bound and name not in seen:
            seen.add(name)
            unbound.append(name)

    def check_expr(root: ast.Expr, bound: set[str]) -> None:
        for node in ast.walk_expr(root):
            if isinstance(node, ast.Variable):
                note(node.name, bound)
            elif isinstance(node, ast.PropertyAccess):
                note(node.variable, bound)
            elif isinstance(node, ast.PatternPredicate):
                for pat_node in node.pattern.nodes():
                    # Pattern predicates may introduce anonymous nodes but a
                    # named node must already be bound.
                    if pat_node.variable is not None:
                        note(pat_node.variable, bound)

    bound: set[str] = set()
    for clause in ast_query.clauses:
        if isinstance(clause, ast.MatchClause):
            for pattern in clause.patterns:
                for element in pattern.elements:
                    if element.variable is not None:
                        bound.add(element.variable)
        elif isinstance(clause, ast.WhereClause):
            check_expr(clause.expr, bound)
        elif isinstance(clause, ast.WithClause):
            for proj in clause.projections:
                check_expr(proj.expr, bound)
            new_bound = set()
            for proj in clause.projections:
                if proj.alias is not None:
                    new_bound.add(proj.alias)
                elif isinstance(proj.expr, ast.Variable):
                    new_bound.add(proj.expr.name)
            if clause.where is not None:
                check_expr(clause.where, new_bound)
            bound = new_bound
        elif isinstance(clause, ast.ReturnClause):
            for proj in clause.projections:
                check_expr(proj.expr, bound)
            aliases = {p.alias for p in clause.projections if p.alias is not None}
            for item in clause.order_by:
                check_expr(item.expr, bound | aliases)
    return unbound
