"""Lexer, parser, printer, and syntax tree for the supported Cypher subset."""

from .ast import (
    Aggregate,
    And,
    Arithmetic,
    BoolExpr,
    CaseExpr,
    Clause,
    Compare,
    Contains,
    Direction,
    FunctionCall,
    IsNotNull,
    IsNull,
    Literal,
    MatchClause,
    NodePattern,
    Not,
    Or,
    OrderItem,
    Pattern,
    PatternPredicate,
    Projection,
    PropertyAccess,
    QueryAst,
    RelPattern,
    ReturnClause,
    ValueExpr,
    Variable,
    WhereClause,
    WithClause,
    contains_aggregate,
    hop_count,
    query_patterns,
    walk_bool,
    walk_expr,
    walk_values,
)
from .parser import parse_property_map, parse_query, unbound_variables
from .printer import (
    print_bool,
    print_literal,
    print_pattern,
    print_projection,
    print_query,
    print_value,
)

__all__ = [
    "Aggregate",
    "And",
    "Arithmetic",
    "BoolExpr",
    "CaseExpr",
    "Clause",
    "Compare",
    "Contains",
    "Direction",
    "FunctionCall",
    "IsNotNull",
    "IsNull",
    "Literal",
    "MatchClause",
    "NodePattern",
    "Not",
    "Or",
    "OrderItem",
    "Pattern",
    "PatternPredicate",
    "Projection",
    "PropertyAccess",
    "QueryAst",
    "RelPattern",
    "ReturnClause",
    "ValueExpr",
    "Variable",
    "WhereClause",
    "WithClause",
    "contains_aggregate",
    "hop_count",
    "query_patterns",
    "walk_bool",
    "walk_expr",
    "walk_values",
    "parse_property_map",
    "parse_query",
    "unbound_variables",
    "print_bool",
    "print_literal",
    "print_pattern",
    "print_projection",
    "print_query",
    "print_value",
]
