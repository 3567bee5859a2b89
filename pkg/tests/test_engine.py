"""Graph loading and evaluator semantics on the fixtures."""

from __future__ import annotations

import pytest

from graphtalk.cypher import parse_query
from graphtalk.engine import PropertyGraph, execute, parse_graph, render_value
from graphtalk.errors import ExecutionError, GraphFormatError, SchemaViolation


def run(text, graph):
    return execute(parse_query(text), graph)


def test_movie_fixture_sizes(movie_graph):
    assert movie_graph.label_count("Person") >= 20
    assert movie_graph.label_count("Movie") >= 15
    assert movie_graph.label_count("Critic") >= 3
    assert movie_graph.label_count("City") >= 5


def test_empty_body_graph():
    graph = parse_graph("")
    assert graph.nodes == {} and graph.edges == {}


def test_edge_referencing_missing_node():
    with pytest.raises(GraphFormatError):
        parse_graph("node a :A {}\nedge e1 a -[:R]-> ghost\n", schema=None)


def test_schema_violation_detected():
    text = "schema: movie\nnode p :Person {}\nnode c :City {}\nedge e p -[:ACTED_IN]-> c\n"
    with pytest.raises(SchemaViolation):
        parse_graph(text)


def test_t2_returns_single_author(mardi_graph):
    table = run(
        "MATCH (s:SoftwarePackage {name:'graphclust'})-[:HAS_AUTHOR]->(a:Author) RETURN a.name",
        mardi_graph,
    )
    assert table.rows == [("Tabea Rebafka",)]


def test_t1_publication_lookup_is_empty(mardi_graph):
    table = run(
        'MATCH (p:Publication {name:"graphclust"})-[:HAS_AUTHOR]->(a:Author) RETURN a.name',
        mardi_graph,
    )
    assert table.rows == []


def test_count_on_empty_graph():
    assert run("MATCH (n) RETURN COUNT(n)", PropertyGraph()).rows == [(0,)]


def test_no_author_packages_match_enumeration(mardi_graph):
    # Independent enumeration: packages with no outgoing HAS_AUTHOR edge.
    with_authors = {
        edge.from_node
        for edge in mardi_graph.edges.values()
        if edge.rel_type == "HAS_AUTHOR"
    }
    expected = sorted(
        node.properties["name"]
        for node in mardi_graph.nodes.values()
        if "SoftwarePackage" in node.labels and node.id not in with_authors
    )
    table = run(
        "MATCH (p:SoftwarePackage) WHERE NOT (p)-[:HAS_AUTHOR]->(:Author) "
        "RETURN p.name ORDER BY p.name",
        mardi_graph,
    )
    assert [row[0] for row in table.rows] == expected


def test_optional_match_pads_with_null(mardi_graph):
    table = run(
        "MATCH (p:Publication) OPTIONAL MATCH (p)<-[:CITES]-(s:SoftwarePackage) "
        "RETURN p.title, s.name",
        mardi_graph,
    )
    uncited = [row for row in table.rows if row[1] is None]
    assert uncited  # some publication is never cited
    assert all(len(row) == 2 for row in table.rows)


def test_where_three_valued_logic_filters_nulls(movie_graph):
    # Critics have no release_year property: comparison yields null -> dropped.
    table = run("MATCH (c:Critic) WHERE c.release_year > 0 RETURN c.name", movie_graph)
    assert table.rows == []


def test_unknown_property_is_null_not_error(movie_graph):
    table = run("MATCH (c:Critic) RETURN c.release_year LIMIT 1", movie_graph)
    assert table.rows == [(None,)]


def test_contains_requires_strings(movie_graph):
    with pytest.raises(ExecutionError):
        run('MATCH (m:Movie) WHERE m.release_year CONTAINS "20" RETURN m', movie_graph)


def test_contains_on_strings(mardi_graph):
    table = run(
        'MATCH (p:Publication) WHERE p.title CONTAINS "Pareto" RETURN p.title', mardi_graph
    )
    assert len(table.rows) == 2


def test_integer_division_yields_float():
    graph = parse_graph("node a :A {x: 3}\n")
    table = run("MATCH (n:A) RETURN n.x / 2", graph)
    assert table.rows == [(1.5,)]
    table = run("MATCH (n:A) RETURN n.x / 3", graph)
    assert table.rows == [(1.0,)] and isinstance(table.rows[0][0], float)


def test_to_float_coercion():
    graph = parse_graph('node a :A {x: 3, s: "2.5", bad: "nope"}\n')
    table = run("MATCH (n:A) RETURN toFloat(n.x), toFloat(n.s), toFloat(n.bad)", graph)
    assert table.rows == [(3.0, 2.5, None)]


def test_case_evaluates_first_true_branch(movie_graph):
    table = run(
        'MATCH (m:Movie {title: "Dust Roads"}) RETURN CASE WHEN m.release_year < 2010 '
        'THEN "old" ELSE "new" END AS age',
        movie_graph,
    )
    assert table.rows == [("old",)]


def test_case_without_else_yields_null():
    graph = parse_graph("node a :A {x: 5}\n")
    table = run("MATCH (n:A) RETURN CASE WHEN n.x < 0 THEN 1 END AS v", graph)
    assert table.rows == [(None,)]


def test_distinct_dedupes_full_rows(movie_graph):
    plain = run("MATCH (p:Person)-[:ACTED_IN]->(m:Movie) RETURN m.title", movie_graph)
    distinct = run(
        "MATCH (p:Person)-[:ACTED_IN]->(m:Movie) RETURN DISTINCT m.title", movie_graph
    )
    assert len(distinct.rows) == len(set(plain.rows))


def test_order_by_with_nulls_last(mardi_graph):
    table = run(
        "MATCH (a:Author) OPTIONAL MATCH (a)<-[:HAS_AUTHOR]-(d:Dataset) "
        "WITH a, COUNT(d) AS n RETURN a.name, n ORDER BY n DESC",
        mardi_graph,
    )
    counts = [row[1] for row in table.rows]
    assert counts == sorted(counts, reverse=True)


def test_limit_is_prefix_of_ordered_result(mardi_graph):
    full = run(
        "MATCH (a:Author)<-[:HAS_AUTHOR]-(s:SoftwarePackage) "
        "RETURN a.name, COUNT(s) AS c ORDER BY c DESC",
        mardi_graph,
    )
    limited = run(
        "MATCH (a:Author)<-[:HAS_AUTHOR]-(s:SoftwarePackage) "
        "RETURN a.name, COUNT(s) AS c ORDER BY c DESC LIMIT 10",
        mardi_graph,
    )
    assert limited.rows == full.rows[:10]


def test_count_star_equals_edge_count(movie_graph):
    table = run("MATCH (a)-[r]->(b) RETURN COUNT(*)", movie_graph)
    assert table.rows == [(len(movie_graph.edges),)]


def test_match_monotone_under_edge_addition():
    text = "node a :A {x: 1}\nnode b :B {x: 2}\nedge e1 a -[:R]-> b\n"
    smaller = parse_graph(text)
    bigger = parse_graph(text + "edge e2 a -[:R]-> b\n")
    query = "MATCH (x:A)-[:R]->(y:B) RETURN x.x, y.x"
    fewer = run(query, smaller).rows
    more = run(query, bigger).rows
    assert len(more) >= len(fewer)
    assert set(fewer) <= set(more)


def test_aggregate_groups_by_non_aggregate_columns(movie_graph):
    table = run(
        "MATCH (p:Person)-[:ACTED_IN]->(m:Movie) RETURN p.name, COUNT(m) ORDER BY p.name",
        movie_graph,
    )
    alice = [row for row in table.rows if row[0] == "Alice"]
    assert alice == [("Alice", 3)]


def test_with_chain_joins_on_shared_variable(movie_graph):
    table = run(
        'MATCH (p:Person {name: "Alice"})-[:ACTED_IN]->(m:Movie) WITH p, m '
        "MATCH (d:Person)-[:DIRECTED]->(m) RETURN m.title, d.name ORDER BY m.title",
        movie_graph,
    )
    assert ("The Glass House", "Daniel Cruz") in table.rows


def test_unbound_variable_is_execution_error(movie_graph):
    with pytest.raises(ExecutionError):
        run("MATCH (p:Person) RETURN q.name", movie_graph)


def test_pattern_predicate_in_case_condition(hyena_graph):
    table = run(
        "MATCH (cub:Hyena)-[:HAS_FATHER]->(dad:Hyena) "
        "OPTIONAL MATCH (dad)-[:BIRTH_CLAN]->(clan:Clan)<-[:CURRENT_CLAN]-(dad) "
        "WITH COUNT(cub) AS totalCubs, COUNT(CASE WHEN dad.sex = 'male' AND "
        "clan IS NOT NULL AND NOT (dad)-[:CHANGED_CLAN]->() THEN 1 END) AS philopatricCubs "
        "RETURN toFloat(philopatricCubs) / totalCubs AS proportion",
        hyena_graph,
    )
    # 3 of the 5 cubs have a father whose birth and current clan coincide.
    assert table.rows == [(0.6,)]


def test_node_comparison_by_identity(hyena_graph):
    table = run(
        "MATCH (cub:Hyena)-[:HAS_FATHER]->(dad:Hyena) "
        "OPTIONAL MATCH (dad)-[:BIRTH_CLAN]->(bc:Clan) "
        "OPTIONAL MATCH (dad)-[:CURRENT_CLAN]->(cc:Clan) "
        "WITH COUNT(cub) AS totalCubs, "
        "SUM(CASE WHEN dad.sex = 'male' AND bc = cc THEN 1 ELSE 0 END) AS philopatCubs "
        "RETURN philopatCubs * 1.0 / totalCubs AS proportion",
        hyena_graph,
    )
    assert table.rows == [(0.6,)]


def test_render_value_formats_nodes(mardi_graph):
    table = run('MATCH (s:SoftwarePackage {name: "graphclust"}) RETURN s', mardi_graph)
    rendered = render_value(table.rows[0][0], mardi_graph)
    assert rendered.startswith("(:SoftwarePackage {")
    assert 'name: "graphclust"' in rendered


def test_rel_variable_binding(movie_graph):
    table = run("MATCH (p:Person)-[r:DIRECTED]->(m:Movie) RETURN COUNT(r)", movie_graph)
    directed = sum(1 for e in movie_graph.edges.values() if e.rel_type == "DIRECTED")
    assert table.rows == [(directed,)]


def test_collect_skips_nulls(mardi_graph):
    table = run(
        'MATCH (a:Author {name: "Elena Petrova"}) OPTIONAL MATCH (a)<-[:HAS_AUTHOR]-(s:SoftwarePackage) '
        "RETURN a.name, COLLECT(s.name) AS names",
        mardi_graph,
    )
    assert table.rows == [("Elena Petrova", [])]
