import random

import pytest

from scientograph import (
    PropertyGraph,
    QuerySyntaxError,
    QueryValidationError,
    execute_query,
    parse_query,
    render_query,
    run_query,
)
from scientograph.querylang import (
    EqPredicate,
    InPredicate,
    NodePattern,
    PathPattern,
    Projection,
    QueryAst,
    RelPattern,
    format_error_context,
)

from bruteforce import bruteforce_query, canon_rows, random_graph, random_query
from conftest import JOURNAL_YEAR_QUERY, CITATION_COUNTS_QUERY, AUTHOR_COUNTRY_QUERY


# -- parsing -------------------------------------------------------------------


def test_parse_journal_year_query():
    ast = parse_query(JOURNAL_YEAR_QUERY)
    assert len(ast.match_patterns) == 1
    pattern = ast.match_patterns[0]
    assert pattern.nodes == (NodePattern("Journal"), NodePattern("Article"))
    assert pattern.rels == (RelPattern(None, "PUBLISHED_IN", "undirected"),)
    assert isinstance(ast.where, InPredicate)
    assert len(ast.where.values) == 3
    assert ast.projections == (
        Projection("Article", "year"),
        Projection("Journal", "name"),
    )


def test_parse_citation_counts_query():
    ast = parse_query(CITATION_COUNTS_QUERY)
    assert ast.match_patterns == (
        PathPattern((NodePattern("n", "Article"),), ()),
    )
    assert ast.where is None
    assert ast.projections == (
        Projection("n", "totalcites"),
        Projection("n", "selfcites"),
    )


def test_parse_author_country_query():
    ast = parse_query(AUTHOR_COUNTRY_QUERY)
    pattern = ast.match_patterns[0]
    assert pattern.rels == (
        RelPattern("r", "WORKS_FOR", "right"),
        RelPattern("s", "IS_IN", "right"),
    )


def test_parse_query_with_mid_pattern_line_break():
    # patterns may wrap across lines, as in queries pasted from documents
    text = (
        "MATCH (Author)-[r:WORKS_FOR]->(Institute)-\n"
        "[s:IS_IN]->(Country) RETURN Author.name,\n"
        "Country.name"
    )
    assert parse_query(text) == parse_query(AUTHOR_COUNTRY_QUERY)


def test_parse_bare_identifier_is_variable_not_label():
    ast = parse_query("MATCH (Journal) RETURN Journal.name")
    node = ast.match_patterns[0].nodes[0]
    assert node.variable == "Journal" and node.label is None


def test_parse_directions():
    left = parse_query("MATCH (a)<-[:WROTE]-(b) RETURN a.name")
    assert left.match_patterns[0].rels[0].direction == "left"
    undirected = parse_query("MATCH (a)-[]-(b) RETURN a.name")
    assert undirected.match_patterns[0].rels[0].direction == "undirected"


def test_parse_case_insensitive_keywords_and_eq_literals():
    ast = parse_query("match (a) where a.year = 2014 and a.name = 'x' return a.name")
    assert isinstance(ast.where.left, EqPredicate)
    assert ast.where.left.literal == 2014
    assert ast.where.right.literal == "x"
    ast = parse_query("MATCH (a) WHERE a.z = -1.5 RETURN a.z")
    assert ast.where.literal == -1.5


def test_parse_string_escapes():
    ast = parse_query("MATCH (a) WHERE a.name = 'O''Brien' RETURN a.name")
    assert ast.where.literal == "O'Brien"


def test_syntax_error_dangling_relationship():
    text = "MATCH (a)-[:X]->"
    with pytest.raises(QuerySyntaxError) as exc:
        parse_query(text)
    err = exc.value
    assert err.position == len(text) + 1
    assert err.found == "end of input"
    assert "'('" in err.expected
    diag = format_error_context(text, err)
    assert "^" in diag


def test_syntax_error_positions_are_one_based():
    with pytest.raises(QuerySyntaxError) as exc:
        parse_query("RETURN x.y")
    assert exc.value.position == 1
    assert "MATCH" in exc.value.expected


def test_syntax_error_unterminated_string():
    with pytest.raises(QuerySyntaxError):
        parse_query("MATCH (a) WHERE a.name = 'oops RETURN a.name")


def test_validation_unbound_variable():
    with pytest.raises(QueryValidationError):
        parse_query("MATCH (a) RETURN b.name")
    with pytest.raises(QueryValidationError):
        parse_query("MATCH (a) WHERE b.name = 'x' RETURN a.name")


def test_validation_duplicate_rel_variable():
    with pytest.raises(QueryValidationError):
        parse_query("MATCH (a)-[r:WROTE]->(b)-[r:WROTE]->(c) RETURN a.name")
    with pytest.raises(QueryValidationError):
        parse_query("MATCH (a)-[a:WROTE]->(b) RETURN a.name")


# -- rendering round trip ---------------------------------------------------------


@pytest.mark.parametrize(
    "text",
    [
        JOURNAL_YEAR_QUERY,
        CITATION_COUNTS_QUERY,
        AUTHOR_COUNTRY_QUERY,
        "MATCH (a)-[:CITES]->(a) RETURN a.name",
        "MATCH (a:Article)-[x]-(), (b) WHERE a.year = 2014 AND b.name IN ['x'] "
        "RETURN a.year, b.name, x.kind",
        "MATCH (a) WHERE a.name = 'O''Brien' AND a.z = -2 RETURN a.name",
    ],
)
def test_render_parse_round_trip(text):
    ast = parse_query(text)
    assert parse_query(render_query(ast)) == ast


def test_render_round_trip_random_queries():
    rng = random.Random(7)
    for _ in range(100):
        graph = random_graph(rng, max_nodes=10, max_rels=12)
        ast = random_query(rng, graph)
        assert parse_query(render_query(ast)) == ast


# -- execution ---------------------------------------------------------------------


def _tiny_graph():
    g = PropertyGraph()
    j = g.merge_node("Journal", "J")
    a1 = g.merge_node("Article", "A1", {"year": 2014})
    a2 = g.merge_node("Article", "A2", {"year": 2015})
    g.merge_relationship(a1, "PUBLISHED_IN", j)
    g.merge_relationship(a2, "PUBLISHED_IN", j)
    return g


def test_execute_journal_year_query_on_tiny_fixture():
    # derived by brute-force enumeration over the two possible bindings
    g = _tiny_graph()
    table = run_query(
        g,
        "MATCH (Journal)-[:PUBLISHED_IN]-(Article) WHERE Journal.name IN ['J'] "
        "RETURN Article.year, Journal.name",
    )
    assert table.columns == ["Article.year", "Journal.name"]
    assert sorted(table.rows) == [(2014, "J"), (2015, "J")]


def test_execute_empty_graph_keeps_headers():
    table = run_query(PropertyGraph(), CITATION_COUNTS_QUERY)
    assert table.columns == ["n.totalcites", "n.selfcites"]
    assert table.rows == []


def test_execute_author_country_single_binding():
    g = PropertyGraph()
    author = g.merge_node("Author", "X")
    institute = g.merge_node("Institute", "I")
    country = g.merge_node("Country", "C")
    g.merge_relationship(author, "WORKS_FOR", institute)
    g.merge_relationship(institute, "IS_IN", country)
    table = run_query(g, AUTHOR_COUNTRY_QUERY)
    assert table.rows == [("X", "C")]


def test_execute_missing_property_projects_null():
    g = PropertyGraph()
    g.merge_node("Article", "A")
    table = run_query(g, "MATCH (n:Article) RETURN n.year, n.name")
    assert table.rows == [(None, "A")]


def test_execute_no_implicit_distinct():
    g = PropertyGraph()
    a = g.merge_node("Author", "W")
    t1 = g.merge_node("Article", "T1")
    t2 = g.merge_node("Article", "T2")
    g.merge_relationship(a, "WROTE", t1)
    g.merge_relationship(a, "WROTE", t2)
    table = run_query(g, "MATCH (x)-[:WROTE]->(y) RETURN x.name")
    assert sorted(table.rows) == [("W",), ("W",)]


def test_undirected_matches_union_of_directions():
    g = _tiny_graph()
    undirected = run_query(g, "MATCH (a)-[:PUBLISHED_IN]-(b) RETURN a.name, b.name")
    fwd = run_query(g, "MATCH (a)-[:PUBLISHED_IN]->(b) RETURN a.name, b.name")
    rev = run_query(g, "MATCH (a)<-[:PUBLISHED_IN]-(b) RETURN a.name, b.name")
    assert canon_rows(undirected.rows) == canon_rows(fwd.rows) + canon_rows(rev.rows)


def test_relationship_isomorphism_no_rel_reuse():
    # one WROTE edge cannot serve both hops of a two-hop pattern
    g = PropertyGraph()
    author = g.merge_node("Author", "A")
    article = g.merge_node("Article", "T")
    g.merge_relationship(author, "WROTE", article)
    table = run_query(g, "MATCH (x)-[:WROTE]-(y)-[:WROTE]-(z) RETURN x.name, z.name")
    assert table.rows == []


def test_self_loop_undirected_matches_once():
    g = PropertyGraph()
    a = g.merge_node("Article", "A")
    g.merge_relationship(a, "CITES", a)
    table = run_query(g, "MATCH (x)-[:CITES]-(y) RETURN x.name, y.name")
    assert table.rows == [("A", "A")]


def test_same_variable_both_ends_requires_self_loop():
    g = PropertyGraph()
    a = g.merge_node("Article", "A")
    b = g.merge_node("Article", "B")
    g.merge_relationship(a, "CITES", b)
    assert run_query(g, "MATCH (x)-[:CITES]->(x) RETURN x.name").rows == []
    g.merge_relationship(a, "CITES", a)
    assert run_query(g, "MATCH (x)-[:CITES]->(x) RETURN x.name").rows == [("A",)]


def test_execute_matches_bruteforce_on_random_graphs():
    rng = random.Random(42)
    for _ in range(40):
        graph = random_graph(rng, max_nodes=14, max_rels=20)
        for _ in range(3):
            ast = random_query(rng, graph)
            expected = canon_rows(bruteforce_query(graph, ast))
            actual = canon_rows(execute_query(graph, ast).rows)
            assert actual == expected, render_query(ast)


def test_relationship_variable_projects_null_properties():
    g = _tiny_graph()
    table = run_query(g, "MATCH (a)-[r:PUBLISHED_IN]->(b) RETURN r.weight, b.name")
    assert sorted(table.rows) == [(None, "J"), (None, "J")]


def test_eq_on_missing_property_never_matches():
    g = _tiny_graph()
    table = run_query(g, "MATCH (a:Article) WHERE a.nope = 1 RETURN a.name")
    assert table.rows == []


def test_in_predicate_against_non_string_property():
    g = _tiny_graph()
    table = run_query(g, "MATCH (a:Article) WHERE a.year IN ['2014'] RETURN a.name")
    assert table.rows == []  # int property never equals the string literal


def test_result_table_serialization():
    g = _tiny_graph()
    table = run_query(
        g, "MATCH (a:Article) WHERE a.name = 'A1' RETURN a.name, a.year, a.missing"
    )
    csv_text = table.to_csv_text()
    assert csv_text.splitlines()[0] == "a.name,a.year,a.missing"
    assert csv_text.splitlines()[1] == "A1,2014,"
    json_text = table.to_json_text()
    assert '"a.year": 2014' in json_text
    assert '"a.missing": null' in json_text
