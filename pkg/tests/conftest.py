from pathlib import Path

import pytest

from scientograph import PropertyGraph, annotate_graph, load_records, read_jsonl

FIXTURE = Path(__file__).parent / "data" / "scholar20.jsonl"

JOURNAL_YEAR_QUERY = (
    "MATCH (Journal)-[:PUBLISHED_IN]-(Article) "
    "WHERE Journal.name IN ['Applied Soft Computing', 'Neurocomputing', "
    "'Genetic Programming and Evolvable Machines'] "
    "RETURN Article.year, Journal.name"
)
CITATION_COUNTS_QUERY = "MATCH (n:Article) RETURN n.totalcites, n.selfcites"
AUTHOR_COUNTRY_QUERY = (
    "MATCH (Author)-[r:WORKS_FOR]->(Institute)-[s:IS_IN]->(Country) "
    "RETURN Author.name, Country.name"
)
REFERENCE_QUERIES = (JOURNAL_YEAR_QUERY, CITATION_COUNTS_QUERY, AUTHOR_COUNTRY_QUERY)


@pytest.fixture(scope="session")
def fixture_records():
    records, errors = read_jsonl(FIXTURE)
    assert not errors
    return records


@pytest.fixture()
def fixture_graph(fixture_records):
    graph = PropertyGraph()
    load_records(graph, fixture_records)
    annotate_graph(graph, fixture_records)
    return graph
