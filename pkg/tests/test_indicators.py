import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import oracle_counts

from scientograph import (
    PropertyGraph,
    RawArticleRecord,
    annotate_graph,
    cosine_similarity,
    count_self_citations,
    international_collaboration,
    load_records,
    non_local_influence_quotient,
    other_citations_quotient,
    run_query,
    same_name,
)
from scientograph.graphstore import is_stub
from scientograph.indicators import journal_indicator_rows
from scientograph.ingest import AuthorEntry, CitingEntry


# -- cosine similarity ------------------------------------------------------------


def test_cosine_same_token_bag():
    assert cosine_similarity("John Smith", "smith,  JOHN") == 1.0


def test_cosine_partial_overlap():
    # derived by hand: dot=2, norms sqrt(3) and sqrt(2)
    expected = 2 / math.sqrt(6)
    assert cosine_similarity("John A Smith", "John Smith") == pytest.approx(
        expected, abs=1e-12
    )


def test_cosine_disjoint():
    assert cosine_similarity("Neurocomputing", "Applied Soft Computing") == 0.0


def test_cosine_tokenless_conventions():
    assert cosine_similarity("", "") == 1.0
    assert cosine_similarity("", "x") == 0.0
    assert cosine_similarity("!!!", "???") == 1.0  # both tokenless


names = st.text(
    alphabet=st.characters(whitelist_categories=("Lu", "Ll", "Nd"), max_codepoint=0x2FF),
    max_size=24,
)


@given(names, names)
def test_cosine_symmetric_and_bounded(a, b):
    s = cosine_similarity(a, b)
    assert s == cosine_similarity(b, a)
    assert 0.0 <= s <= 1.0 + 1e-12


@given(names)
def test_cosine_self_is_one(a):
    # the norm product is sqrt of a perfect square, so this is exact
    assert cosine_similarity(a, a) == 1.0


def test_cosine_token_order_invariant():
    assert cosine_similarity("a b c", "c a b") == 1.0
    assert cosine_similarity("a a b", "b a a") == 1.0


# -- same_name ----------------------------------------------------------------------


def test_same_name_initial_variant_at_half():
    # dot=1, norms sqrt(2)*sqrt(2): exactly 1/2
    assert cosine_similarity("G Ginde", "Gouri Ginde") == 0.5
    assert same_name("G Ginde", "Gouri Ginde", 0.5)
    assert not same_name("G Ginde", "Gouri Ginde", 0.6)


def test_same_name_identical_and_disjoint():
    assert same_name("Asha Rao", "Asha Rao", 1.0)
    assert not same_name("Asha Rao", "Tom Baker", 0.7)


def test_same_name_threshold_range():
    with pytest.raises(ValueError):
        same_name("a", "b", 0.0)
    with pytest.raises(ValueError):
        same_name("a", "b", 1.5)


# -- self-citation counting -----------------------------------------------------------


def _record(**kwargs):
    defaults = dict(title="T", journal_name="J")
    defaults.update(kwargs)
    return RawArticleRecord(**defaults)


def test_count_self_citations_author_level():
    record = _record(
        total_cites=10,
        authors=(AuthorEntry("P Kumar"), AuthorEntry("Q Singh")),
        citing_articles=(
            CitingEntry(author_names=("P Kumar",)),
            CitingEntry(author_names=("R Nobody",)),
            CitingEntry(author_names=("Q Singh", "R Nobody")),
        ),
    )
    counts = count_self_citations(record, 0.6)
    assert counts.author_self == 2
    assert counts.total == 10


def test_count_self_citations_journal_level():
    record = _record(
        total_cites=5,
        citing_articles=(
            CitingEntry(journal_name="J"),
            CitingEntry(journal_name="J"),
            CitingEntry(journal_name="J"),
        ),
    )
    assert count_self_citations(record).journal_self == 3


def test_count_self_citations_empty_list():
    counts = count_self_citations(_record(total_cites=4))
    assert counts.author_self == 0 and counts.journal_self == 0


def test_count_self_citations_clamped_to_total():
    record = _record(
        total_cites=1,
        authors=(AuthorEntry("A B"),),
        citing_articles=(
            CitingEntry(author_names=("A B",), journal_name="J"),
            CitingEntry(author_names=("A B",), journal_name="J"),
        ),
    )
    counts = count_self_citations(record)
    assert counts.author_self == 1 and counts.journal_self == 1


# -- quotients -------------------------------------------------------------------------


def test_quotients_examples():
    assert other_citations_quotient(0, 100) == 1.0
    assert other_citations_quotient(100, 100) == 0.0
    assert other_citations_quotient(25, 100) == 0.75
    assert non_local_influence_quotient(0, 50) == 1.0
    assert non_local_influence_quotient(50, 50) == 0.0
    assert non_local_influence_quotient(10, 40) == 0.75


def test_quotients_zero_total_convention():
    assert other_citations_quotient(0, 0) == 1.0


def test_quotients_reject_bad_input():
    with pytest.raises(ValueError):
        other_citations_quotient(5, 4)
    with pytest.raises(ValueError):
        other_citations_quotient(-1, 4)


@given(st.integers(0, 200), st.integers(0, 200))
def test_quotient_range_and_monotonicity(self_cites, extra):
    total = self_cites + extra
    q = other_citations_quotient(self_cites, total)
    assert 0.0 <= q <= 1.0
    if self_cites > 0:
        assert q <= other_citations_quotient(self_cites - 1, total)


# -- international collaboration ---------------------------------------------------------


def _journal_graph(records):
    g = PropertyGraph()
    load_records(g, records)
    return g


def test_international_collaboration_half():
    records = [
        _record(
            title="A1",
            authors=(
                AuthorEntry("X", institute="I1", country="India"),
                AuthorEntry("Y", institute="I2", country="USA"),
            ),
        ),
        _record(title="A2", authors=(AuthorEntry("Z", institute="I1", country="India"),)),
    ]
    g = _journal_graph(records)
    assert international_collaboration(g, g.find("Journal", "J")) == 0.5


def test_international_collaboration_all_domestic():
    records = [
        _record(title="A1", authors=(AuthorEntry("X", institute="I", country="C"),)),
        _record(title="A2", authors=(AuthorEntry("Y", institute="I", country="C"),)),
    ]
    g = _journal_graph(records)
    assert international_collaboration(g, g.find("Journal", "J")) == 0.0


def test_international_collaboration_unresolvable_is_domestic():
    records = [_record(title="A1", authors=(AuthorEntry("X"), AuthorEntry("Y")))]
    g = _journal_graph(records)
    assert international_collaboration(g, g.find("Journal", "J")) == 0.0


def test_international_collaboration_empty_journal():
    g = PropertyGraph()
    g.merge_node("Journal", "J")
    assert international_collaboration(g, g.find("Journal", "J")) == 0.0
    with pytest.raises(ValueError):
        international_collaboration(g, g.node(g.merge_node("Article", "A")))


def test_international_collaboration_monotone_under_article_addition():
    import random

    rng = random.Random(99)
    countries = ["India", "USA", "Japan", "Brazil", "Germany"]
    for trial in range(20):
        g = PropertyGraph()
        records = []
        for i in range(rng.randint(1, 6)):
            spans = rng.sample(countries, rng.randint(1, 3))
            records.append(
                _record(
                    title=f"base {trial}-{i}",
                    authors=tuple(
                        AuthorEntry(f"a{trial}-{i}-{j}", institute=f"i {c}", country=c)
                        for j, c in enumerate(spans)
                    ),
                )
            )
        load_records(g, records)
        journal = g.find("Journal", "J")
        before = international_collaboration(g, journal)

        domestic = _record(
            title=f"domestic {trial}",
            authors=(AuthorEntry(f"dom{trial}", institute="i India", country="India"),),
        )
        load_records(g, [domestic])
        after_domestic = international_collaboration(g, journal)
        assert after_domestic <= before

        multi = _record(
            title=f"multi {trial}",
            authors=(
                AuthorEntry(f"m1-{trial}", institute="i India", country="India"),
                AuthorEntry(f"m2-{trial}", institute="i USA", country="USA"),
            ),
        )
        load_records(g, [multi])
        assert international_collaboration(g, journal) >= after_domestic


# -- annotation ---------------------------------------------------------------------------


def test_annotate_journal_aggregation():
    # two articles with (self, total) = (1, 4) each: x1 = 1 - 2/8
    records = [
        _record(
            title="A1",
            total_cites=4,
            authors=(AuthorEntry("P Q"),),
            citing_articles=(CitingEntry(author_names=("P Q",)),),
        ),
        _record(
            title="A2",
            total_cites=4,
            authors=(AuthorEntry("R S"),),
            citing_articles=(CitingEntry(author_names=("R S",)),),
        ),
    ]
    g = _journal_graph(records)
    annotate_graph(g, records)
    journal = g.find("Journal", "J")
    assert journal.properties["x1"] == 0.75
    assert g.find("Article", "A1").properties["selfcites"] == 1


def test_annotate_zero_citations_journal():
    records = [_record(title="A1", total_cites=0)]
    g = _journal_graph(records)
    annotate_graph(g, records)
    journal = g.find("Journal", "J")
    assert journal.properties["x1"] == 1.0
    assert journal.properties["x4"] == 1.0


def test_annotate_snip_and_report(fixture_records):
    g = PropertyGraph()
    load_records(g, fixture_records)
    report = annotate_graph(g, fixture_records)
    assert report.journals_without_snip == []
    assert g.find("Journal", "Neurocomputing").properties["x3"] == 3.1

    records = [_record(title="A1")]
    g2 = _journal_graph(records)
    report2 = annotate_graph(g2, records)
    assert report2.journals_without_snip == ["J"]
    assert "x3" not in g2.find("Journal", "J").properties


def test_annotated_citation_query_covers_non_stub_articles(fixture_records):
    g = PropertyGraph()
    load_records(g, fixture_records)
    annotate_graph(g, fixture_records)
    table = run_query(g, "MATCH (n:Article) RETURN n.totalcites, n.selfcites")
    non_stub = sum(1 for n in g.nodes_by_label("Article") if not is_stub(n))
    complete_rows = [r for r in table.rows if r[0] is not None and r[1] is not None]
    assert len(complete_rows) == non_stub


def test_annotate_is_idempotent(fixture_records):
    g = PropertyGraph()
    load_records(g, fixture_records)
    annotate_graph(g, fixture_records)
    before = {n.id: dict(n.properties) for n in g.nodes()}
    annotate_graph(g, fixture_records)
    after = {n.id: dict(n.properties) for n in g.nodes()}
    assert before == after


# -- oracle comparison ---------------------------------------------------------------------


@pytest.mark.parametrize("threshold", [0.5, 0.6, 0.8])
def test_selfcites_match_allpairs_oracle_on_fixture(fixture_records, threshold):
    g = PropertyGraph()
    load_records(g, fixture_records)
    annotate_graph(g, fixture_records, threshold)
    for record in fixture_records:
        node = g.find("Article", record.title)
        expected_self, expected_jself = oracle_counts(record, threshold)
        assert node.properties["selfcites"] == expected_self, record.title
        assert node.properties["jselfcites"] == expected_jself, record.title


def test_indicator_rows_shape(fixture_records):
    g = PropertyGraph()
    load_records(g, fixture_records)
    annotate_graph(g, fixture_records)
    rows = journal_indicator_rows(g)
    assert [r["journal"] for r in rows] == sorted(r["journal"] for r in rows)
    assert len(rows) == 6
    for row in rows:
        assert row["total_cites"] >= row["self_cites"]
        assert 0.0 <= row["x1"] <= 1.0 and 0.0 <= row["x2"] <= 1.0
