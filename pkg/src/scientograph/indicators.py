"""String similarity, self-citation counting, and the scholastic indicators.

Fuzzy name identity (cosine similarity over token bags) is used only here,
for citation analysis; graph node identity stays exact. The four journal
indicators are:

    x1  other-citations quotient, 1 - self_citations / total_citations
    x2  international collaboration, the fraction of a journal's articles
        whose authors span at least two countries
    x3  SNIP, externally supplied on the input records, never computed
    x4  non-local influence quotient, 1 - journal_self_citations / total
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .graphstore import Node, PropertyGraph, is_stub
from .ingest import RawArticleRecord

DEFAULT_THRESHOLD = 0.6

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


def _tokens(text: str) -> list[str]:
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


def cosine_similarity(a: str, b: str) -> float:
    """Cosine of the token-count vectors of two strings, in [0, 1].

    Tokens are lowercased alphanumeric runs. A tokenless side scores 0.0
    against anything except another tokenless side (1.0). The norm product
    is computed as sqrt of an integer, so rational similarities like
    1/2 come out exact.
    """
    counts_a = Counter(_tokens(a))
    counts_b = Counter(_tokens(b))
    if not counts_a or not counts_b:
        return 1.0 if not counts_a and not counts_b else 0.0
    dot = sum(n * counts_b[t] for t, n in counts_a.items())
    norm_sq = sum(n * n for n in counts_a.values()) * sum(
        n * n for n in counts_b.values()
    )
    return dot / math.sqrt(norm_sq)


def same_name(a: str, b: str, threshold: float = DEFAULT_THRESHOLD) -> bool:
    """Fuzzy string identity: cosine_similarity(a, b) >= threshold."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    return cosine_similarity(a, b) >= threshold


@dataclass(frozen=True)
class CitationCounts:
    total: int
    author_self: int
    journal_self: int


def count_self_citations(
    article: RawArticleRecord, threshold: float = DEFAULT_THRESHOLD
) -> CitationCounts:
    """Author- and journal-level self-citation counts for one article.

    A citing entry is an author self-citation when it shares at least one
    author name with the article (under same_name), and a journal
    self-citation when its journal matches the article's. Counts are
    clamped to the total citation count, which may exceed the citing list
    (the list can be a sample).
    """
    author_self = 0
    journal_self = 0
    own_names = [a.name for a in article.authors]
    for citing in article.citing_articles:
        if any(
            same_name(cited_by, own, threshold)
            for cited_by in citing.author_names
            for own in own_names
        ):
            author_self += 1
        if (
            citing.journal_name
            and article.journal_name
            and same_name(citing.journal_name, article.journal_name, threshold)
        ):
            journal_self += 1
    total = article.total_cites
    return CitationCounts(
        total=total,
        author_self=min(author_self, total),
        journal_self=min(journal_self, total),
    )


def other_citations_quotient(self_cites: int, total: int) -> float:
    """x1: 1 - self/total; a journal with no citations scores 1.0."""
    if self_cites < 0 or total < 0:
        raise ValueError("citation counts must be nonnegative")
    if self_cites > total:
        raise ValueError(f"self-citations ({self_cites}) exceed total ({total})")
    if total == 0:
        return 1.0
    return 1.0 - self_cites / total


def non_local_influence_quotient(journal_self: int, total: int) -> float:
    """x4: same contract as x1, over journal-level self-citation counts."""
    return other_citations_quotient(journal_self, total)


def _journal_articles(graph: PropertyGraph, journal: Node) -> list[Node]:
    return [
        article
        for _, article in graph.neighbors(journal.id, "in", "PUBLISHED_IN")
        if not is_stub(article)
    ]


def article_country_ids(graph: PropertyGraph, article_id: int) -> set[int]:
    """Countries reachable from an article via WROTE^-1 -> WORKS_FOR -> IS_IN."""
    countries: set[int] = set()
    for _, author in graph.neighbors(article_id, "in", "WROTE"):
        for _, institute in graph.neighbors(author.id, "out", "WORKS_FOR"):
            for _, country in graph.neighbors(institute.id, "out", "IS_IN"):
                countries.add(country.id)
    return countries


def international_collaboration(graph: PropertyGraph, journal: Node) -> float:
    """x2: fraction of the journal's non-stub articles spanning >= 2 countries.

    Articles whose authors resolve to fewer than two countries (including
    no affiliation data at all) count as non-international. A journal with
    no articles scores 0.0.
    """
    if journal.label != "Journal":
        raise ValueError(f"expected a Journal node, got {journal.label}")
    articles = _journal_articles(graph, journal)
    if not articles:
        return 0.0
    international = sum(
        1 for a in articles if len(article_country_ids(graph, a.id)) >= 2
    )
    return international / len(articles)


@dataclass
class AnnotationReport:
    articles_annotated: int = 0
    journals_annotated: int = 0
    journals_without_snip: list[str] = field(default_factory=list)
    anomalies: list[str] = field(default_factory=list)


def annotate_graph(
    graph: PropertyGraph,
    records: Iterable[RawArticleRecord],
    threshold: float = DEFAULT_THRESHOLD,
) -> AnnotationReport:
    """Write the indicators into the graph as node properties.

    Per non-stub article: `selfcites` (author-level) and `jselfcites`
    (journal-level), clamped to `totalcites`. Per journal: `x1`, `x2`, `x4`
    plus the raw aggregates behind them, and `x3` when any of its records
    carries a SNIP. Records sharing a title overwrite in order (last wins),
    mirroring merge semantics, so re-annotation is idempotent.
    """
    report = AnnotationReport()
    journal_snip: dict[str, float] = {}
    annotated: set[int] = set()

    for record in records:
        node = graph.find("Article", record.title)
        if node is None or is_stub(node):
            report.anomalies.append(f"record {record.title!r}: no loaded article node")
            continue
        counts = count_self_citations(record, threshold)
        graph.merge_node(
            "Article",
            record.title,
            {
                "totalcites": counts.total,
                "selfcites": counts.author_self,
                "jselfcites": counts.journal_self,
            },
        )
        annotated.add(node.id)
        if record.snip is not None and record.journal_name not in journal_snip:
            journal_snip[record.journal_name] = record.snip
    report.articles_annotated = len(annotated)

    for journal in graph.nodes_by_label("Journal"):
        articles = _journal_articles(graph, journal)
        total = sum(int(a.properties.get("totalcites", 0)) for a in articles)
        self_sum = sum(int(a.properties.get("selfcites", 0)) for a in articles)
        jself_sum = sum(int(a.properties.get("jselfcites", 0)) for a in articles)
        props: dict[str, object] = {
            "x1": other_citations_quotient(self_sum, total),
            "x2": international_collaboration(graph, journal),
            "x4": non_local_influence_quotient(jself_sum, total),
            "totalcites": total,
            "selfcites": self_sum,
            "jselfcites": jself_sum,
            "articles": len(articles),
        }
        if journal.name in journal_snip:
            props["x3"] = journal_snip[journal.name]
        graph.merge_node("Journal", journal.name, props)  # type: ignore[arg-type]
        if "x3" not in journal.properties:
            report.journals_without_snip.append(journal.name)
        report.journals_annotated += 1

    report.journals_without_snip.sort()
    return report


@dataclass(frozen=True)
class IndicatorVector:
    x1: float
    x2: float
    x3: float
    x4: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.x2, self.x3, self.x4)


INDICATOR_CSV_HEADER = (
    "journal,x1,x2,x3,x4,total_cites,self_cites,journal_self_cites,articles"
)


def journal_indicator_rows(graph: PropertyGraph) -> list[dict[str, object]]:
    """Per-journal indicator rows (sorted by journal name) for CSV export."""
    rows = []
    for journal in sorted(graph.nodes_by_label("Journal"), key=lambda n: n.name):
        props = journal.properties
        rows.append(
            {
                "journal": journal.name,
                "x1": props.get("x1"),
                "x2": props.get("x2"),
                "x3": props.get("x3"),
                "x4": props.get("x4"),
                "total_cites": props.get("totalcites"),
                "self_cites": props.get("selfcites"),
                "journal_self_cites": props.get("jselfcites"),
                "articles": props.get("articles"),
            }
        )
    return rows
