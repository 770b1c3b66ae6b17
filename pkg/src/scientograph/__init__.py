"""Embedded property-graph engine for scholarly-article analytics.

Pipeline: JSON-lines records are cleaned and validated (ingest), merged
into a deduplicated labeled property graph (graphstore), annotated with
citation indicators (indicators), scored with the Cobb-Douglas production
function (scoring), queried with a Cypher-subset language (querylang), and
exported as line/area/pie charts (export). The `scientograph` CLI wires it
all together over persisted graph snapshots.
"""

from .graphstore import (
    GraphError,
    LoadReport,
    Node,
    PropertyGraph,
    Relationship,
    SchemaError,
    load_records,
)
from .indicators import (
    AnnotationReport,
    CitationCounts,
    IndicatorVector,
    annotate_graph,
    cosine_similarity,
    count_self_citations,
    international_collaboration,
    non_local_influence_quotient,
    other_citations_quotient,
    same_name,
)
from .ingest import (
    AuthorEntry,
    CitingEntry,
    RawArticleRecord,
    RecordError,
    clean_text,
    parse_records,
    read_jsonl,
)
from .querylang import (
    QueryAst,
    QuerySyntaxError,
    QueryValidationError,
    ResultTable,
    execute_query,
    parse_query,
    render_query,
    run_query,
)
from .scoring import Elasticities, InternationalityScore, cobb_douglas, rank_journals

__version__ = "0.1.0"

__all__ = [
    "AnnotationReport",
    "AuthorEntry",
    "CitationCounts",
    "CitingEntry",
    "Elasticities",
    "GraphError",
    "IndicatorVector",
    "InternationalityScore",
    "LoadReport",
    "Node",
    "PropertyGraph",
    "QueryAst",
    "QuerySyntaxError",
    "QueryValidationError",
    "RawArticleRecord",
    "RecordError",
    "Relationship",
    "ResultTable",
    "SchemaError",
    "annotate_graph",
    "clean_text",
    "cobb_douglas",
    "cosine_similarity",
    "count_self_citations",
    "execute_query",
    "international_collaboration",
    "load_records",
    "non_local_influence_quotient",
    "other_citations_quotient",
    "parse_query",
    "parse_records",
    "rank_journals",
    "read_jsonl",
    "render_query",
    "run_query",
    "same_name",
]
