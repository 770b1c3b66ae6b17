"""In-memory labeled property graph with deduplicating merge semantics.

Nodes are unique per (label, name); relationships are unique per
(src, type, dst) and must respect the domain schema below. The graph is
the substrate for the query engine, the indicators, and the exporters.

Concurrency: single writer, multiple readers. Mutations need exclusive
access; reads may run concurrently between mutations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .ingest import RawArticleRecord

PropertyValue = str | int | float | list[str]

LABELS = ("Journal", "Article", "Author", "Institute", "Country", "Region")

# relationship type -> required (src label, dst label)
REL_SCHEMA: dict[str, tuple[str, str]] = {
    "PUBLISHED_IN": ("Article", "Journal"),
    "WROTE": ("Author", "Article"),
    "WORKS_FOR": ("Author", "Institute"),
    "IS_IN": ("Institute", "Country"),
    "PART_OF": ("Country", "Region"),
    "CITES": ("Article", "Article"),
}


class GraphError(ValueError):
    """Invalid operation against the graph (bad key, unknown id, bad value)."""


class SchemaError(GraphError):
    """Relationship endpoints violate the label schema."""


@dataclass
class Node:
    id: int
    label: str
    properties: dict[str, PropertyValue]

    @property
    def name(self) -> str:
        return self.properties["name"]  # type: ignore[return-value]


@dataclass
class Relationship:
    id: int
    src: int
    type: str
    dst: int
    properties: dict[str, PropertyValue] = field(default_factory=dict)


def _check_property_value(key: str, value: object) -> PropertyValue:
    if isinstance(value, bool):
        raise GraphError(f"property {key!r}: booleans are not supported")
    if isinstance(value, float) and not math.isfinite(value):
        raise GraphError(f"property {key!r}: non-finite number")
    if isinstance(value, (str, int, float)):
        return value
    if isinstance(value, list) and all(isinstance(x, str) for x in value):
        return list(value)
    raise GraphError(f"property {key!r}: unsupported value type {type(value).__name__}")


class PropertyGraph:
    """Labeled property graph with upsert-by-key node and edge creation."""

    def __init__(self) -> None:
        self._nodes: dict[int, Node] = {}
        self._rels: dict[int, Relationship] = {}
        self._index: dict[tuple[str, str], int] = {}
        self._rel_index: dict[tuple[int, str, int], int] = {}
        self._out: dict[int, list[int]] = {}
        self._in: dict[int, list[int]] = {}
        self._next_node_id = 1
        self._next_rel_id = 1

    # -- basic accessors ---------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def relationship_count(self) -> int:
        return len(self._rels)

    def node(self, node_id: int) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise GraphError(f"unknown node id {node_id}") from None

    def relationship(self, rel_id: int) -> Relationship:
        try:
            return self._rels[rel_id]
        except KeyError:
            raise GraphError(f"unknown relationship id {rel_id}") from None

    def find(self, label: str, name: str) -> Node | None:
        node_id = self._index.get((label, name))
        return self._nodes[node_id] if node_id is not None else None

    def nodes(self) -> Iterator[Node]:
        yield from self._nodes.values()

    def relationships(self) -> Iterator[Relationship]:
        yield from self._rels.values()

    def nodes_by_label(self, label: str) -> Iterator[Node]:
        for node in self._nodes.values():
            if node.label == label:
                yield node

    def neighbors(
        self,
        node_id: int,
        direction: str = "both",
        rel_type: str | None = None,
    ) -> Iterator[tuple[Relationship, Node]]:
        """Adjacent (relationship, other node) pairs.

        direction "out" follows stored direction, "in" reverses it, "both"
        is the union (a self-loop appears once, under "out").
        """
        self.node(node_id)
        if direction not in ("out", "in", "both"):
            raise GraphError(f"bad direction {direction!r}")
        if direction in ("out", "both"):
            for rel_id in self._out.get(node_id, ()):
                rel = self._rels[rel_id]
                if rel_type is None or rel.type == rel_type:
                    yield rel, self._nodes[rel.dst]
        if direction in ("in", "both"):
            for rel_id in self._in.get(node_id, ()):
                rel = self._rels[rel_id]
                if direction == "both" and rel.src == rel.dst:
                    continue
                if rel_type is None or rel.type == rel_type:
                    yield rel, self._nodes[rel.src]

    # -- mutation ----------------------------------------------------------

    def merge_node(
        self, label: str, name: str, properties: dict[str, PropertyValue] | None = None
    ) -> int:
        """Upsert a node by (label, name); returns its id.

        On an existing node, given properties are merged in (new keys added,
        existing keys overwritten). `name` cannot be overridden.
        """
        if label not in LABELS:
            raise GraphError(f"unknown label {label!r}")
        if not name:
            raise GraphError("node name must be nonempty")
        props = {}
        for key, value in (properties or {}).items():
            if key == "name":
                continue
            props[key] = _check_property_value(key, value)

        node_id = self._index.get((label, name))
        if node_id is None:
            node_id = self._next_node_id
            self._next_node_id += 1
            self._nodes[node_id] = Node(node_id, label, {"name": name, **props})
            self._index[(label, name)] = node_id
            self._out[node_id] = []
            self._in[node_id] = []
        else:
            self._nodes[node_id].properties.update(props)
        return node_id

    def merge_relationship(self, src_id: int, rel_type: str, dst_id: int) -> Relationship:
        """Upsert a relationship; a (src, type, dst) triple exists at most once."""
        src = self.node(src_id)
        dst = self.node(dst_id)
        schema = REL_SCHEMA.get(rel_type)
        if schema is None:
            raise GraphError(f"unknown relationship type {rel_type!r}")
        if (src.label, dst.label) != schema:
            raise SchemaError(
                f"{src.label}-{rel_type}->{dst.label} violates schema rule "
                f"{schema[0]}-{rel_type}->{schema[1]}"
            )
        key = (src_id, rel_type, dst_id)
        rel_id = self._rel_index.get(key)
        if rel_id is not None:
            return self._rels[rel_id]
        rel = Relationship(self._next_rel_id, src_id, rel_type, dst_id)
        self._next_rel_id += 1
        self._rels[rel.id] = rel
        self._rel_index[key] = rel.id
        self._out[src_id].append(rel.id)
        self._in[dst_id].append(rel.id)
        return rel

    # -- integrity ---------------------------------------------------------

    def validate(self) -> None:
        """Check referential integrity, index consistency, and schema closure."""
        for rel in self._rels.values():
            if rel.src not in self._nodes or rel.dst not in self._nodes:
                raise GraphError(f"relationship {rel.id} has a dangling endpoint")
            src, dst = self._nodes[rel.src], self._nodes[rel.dst]
            if (src.label, dst.label) != REL_SCHEMA[rel.type]:
                raise SchemaError(
                    f"stored relationship {rel.id} violates schema for {rel.type}"
                )
        if len(self._index) != len(self._nodes):
            raise GraphError("(label, name) index out of sync with node set")
        for node in self._nodes.values():
            if self._index.get((node.label, node.name)) != node.id:
                raise GraphError(f"index entry missing or wrong for node {node.id}")
        adj = sorted(
            rel_id for rel_ids in self._out.values() for rel_id in rel_ids
        )
        if adj != sorted(self._rels):
            raise GraphError("adjacency lists disagree with relationship set")

    # -- snapshots ---------------------------------------------------------

    def save_csv(self, nodes_path: str | Path, rels_path: str | Path) -> None:
        """Write the snapshot: nodes.csv (id,label,name,props) and rels.csv."""
        import csv

        with open(nodes_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["id", "label", "name", "props"])
            for node_id in sorted(self._nodes):
                node = self._nodes[node_id]
                extra = {k: v for k, v in node.properties.items() if k != "name"}
                writer.writerow(
                    [
                        node.id,
                        node.label,
                        node.name,
                        json.dumps(extra, sort_keys=True, ensure_ascii=False),
                    ]
                )
        with open(rels_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["src", "type", "dst"])
            for rel_id in sorted(self._rels):
                rel = self._rels[rel_id]
                writer.writerow([rel.src, rel.type, rel.dst])

    @classmethod
    def load_csv(cls, nodes_path: str | Path, rels_path: str | Path) -> "PropertyGraph":
        """Read a snapshot back; the result validates clean or raises GraphError."""
        import csv

        graph = cls()
        try:
            with open(nodes_path, "r", encoding="utf-8", newline="") as fh:
                reader = csv.reader(fh)
                header = next(reader, None)
                if header != ["id", "label", "name", "props"]:
                    raise GraphError(f"bad nodes.csv header: {header}")
                for row in reader:
                    if len(row) != 4:
                        raise GraphError(f"bad nodes.csv row: {row}")
                    node_id = int(row[0])
                    label, name = row[1], row[2]
                    if label not in LABELS or not name:
                        raise GraphError(f"bad nodes.csv row: {row}")
                    if node_id in graph._nodes or (label, name) in graph._index:
                        raise GraphError(f"duplicate node in snapshot: {row}")
                    props = {
                        k: _check_property_value(k, v)
                        for k, v in json.loads(row[3]).items()
                    }
                    graph._nodes[node_id] = Node(node_id, label, {"name": name, **props})
                    graph._index[(label, name)] = node_id
                    graph._out[node_id] = []
                    graph._in[node_id] = []
                    graph._next_node_id = max(graph._next_node_id, node_id + 1)
            with open(rels_path, "r", encoding="utf-8", newline="") as fh:
                reader = csv.reader(fh)
                header = next(reader, None)
                if header != ["src", "type", "dst"]:
                    raise GraphError(f"bad rels.csv header: {header}")
                for row in reader:
                    if len(row) != 3:
                        raise GraphError(f"bad rels.csv row: {row}")
                    graph.merge_relationship(int(row[0]), row[1], int(row[2]))
        except (ValueError, json.JSONDecodeError) as exc:
            if isinstance(exc, GraphError):
                raise
            raise GraphError(f"corrupt snapshot: {exc}") from exc
        graph.validate()
        return graph


@dataclass
class LoadReport:
    records_loaded: int = 0
    records_skipped: int = 0
    nodes_created: int = 0
    relationships_created: int = 0
    anomalies: list[str] = field(default_factory=list)


def load_records(graph: PropertyGraph, records: Iterable[RawArticleRecord]) -> LoadReport:
    """Merge validated records into the graph (fully idempotent).

    Per record: Article (+year/totalcites) PUBLISHED_IN Journal; per author
    the WROTE/WORKS_FOR/IS_IN/PART_OF chain as far as affiliation data goes;
    titled citing entries become stub Articles (stub=1) with CITES edges.
    A record without a journal name cannot satisfy the contract and is
    skipped, never fatally.
    """
    report = LoadReport()
    nodes_before = graph.node_count
    rels_before = graph.relationship_count

    for record in records:
        if not record.journal_name:
            report.records_skipped += 1
            report.anomalies.append(f"record {record.title!r}: no journal name, skipped")
            continue

        props: dict[str, PropertyValue] = {"totalcites": record.total_cites}
        if record.year is not None:
            props["year"] = record.year
        article_id = graph.merge_node("Article", record.title, props)
        # a full record supersedes any stub created from a citing title
        graph.node(article_id).properties.pop("stub", None)

        journal_id = graph.merge_node("Journal", record.journal_name)
        graph.merge_relationship(article_id, "PUBLISHED_IN", journal_id)

        for author in record.authors:
            author_id = graph.merge_node("Author", author.name)
            graph.merge_relationship(author_id, "WROTE", article_id)
            institute_id = None
            if author.institute:
                institute_id = graph.merge_node("Institute", author.institute)
                graph.merge_relationship(author_id, "WORKS_FOR", institute_id)
            country_id = None
            if author.country:
                country_id = graph.merge_node("Country", author.country)
                if institute_id is not None:
                    graph.merge_relationship(institute_id, "IS_IN", country_id)
            if author.region:
                region_id = graph.merge_node("Region", author.region)
                if country_id is not None:
                    graph.merge_relationship(country_id, "PART_OF", region_id)

        for citing in record.citing_articles:
            if not citing.title:
                continue
            existing = graph.find("Article", citing.title)
            if existing is None:
                citer_id = graph.merge_node("Article", citing.title, {"stub": 1})
            else:
                citer_id = existing.id
            graph.merge_relationship(citer_id, "CITES", article_id)

        report.records_loaded += 1

    report.nodes_created = graph.node_count - nodes_before
    report.relationships_created = graph.relationship_count - rels_before
    return report


def is_stub(node: Node) -> bool:
    return node.properties.get("stub") == 1
