"""Command-line pipeline: ingest -> query / indicators / score / chart / stats.

A workspace directory holds the graph snapshot (nodes.csv + rels.csv) and a
config.cfg written at ingest time. Exit codes: 0 ok, 1 partial success
(some records rejected but the rest loaded), 2 environment or usage
failure, 3 query syntax/validation error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from .export import (
    DEFAULT_HEIGHT,
    DEFAULT_WIDTH,
    ChartError,
    area_total_vs_self,
    line_publications_per_year,
    pie_publications_per_country,
    render_text,
)
from .graphstore import GraphError, PropertyGraph, REL_SCHEMA, LABELS, load_records
from .indicators import (
    DEFAULT_THRESHOLD,
    INDICATOR_CSV_HEADER,
    annotate_graph,
    journal_indicator_rows,
)
from .ingest import read_jsonl
from .querylang import (
    QuerySyntaxError,
    QueryValidationError,
    execute_query,
    format_error_context,
    parse_query,
)
from .scoring import Elasticities, rank_journals

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_ENV = 2
EXIT_QUERY = 3

WORKSPACE_ENV = "SCIENTO_WORKSPACE"
CONFIG_KEYS = ("threshold", "A", "alpha", "width", "height")


@dataclass
class WorkspaceConfig:
    workspace: Path
    threshold: float = DEFAULT_THRESHOLD
    A: float = 1.0
    alpha: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    width: int = DEFAULT_WIDTH
    height: int = DEFAULT_HEIGHT

    @property
    def nodes_path(self) -> Path:
        return self.workspace / "nodes.csv"

    @property
    def rels_path(self) -> Path:
        return self.workspace / "rels.csv"

    @property
    def config_path(self) -> Path:
        return self.workspace / "config.cfg"

    def elasticities(self) -> Elasticities:
        return Elasticities(self.A, self.alpha)


def _parse_alpha(text: str) -> tuple[float, float, float, float]:
    parts = [p for p in text.strip().strip("[]").split(",") if p.strip()]
    if len(parts) != 4:
        raise ValueError(f"alpha needs 4 comma-separated values, got {len(parts)}")
    a1, a2, a3, a4 = (float(p) for p in parts)
    return (a1, a2, a3, a4)


def parse_config_file(path: Path) -> dict[str, object]:
    """Flat `key = value` file; '#' starts a comment, unknown keys reject."""
    settings: dict[str, object] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        if key == "alpha":
            settings[key] = _parse_alpha(value)
        elif key in ("width", "height"):
            settings[key] = int(value)
        else:
            settings[key] = float(value)
    return settings


def write_config_file(path: Path, cfg: WorkspaceConfig) -> None:
    alpha = ", ".join(repr(a) for a in cfg.alpha)
    path.write_text(
        f"threshold = {cfg.threshold!r}\n"
        f"A = {cfg.A!r}\n"
        f"alpha = [{alpha}]\n"
        f"width = {cfg.width}\n"
        f"height = {cfg.height}\n",
        encoding="utf-8",
    )


def resolve_config(args: argparse.Namespace) -> WorkspaceConfig:
    """Defaults, then workspace config.cfg, then --config file, then flags."""
    workspace = Path(
        args.workspace or os.environ.get(WORKSPACE_ENV) or "workspace"
    )
    cfg = WorkspaceConfig(workspace=workspace)

    settings: dict[str, object] = {}
    if cfg.config_path.is_file():
        settings.update(parse_config_file(cfg.config_path))
    if args.config:
        settings.update(parse_config_file(Path(args.config)))
    cfg = replace(cfg, **settings)  # type: ignore[arg-type]

    if args.threshold is not None:
        cfg = replace(cfg, threshold=args.threshold)
    if getattr(args, "A", None) is not None:
        cfg = replace(cfg, A=args.A)
    if getattr(args, "alpha", None) is not None:
        cfg = replace(cfg, alpha=_parse_alpha(args.alpha))
    if getattr(args, "width", None) is not None:
        cfg = replace(cfg, width=args.width)
    if getattr(args, "height", None) is not None:
        cfg = replace(cfg, height=args.height)

    if not 0.0 < cfg.threshold <= 1.0:
        raise ValueError(f"threshold must be in (0, 1], got {cfg.threshold}")
    return cfg


def _load_snapshot(cfg: WorkspaceConfig) -> PropertyGraph:
    if not (cfg.nodes_path.is_file() and cfg.rels_path.is_file()):
        raise FileNotFoundError(
            f"no snapshot in workspace {cfg.workspace} (run ingest first)"
        )
    return PropertyGraph.load_csv(cfg.nodes_path, cfg.rels_path)


def _write_output(text: str, out: str | None) -> None:
    if out:
        Path(out).write_bytes(text.encode("utf-8"))
    else:
        sys.stdout.write(text)


# -- subcommands ----------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace, cfg: WorkspaceConfig) -> int:
    cfg.workspace.mkdir(parents=True, exist_ok=True)
    lock_path = cfg.workspace / ".lock"
    try:
        lock_fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        print(f"error: workspace {cfg.workspace} is locked", file=sys.stderr)
        return EXIT_ENV
    try:
        records = []
        error_count = 0
        for input_path in args.inputs:
            file_records, errors = read_jsonl(input_path)
            for err in errors:
                print(f"line {err.line}: {err.cause}", file=sys.stderr)
            records.extend(file_records)
            error_count += len(errors)

        if cfg.nodes_path.is_file() and cfg.rels_path.is_file():
            graph = PropertyGraph.load_csv(cfg.nodes_path, cfg.rels_path)
        else:
            graph = PropertyGraph()

        report = load_records(graph, records)
        annotation = annotate_graph(graph, records, cfg.threshold)
        graph.validate()
        graph.save_csv(cfg.nodes_path, cfg.rels_path)
        write_config_file(cfg.config_path, cfg)

        print(f"{len(records)} records, {error_count} errors")
        print(
            f"loaded: {report.records_loaded} records, "
            f"skipped: {report.records_skipped}"
        )
        print(
            f"nodes: {graph.node_count} (+{report.nodes_created}), "
            f"relationships: {graph.relationship_count} "
            f"(+{report.relationships_created})"
        )
        print(
            f"annotated: {annotation.journals_annotated} journals, "
            f"{annotation.articles_annotated} articles"
        )
        for anomaly in report.anomalies + annotation.anomalies:
            print(f"warning: {anomaly}", file=sys.stderr)
        if annotation.journals_without_snip:
            names = ", ".join(annotation.journals_without_snip)
            print(f"warning: journals without snip: {names}", file=sys.stderr)
        return EXIT_PARTIAL if error_count else EXIT_OK
    finally:
        os.close(lock_fd)
        lock_path.unlink(missing_ok=True)


def cmd_query(args: argparse.Namespace, cfg: WorkspaceConfig) -> int:
    graph = _load_snapshot(cfg)
    text = args.query if args.query is not None else sys.stdin.read()
    try:
        ast = parse_query(text)
    except QuerySyntaxError as err:
        print(format_error_context(text, err), file=sys.stderr)
        return EXIT_QUERY
    except QueryValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_QUERY
    table = execute_query(graph, ast)
    if args.format == "json":
        _write_output(table.to_json_text(), args.out)
    else:
        _write_output(table.to_csv_text(), args.out)
    return EXIT_OK


def _csv_value(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv_text(header: list[str], rows: list[list[object]]) -> str:
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_value(v) for v in row])
    return buf.getvalue()


def cmd_indicators(args: argparse.Namespace, cfg: WorkspaceConfig) -> int:
    graph = _load_snapshot(cfg)
    keys = INDICATOR_CSV_HEADER.split(",")
    rows = [[row[key] for key in keys] for row in journal_indicator_rows(graph)]
    _write_output(_csv_text(keys, rows), args.out)
    return EXIT_OK


def cmd_score(args: argparse.Namespace, cfg: WorkspaceConfig) -> int:
    graph = _load_snapshot(cfg)
    scores, excluded = rank_journals(graph, cfg.elasticities())
    for name in excluded:
        print(f"excluded (missing indicators): {name}", file=sys.stderr)
    rows = [
        [rank, s.journal, s.y, s.inputs.x1, s.inputs.x2, s.inputs.x3, s.inputs.x4]
        for rank, s in enumerate(scores, start=1)
    ]
    _write_output(_csv_text(["rank", "journal", "y", "x1", "x2", "x3", "x4"], rows), args.out)
    return EXIT_OK


def cmd_chart(args: argparse.Namespace, cfg: WorkspaceConfig) -> int:
    graph = _load_snapshot(cfg)
    if args.kind == "line":
        if not args.journals:
            print("error: --kind line needs --journals", file=sys.stderr)
            return EXIT_ENV
        names = [n.strip() for n in args.journals.split(",") if n.strip()]
        spec = line_publications_per_year(graph, names)
    elif args.kind == "area":
        spec = area_total_vs_self(graph)
    else:
        spec = pie_publications_per_country(graph, args.count_mode)
    text = render_text(spec, args.format, cfg.width, cfg.height)
    _write_output(text, args.out)
    return EXIT_OK


def cmd_stats(args: argparse.Namespace, cfg: WorkspaceConfig) -> int:
    graph = _load_snapshot(cfg)
    print(f"nodes: {graph.node_count}")
    for label in LABELS:
        count = sum(1 for _ in graph.nodes_by_label(label))
        print(f"  {label}: {count}")
    print(f"relationships: {graph.relationship_count}")
    by_type = {t: 0 for t in REL_SCHEMA}
    for rel in graph.relationships():
        by_type[rel.type] += 1
    for rel_type in REL_SCHEMA:
        print(f"  {rel_type}: {by_type[rel_type]}")
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--workspace",
        "-w",
        help=f"workspace directory (default: ${WORKSPACE_ENV} or ./workspace)",
    )
    common.add_argument("--config", help="config file (flat key = value)")
    common.add_argument(
        "--threshold", type=float, help="name-match similarity threshold in (0, 1]"
    )

    parser = argparse.ArgumentParser(
        prog="scientograph",
        description="Scholarly-article property graph: ingest, query, score, chart.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="load .jsonl article records")
    p.add_argument("inputs", nargs="+", help="input .jsonl files")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("query", parents=[common], help="run a MATCH query")
    p.add_argument("--query", "-q", help="query text (default: read stdin)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("indicators", parents=[common], help="per-journal indicator CSV")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_indicators)

    p = sub.add_parser("score", parents=[common], help="rank journals by Cobb-Douglas score")
    p.add_argument("--A", type=float, help="scale factor (default 1.0)")
    p.add_argument("--alpha", help="four elasticities, e.g. '0.25,0.25,0.25,0.25'")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("chart", parents=[common], help="export a chart")
    p.add_argument("--kind", choices=("line", "area", "pie"), required=True)
    p.add_argument("--journals", help="comma-separated journal names (line charts)")
    p.add_argument("--format", choices=("csv", "json", "svg"), default="svg")
    p.add_argument("--count-mode", choices=("articles", "authors"), default="articles")
    p.add_argument("--width", type=int, help=f"SVG width (default {DEFAULT_WIDTH})")
    p.add_argument("--height", type=int, help=f"SVG height (default {DEFAULT_HEIGHT})")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_chart)

    p = sub.add_parser("stats", parents=[common], help="node/relationship counts")
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING, format="warning: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return args.func(args, cfg)
    except (OSError, GraphError, ChartError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ENV


if __name__ == "__main__":
    sys.exit(main())
