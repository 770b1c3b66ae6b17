"""Chart construction (line / area / pie) and CSV / JSON / SVG rendering.

Charts are plain data (ChartSpec); rendering is deterministic so identical
specs always produce byte-identical files, which makes golden-file tests
possible. SVG output is self-contained: inline presentation attributes,
no scripts, no external resources.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

from .graphstore import PropertyGraph, is_stub
from .querylang import escape_string, run_query

log = logging.getLogger(__name__)

DEFAULT_WIDTH = 800
DEFAULT_HEIGHT = 600

_PALETTE = (
    "#4e79a7",
    "#f28e2b",
    "#e15759",
    "#76b7b2",
    "#59a14f",
    "#edc948",
    "#b07aa1",
    "#ff9da7",
    "#9c755f",
    "#bab0ac",
)


class ChartError(ValueError):
    """Chart cannot be built or rendered from the given data."""


@dataclass
class Series:
    label: str
    points: list[tuple[str | int | float, float]]


@dataclass
class ChartSpec:
    kind: str  # "line" | "area" | "pie"
    title: str
    series: list[Series]


def validate_chart(spec: ChartSpec) -> None:
    if spec.kind not in ("line", "area", "pie"):
        raise ChartError(f"unknown chart kind {spec.kind!r}")
    if spec.kind == "pie":
        if len(spec.series) != 1:
            raise ChartError("a pie chart needs exactly one series")
        ys = [y for _, y in spec.series[0].points]
        if any(y < 0 for y in ys):
            raise ChartError("pie slice values must be nonnegative")
        if not sum(ys) > 0:
            raise ChartError("empty pie: slice values sum to zero")
    else:
        for series in spec.series:
            xs = [x for x, _ in series.points]
            if len(xs) != len(set(xs)):
                raise ChartError(f"series {series.label!r} repeats an x value")


# -- chart builders ------------------------------------------------------------


def line_publications_per_year(graph: PropertyGraph, journal_names: list[str]) -> ChartSpec:
    """Per-journal publication counts by year, via the journal/article query.

    One series per requested journal, in the given order; a name with no
    Journal node yields an empty series (logged). Rows without a year are
    dropped.
    """
    if not journal_names:
        raise ChartError("nothing to plot: no journal names given")
    in_list = ", ".join(escape_string(name) for name in journal_names)
    table = run_query(
        graph,
        "MATCH (Journal)-[:PUBLISHED_IN]-(Article) "
        f"WHERE Journal.name IN [{in_list}] "
        "RETURN Article.year, Journal.name",
    )
    counts: dict[str, dict[int, int]] = {name: {} for name in journal_names}
    for year, name in table.rows:
        if year is None or not isinstance(name, str):
            continue
        per_year = counts.get(name)
        if per_year is not None and isinstance(year, int):
            per_year[year] = per_year.get(year, 0) + 1
    series = []
    for name in journal_names:
        if graph.find("Journal", name) is None:
            log.warning("line chart: journal %r not in graph, empty series", name)
        points = [(year, float(n)) for year, n in sorted(counts[name].items())]
        series.append(Series(name, points))
    return ChartSpec("line", "Publications per year", series)


def area_total_vs_self(graph: PropertyGraph) -> ChartSpec:
    """Total vs author-level self citations per annotated article.

    Articles sort by descending totalcites, ties by name; non-stub articles
    missing `selfcites` (not annotated) are skipped and counted in a log
    line. Stubs never appear.
    """
    articles = []
    skipped = 0
    for node in graph.nodes_by_label("Article"):
        if is_stub(node):
            continue
        selfcites = node.properties.get("selfcites")
        if not isinstance(selfcites, int):
            skipped += 1
            continue
        total = node.properties.get("totalcites", 0)
        articles.append((node.name, int(total), int(selfcites)))
    if skipped:
        log.warning("area chart: skipped %d articles missing selfcites", skipped)
    articles.sort(key=lambda item: (-item[1], item[0]))
    total_series = Series("total", [(name, float(total)) for name, total, _ in articles])
    self_series = Series("self", [(name, float(self_)) for name, _, self_ in articles])
    return ChartSpec("area", "Total vs self citations", [total_series, self_series])


def pie_publications_per_country(
    graph: PropertyGraph, count_mode: str = "articles"
) -> ChartSpec:
    """Publication counts per country from the affiliation traversal.

    Runs the Author -> Institute -> Country traversal, then counts distinct
    (article, country) pairs per country (an article with three authors in
    one country counts once there; a two-country article counts in both).
    count_mode "authors" counts distinct (author, country) pairs instead.
    """
    if count_mode not in ("articles", "authors"):
        raise ChartError(f"unknown count mode {count_mode!r}")
    table = run_query(
        graph,
        "MATCH (Author)-[r:WORKS_FOR]->(Institute)-[s:IS_IN]->(Country) "
        "RETURN Author.name, Country.name",
    )
    pairs: set[tuple[int, int]] = set()
    country_names: dict[int, str] = {}
    for author_name, country_name in table.rows:
        author = graph.find("Author", str(author_name))
        country = graph.find("Country", str(country_name))
        if author is None or country is None:
            continue
        country_names[country.id] = country.name
        if count_mode == "authors":
            pairs.add((author.id, country.id))
        else:
            for _, article in graph.neighbors(author.id, "out", "WROTE"):
                pairs.add((article.id, country.id))
    if not pairs:
        raise ChartError("empty pie: no affiliation data in graph")
    counts: dict[str, int] = {}
    for _, country_id in pairs:
        name = country_names[country_id]
        counts[name] = counts.get(name, 0) + 1
    points = [
        (name, float(n))
        for name, n in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    ]
    title = f"Publications per country ({count_mode})"
    return ChartSpec("pie", title, [Series(count_mode, points)])


# -- rendering -----------------------------------------------------------------


def chart_csv_text(spec: ChartSpec) -> str:
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["series", "x", "y"])
    for series in spec.series:
        for x, y in series.points:
            writer.writerow([series.label, x, _num(y)])
    return buf.getvalue()


def chart_json_text(spec: ChartSpec) -> str:
    payload = {
        "kind": spec.kind,
        "title": spec.title,
        "series": [
            {"label": s.label, "points": [{"x": x, "y": y} for x, y in s.points]}
            for s in spec.series
        ],
    }
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


def _num(value: float) -> str:
    """Stable compact numeric formatting for SVG/CSV output."""
    if isinstance(value, int):
        return str(value)
    if float(value).is_integer():
        return str(int(value))
    text = f"{value:.4f}".rstrip("0").rstrip(".")
    return text if text not in ("", "-") else "0"


def _esc(text: str) -> str:
    return (
        str(text)
        .replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def pie_geometry(spec: ChartSpec) -> list[tuple[str, float, float, float, float]]:
    """(label, value, fraction, start_degrees, sweep_degrees) per slice.

    Fractions are exact value/total quotients; sweeps are fraction * 360,
    slices laid clockwise from 12 o'clock.
    """
    validate_chart(spec)
    points = spec.series[0].points
    total = sum(y for _, y in points)
    out = []
    start = 0.0
    for label, value in points:
        fraction = value / total
        sweep = fraction * 360.0
        out.append((str(label), value, fraction, start, sweep))
        start += sweep
    return out


def _polar(cx: float, cy: float, r: float, angle_deg: float) -> tuple[float, float]:
    rad = math.radians(angle_deg - 90.0)  # 0 degrees at 12 o'clock
    return cx + r * math.cos(rad), cy + r * math.sin(rad)


def _svg_header(width: int, height: int, title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
        f'<text x="{_num(width / 2)}" y="24" text-anchor="middle" font-size="16" '
        f'fill="#333333">{_esc(title)}</text>',
    ]


def _svg_legend(parts: list[str], labels: list[str], x: float, y: float) -> None:
    for i, label in enumerate(labels):
        color = _PALETTE[i % len(_PALETTE)]
        ly = y + 18 * i
        parts.append(
            f'<rect x="{_num(x)}" y="{_num(ly)}" width="12" height="12" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{_num(x + 16)}" y="{_num(ly + 10)}" font-size="11" '
            f'fill="#333333">{_esc(label)}</text>'
        )


def _axis_frame(
    parts: list[str],
    x0: float,
    y0: float,
    x1: float,
    y1: float,
    y_max: float,
) -> None:
    """Axis lines plus five horizontal gridlines with value labels."""
    for i in range(6):
        value = y_max * i / 5
        y = y1 - (y1 - y0) * i / 5
        parts.append(
            f'<line x1="{_num(x0)}" y1="{_num(y)}" x2="{_num(x1)}" y2="{_num(y)}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_num(x0 - 6)}" y="{_num(y + 4)}" text-anchor="end" '
            f'font-size="10" fill="#666666">{_num(value)}</text>'
        )
    parts.append(
        f'<line x1="{_num(x0)}" y1="{_num(y0)}" x2="{_num(x0)}" y2="{_num(y1)}" '
        f'stroke="#333333" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{_num(x0)}" y1="{_num(y1)}" x2="{_num(x1)}" y2="{_num(y1)}" '
        f'stroke="#333333" stroke-width="1"/>'
    )


def _xy_chart_svg(spec: ChartSpec, width: int, height: int) -> str:
    x_values: list[str | int | float] = []
    seen = set()
    for series in spec.series:
        for x, _ in series.points:
            if x not in seen:
                seen.add(x)
                x_values.append(x)
    numeric = all(isinstance(x, (int, float)) for x in x_values)
    if numeric:
        x_values.sort()

    # categorical labels render rotated and need extra room below the axis
    margin_left, margin_right, margin_top = 60, 160, 40
    margin_bottom = 50 if numeric else 110
    x0, x1 = margin_left, width - margin_right
    y0, y1 = margin_top, height - margin_bottom

    y_max = max((y for s in spec.series for _, y in s.points), default=0.0)
    y_max = y_max * 1.05 if y_max > 0 else 1.0

    def sx(x: str | int | float) -> float:
        if numeric and len(x_values) > 1:
            lo, hi = float(x_values[0]), float(x_values[-1])
            if hi > lo:
                return x0 + (x1 - x0) * (float(x) - lo) / (hi - lo)
        if len(x_values) > 1:
            return x0 + (x1 - x0) * x_values.index(x) / (len(x_values) - 1)
        return (x0 + x1) / 2

    def sy(y: float) -> float:
        return y1 - (y1 - y0) * (y / y_max)

    parts = _svg_header(width, height, spec.title)
    _axis_frame(parts, x0, y0, x1, y1, y_max)

    max_ticks = 12
    step = max(1, math.ceil(len(x_values) / max_ticks))
    for x in x_values[::step]:
        label = str(x)
        if len(label) > 18:
            label = label[:16] + ".."
        if numeric:
            parts.append(
                f'<text x="{_num(sx(x))}" y="{_num(y1 + 16)}" text-anchor="middle" '
                f'font-size="10" fill="#666666">{_esc(label)}</text>'
            )
        else:
            px, py = sx(x), y1 + 12
            parts.append(
                f'<text x="{_num(px)}" y="{_num(py)}" text-anchor="end" font-size="10" '
                f'fill="#666666" transform="rotate(-35, {_num(px)}, {_num(py)})">'
                f"{_esc(label)}</text>"
            )

    for i, series in enumerate(spec.series):
        if not series.points:
            continue
        color = _PALETTE[i % len(_PALETTE)]
        coords = [(sx(x), sy(y)) for x, y in series.points]
        if spec.kind == "area":
            path = " ".join(f"{_num(px)},{_num(py)}" for px, py in coords)
            baseline = f"{_num(coords[-1][0])},{_num(y1)} {_num(coords[0][0])},{_num(y1)}"
            parts.append(
                f'<polygon points="{path} {baseline}" fill="{color}" '
                f'fill-opacity="0.45" stroke="{color}" stroke-width="1"/>'
            )
        else:
            path = " ".join(f"{_num(px)},{_num(py)}" for px, py in coords)
            parts.append(
                f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="2"/>'
            )
            for px, py in coords:
                parts.append(
                    f'<circle cx="{_num(px)}" cy="{_num(py)}" r="3" fill="{color}"/>'
                )
    _svg_legend(parts, [s.label for s in spec.series], x1 + 16, y0)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _pie_svg(spec: ChartSpec, width: int, height: int) -> str:
    cx, cy = width * 0.38, height * 0.55
    radius = min(width, height) * 0.33
    parts = _svg_header(width, height, spec.title)
    geometry = pie_geometry(spec)
    labels = []
    for i, (label, value, fraction, start, sweep) in enumerate(geometry):
        labels.append(f"{label}: {_num(value)} ({_num(fraction * 100)}%)")
        color = _PALETTE[i % len(_PALETTE)]
        if sweep <= 0:
            continue
        if sweep >= 360.0 - 1e-9:
            # a single arc with coincident endpoints renders as nothing;
            # draw the full disc as two half-circle arcs in one path
            top = _polar(cx, cy, radius, 0)
            bottom = _polar(cx, cy, radius, 180)
            parts.append(
                f'<path d="M {_num(top[0])} {_num(top[1])} '
                f"A {_num(radius)} {_num(radius)} 0 1 1 {_num(bottom[0])} {_num(bottom[1])} "
                f"A {_num(radius)} {_num(radius)} 0 1 1 {_num(top[0])} {_num(top[1])} "
                f'Z" fill="{color}" stroke="#ffffff" stroke-width="1"/>'
            )
            continue
        sx_, sy_ = _polar(cx, cy, radius, start)
        ex, ey = _polar(cx, cy, radius, start + sweep)
        large = 1 if sweep > 180.0 else 0
        parts.append(
            f'<path d="M {_num(cx)} {_num(cy)} L {_num(sx_)} {_num(sy_)} '
            f"A {_num(radius)} {_num(radius)} 0 {large} 1 {_num(ex)} {_num(ey)} "
            f'Z" fill="{color}" stroke="#ffffff" stroke-width="1"/>'
        )
    _svg_legend(parts, labels, width * 0.72, height * 0.2)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def chart_svg_text(
    spec: ChartSpec, width: int = DEFAULT_WIDTH, height: int = DEFAULT_HEIGHT
) -> str:
    validate_chart(spec)
    if spec.kind == "pie":
        return _pie_svg(spec, width, height)
    return _xy_chart_svg(spec, width, height)


def render(
    chart: ChartSpec,
    format: str,
    out: str | Path,
    width: int = DEFAULT_WIDTH,
    height: int = DEFAULT_HEIGHT,
) -> None:
    """Serialize the chart to `out` as csv, json, or svg (UTF-8)."""
    text = render_text(chart, format, width, height)
    Path(out).write_bytes(text.encode("utf-8"))


def render_text(
    chart: ChartSpec,
    format: str,
    width: int = DEFAULT_WIDTH,
    height: int = DEFAULT_HEIGHT,
) -> str:
    validate_chart(chart)
    if format == "csv":
        return chart_csv_text(chart)
    if format == "json":
        return chart_json_text(chart)
    if format == "svg":
        return chart_svg_text(chart, width, height)
    raise ChartError(f"unknown chart format {format!r}")
