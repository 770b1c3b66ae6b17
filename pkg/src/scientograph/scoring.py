"""Cobb-Douglas internationality scoring and journal ranking.

The score is y = A * prod(x_i ** alpha_i) over the four indicators; the
elasticities alpha_i control returns to scale (sum 1 gives constant
returns and concavity along segments).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .graphstore import PropertyGraph
from .indicators import IndicatorVector


@dataclass(frozen=True)
class Elasticities:
    """Scale factor A > 0 and four nonnegative elasticity coefficients."""

    A: float = 1.0
    alpha: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.A) and self.A > 0):
            raise ValueError(f"A must be a positive finite number, got {self.A}")
        if len(self.alpha) != 4:
            raise ValueError(f"need exactly 4 elasticities, got {len(self.alpha)}")
        if any(not math.isfinite(a) or a < 0 for a in self.alpha):
            raise ValueError(f"elasticities must be nonnegative and finite: {self.alpha}")
        if not sum(self.alpha) > 0:
            raise ValueError("at least one elasticity must be positive")


DEFAULT_ELASTICITIES = Elasticities()


def cobb_douglas(x: IndicatorVector, e: Elasticities = DEFAULT_ELASTICITIES) -> float:
    """Evaluate A * prod(x_i ** alpha_i).

    Evaluated in log space for stability when the contributing inputs are
    positive. Any x_i = 0 with alpha_i > 0 makes the result exactly 0;
    alpha_i = 0 means "indicator ignored" (the 0**0 convention yields a
    factor of 1).
    """
    inputs = x.as_tuple()
    if any(xi < 0 for xi in inputs):
        raise ValueError(f"indicator inputs must be nonnegative: {inputs}")
    log_sum = math.log(e.A)
    for xi, alpha_i in zip(inputs, e.alpha):
        if alpha_i == 0.0:
            continue
        if xi == 0.0:
            return 0.0
        log_sum += alpha_i * math.log(xi)
    return math.exp(log_sum)


@dataclass(frozen=True)
class InternationalityScore:
    journal: str
    y: float
    inputs: IndicatorVector
    elasticities: Elasticities


def rank_journals(
    graph: PropertyGraph, e: Elasticities = DEFAULT_ELASTICITIES
) -> tuple[list[InternationalityScore], list[str]]:
    """Score every fully annotated journal, descending by y.

    Ties break by journal name ascending, so output order is deterministic.
    Journals missing any of x1..x4 (typically: no SNIP ingested) are
    excluded and returned as the second element, sorted by name.
    """
    scores: list[InternationalityScore] = []
    excluded: list[str] = []
    for journal in graph.nodes_by_label("Journal"):
        props = journal.properties
        values = [props.get(k) for k in ("x1", "x2", "x3", "x4")]
        if any(not isinstance(v, (int, float)) for v in values):
            excluded.append(journal.name)
            continue
        vector = IndicatorVector(*(float(v) for v in values))  # type: ignore[arg-type]
        scores.append(
            InternationalityScore(
                journal=journal.name,
                y=cobb_douglas(vector, e),
                inputs=vector,
                elasticities=e,
            )
        )
    scores.sort(key=lambda s: (-s.y, s.journal))
    excluded.sort()
    return scores, excluded
