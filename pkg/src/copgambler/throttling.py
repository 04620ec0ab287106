"""Throttling: the cheapest total of cop count plus expected capture time."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .engine import CaptureStats, GameConfig, Variant, estimate_capture_time
from .errors import InvalidParameters
from .gambler import GamblerDistribution
from .graph import Graph
from .partition import color_sectors, cover_sectors
from .strategies import (
    CompleteRandom,
    CycleInnings,
    DistributedWMW,
    PathTeam,
    StarDistributed,
    Strategy,
    Traversal,
)

FamilyBuilder = Callable[[Graph, int, GamblerDistribution], Strategy]


def _distributed(graph: Graph, k: int, dist: GamblerDistribution) -> Strategy:
    cover = cover_sectors(graph, k)
    return DistributedWMW(cover, color_sectors(cover))


def _sector_traversal(graph: Graph, k: int, dist: GamblerDistribution) -> Strategy:
    return Traversal(cover_sectors(graph, k)) if k > 1 else Traversal()


FAMILIES: dict[str, FamilyBuilder] = {
    "path_team": lambda g, k, d: PathTeam(k, d, g.n),
    "complete_random": lambda g, k, d: CompleteRandom(k, g.n),
    "star_distributed": lambda g, k, d: StarDistributed(k, g.n),
    "distributed_wmw1": _distributed,
    "cycle_innings": lambda g, k, d: CycleInnings(k, g.n),
    "sector_traversal": _sector_traversal,
}

_AROUND = {
    "cycle_unknown": 1.0 / (1.0 - 1.0 / math.e) - 0.5,
    "unknown_general": 6.0 / (1.0 - math.exp(-2.0)) - 3.0,
}


def suggested_k(rule: str, n: int) -> int:
    """Cop count the matching upper-bound proof uses for an ``n``-vertex graph."""
    if n < 2:
        raise InvalidParameters(f"n must be at least 2, got {n}")
    if rule == "path":
        k = math.ceil(math.sqrt(n) - 0.5)
    elif rule == "observed_general":
        k = math.floor(math.sqrt(3 * n) - 0.5)
    elif rule in _AROUND:
        k = math.floor(math.sqrt(_AROUND[rule] * n) + 0.5)
    else:
        raise InvalidParameters(f"unknown rule {rule!r}")
    return max(1, k)


def throttle_lower_bound(n: int) -> float:
    if n < 1:
        raise InvalidParameters(f"n must be positive, got {n}")
    return 2.0 * math.sqrt(n)


def default_k_range(n: int) -> range:
    return range(1, math.ceil(2 * math.sqrt(3 * n)) + 1)


@dataclass
class ThrottleResult:
    variant: Variant
    best_k: int
    value: float
    per_k: dict[int, CaptureStats] = field(default_factory=dict)
    lower_bound: float = 0.0
    n: int = 0

    @property
    def std_error(self) -> float:
        return self.per_k[self.best_k].std_error

    def rows(self, suggested: int | None = None, upper: float | None = None) -> list[dict]:
        out = []
        for k, st in sorted(self.per_k.items()):
            out.append({
                "variant": str(self.variant),
                "n": self.n,
                "k": k,
                "mean": st.mean,
                "SE": st.std_error,
                "k+mean": k + st.mean,
                "suggestedK": suggested,
                "lowerBound": self.lower_bound,
                "upperBoundFormulaValue": upper,
            })
        return out


THROTTLE_COLUMNS = ["variant", "n", "k", "mean", "SE", "k+mean", "suggestedK", "lowerBound",
                    "upperBoundFormulaValue"]


def throttle_estimate(
    graph: Graph,
    variant: Variant | str,
    family: str | FamilyBuilder,
    k_range: Iterable[int] | None,
    dist: GamblerDistribution,
    trials: int,
    seed: int,
    workers: int = 1,
) -> ThrottleResult:
    """Estimate ``min over k of k + T_k`` for one strategy family.

    Each ``k`` runs with its own seed offset so the per-``k`` estimates are
    independent.  Ties go to the smaller ``k``.
    """
    if isinstance(variant, str):
        variant = Variant.parse(variant)
    builder = FAMILIES[family] if isinstance(family, str) else family
    ks = sorted(set(default_k_range(graph.n) if k_range is None else k_range))
    if not ks or ks[0] < 1:
        raise InvalidParameters(f"k range must be non-empty and positive, got {ks}")
    per_k: dict[int, CaptureStats] = {}
    for k in ks:
        strategy = builder(graph, k, dist)
        config = GameConfig(graph, strategy.default_starts(graph, k), variant)
        per_k[k] = estimate_capture_time(config, strategy, dist, trials, seed + 1_000_003 * k, workers)
    best = min(ks, key=lambda k: (k + per_k[k].mean, k))
    return ThrottleResult(variant, best, best + per_k[best].mean, per_k, throttle_lower_bound(graph.n), graph.n)


def format_throttle_csv(results: Iterable[ThrottleResult], suggested: int | None = None,
                        upper: float | None = None) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, THROTTLE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for result in results:
        writer.writerows(result.rows(suggested, upper))
    return buf.getvalue()
