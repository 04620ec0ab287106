"""Cop strategies and a registry for building them by name."""

from __future__ import annotations

import math
from typing import Callable, Sequence

from ..errors import InvalidParameters
from ..gambler import GamblerDistribution
from ..graph import Graph
from ..partition import ColorMap, Cover, color_sectors, cover_sectors
from .base import FOREVER, Strategy, StayPut, WalkAndWait
from .single import Hybrid, SampleAndPlan, Stakeout, Traversal, WatchMoveWait, stakeout_target
from .sweep import SweepRun, SweepSchedule, plan_sweep_schedule, sweep_expected_time
from .team import CompleteRandom, CycleInnings, DistributedWMW, PathTeam, StarDistributed

__all__ = [
    "FOREVER", "Strategy", "StayPut", "WalkAndWait",
    "WatchMoveWait", "Stakeout", "SampleAndPlan", "Traversal", "Hybrid", "stakeout_target",
    "SweepSchedule", "SweepRun", "plan_sweep_schedule", "sweep_expected_time",
    "DistributedWMW", "StarDistributed", "PathTeam", "CycleInnings", "CompleteRandom",
    "stay_strategy", "wmw1_strategy", "wmw_t_strategy", "stakeout_strategy", "kw_t_strategy",
    "unknown_traversal_strategy", "hybrid_strategy", "distributed_wmw1_strategy",
    "star_distributed_strategy", "path_team_strategy", "cycle_innings_strategy",
    "complete_random_strategy", "STRATEGIES", "build_strategy",
]


def stay_strategy() -> Strategy:
    return StayPut()


def wmw1_strategy() -> Strategy:
    return WatchMoveWait(1)


def wmw_t_strategy(t: int) -> Strategy:
    return WatchMoveWait(t)


def stakeout_strategy(values: Sequence[float]) -> Strategy:
    return Stakeout(values)


def kw_t_strategy(t: int, w: float | None = None, P: float | None = None) -> Strategy:
    return SampleAndPlan(t, w, P)


def unknown_traversal_strategy(cover: Cover | None = None) -> Strategy:
    return Traversal(cover)


def hybrid_strategy(t: int, w: float | None = None, P: float | None = None, beta: float = 1.0) -> Strategy:
    return Hybrid(t, w, P, beta)


def distributed_wmw1_strategy(cover: Cover, colors: ColorMap) -> Strategy:
    return DistributedWMW(cover, colors)


def star_distributed_strategy(n: int, k: int) -> Strategy:
    return StarDistributed(k, n)


def path_team_strategy(n: int, k: int, dist: GamblerDistribution) -> Strategy:
    return PathTeam(k, dist, n)


def cycle_innings_strategy(n: int, k: int) -> Strategy:
    """The per-game coin comes from the strategy stream of each game."""
    return CycleInnings(k, n)


def complete_random_strategy(n: int, k: int) -> Strategy:
    """Subsets are drawn from the strategy stream of each game."""
    return CompleteRandom(k, n)


def _samples(graph: Graph, params: dict) -> int:
    # t may be given directly or as w*n^2
    if "t" in params:
        return int(params.pop("t"))
    if "w" in params:
        return math.ceil(float(params["w"]) * graph.n ** 2)
    raise InvalidParameters("need t (or w) observations")


def _kw(graph, k, dist, **params):
    t = _samples(graph, params)
    w, P = params.pop("w", None), params.pop("P", None)
    if params:
        _extra(params)
    return kw_t_strategy(t, w, P)


def _hybrid(graph, k, dist, **params):
    t = _samples(graph, params)
    w, P = params.pop("w", None), params.pop("P", None)
    beta = float(params.pop("beta", 1.0))
    if params:
        _extra(params)
    return hybrid_strategy(t, w, P, beta)


def _traversal(graph, k, dist):
    return Traversal() if k == 1 else Traversal(cover_sectors(graph, k))


def _distributed(graph, k, dist):
    cover = cover_sectors(graph, k)
    return DistributedWMW(cover, color_sectors(cover))


def _stakeout(graph, k, dist, values: Sequence[float] | None = None):
    return Stakeout(dist.probs if values is None else values)


def _extra(params: dict):
    raise InvalidParameters(f"unexpected parameters {sorted(params)}")


Builder = Callable[..., Strategy]

STRATEGIES: dict[str, Builder] = {
    "stay": lambda graph, k, dist: StayPut(),
    "wmw1": lambda graph, k, dist: WatchMoveWait(1),
    "wmw_t": lambda graph, k, dist, t: WatchMoveWait(int(t)),
    "stakeout": _stakeout,
    "kw_t": _kw,
    "traversal": _traversal,
    "hybrid": _hybrid,
    "distributed_wmw1": _distributed,
    "star_distributed": lambda graph, k, dist: StarDistributed(k, graph.n),
    "path_team": lambda graph, k, dist: PathTeam(k, dist, graph.n),
    "cycle_innings": lambda graph, k, dist: CycleInnings(k, graph.n),
    "complete_random": lambda graph, k, dist: CompleteRandom(k, graph.n),
}


def build_strategy(name: str, graph: Graph, k: int, dist: GamblerDistribution, **params) -> Strategy:
    """Build a strategy from its registry name and keyword parameters."""
    try:
        builder = STRATEGIES[name]
    except KeyError:
        raise InvalidParameters(f"unknown strategy {name!r}; choose from {sorted(STRATEGIES)}") from None
    try:
        return builder(graph, k, dist, **params)
    except TypeError as exc:
        raise InvalidParameters(f"bad parameters for {name}: {exc}") from None
