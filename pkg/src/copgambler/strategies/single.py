"""Single-cop strategies: watch-move-wait, stakeout, the sampled known-gambler
rule, spanning-walk traversal and the hybrid of the last two."""

from __future__ import annotations

import math
from collections import Counter
from typing import Sequence

import numpy as np

from ..errors import AllZeroValues, IncompatibleStrategy, InvalidP
from ..gambler import chebyshev_error_bound, clip_probabilities, empirical_frequencies
from ..graph import Graph, bfs_tree, path_order
from ..partition import Cover, sector_centers
from .base import FOREVER, Strategy, WalkAndWait, simulate_observations
from .sweep import SweepRun, plan_sweep_schedule


def _require_single_cop(strategy: Strategy, config) -> None:
    if config.k != 1:
        raise IncompatibleStrategy(f"{strategy.name} is a single-cop strategy, got k={config.k}")


def stakeout_target(values: Sequence[float] | np.ndarray, start: int, graph: Graph) -> tuple[int, float]:
    """Vertex minimising travel distance plus expected wait ``1/value``."""
    values = np.asarray(values, dtype=float)
    pos = values > 0
    if not pos.any():
        raise AllZeroValues("stakeout needs at least one positive value")
    obj = np.full(values.size, np.inf)
    obj[pos] = graph.distances[start][pos] + 1.0 / values[pos]
    v = int(np.argmin(obj))
    return v, float(obj[v])


class WatchMoveWait(WalkAndWait):
    """Watch ``t`` rounds, walk to the most frequent vertex and wait there.

    Ties between modes go to the one closest to the start, then to a
    uniformly random one.
    """

    variants = ("known", "observed", "once_visible")

    def __init__(self, t: int = 1):
        if t < 1:
            raise ValueError(f"t must be positive, got {t}")
        self.t = t
        self.name = "wmw1" if t == 1 else "wmw_t"

    def check(self, config):
        super().check(config)
        _require_single_cop(self, config)
        if config.variant.kind != "known" and config.variant.t < self.t:
            raise IncompatibleStrategy(f"{self.name} needs {self.t} observations, variant gives {config.variant.t}")

    def reset(self, ctx):
        super().reset(ctx)
        self.seen: list[int] = []
        self.awaiting = True
        if ctx.variant.kind == "known":
            self.observe(simulate_observations(ctx, self.t))

    def observe(self, vertices):
        if not self.awaiting:
            return
        need = self.t - len(self.seen)
        self.seen.extend(int(v) for v in vertices[:need])
        if len(self.seen) >= self.t:
            self.awaiting = False
            self.targets = [self._choose()] * len(self.targets)

    def _choose(self) -> int:
        counts = Counter(self.seen)
        top = max(counts.values())
        modes = sorted(v for v, c in counts.items() if c == top)
        if len(modes) == 1:
            return modes[0]
        row = self.ctx.graph.distance_rows[self.ctx.cop_start[0]]
        near = min(row[v] for v in modes)
        tied = [v for v in modes if row[v] == near]
        if len(tied) == 1:
            return tied[0]
        return tied[int(self.ctx.rng.integers(len(tied)))]


class Stakeout(WalkAndWait):
    """Walk to the vertex minimising ``d(start, v) + 1/value_v`` and wait."""

    name = "stakeout"

    def __init__(self, values: Sequence[float]):
        values = np.asarray(values, dtype=float)
        if (values < 0).any():
            raise ValueError("stakeout values must be non-negative")
        if not (values > 0).any():
            raise AllZeroValues("stakeout needs at least one positive value")
        self.values = values

    def check(self, config):
        super().check(config)
        _require_single_cop(self, config)
        if self.values.size != config.graph.n:
            raise IncompatibleStrategy(f"{self.values.size} values for a {config.graph.n}-vertex graph")

    def reset(self, ctx):
        super().reset(ctx)
        target, _ = stakeout_target(self.values, ctx.cop_start[0], ctx.graph)
        self.targets = [target]


class SampleAndPlan(WalkAndWait):
    """Estimate the distribution from ``t`` observations and play against the estimate.

    With ``P`` given, every frequency is first lowered by the Chebyshev
    deviation for ``t`` samples at confidence ``P`` and floored at zero.
    On a path, a cop starting at an endpoint runs the optimal forward
    sweep for those values; otherwise it stakes out the best vertex.  If
    clipping removes all mass the raw frequencies are staked out instead.
    """

    variants = ("observed",)
    name = "kw_t"

    def __init__(self, t: int, w: float | None = None, P: float | None = None):
        if t < 1:
            raise ValueError(f"t must be positive, got {t}")
        if P is not None:
            if not 0 < P < 1:
                raise InvalidP(f"P must lie in (0, 1), got {P}")
            if w is not None and not P < (w - 1) / w:
                raise InvalidP(f"P={P} must be below (w-1)/w={(w - 1) / w} for w={w}")
        self.t = t
        self.w = w
        self.P = P
        self._orders: dict[Graph, list[int] | None] = {}

    @property
    def epsilon(self) -> float:
        return 0.0 if self.P is None else chebyshev_error_bound(self.t, self.P)

    def check(self, config):
        super().check(config)
        _require_single_cop(self, config)
        if config.variant.t < self.t:
            raise IncompatibleStrategy(f"kw_t needs {self.t} observations, variant gives {config.variant.t}")

    def reset(self, ctx):
        super().reset(ctx)
        self.seen: list[np.ndarray] = []
        self.count = 0
        self.sweep: SweepRun | None = None
        self.awaiting = True

    def observe(self, vertices):
        if not self.awaiting:
            return
        chunk = np.asarray(vertices, dtype=np.intp)[: self.t - self.count]
        self.seen.append(chunk)
        self.count += chunk.size
        if self.count >= self.t:
            self.awaiting = False
            self._plan(np.concatenate(self.seen))

    def _path_order(self, graph: Graph) -> list[int] | None:
        if graph not in self._orders:
            self._orders[graph] = path_order(graph)
        return self._orders[graph]

    def _plan(self, samples: np.ndarray) -> None:
        graph = self.ctx.graph
        start = self.ctx.cop_start[0]
        est = empirical_frequencies(samples, graph.n)
        self.estimate = est
        values = clip_probabilities(est, self.epsilon)
        if not values.any():
            self.targets = [stakeout_target(est.freqs, start, graph)[0]]
            return
        order = self._path_order(graph)
        if order is not None and graph.n > 1 and start in (order[0], order[-1]):
            if start != order[0]:
                order = order[::-1]
            schedule = plan_sweep_schedule(values[order], min_first_wait=self.ctx.frozen_turns)
            self.sweep = SweepRun(order, schedule, [0])
        else:
            self.targets = [stakeout_target(values, start, graph)[0]]

    def moves(self, turn, positions):
        if self.sweep is not None:
            return self.sweep.positions(turn)
        return super().moves(turn, positions)

    def hold_until(self, turn, positions):
        if self.sweep is not None:
            return self.sweep.hold_until(turn)
        return super().hold_until(turn, positions)


class Traversal(Strategy):
    """Repeat a closed depth-first walk of a spanning tree forever.

    With a cover, cop ``i`` walks a spanning tree of sector ``i`` rooted at
    its start; cops beyond the sector count stay put.  Every vertex of a
    sector is visited once per walk of ``2(|sector|-1)`` turns.
    """

    name = "traversal"

    def __init__(self, cover: Cover | None = None):
        self.cover = cover
        self._walks: dict[tuple, list[int]] = {}

    def default_starts(self, graph, k):
        if self.cover is None:
            return super().default_starts(graph, k)
        centers = sector_centers(graph, self.cover)
        return (centers + (centers[0],) * k)[:k]

    def check(self, config):
        super().check(config)
        if self.cover is None:
            _require_single_cop(self, config)
            return
        if config.k < len(self.cover):
            raise IncompatibleStrategy(f"cover has {len(self.cover)} sectors but only {config.k} cops")
        for i, sector in enumerate(self.cover.sectors):
            if config.cop_start[i] not in sector:
                raise IncompatibleStrategy(f"cop {i} starts outside its sector")

    def _walk(self, graph: Graph, root: int, sector: frozenset[int] | None) -> list[int]:
        key = (graph, root, sector)
        if key not in self._walks:
            walk = bfs_tree(graph.adj, root, None if sector is None else set(sector)).euler_walk()
            self._walks[key] = walk[:-1] if len(walk) > 1 else walk
        return self._walks[key]

    def begin(self, ctx, positions: Sequence[int], origin: int) -> None:
        """Start walking from ``positions``; the walk's first step falls on turn ``origin + 1``."""
        self.ctx = ctx
        self.origin = origin
        if self.cover is None:
            self.walks = [self._walk(ctx.graph, positions[0], None)]
        else:
            self.walks = [self._walk(ctx.graph, p, s) for p, s in zip(positions, self.cover.sectors)]

    def reset(self, ctx):
        self.begin(ctx, ctx.cop_start, ctx.frozen_turns)

    def moves(self, turn, positions):
        i = turn - self.origin
        out = list(positions)
        for c, walk in enumerate(self.walks):
            out[c] = walk[i % len(walk)]
        return out

    def hold_until(self, turn, positions):
        if all(len(w) == 1 for w in self.walks):
            return FOREVER
        return turn - 1


class Hybrid(Strategy):
    """``kw_t`` for the first ``x = ceil(n*beta)`` turns, then traversal from wherever the cop is."""

    variants = ("observed",)
    name = "hybrid"

    def __init__(self, t: int, w: float | None = None, P: float | None = None, beta: float = 1.0):
        self.kw = SampleAndPlan(t, w, P)
        self.tail = Traversal()
        self.beta = beta

    def check(self, config):
        self.kw.check(config)

    def switch_turn(self, n: int) -> int:
        return max(1, math.ceil(n * self.beta))

    def reset(self, ctx):
        super().reset(ctx)
        self.kw.reset(ctx)
        self.x = self.switch_turn(ctx.graph.n)
        self.switched = False

    def observe(self, vertices):
        self.kw.observe(vertices)

    def moves(self, turn, positions):
        if turn <= self.x:
            return self.kw.moves(turn, positions)
        if not self.switched:
            self.tail.begin(self.ctx, positions, self.x)
            self.switched = True
        return self.tail.moves(turn, positions)

    def hold_until(self, turn, positions):
        if turn > self.x:
            return self.tail.hold_until(turn, positions) if self.switched else turn - 1
        return min(self.kw.hold_until(turn, positions), self.x)
