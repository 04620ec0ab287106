"""Multi-cop strategies: distributed watch-move-wait on a sector cover, the
star special case, unison sweeps on a path, innings on a cycle and uniform
random subsets on a complete graph."""

from __future__ import annotations

import math

import numpy as np

from ..errors import IncompatibleStrategy, InvalidParameters, NotACycle, NotAPath, NotAStar, NotComplete
from ..gambler import GamblerDistribution
from ..graph import Graph, cycle_order, is_complete, path_order, star_center
from ..partition import ColorMap, Cover, color_sectors, sector_centers, star_cover
from .base import Strategy, WalkAndWait, simulate_observations
from .sweep import SweepRun, plan_sweep_schedule


def _pad(starts: tuple[int, ...], k: int) -> tuple[int, ...]:
    return (starts + (starts[0],) * k)[:k]


class DistributedWMW(WalkAndWait):
    """One observation, one colour, every cop heads for that colour in its own sector.

    Cop ``j`` guards sector ``j`` and starts at a center of it.  When the
    gambler is seen at a vertex of colour ``c``, each cop walks to the
    colour-``c`` vertex of its sector, or stays if the sector has none.
    Cops beyond the number of sectors never move.  Only the first
    observation is used.
    """

    name = "distributed_wmw1"
    variants = ("known", "observed", "once_visible")

    def __init__(self, cover: Cover, colors: ColorMap):
        if len(cover) != len(colors.colors):
            raise InvalidParameters("cover and colour map disagree on the number of sectors")
        self.cover = cover
        self.colors = colors

    def layout(self, graph: Graph) -> tuple[Cover, ColorMap]:
        return self.cover, self.colors

    def default_starts(self, graph, k):
        cover, _ = self.layout(graph)
        return _pad(sector_centers(graph, cover), k)

    def check(self, config):
        super().check(config)
        cover, _ = self.layout(config.graph)
        if config.k < len(cover):
            raise IncompatibleStrategy(f"cover has {len(cover)} sectors but only {config.k} cops")
        covered = frozenset().union(*cover.sectors)
        if covered != frozenset(range(config.graph.n)):
            raise IncompatibleStrategy("cover does not cover the graph")

    def reset(self, ctx):
        super().reset(ctx)
        self._layout = self.layout(ctx.graph)
        self.awaiting = True
        if ctx.variant.kind == "known":
            self.observe(simulate_observations(ctx, 1))

    def observe(self, vertices):
        if not self.awaiting:
            return
        self.awaiting = False
        cover, colors = self._layout
        c = colors.color_of(int(vertices[0]))
        for j in range(len(cover)):
            self.targets[j] = colors.vertex_with(j, c)


def _check_n(strategy, graph: Graph) -> None:
    n = getattr(strategy, "n", None)
    if n is not None and graph.n != n:
        raise IncompatibleStrategy(f"{strategy.name} built for n={n}, graph has n={graph.n}")


class StarDistributed(DistributedWMW):
    """Distributed watch-move-wait on a star, all cops starting on the hub.

    The leaves are split into ``k`` groups as evenly as possible; each
    sector is a group plus the hub, and the hub carries the top colour, so
    seeing the gambler on the hub keeps every cop home.
    """

    name = "star_distributed"

    def __init__(self, k: int, n: int | None = None):
        if k < 1:
            raise InvalidParameters(f"k must be positive, got {k}")
        self.k = k
        self.n = n
        self._layouts: dict[Graph, tuple[Cover, ColorMap]] = {}

    def layout(self, graph):
        if graph not in self._layouts:
            hub = star_center(graph)
            if hub is None:
                raise NotAStar(f"{graph!r} is not a star")
            cover = star_cover(graph, self.k)
            self._layouts[graph] = (cover, color_sectors(cover, hub))
        return self._layouts[graph]

    def default_starts(self, graph, k):
        hub = star_center(graph)
        if hub is None:
            raise NotAStar(f"{graph!r} is not a star")
        return (hub,) * k

    def check(self, config):
        _check_n(self, config.graph)
        if config.k != self.k:
            raise IncompatibleStrategy(f"built for {self.k} cops, config has {config.k}")
        super().check(config)


class PathTeam(Strategy):
    """Cops spaced ``m = ceil(n/k)`` apart on a path sweep forward in unison.

    All cops share one schedule, planned for the folded masses
    ``q_j = sum of p over path positions congruent to j mod m``, so together
    they behave like one cop sweeping a path of length ``m``.  A cop that
    would step off the far end stays put.
    """

    name = "path_team"
    variants = ("known",)

    def __init__(self, k: int, dist: GamblerDistribution, n: int | None = None):
        if k < 1:
            raise InvalidParameters(f"k must be positive, got {k}")
        self.k = k
        self.n = n
        self.dist = dist
        self._plans: dict[tuple[Graph, int], SweepRun] = {}

    def _order(self, graph: Graph) -> list[int]:
        order = path_order(graph)
        if order is None:
            raise NotAPath(f"{graph!r} is not a path")
        return order

    def spacing(self, n: int) -> int:
        return math.ceil(n / self.k)

    def bases(self, n: int) -> list[int]:
        m = self.spacing(n)
        firsts = list(range(0, n, m))
        return (firsts + [0] * self.k)[: self.k]

    def folded(self, graph: Graph) -> np.ndarray:
        order = self._order(graph)
        m = self.spacing(graph.n)
        p = self.dist.probs[order]
        q = np.zeros(m)
        np.add.at(q, np.arange(graph.n) % m, p)
        return q

    def plan(self, graph: Graph, frozen: int = 0) -> SweepRun:
        key = (graph, frozen)
        if key not in self._plans:
            order = self._order(graph)
            schedule = plan_sweep_schedule(self.folded(graph), min_first_wait=frozen)
            self._plans[key] = SweepRun(order, schedule, self.bases(graph.n))
        return self._plans[key]

    def default_starts(self, graph, k):
        order = self._order(graph)
        return tuple(order[b] for b in self.bases(graph.n))

    def check(self, config):
        super().check(config)
        _check_n(self, config.graph)
        if config.k != self.k:
            raise IncompatibleStrategy(f"built for {self.k} cops, config has {config.k}")
        if self.dist.n != config.graph.n:
            raise IncompatibleStrategy("distribution size does not match the path")
        if config.cop_start != self.default_starts(config.graph, self.k):
            raise IncompatibleStrategy("path team cops must start on positions 0, m, 2m, ...")

    def reset(self, ctx):
        super().reset(ctx)
        self.run = self.plan(ctx.graph, ctx.frozen_turns)

    def moves(self, turn, positions):
        return self.run.positions(turn)

    def hold_until(self, turn, positions):
        return self.run.hold_until(turn)


class CycleInnings(Strategy):
    """Evenly spaced cops walk flag to flag around a cycle in one common direction.

    Flags sit at cycle positions ``floor(i*n/k)``.  An inning lasts
    ``m = ceil(n/k)`` turns; in it every cop walks from its flag to the next
    one and waits there if the gap is shorter than ``m``.  The direction is
    fixed per game by one fair coin.  With more cops than vertices the
    surplus cops stay on position 0.
    """

    name = "cycle_innings"

    def __init__(self, k: int, n: int | None = None):
        if k < 1:
            raise InvalidParameters(f"k must be positive, got {k}")
        self.k = k
        self.n = n
        self._orders: dict[Graph, list[int]] = {}

    def _order(self, graph: Graph) -> list[int]:
        if graph not in self._orders:
            order = cycle_order(graph)
            if order is None:
                raise NotACycle(f"{graph!r} is not a cycle")
            self._orders[graph] = order
        return self._orders[graph]

    def flags(self, n: int) -> list[int]:
        active = min(self.k, n)
        return [i * n // active for i in range(active)]

    def innings_length(self, n: int) -> int:
        return math.ceil(n / min(self.k, n))

    def default_starts(self, graph, k):
        order = self._order(graph)
        flags = self.flags(graph.n)
        return tuple(order[a] for a in flags) + (order[0],) * (k - len(flags))

    def check(self, config):
        super().check(config)
        _check_n(self, config.graph)
        if config.k != self.k:
            raise IncompatibleStrategy(f"built for {self.k} cops, config has {config.k}")
        if config.cop_start != self.default_starts(config.graph, self.k):
            raise IncompatibleStrategy("cycle innings cops must start on the flags")

    def reset(self, ctx):
        super().reset(ctx)
        self.order = self._order(ctx.graph)
        n = ctx.graph.n
        self.a = self.flags(n)
        self.m = self.innings_length(n)
        self.d = 1 if ctx.rng.random() < 0.5 else -1
        active = len(self.a)
        self.gaps = [((self.d * (self.a[(j + self.d) % active] - self.a[j]) - 1) % n) + 1
                     for j in range(active)]

    def moves(self, turn, positions):
        s = turn - self.ctx.frozen_turns
        if s < 1:
            return positions
        inning, offset = divmod(s - 1, self.m)
        offset += 1
        n, active = len(self.order), len(self.a)
        out = list(positions)
        for i in range(active):
            j = (i + self.d * inning) % active
            out[i] = self.order[(self.a[j] + self.d * min(offset, self.gaps[j])) % n]
        return out


class CompleteRandom(Strategy):
    """Every turn the cops occupy a uniformly random set of ``k`` distinct vertices."""

    name = "complete_random"

    def __init__(self, k: int, n: int | None = None):
        if k < 1:
            raise InvalidParameters(f"k must be positive, got {k}")
        self.k = k
        self.n = n

    def default_starts(self, graph, k):
        return tuple(range(k)) if k <= graph.n else super().default_starts(graph, k)

    def check(self, config):
        super().check(config)
        _check_n(self, config.graph)
        if not is_complete(config.graph):
            raise NotComplete(f"{config.graph!r} is not complete")
        if config.k != self.k or self.k > config.graph.n:
            raise IncompatibleStrategy(f"need {self.k} <= n cops, config has {config.k} on n={config.graph.n}")

    def moves(self, turn, positions):
        return self.ctx.rng.choice(self.ctx.graph.n, self.k, replace=False).tolist()
