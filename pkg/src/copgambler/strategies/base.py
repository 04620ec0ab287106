from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..engine import GameConfig, GameContext
from ..errors import IncompatibleStrategy
from ..graph import Graph

FOREVER = math.inf


class Strategy:
    """Decision rule for a team of cops.

    The engine calls ``reset`` once per game, ``observe`` whenever the
    gambler is seen, and ``moves`` on every turn where the cops may move.
    ``hold_until`` lets the engine skip ahead: it returns the last turn
    through which every cop is guaranteed to stay put (``turn - 1`` when a
    move may happen now).  Because the engine may skip calls, ``moves`` must
    depend only on the turn number, the positions and what was observed.
    """

    name = "strategy"
    variants: tuple[str, ...] = ("known", "unknown", "observed", "once_visible")

    def check(self, config: GameConfig) -> None:
        if config.variant.kind not in self.variants:
            raise IncompatibleStrategy(
                f"{self.name} does not support the {config.variant} gambler (supports {self.variants})"
            )

    def default_starts(self, graph: Graph, k: int) -> tuple[int, ...]:
        return (graph.centers[0],) * k

    def reset(self, ctx: GameContext) -> None:
        self.ctx = ctx

    def observe(self, vertices: Sequence[int] | np.ndarray) -> None:
        pass

    def moves(self, turn: int, positions: tuple[int, ...]) -> Sequence[int]:
        return positions

    def hold_until(self, turn: int, positions: tuple[int, ...]) -> float:
        return turn - 1


class StayPut(Strategy):
    """Cops never move; a baseline and a censoring fixture."""

    name = "stay"

    def hold_until(self, turn, positions):
        return FOREVER


class WalkAndWait(Strategy):
    """Each cop walks a shortest path to its target, then stays there for good.

    Subclasses set ``self.targets`` (one entry per cop, ``None`` = undecided,
    which means stay put) once they have decided.
    """

    # set by subclasses that still expect observations after reset
    awaiting = False

    def reset(self, ctx):
        super().reset(ctx)
        self.targets: list[int | None] = [None] * len(ctx.cop_start)

    def moves(self, turn, positions):
        hops = self.ctx.graph.next_hops
        return [p if t is None else hops[p][t] for p, t in zip(positions, self.targets)]

    def hold_until(self, turn, positions):
        if self.awaiting:
            return turn - 1
        for p, t in zip(positions, self.targets):
            if t is not None and p != t:
                return turn - 1
        return FOREVER


def simulate_observations(ctx: GameContext, count: int) -> np.ndarray:
    """Against a known gambler the cops can draw the observations themselves."""
    return np.searchsorted(ctx.known.cdf, ctx.rng.random(count), side="right")
