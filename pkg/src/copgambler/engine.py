"""Game rules and the Monte Carlo estimator.

One game: optional pre-game observation rounds (``observed(t)``), then
turns ``1, 2, ...`` in which every cop stays or steps to a neighbour while
the gambler simultaneously lands on a fresh i.i.d. vertex.  The game ends
on the first turn some cop's new vertex equals the gambler's.  Observed and
once-visible cops are pinned to their start on turn 1.

Each trial draws from two Philox streams keyed by the base seed with the
trial index in the counter, one for the gambler and one for the strategy,
so a trial's trace does not depend on which other trials ran or in what
order.
"""

from __future__ import annotations

import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import IllegalMove, TooFewTrials
from .gambler import GamblerDistribution
from .graph import Graph

if TYPE_CHECKING:
    from .strategies.base import Strategy

VARIANT_KINDS = ("known", "unknown", "observed", "once_visible")
_VARIANT_RE = re.compile(r"^\s*(known|unknown|observed|once_visible)\s*(?:\(\s*(\d+)\s*\))?\s*$")


@dataclass(frozen=True)
class Variant:
    kind: str
    t: int = 0

    def __post_init__(self) -> None:
        if self.kind not in VARIANT_KINDS:
            raise ValueError(f"unknown variant {self.kind!r}")
        if self.kind in ("observed", "once_visible") and self.t < 1:
            raise ValueError(f"{self.kind} needs t >= 1, got {self.t}")

    @classmethod
    def parse(cls, text: str) -> "Variant":
        m = _VARIANT_RE.match(text)
        if not m:
            raise ValueError(f"cannot parse variant {text!r}")
        kind, t = m.group(1), m.group(2)
        if kind in ("known", "unknown"):
            if t is not None:
                raise ValueError(f"{kind} takes no parameter")
            return cls(kind)
        return cls(kind, int(t) if t is not None else 1)

    def __str__(self) -> str:
        return self.kind if self.kind in ("known", "unknown") else f"{self.kind}({self.t})"

    @property
    def frozen_turns(self) -> int:
        return 1 if self.kind in ("observed", "once_visible") else 0


KNOWN = Variant("known")
UNKNOWN = Variant("unknown")


def observed(t: int = 1) -> Variant:
    return Variant("observed", t)


def once_visible(t: int = 1) -> Variant:
    return Variant("once_visible", t)


@dataclass(frozen=True)
class GameConfig:
    graph: Graph
    cop_start: tuple[int, ...]
    variant: Variant
    max_turns: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "cop_start", tuple(int(v) for v in self.cop_start))
        if not self.cop_start:
            raise ValueError("need at least one cop")
        if any(not 0 <= v < self.graph.n for v in self.cop_start):
            raise ValueError(f"cop start {self.cop_start} outside the graph")
        if self.max_turns <= 0:
            object.__setattr__(self, "max_turns", 1000 * self.graph.n)

    @property
    def k(self) -> int:
        return len(self.cop_start)

    @property
    def distances(self) -> np.ndarray:
        return self.graph.distances


@dataclass
class GameContext:
    """What a strategy may see when a game starts."""

    graph: Graph
    variant: Variant
    cop_start: tuple[int, ...]
    rng: np.random.Generator
    known: GamblerDistribution | None = None

    @property
    def frozen_turns(self) -> int:
        return self.variant.frozen_turns


@dataclass
class CaptureRecord:
    turn: int
    censored: bool = False
    observations: tuple[int, ...] = ()
    log: list[tuple[tuple[int, ...], int]] | None = None


class GameRng:
    """Gambler and strategy streams for one trial of one experiment."""

    def __init__(self, base_seed: int, trial: int = 0):
        key = int(base_seed) % (1 << 128)
        self._gbits = np.random.Philox(key=key)
        self._sbits = np.random.Philox(key=key)
        self._key = self._gbits.state["state"]["key"].copy()
        self.gambler = np.random.Generator(self._gbits)
        self.strategy = np.random.Generator(self._sbits)
        self.seek(trial)

    def seek(self, trial: int) -> None:
        for stream, bits in enumerate((self._gbits, self._sbits)):
            bits.state = {
                "bit_generator": "Philox",
                "state": {"counter": np.array([0, 0, trial, stream], dtype=np.uint64), "key": self._key},
                "buffer": np.zeros(4, dtype=np.uint64),
                "buffer_pos": 4,
                "has_uint32": 0,
                "uinteger": 0,
            }


class GamblerStream:
    """The gambler's vertex sequence, drawn in blocks.

    ``next``, ``take`` and ``scan`` all consume the same underlying sequence,
    so mixing them never changes which vertex falls on which turn.
    """

    def __init__(self, dist: GamblerDistribution, rng: np.random.Generator):
        self._cdf = dist.cdf
        self._rng = rng
        self._block = np.empty(0, dtype=np.intp)
        self._list: list[int] = []
        self._pos = 0
        self._size = 64

    def _refill(self) -> None:
        self._block = np.searchsorted(self._cdf, self._rng.random(self._size), side="right")
        self._list = self._block.tolist()
        self._pos = 0
        self._size = min(self._size * 2, 4096)

    def next(self) -> int:
        if self._pos >= len(self._list):
            self._refill()
        v = self._list[self._pos]
        self._pos += 1
        return v

    def take(self, count: int) -> np.ndarray:
        parts = []
        while count > 0:
            if self._pos >= len(self._list):
                self._refill()
            chunk = self._block[self._pos:self._pos + count]
            parts.append(chunk)
            self._pos += chunk.size
            count -= chunk.size
        return np.concatenate(parts) if parts else np.empty(0, dtype=np.intp)

    def scan(self, targets: Sequence[int], limit: int) -> tuple[int, bool]:
        """Consume draws until one lands in ``targets`` or ``limit`` are used.

        Returns the number of draws consumed and whether the last one hit.
        """
        used = 0
        single = targets[0] if len(targets) == 1 else None
        tarr = None if single is not None else np.asarray(targets)
        while used < limit:
            if self._pos >= len(self._list):
                self._refill()
            block = self._block[self._pos:self._pos + (limit - used)]
            mask = (block == single) if single is not None else np.isin(block, tarr)
            idx = int(mask.argmax())
            if mask[idx]:
                self._pos += idx + 1
                return used + idx + 1, True
            self._pos += block.size
            used += block.size
        return used, False


def run_game(
    config: GameConfig,
    strategy: "Strategy",
    dist: GamblerDistribution,
    rng: GameRng,
    record: bool = False,
) -> CaptureRecord:
    graph = config.graph
    variant = config.variant
    gambler = GamblerStream(dist, rng.gambler)
    ctx = GameContext(graph, variant, config.cop_start, rng.strategy,
                      dist if variant.kind == "known" else None)
    strategy.reset(ctx)

    observations: tuple[int, ...] = ()
    if variant.kind == "observed":
        seen = gambler.take(variant.t)
        strategy.observe(seen)
        if record:
            observations = tuple(seen.tolist())

    adj_sets = graph.adj_sets
    frozen = variant.frozen_turns
    watch = variant.t if variant.kind == "once_visible" else 0
    positions = config.cop_start
    log: list[tuple[tuple[int, ...], int]] | None = [] if record else None
    max_turns = config.max_turns
    turn = 1
    while turn <= max_turns:
        if not record and turn > watch:
            until = frozen if turn <= frozen else strategy.hold_until(turn, positions)
            if until >= turn:
                span = int(min(until, max_turns)) - turn + 1
                used, hit = gambler.scan(sorted(set(positions)), span)
                if hit:
                    return CaptureRecord(turn + used - 1)
                turn += span
                continue
        if turn <= frozen:
            new = positions
        else:
            new = tuple(strategy.moves(turn, positions))
            if len(new) != len(positions):
                raise IllegalMove(f"turn {turn}: expected {len(positions)} moves, got {len(new)}")
            for a, b in zip(positions, new):
                if a != b and b not in adj_sets[a]:
                    raise IllegalMove(f"turn {turn}: {type(strategy).__name__} moved a cop {a} -> {b}")
        g = gambler.next()
        if log is not None:
            log.append((new, g))
            if turn <= watch:
                observations += (g,)
        if g in new:
            return CaptureRecord(turn, False, observations, log)
        if turn <= watch:
            strategy.observe((g,))
        positions = new
        turn += 1
    return CaptureRecord(max_turns, True, observations, log)


@dataclass(frozen=True)
class CaptureStats:
    mean: float
    std_error: float
    trials: int
    censored: int
    total: int = field(default=0, repr=False)
    total_sq: int = field(default=0, repr=False)

    @classmethod
    def from_sums(cls, trials: int, total: int, total_sq: int, censored: int) -> "CaptureStats":
        mean = total / trials
        if trials > 1:
            # exact integer numerator keeps the result independent of summation order
            var = (trials * total_sq - total * total) / (trials * (trials - 1))
            se = math.sqrt(max(var, 0.0) / trials)
        else:
            se = 0.0
        return cls(mean, se, trials, censored, total, total_sq)


def _run_trials(config, strategy, dist, base_seed, start, stop) -> tuple[int, int, int]:
    rng = GameRng(base_seed, start)
    total = total_sq = censored = 0
    for i in range(start, stop):
        rng.seek(i)
        rec = run_game(config, strategy, dist, rng)
        total += rec.turn
        total_sq += rec.turn * rec.turn
        censored += rec.censored
    return total, total_sq, censored


def estimate_capture_time(
    config: GameConfig,
    strategy: "Strategy",
    dist: GamblerDistribution,
    trials: int,
    base_seed: int,
    workers: int = 1,
) -> CaptureStats:
    """Mean capture time over ``trials`` independent games.

    Censored games count as ``max_turns`` and are tallied in ``censored``.
    """
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    if dist.n != config.graph.n:
        raise ValueError(f"distribution has {dist.n} entries for a {config.graph.n}-vertex graph")
    strategy.check(config)
    if workers <= 1 or trials < 2 * workers:
        sums = [_run_trials(config, strategy, dist, base_seed, 0, trials)]
    else:
        bounds = np.linspace(0, trials, 4 * workers + 1).astype(int).tolist()
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_trials, config, strategy, dist, base_seed, a, b)
                       for a, b in zip(bounds, bounds[1:]) if b > a]
            sums = [f.result() for f in futures]
    total = sum(s[0] for s in sums)
    total_sq = sum(s[1] for s in sums)
    censored = sum(s[2] for s in sums)
    return CaptureStats.from_sums(trials, total, total_sq, censored)


@dataclass(frozen=True)
class BoundCheck:
    passed: bool
    z: float


def _z(mean: float, bound: float, se: float) -> float:
    if se > 0:
        return (mean - bound) / se
    if mean == bound:
        return 0.0
    return math.copysign(math.inf, mean - bound)


def verify_bound(stats: CaptureStats, bound: float) -> BoundCheck:
    """Upper bound holds if the mean is within three standard errors of it and nothing was censored."""
    if stats.trials < 30:
        raise TooFewTrials(f"need at least 30 trials, got {stats.trials}")
    ok = stats.mean <= bound + 3 * stats.std_error and stats.censored == 0
    return BoundCheck(ok, _z(stats.mean, bound, stats.std_error))


def verify_lower_bound(stats: CaptureStats, bound: float) -> BoundCheck:
    if stats.trials < 30:
        raise TooFewTrials(f"need at least 30 trials, got {stats.trials}")
    ok = stats.mean >= bound - 3 * stats.std_error and stats.censored == 0
    return BoundCheck(ok, _z(stats.mean, bound, stats.std_error))
