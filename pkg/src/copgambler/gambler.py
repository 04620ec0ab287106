"""Gambler distributions, sampling and frequency estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptySamples, EmptySupport, InvalidP, InvalidParameters

SUM_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class GamblerDistribution:
    """Probability of the gambler landing on each vertex, identical every turn."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise InvalidParameters("probabilities must be a non-empty vector")
        if (p < 0).any() or not np.isfinite(p).all():
            raise InvalidParameters("probabilities must be finite and non-negative")
        if abs(p.sum() - 1.0) > SUM_TOLERANCE:
            raise InvalidParameters(f"probabilities sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def n(self) -> int:
        return self.probs.size

    def __len__(self) -> int:
        return self.probs.size

    def __getitem__(self, i: int) -> float:
        return float(self.probs[i])

    @cached_property
    def cdf(self) -> np.ndarray:
        c = np.cumsum(self.probs)
        c[-1] = 1.0
        # zero-mass tail vertices must share the final edge so searchsorted never lands on them
        last = int(np.flatnonzero(self.probs)[-1])
        c[last:] = 1.0
        c.setflags(write=False)
        return c

    @cached_property
    def support(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.probs))

    @classmethod
    def from_weights(cls, weights: Sequence[float]) -> "GamblerDistribution":
        w = np.asarray(weights, dtype=float)
        if w.sum() <= 0:
            raise EmptySupport("weights have no positive mass")
        return cls(w / w.sum())


@dataclass(frozen=True, eq=False)
class EmpiricalEstimate:
    counts: np.ndarray

    @property
    def sample_count(self) -> int:
        return int(self.counts.sum())

    @cached_property
    def freqs(self) -> np.ndarray:
        return self.counts / self.sample_count


def uniform_distribution(support: Iterable[int], n: int) -> GamblerDistribution:
    support = sorted(set(support))
    if not support:
        raise EmptySupport("uniform distribution needs a non-empty support")
    p = np.zeros(n)
    p[support] = 1.0 / len(support)
    return GamblerDistribution(p)


def point_mass(v: int, n: int) -> GamblerDistribution:
    return uniform_distribution([v], n)


def dirichlet_distribution(n: int, seed: int, alpha: float = 1.0) -> GamblerDistribution:
    """Random distribution, uniform on the simplex for ``alpha = 1``."""
    rng = np.random.default_rng(seed)
    return GamblerDistribution.from_weights(rng.dirichlet(np.full(n, alpha)))


def geometric_distribution(support: Sequence[int], n: int, ratio: float = 0.5) -> GamblerDistribution:
    """Mass proportional to ``ratio**j`` on the j-th support vertex."""
    if not support:
        raise EmptySupport("geometric distribution needs a non-empty support")
    w = np.zeros(n)
    for j, v in enumerate(support):
        w[v] = ratio ** j
    return GamblerDistribution.from_weights(w)


def adversarial_cycle_distribution(
    n: int, t: int, cop_start: int, epsilon: float | None = None
) -> GamblerDistribution:
    """Hide most mass on the arc of the cycle farthest from the cop.

    The arc ``R`` has ``r`` vertices, ``r`` being ``floor(t*sqrt(n))`` or one
    more, picked so that ``R`` is symmetric about the antipode: odd for even
    ``n``, even for odd ``n``.  ``R`` vertices get ``(1-eps)/r`` each and the
    rest ``eps/(n-r)``.  Vertices are numbered around the cycle.
    """
    if epsilon is None:
        epsilon = 1.0 / math.sqrt(n)
    if not 0 < epsilon < 1:
        raise InvalidParameters(f"epsilon must lie in (0, 1), got {epsilon}")
    if n < 3 or not 0 <= cop_start < n:
        raise InvalidParameters(f"bad cycle size {n} or start {cop_start}")
    r = math.isqrt(t * t * n)
    if (r % 2 == 1) == (n % 2 == 1):
        r += 1
    if not 0 < r < n:
        raise InvalidParameters(f"arc size r={r} must satisfy 0 < r < n={n}")
    d = np.arange(n) - cop_start
    dist = np.minimum(d % n, (-d) % n)
    order = np.lexsort((np.arange(n), -dist))
    far = order[:r]
    p = np.full(n, epsilon / (n - r))
    p[far] = (1 - epsilon) / r
    return GamblerDistribution(p)


def sample(dist: GamblerDistribution, rng: np.random.Generator) -> int:
    return int(np.searchsorted(dist.cdf, rng.random(), side="right"))


def sample_many(dist: GamblerDistribution, rng: np.random.Generator, size: int) -> np.ndarray:
    return np.searchsorted(dist.cdf, rng.random(size), side="right")


def empirical_frequencies(samples: Sequence[int] | np.ndarray, n: int) -> EmpiricalEstimate:
    samples = np.asarray(samples, dtype=np.intp)
    if samples.size == 0:
        raise EmptySamples("need at least one sample")
    return EmpiricalEstimate(np.bincount(samples, minlength=n))


def chebyshev_error_bound(W: int, P: float) -> float:
    """Deviation every frequency stays within, simultaneously, with probability at least P."""
    if not 0 < P < 1:
        raise InvalidP(f"P must lie in (0, 1), got {P}")
    if W < 1:
        raise InvalidParameters(f"W must be positive, got {W}")
    return math.sqrt((1.0 / W) / (1.0 - P))


def clip_probabilities(est: EmpiricalEstimate | np.ndarray, epsilon: float) -> np.ndarray:
    """``max(0, p' - epsilon)`` elementwise.  The result generally sums to less than 1."""
    if epsilon < 0:
        raise InvalidParameters(f"epsilon must be non-negative, got {epsilon}")
    freqs = est.freqs if isinstance(est, EmpiricalEstimate) else np.asarray(est, dtype=float)
    return np.maximum(0.0, freqs - epsilon)


def read_distribution(path: str | Path) -> GamblerDistribution:
    values = [float(x) for x in Path(path).read_text().split()]
    return GamblerDistribution(np.array(values))


def write_distribution(dist: GamblerDistribution, path: str | Path) -> None:
    Path(path).write_text("".join(f"{float(p)!r}\n" for p in dist.probs))
