"""Forward-only sweeps along a path.

A sweeping cop starts on position 0 before turn 1 and only ever stays or
steps to the next position.  Position 0 is occupied for ``waits[0]``
capture turns; every later position ``j`` up to the hold position for
``1 + waits[j]`` turns (the arrival turn plus the waits).  The cop never
leaves the hold position, which is the last position carrying mass, so
trailing zero-mass positions are never visited.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import InvalidQ


@dataclass(frozen=True)
class SweepSchedule:
    waits: tuple[int, ...]
    expected: float

    @property
    def hold(self) -> int:
        return len(self.waits)

    def step_turns(self) -> list[int]:
        """Turn on which the cop steps into position ``j``, for ``j = 1..hold``."""
        out, turn = [], 0
        for w in self.waits:
            turn += w + 1
            out.append(turn)
        return out


def _segment(q: float, c: np.ndarray | int):
    """Expected-time contribution per unit survival of ``c`` turns at capture probability ``q``."""
    if q == 0:
        return c, np.ones_like(c, dtype=float) if isinstance(c, np.ndarray) else 1.0
    stay = (1.0 - q) ** c
    return (1.0 - stay) / q, stay


def _hold_position(q: np.ndarray) -> int:
    nz = np.flatnonzero(q > 0)
    if nz.size == 0:
        raise InvalidQ("sweep needs at least one position with positive mass")
    return int(nz[-1])


def _check_q(q: Sequence[float]) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or q.size == 0:
        raise InvalidQ("q must be a non-empty vector")
    if (q < 0).any():
        raise InvalidQ("q must be non-negative")
    if q.sum() > 1 + 1e-9:
        raise InvalidQ(f"q sums to {q.sum()}, more than 1")
    return q


def sweep_expected_time(q: Sequence[float], waits: Sequence[int]) -> float:
    """Exact expected capture time of a sweep holding at position ``len(waits)``."""
    q = _check_q(q)
    hold = len(waits)
    total, survive = 0.0, 1.0
    for j, w in enumerate(waits):
        c = w if j == 0 else w + 1
        part, stay = _segment(float(q[j]), c)
        total += survive * part
        survive *= stay
    if survive == 0:
        return total
    if q[hold] == 0:
        return math.inf
    return total + survive / q[hold]


def plan_sweep_schedule(
    q: Sequence[float], max_wait: int | None = None, min_first_wait: int = 0
) -> SweepSchedule:
    """Wait counts minimising the expected capture time of a forward sweep.

    The objective is linear in the survival probability at arrival, so a
    backward pass over positions finds the optimum exactly within the wait
    cap (default ``ceil(10*m)``).  ``min_first_wait = 1`` models a cop that
    is pinned to its start on turn 1.  Ties go to the shorter wait.
    """
    q = _check_q(q)
    hold = _hold_position(q)
    if max_wait is None:
        max_wait = math.ceil(10 * q.size)
    if hold == 0:
        return SweepSchedule((), 1.0 / q[0])
    best = 1.0 / q[hold]
    choice = [0] * hold
    for j in range(hold - 1, -1, -1):
        waits = np.arange(min_first_wait if j == 0 else 0, max_wait + 1)
        c = waits if j == 0 else waits + 1
        part, stay = _segment(float(q[j]), c)
        # stay == 0 means capture is certain before moving on
        value = part + np.where(stay > 0, stay * best, 0.0)
        i = int(np.argmin(value))
        choice[j] = int(waits[i])
        best = float(value[i])
    return SweepSchedule(tuple(choice), best)


class SweepRun:
    """Cops moving in unison along ``order`` according to a schedule.

    ``bases`` are the cops' starting indices in ``order``; a cop that would
    step past the end stays where it is.
    """

    def __init__(self, order: Sequence[int], schedule: SweepSchedule, bases: Sequence[int]):
        self.order = list(order)
        self.schedule = schedule
        self.steps = schedule.step_turns()
        self.bases = list(bases)

    def positions(self, turn: int) -> list[int]:
        s = bisect.bisect_right(self.steps, turn)
        last = len(self.order) - 1
        return [self.order[min(b + s, last)] for b in self.bases]

    def hold_until(self, turn: int) -> float:
        i = bisect.bisect_left(self.steps, turn)
        if i == len(self.steps):
            return math.inf
        return self.steps[i] - 1
