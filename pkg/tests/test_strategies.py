from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from copgambler.engine import (
    KNOWN,
    UNKNOWN,
    GameConfig,
    GameContext,
    GameRng,
    estimate_capture_time,
    observed,
    once_visible,
    run_game,
    verify_bound,
)
from copgambler.errors import (
    AllZeroValues,
    IncompatibleStrategy,
    InvalidParameters,
    InvalidP,
    NotAPath,
    NotAStar,
    NotComplete,
    NotACycle,
)
from copgambler.gambler import (
    adversarial_cycle_distribution,
    clip_probabilities,
    dirichlet_distribution,
    geometric_distribution,
    point_mass,
    uniform_distribution,
)
from copgambler.graph import generate
from copgambler.partition import color_sectors, cover_sectors, sector_centers
from copgambler.strategies import (
    STRATEGIES,
    CompleteRandom,
    CycleInnings,
    DistributedWMW,
    Hybrid,
    SampleAndPlan,
    PathTeam,
    Stakeout,
    StarDistributed,
    Traversal,
    WatchMoveWait,
    build_strategy,
    stakeout_target,
)
from oracles import once_visible_expectation, wmw1_expectation


def _ctx(graph, variant, starts, seed=0, known=None):
    return GameContext(graph, variant, tuple(starts), np.random.default_rng(seed), known)


def _trace(strategy, ctx, turns):
    strategy.reset(ctx)
    pos = ctx.cop_start
    out = []
    for turn in range(1, turns + 1):
        if turn > ctx.frozen_turns:
            pos = tuple(strategy.moves(turn, pos))
        out.append(pos)
    return out


# watch, move, wait

def test_wmw_picks_the_mode():
    g = generate("path", 7)
    s = WatchMoveWait(3)
    s.reset(_ctx(g, observed(3), [3]))
    s.observe([6, 1, 6])
    assert s.targets == [6]


def test_wmw_tie_prefers_closest_mode():
    g = generate("path", 7)
    s = WatchMoveWait(2)
    s.reset(_ctx(g, observed(2), [2]))
    s.observe([6, 1])
    assert s.targets == [1]


def test_wmw_equidistant_tie_is_a_fair_coin():
    g = generate("path", 5)
    s = WatchMoveWait(2)
    ctx = _ctx(g, observed(2), [2], seed=11)
    picks = 0
    runs = 100_000
    for _ in range(runs):
        s.reset(ctx)
        s.observe([0, 4])
        picks += s.targets[0] == 4
    assert abs(picks / runs - 0.5) < 0.01


def test_wmw_requires_enough_observations_and_one_cop():
    g = generate("path", 5)
    with pytest.raises(IncompatibleStrategy):
        WatchMoveWait(3).check(GameConfig(g, (0,), observed(2)))
    with pytest.raises(IncompatibleStrategy):
        WatchMoveWait(1).check(GameConfig(g, (0, 1), observed(1)))
    with pytest.raises(IncompatibleStrategy):
        WatchMoveWait(1).check(GameConfig(g, (0,), UNKNOWN))


@pytest.mark.parametrize("seed", range(6))
def test_wmw1_simulation_matches_exact_expectation(seed):
    g = generate("random_connected", 14, seed)
    d = dirichlet_distribution(14, seed)
    start = g.centers[0]
    exact = wmw1_expectation(g, start, d.probs)
    stats = estimate_capture_time(GameConfig(g, (start,), observed(1)), WatchMoveWait(1), d, 20_000, seed)
    assert abs(stats.mean - exact) <= 4 * stats.std_error
    assert exact <= g.n + g.radius


@pytest.mark.parametrize("seed", range(4))
def test_once_visible_simulation_matches_exact_expectation(seed):
    g = generate("random_tree", 12, seed)
    d = dirichlet_distribution(12, seed + 50)
    start = g.centers[0]
    exact = once_visible_expectation(g, start, d.probs)
    stats = estimate_capture_time(GameConfig(g, (start,), once_visible(1)), WatchMoveWait(1), d, 20_000, seed)
    assert abs(stats.mean - exact) <= 4 * stats.std_error
    assert exact <= g.n + g.radius - 1


def test_known_variant_simulates_its_own_observation():
    g = generate("star", 6)
    s = WatchMoveWait(1)
    s.reset(_ctx(g, KNOWN, [0], known=point_mass(4, 6)))
    assert s.targets == [4] and not s.awaiting


# stakeout

def test_stakeout_examples():
    star = generate("star", 5)
    v, obj = stakeout_target([0, 0.25, 0.25, 0.25, 0.25], 0, star)
    assert v in (1, 2, 3, 4) and math.isclose(obj, 5)
    assert stakeout_target([0, 0, 1, 0, 0], 2, star) == (2, 1.0)
    path = generate("path", 4)
    v, obj = stakeout_target([0.5, 0.1, 0.1, 0.3], 0, path)
    assert v == 0 and math.isclose(obj, 2)
    with pytest.raises(AllZeroValues):
        stakeout_target([0, 0, 0, 0], 0, path)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(2, 25))
def test_stakeout_target_is_brute_force_argmin(seed, n):
    g = generate("random_connected", n, seed)
    values = np.random.default_rng(seed).random(n) * (np.random.default_rng(seed + 1).random(n) < 0.6)
    if not values.any():
        values[n - 1] = 0.3
    start = seed % n
    objective = [g.distances[start, v] + 1 / values[v] if values[v] > 0 else math.inf for v in range(n)]
    v, obj = stakeout_target(values, start, g)
    assert v == int(np.argmin(objective)) and math.isclose(obj, min(objective))
    # clipping by zero leaves the target alone
    assert stakeout_target(clip_probabilities(values, 0.0), start, g)[0] == v


def test_stakeout_validation():
    with pytest.raises(AllZeroValues):
        Stakeout([0, 0])
    with pytest.raises(ValueError):
        Stakeout([-0.1, 1])
    with pytest.raises(IncompatibleStrategy):
        Stakeout([1, 0]).check(GameConfig(generate("path", 3), (0,), KNOWN))


# estimate-and-plan

def test_kw_clipping_example():
    assert np.allclose(clip_probabilities(np.array([0.5, 0.5, 0.0]), 0.1), [0.4, 0.4, 0.0])


class _FixedEpsilon(SampleAndPlan):
    def __init__(self, t, eps):
        super().__init__(t)
        self._eps = eps

    @property
    def epsilon(self):
        return self._eps


def test_kw_clipped_stakeout_and_fallback():
    g = generate("star", 3)  # a path 1-0-2 seen from its middle
    for eps in (0.1, 0.5, 0.7):
        s = _FixedEpsilon(4, eps)
        s.reset(_ctx(g, observed(4), [0]))
        s.observe([1, 2, 1, 2])
        assert s.sweep is None
        assert s.targets == [1]


def test_kw_sweeps_a_path_from_an_endpoint():
    g = generate("path", 6)
    s = SampleAndPlan(4)
    s.reset(_ctx(g, observed(4), [5]))
    s.observe([1, 3, 3, 5])
    assert s.sweep is not None
    assert s.sweep.order == [5, 4, 3, 2, 1, 0]
    s.reset(_ctx(g, observed(4), [2]))
    s.observe([1, 3, 3, 5])
    assert s.sweep is None and s.targets == [3]


def test_kw_parameter_validation():
    with pytest.raises(InvalidP):
        SampleAndPlan(10, w=2, P=0.6)
    with pytest.raises(InvalidP):
        SampleAndPlan(10, P=1.0)
    assert math.isclose(SampleAndPlan(100, w=4, P=0.5).epsilon, math.sqrt(0.02))
    with pytest.raises(IncompatibleStrategy):
        SampleAndPlan(2).check(GameConfig(generate("path", 4), (0,), KNOWN))


@pytest.mark.parametrize("kind,seed", [("random_tree", 1), ("random_connected", 2), ("path", 0), ("star", 0)])
def test_kw_with_one_observation_plays_like_wmw1(kind, seed):
    g = generate(kind, 11, seed)
    d = dirichlet_distribution(11, seed + 7)
    start = 0 if kind == "path" else g.centers[0]
    cfg = GameConfig(g, (start,), observed(1))
    rng = GameRng(5)
    for trial in range(300):
        rng.seek(trial)
        a = run_game(cfg, SampleAndPlan(1), d, rng)
        rng.seek(trial)
        b = run_game(cfg, WatchMoveWait(1), d, rng)
        assert a.turn == b.turn


# traversal and hybrid

def test_traversal_star_walk():
    g = generate("star", 5)
    trace = [p[0] for p in _trace(Traversal(), _ctx(g, UNKNOWN, [0]), 10)]
    assert trace == [1, 0, 2, 0, 3, 0, 4, 0, 1, 0]


@pytest.mark.parametrize("seed", range(10))
def test_traversal_walk_survival_at_most_one_over_e(seed):
    g = generate("random_connected", 20, seed)
    p = dirichlet_distribution(20, seed, alpha=0.3).probs
    trace = [q[0] for q in _trace(Traversal(), _ctx(g, UNKNOWN, [g.centers[0]]), 2 * (g.n - 1))]
    assert set(trace) == set(range(g.n))
    assert np.prod([1 - p[v] for v in trace]) <= math.exp(-1) + 1e-12


def test_traversal_bound_on_random_graphs():
    for seed in range(5):
        g = generate("random_connected", 25, seed)
        d = dirichlet_distribution(25, seed + 3)
        stats = estimate_capture_time(GameConfig(g, (g.centers[0],), UNKNOWN), Traversal(), d, 2000, seed)
        assert verify_bound(stats, 2 * (g.n - 1) / (1 - 1 / math.e)).passed


def test_sector_traversal_stays_in_sectors():
    g = generate("random_tree", 30, 4)
    cover = cover_sectors(g, 3)
    s = Traversal(cover)
    starts = s.default_starts(g, 3)
    cfg = GameConfig(g, starts, UNKNOWN)
    s.check(cfg)
    for pos in _trace(s, _ctx(g, UNKNOWN, starts), 80):
        assert all(v in sector for v, sector in zip(pos, cover.sectors))


def test_hybrid_with_huge_beta_matches_kw():
    g = generate("random_tree", 15, 3)
    d = dirichlet_distribution(15, 9)
    cfg = GameConfig(g, (g.centers[0],), observed(3))
    rng = GameRng(8)
    for trial in range(300):
        rng.seek(trial)
        a = run_game(cfg, Hybrid(3, beta=10**6), d, rng, record=True)
        rng.seek(trial)
        b = run_game(cfg, SampleAndPlan(3), d, rng, record=True)
        assert a.turn == b.turn and a.log == b.log


def test_hybrid_with_tiny_beta_traverses_from_turn_two():
    g = generate("star", 5)
    h = Hybrid(1, beta=1e-9)
    ctx = _ctx(g, observed(1), [0])
    h.reset(ctx)
    h.observe([3])
    assert h.x == 1
    positions = [p[0] for p in _trace_after_reset(h, ctx, 9)]
    assert positions == [0, 1, 0, 2, 0, 3, 0, 4, 0]


def _trace_after_reset(strategy, ctx, turns):
    pos, out = ctx.cop_start, []
    for turn in range(1, turns + 1):
        if turn > ctx.frozen_turns:
            pos = tuple(strategy.moves(turn, pos))
        out.append(pos)
    return out


def test_hybrid_rescues_a_misled_stakeout():
    # all values point at a leaf the gambler never visits
    g = generate("star", 8)
    p = np.full(8, 1 / 6)
    p[0] = p[7] = 0
    from copgambler.gambler import GamblerDistribution
    d = GamblerDistribution(p)
    stakeout = estimate_capture_time(GameConfig(g, (0,), observed(1), max_turns=200),
                                     Stakeout(point_mass(7, 8).probs), d, 200, 1)
    assert stakeout.censored == 200

    class Misled(Hybrid):
        def reset(self, ctx):
            super().reset(ctx)
            self.kw = Stakeout(point_mass(7, 8).probs)
            self.kw.reset(ctx)

    x = 3
    h = Misled(1, beta=x / 8)
    stats = estimate_capture_time(GameConfig(g, (0,), observed(1)), h, d, 3000, 1)
    assert stats.censored == 0
    assert verify_bound(stats, x + 2 * (g.n - 1) / (1 - 1 / math.e)).passed


# teams

def test_distributed_rule_follows_colors():
    g = generate("random_tree", 30, 2)
    cover = cover_sectors(g, 3)
    colors = color_sectors(cover)
    s = DistributedWMW(cover, colors)
    starts = s.default_starts(g, 3)
    s.check(GameConfig(g, starts, observed(1)))
    for v in range(g.n):
        s.reset(_ctx(g, observed(1), starts))
        s.observe([v])
        c = colors.color_of(v)
        assert s.targets == [colors.vertex_with(j, c) for j in range(3)]
        assert v in s.targets
    for center, sector in zip(sector_centers(g, cover), cover.sectors):
        assert max(g.distances[center, u] for u in sector) <= g.n // 4


def test_distributed_needs_enough_cops():
    g = generate("random_tree", 20, 1)
    cover = cover_sectors(g, 3)
    with pytest.raises(IncompatibleStrategy):
        DistributedWMW(cover, color_sectors(cover)).check(GameConfig(g, (0, 0), observed(1)))


def test_star_distributed_center_observation_keeps_everyone_home():
    g = generate("star", 13)
    s = StarDistributed(3, 13)
    assert s.default_starts(g, 3) == (0, 0, 0)
    s.reset(_ctx(g, observed(1), [0, 0, 0]))
    s.observe([0])
    assert s.targets == [0, 0, 0]
    s.reset(_ctx(g, observed(1), [0, 0, 0]))
    s.observe([5])
    assert 5 in s.targets and sum(t != 0 for t in s.targets) <= 3


def test_star_distributed_single_cop_matches_wmw1():
    g = generate("star", 9)
    d = geometric_distribution(range(1, 9), 9, 0.7)
    stats = estimate_capture_time(GameConfig(g, (0,), observed(1)), StarDistributed(1, 9), d, 5000, 2)
    assert math.isclose(stats.mean, wmw1_expectation(g, 0, d.probs), rel_tol=0.05)
    assert verify_bound(stats, g.n + 1).passed


def test_star_distributed_rejects_non_stars():
    with pytest.raises(NotAStar):
        StarDistributed(2).default_starts(generate("path", 5), 2)


def test_path_team_layout():
    g = generate("path", 16)
    s = PathTeam(4, uniform_distribution(range(16), 16), 16)
    assert s.spacing(16) == 4
    assert s.default_starts(g, 4) == (0, 4, 8, 12)
    assert np.allclose(s.folded(g), 0.25)
    with pytest.raises(NotAPath):
        s.default_starts(generate("star", 16), 4)


@pytest.mark.parametrize("k", [1, 3, 4, 5])
def test_path_team_bound(k):
    n = 16
    g = generate("path", n)
    d = dirichlet_distribution(n, k)
    s = PathTeam(k, d, n)
    stats = estimate_capture_time(GameConfig(g, s.default_starts(g, k), KNOWN), s, d, 4000, k)
    assert verify_bound(stats, s.spacing(n)).passed


def test_cycle_innings_trace():
    g = generate("cycle", 12)
    s = CycleInnings(3, 12)
    assert s.default_starts(g, 3) == (0, 4, 8)
    ctx = _ctx(g, UNKNOWN, (0, 4, 8), seed=3)
    trace = _trace(s, ctx, 8)
    step = s.d
    assert trace[0] == tuple((a + step) % 12 for a in (0, 4, 8))
    assert set(trace[3]) == {0, 4, 8} and set(trace[7]) == {0, 4, 8}
    assert trace[3] == tuple((a + 4 * step) % 12 for a in (0, 4, 8))


def test_cycle_innings_uses_both_directions():
    g = generate("cycle", 12)
    s = CycleInnings(3, 12)
    dirs = set()
    for seed in range(20):
        s.reset(_ctx(g, UNKNOWN, (0, 4, 8), seed=seed))
        dirs.add(s.d)
    assert dirs == {1, -1}


@pytest.mark.parametrize("n,k", [(12, 3), (24, 4), (25, 4), (10, 3)])
def test_cycle_inning_survival_at_most_one_over_e(n, k):
    g = generate("cycle", n)
    s = CycleInnings(k, n)
    m = s.innings_length(n)
    dists = [uniform_distribution(range(n), n), point_mass(n // 2, n),
             adversarial_cycle_distribution(n, 1, 0, 0.05), dirichlet_distribution(n, 1, 0.2)]
    for seed in range(2):
        trace = _trace(s, _ctx(g, UNKNOWN, s.default_starts(g, k), seed=seed), 3 * m)
        for d in dists:
            for inning in range(3):
                turns = trace[inning * m:(inning + 1) * m]
                survive = np.prod([1 - sum(d.probs[v] for v in set(pos)) for pos in turns])
                assert survive <= math.exp(-1) + 1e-12


def test_cycle_innings_rejects_non_cycles():
    with pytest.raises(NotACycle):
        CycleInnings(2).default_starts(generate("path", 6), 2)


def test_complete_random():
    g = generate("complete", 20)
    s = CompleteRandom(4, 20)
    s.reset(_ctx(g, UNKNOWN, (0, 1, 2, 3)))
    picks = s.moves(1, (0, 1, 2, 3))
    assert len(set(picks)) == 4
    stats = estimate_capture_time(GameConfig(g, (0, 1, 2, 3), UNKNOWN), s, point_mass(7, 20), 6000, 3)
    assert 5 - 3 * stats.std_error <= stats.mean <= 5 + 3 * stats.std_error
    full = estimate_capture_time(GameConfig(g, tuple(range(20)), UNKNOWN), CompleteRandom(20, 20),
                                 dirichlet_distribution(20, 0), 200, 0)
    assert full.mean == 1
    with pytest.raises(NotComplete):
        CompleteRandom(2, 5).check(GameConfig(generate("cycle", 5), (0, 1), UNKNOWN))


# registry

def test_registry_builds_everything():
    assert set(STRATEGIES) >= {"stay", "wmw1", "wmw_t", "stakeout", "kw_t", "traversal", "hybrid",
                               "distributed_wmw1", "star_distributed", "path_team", "cycle_innings",
                               "complete_random"}
    g = generate("path", 9)
    d = uniform_distribution(range(9), 9)
    kw = build_strategy("kw_t", g, 1, d, w=2, P=0.3)
    assert kw.t == 162 and kw.P == 0.3
    assert build_strategy("wmw_t", g, 1, d, t=4).t == 4
    assert build_strategy("hybrid", g, 1, d, t=3, beta=0.5).beta == 0.5
    with pytest.raises(InvalidParameters):
        build_strategy("nope", g, 1, d)
    with pytest.raises(InvalidParameters):
        build_strategy("wmw1", g, 1, d, t=3)
    with pytest.raises(InvalidParameters):
        build_strategy("kw_t", g, 1, d, t=3, colour="red")
    with pytest.raises(InvalidParameters):
        build_strategy("kw_t", g, 1, d)
