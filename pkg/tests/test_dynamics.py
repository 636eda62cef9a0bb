import math
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moran.dynamics import (
    MutantState,
    Outcome,
    drift_samples,
    empirical_drift,
    expected_drift,
    rng_stream,
    run_replicate,
    run_to_absorption,
    simulate_many,
    step,
)
from moran.graph import double_star_halves, gen_clique, gen_double_star, gen_path, gen_star, potential

from conftest import family_graphs
from oracles import expected_drift_bruteforce
from test_graph import connected_graphs


def binomial_z(successes, trials, p):
    return (successes - trials * p) / math.sqrt(trials * p * (1 - p))


# --------------------------------------------------------------------------- state & streams


def test_mutant_state_bookkeeping():
    g = gen_path(5)
    s = MutantState(g, [3, 1], 2.0)
    assert s.mutants == {1, 3}
    assert s.mutant_count == 2
    assert s.cached_W == 2 * 2 + 3
    assert 1 in s and 0 not in s
    assert not s.is_absorbing()
    assert MutantState(g, [], 2.0).is_absorbing()
    assert MutantState(g, range(5), 2.0).is_absorbing()


def test_rng_stream_reproducible_and_distinct():
    a = rng_stream(7, 3).random(8)
    assert np.array_equal(a, rng_stream(7, 3).random(8))
    assert not np.array_equal(a, rng_stream(7, 4).random(8))
    assert not np.array_equal(a, rng_stream(8, 3).random(8))
    with pytest.raises(ValueError):
        rng_stream(-1, 0)
    with pytest.raises(ValueError):
        rng_stream(2**64, 0)


# --------------------------------------------------------------------------- step


@pytest.mark.parametrize("r", [0.3, 1.0, 4.0])
def test_absorbing_states_are_fixed_points(r):
    g = gen_star(5)
    rng = rng_stream(1, 0)
    full = MutantState(g, range(5), r)
    empty = MutantState(g, [], r)
    for _ in range(200):
        assert step(g, full, r, rng).mutants == set(range(5))
        assert step(g, empty, r, rng).mutants == set()


def test_k2_one_step_distribution():
    g = gen_clique(2)
    rng = rng_stream(11, 0)
    trials = 40_000
    fixed = 0
    for _ in range(trials):
        s = step(g, MutantState(g, [0], 2.0), 2.0, rng)
        assert s.mutant_count in (0, 2)
        fixed += s.mutant_count == 2
    assert abs(binomial_z(fixed, trials, 2 / 3)) < 5


def test_step_rejects_mismatched_fitness():
    g = gen_path(3)
    with pytest.raises(ValueError):
        step(g, MutantState(g, [0], 2.0), 1.5, rng_stream(0, 0))


@pytest.mark.parametrize("name, g", family_graphs([4, 7]))
@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_step_changes_one_vertex_by_reciprocal_degree(name, g, r):
    rng = rng_stream(5, 0)
    s = MutantState(g, [0], r)
    for _ in range(2000):
        before = s.mutants
        phi0 = potential(g, before)
        after = step(g, s, r, rng).mutants
        diff = before ^ after
        assert len(diff) <= 1
        dphi = potential(g, after) - phi0
        if diff:
            (y,) = diff
            assert math.isclose(abs(dphi), 1 / g.degree[y], abs_tol=1e-12)
        else:
            assert dphi == 0
        if s.is_absorbing():
            s = MutantState(g, [int(rng.integers(g.n))], r)


@pytest.mark.parametrize("name, g", family_graphs([3, 6]))
def test_python_step_matches_trajectory_kernel(name, g):
    for i in range(30):
        res = run_to_absorption(g, 1.5, 1, 10**6, rng_stream(3, i))
        rng = rng_stream(3, i)
        s = MutantState(g, [1], 1.5)
        steps = 0
        while not s.is_absorbing():
            step(g, s, 1.5, rng)
            steps += 1
        assert steps == res.steps_taken
        assert (s.mutant_count == g.n) == (res.outcome is Outcome.FIXATION)


# --------------------------------------------------------------------------- trajectories


def test_zero_cap_truncates_immediately():
    res = run_to_absorption(gen_path(4), 2.0, 2, 0, rng_stream(0, 0))
    assert res.outcome is Outcome.TRUNCATED
    assert res.steps_taken == 0
    assert res.start_vertex == 2


def test_truncated_iff_cap_reached():
    g = gen_star(30)
    for i in range(200):
        res = run_to_absorption(g, 1.0, 0, 50, rng_stream(9, i))
        assert (res.outcome is Outcome.TRUNCATED) == (res.steps_taken == 50)
        assert res.steps_taken <= 50


def test_trajectory_deterministic():
    g = gen_double_star(12)
    a = [run_replicate(g, 1.3, 10**9, rng_stream(42, i)) for i in range(50)]
    b = [run_replicate(g, 1.3, 10**9, rng_stream(42, i)) for i in range(50)]
    assert a == b


def test_k2_fixation_fraction():
    trials = 100_000
    b = simulate_many(gen_clique(2), 2.0, trials, 10**9, rng_stream(1, 0))
    fixed = int(np.sum(b.outcomes == Outcome.FIXATION.value))
    assert abs(binomial_z(fixed, trials, 2 / 3)) < 5


def test_path3_neutral_fixation_is_one_third():
    trials = 100_000
    b = simulate_many(gen_path(3), 1.0, trials, 10**9, rng_stream(2, 0))
    fixed = int(np.sum(b.outcomes == Outcome.FIXATION.value))
    assert abs(binomial_z(fixed, trials, 1 / 3)) < 5
    # starts are uniform
    counts = np.bincount(b.starts, minlength=3)
    assert all(abs(binomial_z(c, trials, 1 / 3)) < 5 for c in counts)


# --------------------------------------------------------------------------- drift


def test_drift_neutral_is_exactly_zero():
    for _, g in family_graphs([3, 5, 8]):
        for X in ([0], [0, 1], list(range(1, g.n))):
            assert expected_drift(g, X, 1.0) == 0.0


def test_drift_k2():
    assert expected_drift(gen_clique(2), [0], 2.0) == pytest.approx(1 / 3, abs=1e-15)


def test_drift_rejects_trivial_sets():
    g = gen_path(3)
    with pytest.raises(ValueError):
        expected_drift(g, [], 2.0)
    with pytest.raises(ValueError):
        expected_drift(g, [0, 1, 2], 2.0)
    with pytest.raises(ValueError):
        drift_samples(g, [0, 1, 2], 2.0, 10, rng_stream(0, 0))


@pytest.mark.parametrize("name, g", family_graphs(range(2, 6)))
def test_drift_matches_bruteforce(name, g):
    for k in range(1, g.n):
        for X in combinations(range(g.n), k):
            for r in (Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(3)):
                want = float(expected_drift_bruteforce(g.adjacency, X, r))
                assert expected_drift(g, X, float(r)) == pytest.approx(want, abs=1e-14)


@settings(max_examples=150, deadline=None)
@given(connected_graphs(max_n=10), st.data(), st.floats(0.05, 20.0))
def test_drift_strict_bounds(g, data, r):
    k = data.draw(st.integers(1, g.n - 1))
    X = data.draw(st.permutations(range(g.n)))[:k]
    d = expected_drift(g, X, r)
    if r > 1:
        assert d > (1 - 1 / r) / g.n**3
    elif r < 1:
        assert d < (r - 1) / g.n**3


def test_double_star_drift_scales_like_inverse_cube():
    scaled = []
    for n in (10, 20, 40, 80):
        g = gen_double_star(n)
        half, _ = double_star_halves(g)
        scaled.append(expected_drift(g, half, 2.0) * n**3)
    assert max(scaled) / min(scaled) < 4


def test_empirical_drift_neutral():
    g = gen_double_star(7)
    inc = drift_samples(g, [0, 2, 3], 1.0, 100_000, rng_stream(4, 0))
    assert abs(inc.mean()) <= 5 * inc.std(ddof=1) / math.sqrt(inc.size)


def test_empirical_drift_k2():
    inc = drift_samples(gen_clique(2), [0], 2.0, 1_000_000, rng_stream(4, 1))
    se = inc.std(ddof=1) / math.sqrt(inc.size)
    assert abs(inc.mean() - 1 / 3) <= 5 * se
    assert empirical_drift(gen_clique(2), [0], 2.0, 1000, rng_stream(4, 2)) == pytest.approx(1 / 3, abs=0.15)


def test_single_trial_is_a_realizable_increment():
    g = gen_star(5)
    allowed = {0.0, 1.0, -1.0, 0.25, -0.25}
    for i in range(100):
        assert empirical_drift(g, [0, 1], 1.7, 1, rng_stream(6, i)) in allowed


@pytest.mark.parametrize("name, g", family_graphs(range(2, 9)))
def test_empirical_drift_matches_exact_disadvantageous(name, g):
    worst = 0.0
    for k in range(1, g.n):
        for i, X in enumerate(combinations(range(g.n), k)):
            inc = drift_samples(g, X, 0.5, 100_000, rng_stream(g.n * 1000 + k, i))
            se = inc.std(ddof=1) / math.sqrt(inc.size)
            worst = max(worst, abs(inc.mean() - expected_drift(g, X, 0.5)) / se)
    assert worst <= 5
