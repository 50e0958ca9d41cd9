import math

import numpy as np
import pytest

from cpregular import cp
from cpregular.graph import MultiGraph, complete_graph, path_graph


def test_harris_marks_respect_horizon():
    g = complete_graph(3)
    rng = np.random.default_rng(0)
    h = cp.sample_harris(g, 1.5, 4.0, rng)
    assert len(h.recovery) == 3
    assert len(h.transmission) == g.oriented_edge_count()
    for times in h.recovery + h.transmission:
        assert all(0 <= t <= 4.0 for t in times)
    with pytest.raises(ValueError):
        cp.evolve_harris(g, h, {0}, 5.0)


def test_evolve_empty_set_stays_empty():
    g = complete_graph(3)
    h = cp.sample_harris(g, 1.0, 2.0, np.random.default_rng(1))
    assert cp.evolve_harris(g, h, set(), 2.0) == set()
    assert cp.harris_extinction_time(g, h, set()) == 0.0


def test_loop_marks_are_noops():
    g = MultiGraph(1, [(0, 0)])
    h = cp.sample_harris(g, 5.0, 3.0, np.random.default_rng(2))
    tau = cp.harris_extinction_time(g, h, {0})
    # with only a loop, extinction is exactly the first recovery mark
    assert tau == pytest.approx(float(h.recovery[0][0]))


def test_harris_extinction_consistent_with_evolve():
    g = complete_graph(3)
    rng = np.random.default_rng(3)
    for _ in range(50):
        h = cp.sample_harris(g, 0.8, 6.0, rng)
        tau = cp.harris_extinction_time(g, h, {0, 1})
        if tau is None:
            assert cp.evolve_harris(g, h, {0, 1}, 6.0) != set()
        else:
            assert cp.evolve_harris(g, h, {0, 1}, tau) == set()


def test_gillespie_single_vertex_is_exponential():
    g = MultiGraph(1, [])
    rng = np.random.default_rng(4)
    taus = [cp.gillespie(g, 1.0, [0], rng).tau for _ in range(4000)]
    assert abs(np.mean(taus) - 1.0) < 3 * np.std(taus) / math.sqrt(len(taus))


def test_gillespie_censoring():
    g = complete_graph(4)
    traj = cp.gillespie(g, 50.0, [0], np.random.default_rng(5), horizon=0.5)
    # at lambda = 50 on K4 survival past 0.5 is overwhelmingly likely
    assert traj.censored and traj.extinction_time is None
    assert traj.peak_infected >= 1


def test_gillespie_records_kappa_and_events():
    g = path_graph(4)
    rng = np.random.default_rng(6)
    traj = cp.gillespie(g, 3.0, [0], rng, record_events=True)
    assert traj.kappa is not None and 0 <= traj.kappa <= 3
    kinds = {k for _, k, _ in traj.events}
    assert kinds <= {"recovery", "transmission"}
    times = [t for t, _, _ in traj.events]
    assert times == sorted(times)


def test_batch_determinism():
    g = complete_graph(4)
    a = cp.extinction_samples(g, 0.7, [0, 1], 64, 100.0, seed=9)
    b = cp.extinction_samples(g, 0.7, [0, 1], 64, 100.0, seed=9)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)
    c = cp.extinction_samples(g, 0.7, [0, 1], 64, 100.0, seed=10)
    assert not np.array_equal(a[0], c[0])


def test_batch_matches_reference_engine_on_k2():
    g = complete_graph(2)
    taus, censored, _ = cp.extinction_samples(g, 1.0, [0, 1], 20000, 1e6, seed=11)
    assert not censored.any()
    rng = np.random.default_rng(12)
    ref = [cp.gillespie(g, 1.0, [0, 1], rng).tau for _ in range(5000)]
    se = math.sqrt(np.var(taus) / taus.size + np.var(ref) / len(ref))
    assert abs(np.mean(taus) - np.mean(ref)) < 4 * se


def test_survival_curve_is_nonincreasing():
    g = complete_graph(3)
    grid = [0.5, 1.0, 2.0, 4.0]
    probs, se, _ = cp.survival_curve(g, 1.0, [0], 5000, grid, seed=13)
    assert all(probs[i] >= probs[i + 1] for i in range(len(grid) - 1))
    assert all(0 <= p <= 1 for p in probs)


def test_population_at_times_shapes_and_start():
    g = complete_graph(3)
    counts = cp.population_at_times(g, 1.0, [0, 1, 2], 100, [0.0, 1.0], seed=14)
    assert counts.shape == (100, 2)
    assert (counts[:, 0] == 3).all()


def test_kappa_samples_bounded_by_eccentricity():
    g = path_graph(5)
    dists, censored = cp.kappa_samples(g, 2.0, 0, 500, 1e5, seed=15)
    assert dists.max() <= 4 and dists.min() >= 0
    assert not censored.any()


def test_harris_after_shifts_marks():
    g = complete_graph(2)
    h = cp.sample_harris(g, 1.0, 5.0, np.random.default_rng(16))
    shifted = cp.harris_after(h, 2.0)
    assert shifted.horizon == pytest.approx(3.0)
    for orig, new in zip(h.recovery, shifted.recovery):
        assert np.allclose(new, orig[orig > 2.0] - 2.0)
