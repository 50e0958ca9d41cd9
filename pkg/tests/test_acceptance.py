"""End-to-end acceptance suite.

Each test prints a single summary line with the measured quantities and its
target, so a verbose run reads as a checklist.  Tolerances are statistical
(multiples of the standard error) for Monte Carlo quantities and exact for
combinatorial identities.
"""

import math

import numpy as np
import pytest
from scipy import stats

from cpregular import bounds, cover, cp, experiments, explore
from cpregular.configmodel import fresh_semigraph
from cpregular.graph import (
    MultiGraph,
    build_hat_tree,
    complete_graph,
    cycle_graph,
)


def _report(name, detail):
    print("\n[PASS] %s: %s" % (name, detail))


def test_single_vertex_exponential_extinction():
    # extinction of one isolated infected vertex is a standard Exponential(1)
    g = MultiGraph(1, [])
    replicas = 100_000
    taus, censored, _ = cp.extinction_samples(g, 1.0, [0], replicas, 1e9, seed=101)
    assert not censored.any()
    mean = float(taus.mean())
    se_mean = float(taus.std(ddof=1)) / math.sqrt(replicas)
    assert abs(mean - 1.0) < 3 * se_mean

    p_hat = float((taus > 1.0).mean())
    target = math.exp(-1.0)
    se_p = math.sqrt(p_hat * (1 - p_hat) / replicas)
    assert abs(p_hat - target) < 3 * se_p
    _report(
        "single-vertex exponential extinction",
        "mean tau %.4f (1 +- %.4f), P[tau>1] %.4f (e^-1 +- %.4f)"
        % (mean, 3 * se_mean, p_hat, 3 * se_p),
    )


def test_two_clique_mean_extinction_matches_markov_chain():
    # transient states of the chain on K_2: both infected, exactly one infected
    lam = 1.0
    Q = np.array([
        [-2.0, 2.0],          # both -> one (two recovery clocks)
        [lam, -(1.0 + lam)],  # one -> both (transmission) or absorb
    ])
    expected = np.linalg.solve(-Q, np.ones(2))[0]  # = 2.0 at lam = 1

    replicas = 100_000
    taus, censored, _ = cp.extinction_samples(
        complete_graph(2), lam, [0, 1], replicas, 1e9, seed=202
    )
    assert not censored.any()
    mean = float(taus.mean())
    se = float(taus.std(ddof=1)) / math.sqrt(replicas)
    assert abs(mean - expected) < 3 * se
    _report(
        "two-clique mean extinction vs linear-solve oracle",
        "empirical %.4f vs exact %.4f (tol %.4f)" % (mean, expected, 3 * se),
    )


def test_event_engine_matches_mark_replay():
    # tau clipped at 2 on K_3: event-driven engine vs full mark replay
    g = complete_graph(3)
    n_samples = 100_000
    taus, censored, _ = cp.extinction_samples(g, 1.0, [0, 1, 2], n_samples, 2.0,
                                              seed=303)
    side_a = np.where(censored, 2.0, taus)

    rng = np.random.default_rng(304)
    side_b = np.empty(n_samples)
    for i in range(n_samples):
        marks = cp.sample_harris(g, 1.0, 2.0, rng)
        tau = cp.harris_extinction_time(g, marks, {0, 1, 2})
        side_b[i] = 2.0 if tau is None else min(tau, 2.0)

    ks = stats.ks_2samp(side_a, side_b)
    assert ks.pvalue > 0.01
    _report(
        "event engine vs mark replay on K3 (tau clipped at 2)",
        "KS stat %.5f, p-value %.4f (need > 0.01)" % (ks.statistic, ks.pvalue),
    )


def test_graphical_coupling_identities_exact():
    rng = np.random.default_rng(404)
    checked = 0
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        m = int(rng.integers(0, 11))
        edges = [tuple(rng.integers(0, n, size=2)) for _ in range(m)]
        g = MultiGraph(n, edges)
        lam = float(rng.uniform(0.3, 2.0))
        horizon = 3.0
        marks = cp.sample_harris(g, lam, horizon, rng)
        verts = np.arange(n)
        a = set(verts[rng.random(n) < 0.5].tolist())
        b = set(verts[rng.random(n) < 0.5].tolist())
        s = float(rng.uniform(0, horizon))
        t = float(rng.uniform(s, horizon))

        xi_a = cp.evolve_harris(g, marks, a, t)
        xi_b = cp.evolve_harris(g, marks, b, t)
        # additivity under shared marks
        assert cp.evolve_harris(g, marks, a | b, t) == xi_a | xi_b
        # monotonicity: a subset evolves to a subset
        sub = set(v for v in a if v in b)
        assert cp.evolve_harris(g, marks, sub, t) <= xi_a
        # semigroup: restart from the time-s state on the shifted marks
        mid = cp.evolve_harris(g, marks, a, s)
        assert cp.evolve_harris(g, cp.harris_after(marks, s), mid, t - s) == xi_a
        checked += 1
    assert checked == 1000
    _report(
        "graphical coupling identities",
        "additivity, monotonicity and semigroup exact on %d random instances"
        % checked,
    )


def test_matching_law_uniform_and_policy_invariant():
    # 2 vertices, 3 half-edges each: 15 perfect matchings of 6 half-edges
    def draw_matching(rng, policy):
        semi = fresh_semigraph(2, 2)
        while semi.unmatched_count() > 0:
            h = policy(semi)
            semi.match(h, rng)
        assert len(semi.matched_pairs) == 3
        return tuple(sorted(tuple(sorted(p)) for p in semi.matched_pairs))

    n_samples = 100_000
    for label, policy in (
        ("lowest-id", lambda s: s.default_election()),
        ("highest-id", lambda s: max(s.unmatched_ids())),
    ):
        rng = np.random.default_rng(505)
        counts = {}
        for _ in range(n_samples):
            key = draw_matching(rng, policy)
            counts[key] = counts.get(key, 0) + 1
        assert len(counts) == 15
        chi = stats.chisquare(list(counts.values()))
        assert chi.pvalue > 0.01, label
        _report(
            "matching law uniform under %s election" % label,
            "15 matchings seen, chi-square p %.4f (need > 0.01)" % chi.pvalue,
        )


def test_pass_bookkeeping_invariants():
    n, d, r, ell, n_seeds = 1000, 3, 3, 3, 20
    const = explore.constants(d, r, ell)
    floor = max(0, n - const.c_r_ell * n_seeds)
    rng = np.random.default_rng(606)
    passes = successes = 0
    for _ in range(1000):
        res = explore.construction_run(n, d, list(range(n_seeds)), r, ell, rng)
        for o in res.outcomes:
            passes += 1
            assert o.iterations <= const.c_ell
            assert o.short_collisions <= 1 and o.long_collisions <= 2
            assert o.success == (o.short_collisions == 0
                                 and o.long_collisions <= 1)
            assert len(o.quieted_buds) <= 2
            assert o.fresh_after >= floor
        taken = set()
        for w in res.witnesses:
            successes += 1
            assert explore.verify_favourable(w, d, ell, r)
            assert not (set(w.vertices) & taken)
            taken |= set(w.vertices)
    _report(
        "pass bookkeeping over 1000 constructions",
        "%d passes, %d successes, zero violations (iteration cap %d, "
        "fresh floor %d)" % (passes, successes, const.c_ell, floor),
    )


def test_tail_bound_dominates_exact_on_grid():
    worst_gap = math.inf
    worst_psi = 0.0
    points = 0
    for m in range(1, 31):
        for i in range(1, 20):
            p = i / 20.0
            for j in range(0, 21 - i):
                delta = j / 20.0
                b = bounds.binomial_tail_bound(bounds.TailBoundQuery(m, p, delta))
                exact = bounds.exact_binomial_tail(m, p, math.ceil((p + delta) * m))
                assert b >= exact - 1e-15
                worst_gap = min(worst_gap, b - exact)
                gap = abs(bounds.psi(p, delta) - bounds.psi_sup_form(p, delta))
                assert gap < 1e-9
                worst_psi = max(worst_psi, gap)
                points += 1
    _report(
        "binomial tail bound dominance",
        "%d grid points, min bound-exact gap %.3e, max closed-vs-sup "
        "discrepancy %.2e (need < 1e-9)" % (points, worst_gap, worst_psi),
    )


def _random_multigraph(rng):
    # loop-free, parallel edges allowed: the neighbourhood bijection of the
    # cover only makes sense on a loop-free base (loops never change the
    # process law anyway, so nothing is lost)
    n = int(rng.integers(2, 9))
    m = int(rng.integers(1, 11))
    edges = []
    while len(edges) < m:
        u, v = rng.integers(0, n, size=2)
        if u != v:
            edges.append((int(u), int(v)))
    return MultiGraph(n, edges)


def _cover_distances_dominate(g, c):
    """All-pairs check that the base distance of the fiber images never
    exceeds the tree distance in the cover."""
    N = c.n
    depth = c.depth
    anc = np.empty((N, depth + 1), dtype=np.int64)
    for node in range(N):  # parents precede children in construction order
        dn = c.node_depth[node]
        if node == 0:
            anc[0] = -1
        else:
            anc[node] = anc[c.parent[node]]
        anc[node, dn] = node
        anc[node, dn + 1:] = N + node  # unique sentinel past own depth
    prefix = (anc[:, None, :] == anc[None, :, :]).sum(axis=2)
    nd = np.asarray(c.node_depth)
    lca_depth = np.minimum(prefix - 1, np.minimum(nd[:, None], nd[None, :]))
    tree_d = nd[:, None] + nd[None, :] - 2 * lca_depth

    base_dist = np.stack([g.dist_from(v) for v in range(g.n)])
    psi = np.asarray(c.psi)
    assert (base_dist[psi[:, None], psi[None, :]] <= tree_d).all()

    # spot-check the vectorized tree distance against the walk-up version
    rng = np.random.default_rng(0)
    for _ in range(20):
        a, b = int(rng.integers(N)), int(rng.integers(N))
        assert tree_d[a, b] == c.tree_dist(a, b)


def test_cover_bijection_distance_and_projection():
    rng = np.random.default_rng(707)
    graphs = 0
    while graphs < 200:
        g = _random_multigraph(rng)
        depth = int(rng.integers(1, 6))
        root = int(rng.integers(0, g.n))
        try:
            c = cover.build_cover(g, root, depth, max_nodes=1500)
        except RuntimeError:
            continue  # cover too large at this depth; draw another instance
        cover.check_cover(c)
        _cover_distances_dominate(g, c)
        graphs += 1

    # fiber projection of the constrained process vs the direct process
    c3 = cycle_graph(3)
    replicas = 100_000
    _, censored, _ = cp.extinction_samples(c3, 1.0, [0], replicas, 1.0, seed=708)
    p_direct = float(1.0 - censored.mean())

    c = cover.build_cover(c3, 0, 12)
    rng = np.random.default_rng(709)
    extinct = 0
    for _ in range(replicas):
        traj, _ = cover.constrained_cp(c, 1.0, [0], rng, horizon=1.0)
        extinct += not traj.censored
    p_proj = extinct / replicas

    pooled = (p_direct + p_proj) / 2.0
    se = math.sqrt(2.0 * pooled * (1.0 - pooled) / replicas)
    z = (p_direct - p_proj) / se
    assert abs(z) < 2.5758  # two-sided test at significance 0.01
    _report(
        "cover bijection, distance domination and projection law",
        "200 covers validated; P[extinct by 1]: direct %.4f vs projected "
        "%.4f (z %.2f, need |z| < 2.58)" % (p_direct, p_proj, z),
    )


def test_subcritical_logarithmic_extinction_scaling():
    cfg = experiments.ExperimentConfig(
        d=3, lambdas=[0.1], ns=[125, 250, 500, 1000], replicas=200,
        horizon=None, horizon_per_log_n=100.0, initial="all", seed=909,
    )
    _, report = experiments.extinction_scaling(cfg)
    cells = report["per_lambda"]["0.1"]["cells"]
    ratios = [c["median_over_log_n"] for c in cells]
    spread = max(ratios) / min(ratios)
    assert spread < 2.0
    assert all(c["censoring_fraction"] == 0.0 for c in cells)
    _report(
        "subcritical logarithmic extinction scaling",
        "median(tau)/log n in [%.3f, %.3f], spread factor %.3f (need < 2), "
        "zero censoring" % (min(ratios), max(ratios), spread),
    )


def test_supercritical_persistence():
    cfg = experiments.ExperimentConfig(
        d=3, lambdas=[2.0], ns=[100, 200, 400], replicas=100,
        horizon=1000.0, initial="all", seed=1010,
    )
    _, report = experiments.extinction_scaling(cfg)
    cells = report["per_lambda"]["2.0"]["cells"]
    freqs = [c["censoring_fraction"] for c in cells]
    assert all(f >= 0.99 for f in freqs)
    assert all(b >= a - 0.01 for a, b in zip(freqs, freqs[1:]))
    _report(
        "supercritical persistence past horizon 1000",
        "survival frequencies %s over n = 100, 200, 400 (need >= 0.99, "
        "non-decreasing within 0.01)" % freqs,
    )


def test_truncated_tree_domination_reports():
    g = complete_graph(4)
    replicas = 100_000
    rep_tau = cover.domination_check(
        g, 0.2, [0], replicas, [0.25, 0.5, 1.0, 2.0, 4.0], depth=12, seed=1111
    )
    assert rep_tau["violations"] == []
    assert rep_tau["boundary_contamination"] < 0.01

    rep_kappa = cover.kappa_domination_check(g, 0.2, 0, replicas, depth=12,
                                             seed=1112)
    assert rep_kappa["violations"] == []
    assert rep_kappa["boundary_contamination"] < 0.01
    _report(
        "truncated-tree domination of K4",
        "tau-tail max z %.2f, kappa-tail max z %.2f (violation threshold 3), "
        "contamination %.4f / %.4f"
        % (
            max(rep_tau["z"]),
            max(row["z"] for row in rep_kappa["tails"]),
            rep_tau["boundary_contamination"],
            rep_kappa["boundary_contamination"],
        ),
    )


def test_truncated_tree_decay_rate():
    t_grid = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0]
    report = experiments.subcritical_decay(3, 0.1, 10, t_grid, 30_000, seed=1212)
    assert report["decay_rate"] is not None
    assert report["decay_rate"] >= 0.5
    assert report["boundary_contamination"] < 0.01
    assert not report["unreliable"]
    _report(
        "population decay on the truncated regular tree",
        "fitted rate %.3f (need >= 0.5; envelope %.2f), contamination %.4f"
        % (report["decay_rate"], report["branching_envelope_rate"],
           report["boundary_contamination"]),
    )
