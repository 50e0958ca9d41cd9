import numpy as np
import pytest

from cpregular import cover
from cpregular.graph import MultiGraph, complete_graph, cycle_graph, path_graph


def test_cycle_cover_is_a_path():
    c = cover.build_cover(cycle_graph(3), 0, 4)
    assert c.n == 9  # root plus two non-backtracking rays of length 4
    g = c.as_multigraph()
    degs = sorted(g.degree(v) for v in range(g.n))
    assert degs == [1, 1, 2, 2, 2, 2, 2, 2, 2]
    cover.check_cover(c)


def test_loop_cover_branches_both_ways():
    g = MultiGraph(1, [(0, 0)])
    c = cover.build_cover(g, 0, 1)
    # both orientations of the loop leave the root; neither backtracks
    assert c.n == 3
    cover.check_cover(c)


def test_tree_cover_is_the_tree_itself():
    g = path_graph(4)
    c = cover.build_cover(g, 0, 10)
    assert c.n == 4
    assert sorted(c.psi) == [0, 1, 2, 3]
    cover.check_cover(c)


def test_cover_node_cap():
    with pytest.raises(RuntimeError):
        cover.build_cover(complete_graph(5), 0, 12, max_nodes=100)


def test_fibers_partition_nodes():
    c = cover.build_cover(cycle_graph(4), 0, 6)
    fibers = c.fibers()
    assert sum(len(nodes) for nodes in fibers.values()) == c.n
    assert set(fibers) == {0, 1, 2, 3}


def test_tree_dist_matches_graph_dist():
    c = cover.build_cover(complete_graph(4), 0, 3)
    g = c.as_multigraph()
    rng = np.random.default_rng(0)
    for _ in range(100):
        a, b = rng.integers(0, c.n, size=2)
        assert c.tree_dist(int(a), int(b)) == g.dist(int(a), int(b))


def test_projection_rejects_doubly_occupied_fiber():
    c = cover.build_cover(cycle_graph(3), 0, 4)
    fibers = c.fibers()
    v = next(v for v, nodes in fibers.items() if len(nodes) >= 2)
    with pytest.raises(cover.FiberViolation):
        cover.project(c, fibers[v][:2])


def test_lift_then_project_roundtrip():
    c = cover.build_cover(cycle_graph(4), 0, 5)
    base_set = {0, 2}
    nodes = cover.lift(c, base_set)
    assert cover.project(c, nodes) == base_set


def test_lift_rejects_unreachable_vertex():
    g = MultiGraph(3, [(0, 1)])
    c = cover.build_cover(g, 0, 3)
    with pytest.raises(ValueError):
        cover.lift(c, {2})


def test_constrained_cp_respects_fibers():
    c = cover.build_cover(cycle_graph(3), 0, 8)
    rng = np.random.default_rng(1)
    for _ in range(50):
        traj, touched = cover.constrained_cp(c, 2.0, [0], rng, horizon=1.0)
        assert traj.peak_infected <= 3  # never more particles than fibers
        assert isinstance(touched, bool)


def test_constrained_cp_rejects_bad_initial():
    c = cover.build_cover(cycle_graph(3), 0, 4)
    fibers = c.fibers()
    v = next(v for v, nodes in fibers.items() if len(nodes) >= 2)
    with pytest.raises(cover.FiberViolation):
        cover.constrained_cp(c, 1.0, fibers[v][:2], np.random.default_rng(2))


def test_domination_check_report_shape():
    g = complete_graph(4)
    rep = cover.domination_check(g, 0.3, [0], 2000, [0.5, 1.0], depth=8, seed=3)
    assert rep["d"] == 2
    assert len(rep["p_graph"]) == 2 and len(rep["z"]) == 2
    assert 0 <= rep["boundary_contamination"] <= 1
    assert len(rep["tree_placement"]) == 1 and rep["tree_placement"][0] == 0


def test_domination_check_rejects_oversized_degree():
    with pytest.raises(ValueError):
        cover.domination_check(complete_graph(5), 0.3, [0], 10, [1.0], depth=3,
                               seed=0, d=2)


def test_kappa_domination_report_shape():
    g = complete_graph(4)
    rep = cover.kappa_domination_check(g, 0.3, 0, 2000, depth=8, seed=4)
    assert rep["observed_max_kappa"] <= 1  # K4 has diameter 1
    assert rep["depth_exceeds_observed"]
    assert all(row["k"] >= 0 for row in rep["tails"])
