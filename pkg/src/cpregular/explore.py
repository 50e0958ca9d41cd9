"""Construction-time exploration of the configuration model: r-prepared
sets, the Pass with collision bookkeeping, extraction of good/regenerative
witness families, and independent verifiers.

Terminology.  A seed is a designated vertex; a bud is a vertex at distance
exactly r from its seed.  A bud is active while it still holds d unmatched
half-edges; a seed is active while at least one of its buds is.  A Pass
grows a depth-ell tree from an active bud, classifying every draw that
lands on a non-fresh vertex as a short collision (inside the explored set)
or a long one; one short collision or two long collisions abort the Pass.
Every draw commits its half-edge consumption to the shared semi-graph,
success or not, which is what keeps the final graph law uniform.
"""

from __future__ import annotations

import collections
from dataclasses import dataclass, field
from fractions import Fraction

from .configmodel import SemiGraph, fresh_semigraph, complete_matching
from .graph import MultiGraph, RootedGraph, build_regular_tree, embeds, pruned_tree_catalog


class InvariantViolation(RuntimeError):
    """A live-asserted bookkeeping invariant failed."""


class NotPreparedError(ValueError):
    """The seed set is not r-prepared."""


@dataclass(frozen=True)
class Constants:
    c_ell: int
    c_r_ell: int
    gamma_r: Fraction
    c_bar_r: int


def constants(d, r, ell):
    """Exact pass-accounting constants for branching d, radius r, depth ell."""
    if d < 2 or r < 1 or ell < 1:
        raise ValueError("need d >= 2, r >= 1, ell >= 1")
    c_ell = sum(d**i for i in range(1, ell + 1))
    c_bar_r = 1 + sum((d + 1) * d**i for i in range(r))
    c_r_ell = c_bar_r + c_ell
    gamma_r = 1 / (1 + Fraction(2, (d + 1) * d ** (r - 1)))
    return Constants(c_ell, c_r_ell, gamma_r, c_bar_r)


# -- r-prepared sets ---------------------------------------------------------


@dataclass
class PreparedReport:
    prepared: bool
    loop_free: dict  # seed -> bool (r-ball is acyclic)
    overlap: tuple | None  # first overlapping seed pair, if any
    ball_dist: dict  # seed -> {vertex: distance <= r}

    def ball_vertices(self, v):
        return set(self.ball_dist[v])

    def buds(self, v, r):
        return sorted(w for w, dv in self.ball_dist[v].items() if dv == r)


def is_r_prepared(g, seeds, r):
    """Both conditions checked literally on radius-r balls: each ball is
    acyclic ("loop-free" covers loops, parallel edges and short cycles)
    and the balls are pairwise disjoint."""
    loop_free = {}
    ball_dist = {}
    for v in seeds:
        sub, vmap = g.ball(v, r)
        dist = sub.dist_from(0)
        ball_dist[v] = {vmap[i]: int(dist[i]) for i in range(sub.n)}
        loop_free[v] = len(sub.edges) == sub.n - 1
    overlap = None
    seen = {}
    for v in seeds:
        for w in ball_dist[v]:
            if w in seen:
                overlap = (seen[w], v)
                break
            seen[w] = v
        if overlap:
            break
    prepared = overlap is None and all(loop_free.values())
    return PreparedReport(prepared, loop_free, overlap, ball_dist)


def prepared_subset(report, seeds):
    """Greedy r-prepared subset: keep a seed when its ball is acyclic and
    disjoint from every ball kept so far."""
    kept = []
    taken = set()
    for v in seeds:
        ball = report.ball_vertices(v)
        if report.loop_free[v] and not (ball & taken):
            kept.append(v)
            taken |= ball
    return kept


def build_neighbourhoods_first(semi, seeds, r, rng):
    """Match half-edges under the election rule "any half-edge at distance
    strictly less than r from the seed set" until none qualify, then report
    r-preparedness.  Exactly the r-neighbourhood of the seeds is built."""
    n = semi.n
    INF = n + 1
    dist = [INF] * n
    adj = [[] for _ in range(n)]
    work = collections.deque()
    for v in seeds:
        dist[v] = 0
        if r > 0:
            work.append(v)

    def add_edge(a, b):
        adj[a].append(b)
        adj[b].append(a)
        relax = collections.deque((a, b))
        while relax:
            u = relax.popleft()
            for w in adj[u]:
                if dist[u] + 1 < dist[w]:
                    dist[w] = dist[u] + 1
                    relax.append(w)
                    if dist[w] < r and semi.vertex_count(w) > 0:
                        work.append(w)

    def drain():
        while work:
            v = work.popleft()
            if dist[v] >= r:
                continue
            while semi.vertex_count(v) > 0:
                h = semi.half_edges_of(v)[0]
                a, b, _, _ = semi.match(h, rng)
                add_edge(a, b)
                other = b if a == v else a
                if dist[other] < r and semi.vertex_count(other) > 0:
                    work.append(other)

    drain()
    # safety net: the relaxation above is meant to be exhaustive; verify.
    leftovers = [v for v in range(n) if dist[v] < r and semi.vertex_count(v) > 0]
    while leftovers:
        work.extend(leftovers)
        drain()
        leftovers = [v for v in range(n) if dist[v] < r and semi.vertex_count(v) > 0]
    return is_r_prepared(semi.realized(), seeds, r)


# -- the Pass -----------------------------------------------------------------


@dataclass
class Witness:
    """An (ell, r)-favourable subgraph: the seed's r-ball plus the tree
    explored from the bud, rooted at the seed."""

    root: int
    bud: int
    vertices: list
    edges: list
    tree_depth: dict  # explored vertex -> depth from the bud
    tree_children: dict  # explored vertex -> children in exploration order
    pruned_child: int | None  # bud child whose subtree lost an edge
    pruned_at_bud: bool  # the bud itself lost a half-edge to a long collision

    def rooted_at(self, label):
        index = {v: i for i, v in enumerate(self.vertices)}
        g = MultiGraph(
            len(self.vertices), [(index[a], index[b]) for a, b in self.edges]
        )
        return RootedGraph(g, index[label]), index

    def dist_within(self, a, b):
        rg, index = self.rooted_at(a)
        return rg.graph.dist(index[a], index[b])


@dataclass
class PassOutcome:
    seed: int
    bud: int
    success: bool
    iterations: int
    collisions: list  # (kind, iteration, explored vertex, hit vertex)
    witness: Witness | None
    quieted_buds: list  # active buds other than the explored one turned quiet
    fresh_after: int

    @property
    def short_collisions(self):
        return sum(1 for c in self.collisions if c[0] == "short")

    @property
    def long_collisions(self):
        return sum(1 for c in self.collisions if c[0] == "long")


@dataclass
class PassState:
    """Single-owner mutable state shared across the passes of one
    construction."""

    semi: SemiGraph
    seeds: list
    r: int
    ell: int
    report: PreparedReport
    floor_seed_count: int
    fresh: set = field(init=False)
    buds: dict = field(init=False)
    used_seeds: set = field(default_factory=set)
    witness_vertices: set = field(default_factory=set)
    outcomes: list = field(default_factory=list)

    def __post_init__(self):
        d = self.d
        self.fresh = {
            v for v in range(self.semi.n) if self.semi.vertex_count(v) == d + 1
        }
        self.buds = {v: self.report.buds(v, self.r) for v in self.seeds}

    @property
    def d(self):
        return self.semi.k - 1

    def bud_active(self, x):
        return self.semi.vertex_count(x) == self.d

    def active_buds_of(self, seed):
        return [x for x in self.buds[seed] if self.bud_active(x)]

    def seed_active(self, seed):
        return bool(self.active_buds_of(seed))

    def next_seed(self):
        for v in self.seeds:
            if v not in self.used_seeds and self.seed_active(v):
                return v
        return None

    def all_active_buds(self):
        return {x for v in self.seeds for x in self.buds[v] if self.bud_active(x)}


def run_pass(state, seed, rng):
    """One Pass from an active seed; the semi-graph updates persist whether
    or not the pass succeeds."""
    if seed in state.used_seeds:
        raise ValueError("seed %d already used" % seed)
    active = state.active_buds_of(seed)
    if not active:
        raise ValueError("seed %d is not active" % seed)
    semi, d, ell = state.semi, state.d, state.ell
    const = constants(d, state.r, max(ell, 1))
    active_before = state.all_active_buds()
    state.used_seeds.add(seed)

    x = active[0]  # lowest-index active bud
    explored = [x]
    in_explored = {x}
    depth = {x: 0}
    children = {x: []}
    tree_edges = []
    collisions = []
    long_count = 0
    pruned_vertex = None
    iterations = 0
    success = None

    while True:
        candidates = [
            v for v in explored if depth[v] < ell and semi.vertex_count(v) > 0
        ]
        hbar = sum(semi.vertex_count(v) for v in candidates)
        if hbar > d**ell:
            raise InvariantViolation("|Hbar| = %d exceeds d^ell = %d" % (hbar, d**ell))
        if not candidates:
            success = True
            break
        v = min(candidates)
        h = semi.half_edges_of(v)[0]
        iterations += 1
        if iterations > const.c_ell:
            raise InvariantViolation("pass exceeded c_ell = %d step-1 iterations" % const.c_ell)
        _, _, _, hp = semi.match(h, rng)  # the (update) always commits
        hit = semi.owner(hp)
        if hit not in state.fresh:
            kind = "short" if hit in in_explored else "long"
            collisions.append((kind, iterations, v, hit))
            if kind == "short" or long_count == 1:
                success = False
                break
            long_count += 1
            pruned_vertex = v
        else:
            state.fresh.discard(hit)
            explored.append(hit)
            in_explored.add(hit)
            depth[hit] = depth[v] + 1
            children[v].append(hit)
            children[hit] = []
            tree_edges.append((v, hit))
        floor = max(0, semi.n - const.c_r_ell * state.floor_seed_count)
        if len(state.fresh) < floor:
            raise InvariantViolation(
                "fresh-vertex floor violated: %d < %d" % (len(state.fresh), floor)
            )

    witness = None
    if success:
        witness = _build_witness(state, seed, x, explored, tree_edges, depth,
                                 children, pruned_vertex)
        overlap = set(witness.vertices) & state.witness_vertices
        if overlap:
            raise InvariantViolation(
                "witness intersects earlier witnesses at %s" % sorted(overlap)
            )
        state.witness_vertices |= set(witness.vertices)

    active_after = state.all_active_buds()
    quieted = sorted((active_before - active_after) - {x})
    if len(quieted) > 2:
        raise InvariantViolation(
            "%d active buds besides the explored one turned quiet" % len(quieted)
        )

    outcome = PassOutcome(
        seed, x, success, iterations, collisions, witness, quieted, len(state.fresh)
    )
    state.outcomes.append(outcome)
    return outcome


def _build_witness(state, seed, x, explored, tree_edges, depth, children,
                   pruned_vertex):
    realized = state.semi.realized()
    ball_vertices = sorted(state.report.ball_dist[seed])
    ball_set = set(ball_vertices)
    ball_edges = [
        (a, b) for a, b in realized.edges if a in ball_set and b in ball_set
    ]
    vertices = ball_vertices + [v for v in explored if v not in ball_set]
    edges = ball_edges + tree_edges

    pruned_child = None
    pruned_at_bud = False
    if pruned_vertex is not None:
        if pruned_vertex == x:
            pruned_at_bud = True
        else:
            c = pruned_vertex
            while depth[c] > 1:
                c = next(p for p, kids in children.items() if c in kids)
            pruned_child = c
    return Witness(
        seed, x, vertices, edges, dict(depth), dict(children), pruned_child,
        pruned_at_bud,
    )


def extract_good_subset(semi, seeds, ell, r, target, rng, *, report=None,
                        floor_seed_count=None):
    """Iterate the Pass over new active seeds until `target` pairwise
    disjoint favourable witnesses are found or the seeds run out."""
    if report is None:
        report = is_r_prepared(semi.realized(), seeds, r)
    if not report.prepared:
        raise NotPreparedError("seed set is not %d-prepared: %s" % (
            r, report.overlap or "cyclic ball"))
    state = PassState(semi, list(seeds), r, ell, report,
                      floor_seed_count or len(seeds))
    witnesses = []
    while len(witnesses) < target:
        seed = state.next_seed()
        if seed is None:
            break
        outcome = run_pass(state, seed, rng)
        if outcome.success:
            witnesses.append(outcome.witness)
    stats = pass_statistics(state)
    stats["target"] = target
    stats["target_met"] = len(witnesses) >= target
    return witnesses, stats


def pass_statistics(state):
    outs = state.outcomes
    return {
        "passes": len(outs),
        "successes": sum(o.success for o in outs),
        "failures": sum(not o.success for o in outs),
        "short_collisions": sum(o.short_collisions for o in outs),
        "long_collisions": sum(o.long_collisions for o in outs),
        "double_failures": sum(
            1 for o in outs if not o.success and o.short_collisions == 0
        ),
        "fresh_remaining": len(state.fresh),
    }


# -- verifiers (independent of the pass bookkeeping) -------------------------


def verify_favourable(witness, d, ell, r):
    """Independent check: some vertex at distance exactly r from the root
    carries an embedded rooted pruned ell-tree."""
    rooted, index = witness.rooted_at(witness.root)
    dist = rooted.graph.dist_from(rooted.root)
    catalog = (
        pruned_tree_catalog(d, ell) if ell > 0 else [build_regular_tree(d, 0)]
    )
    for v in range(rooted.graph.n):
        if dist[v] != r:
            continue
        host = RootedGraph(rooted.graph, v)
        for pattern in catalog:
            if embeds(host, pattern) is not None:
                return True
    return False


def verify_regenerative(g, seeds, witnesses, ell, r):
    """Pairwise disjointness, seed membership, edge membership in g, and
    the distance-r embedded full tree, checked per witness."""
    seen = set()
    edge_pool = collections.Counter(
        (min(a, b), max(a, b)) for a, b in g.edges
    )
    for w in witnesses:
        vs = set(w.vertices)
        if vs & seen:
            return False
        seen |= vs
        if w.root not in vs or w.root not in seeds:
            return False
        for a, b in w.edges:
            if edge_pool[(min(a, b), max(a, b))] == 0:
                return False
        rooted, index = w.rooted_at(w.root)
        dist = rooted.graph.dist_from(rooted.root)
        pattern = build_regular_tree(_pattern_branching(g), ell)
        ok = any(
            dist[v] == r and embeds(RootedGraph(rooted.graph, v), pattern) is not None
            for v in range(rooted.graph.n)
        )
        if not ok:
            return False
    return True


def _pattern_branching(g):
    return max(2, g.max_degree() - 1)


def good_to_regenerative(witnesses, ell, r):
    """Downgrade (ell, r)-favourable witnesses to (ell-1, r+1)-regenerative
    ones by selecting, under each bud, a child subtree untouched by the
    pruning."""
    if ell < 1:
        raise ValueError("need ell >= 1")
    out = []
    for w in witnesses:
        kids = [c for c in w.tree_children[w.bud] if c != w.pruned_child]
        if not kids:
            raise ValueError(
                "witness at seed %d has no unpruned bud child" % w.root
            )
        c = min(kids)
        out.append(
            Witness(w.root, c, list(w.vertices), list(w.edges),
                    dict(w.tree_depth), dict(w.tree_children), None, False)
        )
    return out


# -- end-to-end construction harness ------------------------------------------


@dataclass
class ConstructionResult:
    graph: MultiGraph
    report: PreparedReport
    kept_seeds: list
    witnesses: list
    stats: dict
    outcomes: list


def construction_run(n, d, seeds, r, ell, rng, target=None,
                     require_prepared=False):
    """Full pipeline: neighbourhood-first construction, prepared-subset
    extraction when the full seed set is not r-prepared, passes, and
    completion of the matching to a uniform configuration-model graph."""
    semi = fresh_semigraph(n, d)
    report = build_neighbourhoods_first(semi, seeds, r, rng)
    if report.prepared:
        kept = list(seeds)
    elif require_prepared:
        raise NotPreparedError("seed set is not %d-prepared" % r)
    else:
        kept = prepared_subset(report, seeds)
    if target is None:
        target = len(kept)
    state = PassState(semi, kept, r, ell, report, floor_seed_count=len(seeds))
    witnesses = []
    while len(witnesses) < target:
        seed = state.next_seed()
        if seed is None:
            break
        outcome = run_pass(state, seed, rng)
        if outcome.success:
            witnesses.append(outcome.witness)
    graph = complete_matching(semi, rng)
    stats = pass_statistics(state)
    stats["kept_seeds"] = len(kept)
    stats["target"] = target
    stats["target_met"] = len(witnesses) >= target
    return ConstructionResult(graph, report, kept, witnesses, stats, state.outcomes)


# -- post-hoc extraction on a completed graph (experiment plumbing; this is
#    NOT the construction-time Pass procedure) --------------------------------


def posthoc_regenerative_subset(g, seeds, ell, r, target, d=None):
    """Greedy vertex-disjoint path-plus-tree witnesses in an already-built
    graph: a simple path of length r from the seed, then a full depth-ell
    d-ary tree grown from its endpoint."""
    if d is None:
        d = _pattern_branching(g)
    used = set()
    out = []
    for v in seeds:
        if len(out) >= target:
            break
        if v in used:
            continue
        w = _posthoc_witness(g, v, ell, r, d, used)
        if w is not None:
            out.append(w)
            used |= set(w.vertices)
    return out


def _posthoc_witness(g, v, ell, r, d, used):
    path = _disjoint_path(g, v, r, used)
    if path is None:
        return None
    blocked = used | set(path)
    x = path[-1]
    tree_edges, tree_vertices, kids = _grow_tree(g, x, ell, d, blocked)
    if tree_edges is None:
        return None
    vertices = path + [w for w in tree_vertices if w != x]
    edges = [(path[i], path[i + 1]) for i in range(len(path) - 1)] + tree_edges
    depth = {}
    children = dict(kids)
    return Witness(v, x, vertices, edges, depth, children, None, False)


def _disjoint_path(g, v, r, used):
    if v in used:
        return None
    prev = {v: None}
    frontier = [v]
    for _ in range(r):
        nxt = []
        for a in frontier:
            for b in sorted(g.neighbours(a)):
                if b in prev or b in used or b == a:
                    continue
                prev[b] = a
                nxt.append(b)
        frontier = nxt
        if not frontier:
            return None
    x = frontier[0]
    path = [x]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    return path[::-1]


def _grow_tree(g, x, ell, d, blocked):
    taken = {x}
    edges = []
    kids = {x: []}
    level = [x]
    for _ in range(ell):
        nxt = []
        for a in level:
            avail = [
                b for b in sorted(g.neighbours(a))
                if b != a and b not in blocked and b not in taken
            ]
            if len(avail) < d:
                return None, None, None
            for b in avail[:d]:
                taken.add(b)
                edges.append((a, b))
                kids[a].append(b)
                kids[b] = []
                nxt.append(b)
        level = nxt
    return edges, sorted(taken), kids
