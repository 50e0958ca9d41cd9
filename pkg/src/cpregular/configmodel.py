"""Uniform random (d+1)-regular multigraphs via half-edge matching.

Half-edges carry stable integer ids: vertex v owns ids v*(d+1) .. v*(d+1)+d.
The matching law is policy-invariant: whichever half-edge is elected at each
step, the partner is drawn uniformly from the remaining ones, so the final
perfect matching is uniform over all (n(d+1)-1)!! possibilities.
"""

from __future__ import annotations

from .graph import MultiGraph


class SemiGraph:
    """Partially matched half-edge structure (V, E, H).

    The only permitted update is: add the edge h+h' and remove {h, h'} from
    the unmatched set.  Total half-edge count (2 * matched + unmatched) is
    conserved.
    """

    def __init__(self, n, half_edges_per_vertex):
        k = half_edges_per_vertex
        if n < 0 or k < 0:
            raise ValueError("negative size")
        if (n * k) % 2 != 0:
            raise ValueError("total half-edge count n*(d+1) = %d is odd" % (n * k))
        self.n = n
        self.k = k
        self.matched_pairs = []  # (h, h') in matching order
        self.edges = []  # (owner(h), owner(h')) in matching order
        total = n * k
        self._alive = list(range(total))  # unmatched half-edge ids
        self._pos = list(range(total))  # id -> index in _alive, -1 if matched
        self._count = [k] * n  # unmatched half-edges per vertex
        self._scan = 0  # lowest possibly-unmatched id

    # -- queries ---------------------------------------------------------

    def owner(self, h):
        return h // self.k

    def unmatched_count(self):
        return len(self._alive)

    def is_unmatched(self, h):
        return 0 <= h < self.n * self.k and self._pos[h] >= 0

    def vertex_count(self, v):
        """Unmatched half-edges still attached to v."""
        return self._count[v]

    def half_edges_of(self, v):
        """Unmatched half-edge ids attached to v, in slot order."""
        base = v * self.k
        return [base + s for s in range(self.k) if self._pos[base + s] >= 0]

    def unmatched_ids(self):
        return list(self._alive)

    def total_half_edges(self):
        return 2 * len(self.matched_pairs) + len(self._alive)

    def realized(self):
        """The graph (V, E) of edges matched so far."""
        return MultiGraph(self.n, self.edges)

    def default_election(self):
        """Lowest unmatched (vertex, slot) pair; ids are ordered that way."""
        while self._pos[self._scan] < 0:
            self._scan += 1
        return self._scan

    # -- the update ---------------------------------------------------------

    def _remove(self, h):
        i = self._pos[h]
        last = self._alive[-1]
        self._alive[i] = last
        self._pos[last] = i
        self._alive.pop()
        self._pos[h] = -1
        self._count[h // self.k] -= 1

    def match(self, h, rng):
        """Match elected half-edge h with a uniform partner from H \\ {h}.

        Returns (u, v, h, h') where u, v are the edge endpoints.
        """
        if len(self._alive) < 2:
            raise RuntimeError("need at least two unmatched half-edges")
        if self._pos[h] < 0:
            raise ValueError("elected half-edge %d is already matched" % h)
        self._remove(h)
        hp = self._alive[int(rng.integers(len(self._alive)))]
        self._remove(hp)
        u, v = h // self.k, hp // self.k
        self.matched_pairs.append((h, hp))
        self.edges.append((u, v))
        return u, v, h, hp


def fresh_semigraph(n, d):
    """Empty edge set, every vertex holding d+1 half-edges."""
    return SemiGraph(n, d + 1)


def match_step(semi, rng, policy=None):
    """One matching step: elect (by policy, or lowest id), pair uniformly.

    A policy is a callable SemiGraph -> half-edge id or None; returning None
    falls back to the default election order.
    """
    h = None
    if policy is not None:
        h = policy(semi)
        if h is not None and not semi.is_unmatched(h):
            raise ValueError("policy elected half-edge %r not in H" % (h,))
    if h is None:
        h = semi.default_election()
    return semi.match(h, rng)


def sample_regular(n, d, rng, policy=None):
    """Uniform configuration-model (d+1)-regular multigraph on n vertices."""
    semi = fresh_semigraph(n, d)
    while semi.unmatched_count() > 0:
        match_step(semi, rng, policy)
    return semi.realized()


def complete_matching(semi, rng, policy=None):
    """Match all remaining half-edges; returns the final graph."""
    while semi.unmatched_count() > 0:
        match_step(semi, rng, policy)
    return semi.realized()


def count_short_cycles(g, r):
    """Number of cycles of length <= r, counted up to rotation/reflection.

    A loop is a cycle of length 1 and a pair of parallel edges a cycle of
    length 2.  Cycles are identified by their edge sets; bounded-depth
    search, fine at desk scale.
    """
    if r <= 0:
        return 0
    found = set()
    for eid, (u, v) in enumerate(g.edges):
        if u == v:
            found.add(frozenset((eid,)))
    if r == 1:
        return len(found)

    inc = [[] for _ in range(g.n)]
    for eid, (u, v) in enumerate(g.edges):
        if u != v:
            inc[u].append((v, eid))
            inc[v].append((u, eid))

    def walk(start, cur, path_edges, visited):
        for w, eid in inc[cur]:
            if eid in path_edges:
                continue
            if w == start:
                if len(path_edges) + 1 >= 2:
                    found.add(frozenset(path_edges | {eid}))
            elif w > start and w not in visited and len(path_edges) + 1 < r:
                visited.add(w)
                path_edges.add(eid)
                walk(start, w, path_edges, visited)
                path_edges.discard(eid)
                visited.discard(w)

    for s in range(g.n):
        walk(s, s, set(), {s})
    return len(found)
