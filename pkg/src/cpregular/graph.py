"""Finite multigraphs with loops and parallel edges.

Vertices are dense integer indices 0..n-1.  Edges are an ordered list of
unordered endpoint pairs; parallel edges are distinct entries with stable
indices and a loop is a pair (v, v).  Edge e gives rise to two oriented
edges with ids 2*e (as stored) and 2*e+1 (reversed); for a loop both
orientations start and end at the same vertex, so a loop contributes 2 to
the degree of its vertex.
"""

from __future__ import annotations

import collections
from dataclasses import dataclass

import numpy as np


class MultiGraph:
    """Immutable multigraph. Safe to share across workers after construction."""

    __slots__ = ("n", "edges", "_inc", "_out_ptr", "_out_dst")

    def __init__(self, n, edges):
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        edges = [(int(u), int(v)) for u, v in edges]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError("edge endpoint out of range: (%d, %d)" % (u, v))
        self.n = n
        self.edges = edges
        inc = [[] for _ in range(n)]  # oriented edge ids starting at v
        for eid, (u, v) in enumerate(edges):
            inc[u].append(2 * eid)
            inc[v].append(2 * eid + 1)
        self._inc = inc
        self._out_ptr = None
        self._out_dst = None

    # -- oriented edges -------------------------------------------------

    def v0(self, oe):
        """Start vertex of oriented edge id oe."""
        e, d = divmod(oe, 2)
        return self.edges[e][d]

    def v1(self, oe):
        """End vertex of oriented edge id oe."""
        e, d = divmod(oe, 2)
        return self.edges[e][1 - d]

    def u(self, oe):
        """Underlying unoriented edge id of oriented edge id oe."""
        return oe // 2

    def oriented(self, oe):
        return OrientedEdge(self, oe // 2, oe % 2)

    def oriented_edge_count(self):
        return 2 * len(self.edges)

    def out_edges(self, v):
        """Oriented edge ids starting at v (a loop at v appears twice)."""
        self._check_vertex(v)
        return self._inc[v]

    # -- basic queries ---------------------------------------------------

    def degree(self, v):
        """Degree with the loop-doubling convention."""
        self._check_vertex(v)
        return len(self._inc[v])

    def max_degree(self):
        return max((len(a) for a in self._inc), default=0)

    def neighbours(self, v):
        """Set of vertices adjacent to v (contains v itself iff v has a loop)."""
        self._check_vertex(v)
        return {self.v1(oe) for oe in self._inc[v]}

    def has_loop_at(self, v):
        return any(u == w == v for u, w in self.edges)

    def dist_from(self, v):
        """BFS distances from v; -1 marks unreachable vertices."""
        self._check_vertex(v)
        dist = np.full(self.n, -1, dtype=np.int64)
        dist[v] = 0
        queue = collections.deque([v])
        while queue:
            x = queue.popleft()
            dx = dist[x]
            for oe in self._inc[x]:
                y = self.v1(oe)
                if dist[y] < 0:
                    dist[y] = dx + 1
                    queue.append(y)
        return dist

    def dist(self, a, b):
        """Shortest-path length between a and b, or None if unreachable."""
        self._check_vertex(a)
        self._check_vertex(b)
        if a == b:
            return 0
        d = self.dist_from(a)[b]
        return None if d < 0 else int(d)

    def ball(self, v, r):
        """Induced subgraph on {w : dist(v, w) <= r}.

        Returns (subgraph, vertex_map) where vertex_map[i] is the original
        index of subgraph vertex i; vertex 0 is always v.
        """
        if r < 0:
            raise ValueError("radius must be non-negative")
        self._check_vertex(v)
        dist = {v: 0}
        order = [v]
        queue = collections.deque([v])
        while queue:
            x = queue.popleft()
            if dist[x] == r:
                continue
            for oe in self._inc[x]:
                y = self.v1(oe)
                if y not in dist:
                    dist[y] = dist[x] + 1
                    order.append(y)
                    queue.append(y)
        return self.induced_subgraph(order)

    def induced_subgraph(self, vertices):
        """Subgraph induced on the given vertices (file order preserved)."""
        index = {v: i for i, v in enumerate(vertices)}
        sub_edges = [
            (index[a], index[b]) for a, b in self.edges if a in index and b in index
        ]
        return MultiGraph(len(vertices), sub_edges), list(vertices)

    def is_connected(self):
        if self.n == 0:
            return True
        return int((self.dist_from(0) >= 0).sum()) == self.n

    def is_tree(self):
        return self.is_connected() and len(self.edges) == self.n - 1

    # -- CSR view for simulation kernels ---------------------------------

    def csr_out(self):
        """(out_ptr, out_dst) arrays: out_dst[out_ptr[v]:out_ptr[v+1]] lists
        the head vertex of every oriented edge starting at v."""
        if self._out_ptr is None:
            ptr = np.zeros(self.n + 1, dtype=np.int64)
            for v in range(self.n):
                ptr[v + 1] = ptr[v] + len(self._inc[v])
            dst = np.empty(ptr[-1], dtype=np.int64)
            k = 0
            for v in range(self.n):
                for oe in self._inc[v]:
                    dst[k] = self.v1(oe)
                    k += 1
            self._out_ptr, self._out_dst = ptr, dst
        return self._out_ptr, self._out_dst

    def _check_vertex(self, v):
        if not (0 <= v < self.n):
            raise ValueError("vertex index %r out of range [0, %d)" % (v, self.n))

    def __repr__(self):
        return "MultiGraph(n=%d, m=%d)" % (self.n, len(self.edges))


@dataclass(frozen=True)
class OrientedEdge:
    graph: MultiGraph
    edge_id: int
    direction: int

    @property
    def v0(self):
        return self.graph.edges[self.edge_id][self.direction]

    @property
    def v1(self):
        return self.graph.edges[self.edge_id][1 - self.direction]

    @property
    def u(self):
        return self.edge_id

    def flip(self):
        return OrientedEdge(self.graph, self.edge_id, 1 - self.direction)

    @property
    def oe_id(self):
        return 2 * self.edge_id + self.direction


@dataclass(frozen=True)
class RootedGraph:
    graph: MultiGraph
    root: int

    def __post_init__(self):
        if not (0 <= self.root < self.graph.n):
            raise ValueError("root out of range")


# -- deterministic builders ----------------------------------------------


def build_regular_tree(d, depth):
    """Rooted tree with root degree d, internal degree d+1, leaves at `depth`.

    Vertex count is (d**(depth+1) - 1) // (d - 1); vertices are laid out in
    BFS order (root is 0).
    """
    if d < 2:
        raise ValueError("branching d must be >= 2")
    if depth < 0:
        raise ValueError("depth must be non-negative")
    edges = []
    level = [0]
    next_vertex = 1
    for _ in range(depth):
        new_level = []
        for parent in level:
            for _ in range(d):
                edges.append((parent, next_vertex))
                new_level.append(next_vertex)
                next_vertex += 1
        level = new_level
    return RootedGraph(MultiGraph(next_vertex, edges), 0)


def build_hat_tree(d, depth):
    """Ball of radius `depth` in the (d+1)-regular tree: root degree d+1."""
    if d < 2:
        raise ValueError("branching d must be >= 2")
    if depth < 0:
        raise ValueError("depth must be non-negative")
    if depth == 0:
        return RootedGraph(MultiGraph(1, []), 0)
    edges = []
    level = []
    next_vertex = 1
    for _ in range(d + 1):
        edges.append((0, next_vertex))
        level.append(next_vertex)
        next_vertex += 1
    for _ in range(depth - 1):
        new_level = []
        for parent in level:
            for _ in range(d):
                edges.append((parent, next_vertex))
                new_level.append(next_vertex)
                next_vertex += 1
        level = new_level
    return RootedGraph(MultiGraph(next_vertex, edges), 0)


def build_pruned_tree(d, depth, removed_edge):
    """Root component of the regular tree after deleting one of its edges."""
    tree = build_regular_tree(d, depth)
    g = tree.graph
    if not (0 <= removed_edge < len(g.edges)):
        raise ValueError("removed_edge is not an edge of the tree")
    kept = [e for i, e in enumerate(g.edges) if i != removed_edge]
    pruned = MultiGraph(g.n, kept)
    dist = pruned.dist_from(0)
    vertices = [v for v in range(g.n) if dist[v] >= 0]
    sub, _ = pruned.induced_subgraph(vertices)
    return RootedGraph(sub, 0)


def pruned_tree_catalog(d, depth):
    """All rooted pruned depth-trees up to rooted isomorphism.

    Removing an edge between levels j-1 and j removes a whole subtree, and
    any two removals at the same level give isomorphic results, so one
    representative per level suffices.  Sorted by increasing vertex count.
    """
    if depth == 0:
        return [build_regular_tree(d, 0)]
    reps = []
    level_start = 0  # index of first edge between levels j-1 and j
    count = 1
    for j in range(1, depth + 1):
        reps.append(build_pruned_tree(d, depth, level_start))
        level_start += count * d
        count *= d
    reps.sort(key=lambda t: t.graph.n)
    return reps


# -- rooted-graph embedding ----------------------------------------------


def embeds(host, pattern):
    """Injective root-preserving map with the neighbour-iff-neighbour property.

    Returns a dict mapping pattern vertices to host vertices, or None if no
    embedding exists.  Backtracking with degree pruning; intended for
    tree-shaped patterns at desk scale (can be slow on adversarial non-tree
    patterns).
    """
    hg, pg = host.graph, pattern.graph
    if pg.n == 0:
        return {}
    if pg.n > hg.n:
        return None

    h_nbrs = [hg.neighbours(v) for v in range(hg.n)]
    p_nbrs = [pg.neighbours(v) for v in range(pg.n)]

    # BFS order from the pattern root; unreachable vertices appended last.
    order = []
    seen = [False] * pg.n
    queue = collections.deque([pattern.root])
    seen[pattern.root] = True
    while queue:
        x = queue.popleft()
        order.append(x)
        for y in sorted(p_nbrs[x]):
            if not seen[y]:
                seen[y] = True
                queue.append(y)
    order.extend(v for v in range(pg.n) if not seen[v])

    mapping = {}
    used = set()

    def consistent(p, h):
        if len(p_nbrs[p]) > len(h_nbrs[h]):
            return False
        if (p in p_nbrs[p]) != (h in h_nbrs[h]):
            return False  # loop at p iff loop at h
        for q, hq in mapping.items():
            if (q in p_nbrs[p]) != (hq in h_nbrs[h]):
                return False
        return True

    def extend(i):
        if i == len(order):
            return True
        p = order[i]
        mapped_nbr = next((q for q in p_nbrs[p] if q in mapping and q != p), None)
        if mapped_nbr is not None:
            candidates = sorted(h_nbrs[mapping[mapped_nbr]] - used)
        else:
            candidates = [h for h in range(hg.n) if h not in used]
        for h in candidates:
            if consistent(p, h):
                mapping[p] = h
                used.add(h)
                if extend(i + 1):
                    return True
                del mapping[p]
                used.discard(h)
        return False

    if not consistent(pattern.root, host.root):
        return None
    mapping[pattern.root] = host.root
    used.add(host.root)
    if extend(1):
        return dict(mapping)
    return None


def check_embedding(host, pattern, mapping):
    """Independent validation of an embedding witness."""
    hg, pg = host.graph, pattern.graph
    if set(mapping) != set(range(pg.n)):
        return False
    if mapping[pattern.root] != host.root:
        return False
    if len(set(mapping.values())) != pg.n:
        return False
    for a in range(pg.n):
        na = pg.neighbours(a)
        hna = hg.neighbours(mapping[a])
        for b in range(pg.n):
            if (b in na) != (mapping[b] in hna):
                return False
    return True


# -- small deterministic graphs used all over the tests --------------------


def complete_graph(k):
    return MultiGraph(k, [(i, j) for i in range(k) for j in range(i + 1, k)])


def cycle_graph(k):
    return MultiGraph(k, [(i, (i + 1) % k) for i in range(k)])


def path_graph(k):
    return MultiGraph(k, [(i, i + 1) for i in range(k - 1)])


# -- serialization ----------------------------------------------------------


def to_text(g):
    """Line-oriented format: header 'n m', then one 'u v' line per edge."""
    lines = ["%d %d" % (g.n, len(g.edges))]
    lines.extend("%d %d" % (u, v) for u, v in g.edges)
    return "\n".join(lines) + "\n"


def from_text(text):
    tokens = text.split()
    if len(tokens) < 2:
        raise ValueError("truncated graph file")
    n, m = int(tokens[0]), int(tokens[1])
    if len(tokens) != 2 + 2 * m:
        raise ValueError("expected %d edge endpoints, got %d" % (2 * m, len(tokens) - 2))
    it = iter(tokens[2:])
    edges = [(int(u), int(v)) for u, v in zip(it, it)]
    return MultiGraph(n, edges)


def write_graph(g, path):
    with open(path, "w") as fh:
        fh.write(to_text(g))


def read_graph(path):
    with open(path) as fh:
        return from_text(fh.read())
