"""The contact process: graphical (Harris) construction and event-driven
simulation.

Two engines are provided on purpose.  `gillespie` simulates the generator
directly (memory-light, no mark pre-generation); `sample_harris` plus
`evolve_harris` realize the Poisson marks explicitly, which makes the
coupling identities (additivity, monotonicity, semigroup) literally
checkable because every initial set is replayed through the same marks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .graph import MultiGraph


@dataclass
class HarrisSystem:
    """Realized Poisson marks on [0, horizon].

    recovery[v]: sorted rate-1 mark times for vertex v.
    transmission[oe]: sorted rate-lam mark times for oriented edge id oe,
    one independent stream per orientation (a doubled edge carries 4).
    """

    lam: float
    horizon: float
    recovery: list
    transmission: list
    _merged: list = field(default=None, repr=False)

    def merged_events(self):
        """All marks sorted by (time, kind, index); recovery before
        transmission on (measure-zero) ties. kind 0 = recovery at vertex,
        kind 1 = transmission on oriented edge."""
        if self._merged is None:
            events = []
            for v, times in enumerate(self.recovery):
                events.extend((float(t), 0, v) for t in times)
            for oe, times in enumerate(self.transmission):
                events.extend((float(t), 1, oe) for t in times)
            events.sort()
            self._merged = events
        return self._merged


def _poisson_times(rate, horizon, rng):
    k = rng.poisson(rate * horizon) if rate * horizon > 0 else 0
    return np.sort(rng.uniform(0.0, horizon, size=k))


def sample_harris(g, lam, horizon, rng):
    if lam <= 0:
        raise ValueError("lam must be positive")
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    recovery = [_poisson_times(1.0, horizon, rng) for _ in range(g.n)]
    transmission = [
        _poisson_times(lam, horizon, rng) for _ in range(g.oriented_edge_count())
    ]
    return HarrisSystem(lam, horizon, recovery, transmission)


def evolve_harris(g, harris, initial, t):
    """State at time t of the process read off the marks, started from
    `initial` at time 0.  Loop marks are no-ops (v0 == v1)."""
    if t > harris.horizon:
        raise ValueError("t exceeds the realized horizon")
    infected = set(initial)
    for time, kind, idx in harris.merged_events():
        if time > t:
            break
        if kind == 0:
            infected.discard(idx)
        else:
            if g.v0(idx) in infected:
                infected.add(g.v1(idx))
    return infected


def harris_extinction_time(g, harris, initial):
    """First time the infected set empties, or None if it survives the
    whole horizon."""
    infected = set(initial)
    if not infected:
        return 0.0
    for time, kind, idx in harris.merged_events():
        if kind == 0:
            infected.discard(idx)
            if not infected:
                return time
        else:
            if g.v0(idx) in infected:
                infected.add(g.v1(idx))
    return None


def harris_after(harris, s):
    """The mark system on (s, horizon], time-shifted to start at 0.

    Running the shifted marks from the time-s state reproduces the time-t
    state of the original marks (the semigroup identity).
    """
    if s < 0 or s > harris.horizon:
        raise ValueError("s outside the realized horizon")
    rec = [t[t > s] - s for t in harris.recovery]
    trans = [t[t > s] - s for t in harris.transmission]
    return HarrisSystem(harris.lam, harris.horizon - s, rec, trans)


@dataclass
class Trajectory:
    initial: frozenset
    extinction_time: float | None  # None means censored at the horizon
    censored: bool
    peak_infected: int
    kappa: int | None  # max distance from source; single-source runs only
    events: list | None = None  # (time, kind, location) when recorded

    @property
    def tau(self):
        return self.extinction_time


def gillespie(g, lam, initial, rng, horizon=math.inf, record_events=False):
    """Exact continuous-time simulation of the generator.

    Transmissions to infected vertices and along loops are no-ops that
    still consume an event draw, keeping the total rate exactly
    |infected| + lam * sum of infected out-degrees.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    initial = sorted(set(initial))
    for v in initial:
        g._check_vertex(v)
    single_source = len(initial) == 1
    dist = g.dist_from(initial[0]) if single_source else None

    infected = set(initial)
    total_out = sum(g.degree(v) for v in infected)
    t = 0.0
    peak = len(infected)
    kappa = 0 if single_source else None
    events = [] if record_events else None
    inf_list = list(infected)
    pos = {v: i for i, v in enumerate(inf_list)}
    maxdeg = g.max_degree()

    def remove(v):
        nonlocal total_out
        i = pos.pop(v)
        last = inf_list[-1]
        inf_list[i] = last
        if last != v:
            pos[last] = i
        inf_list.pop()
        infected.discard(v)
        total_out -= g.degree(v)

    def add(v):
        nonlocal total_out, peak
        pos[v] = len(inf_list)
        inf_list.append(v)
        infected.add(v)
        total_out += g.degree(v)
        peak = max(peak, len(infected))

    while infected:
        rate = len(infected) + lam * total_out
        t_new = t + rng.exponential(1.0 / rate)
        if t_new > horizon:
            return Trajectory(frozenset(initial), None, True, peak, kappa, events)
        t = t_new
        if rng.random() * rate < len(infected):
            v = inf_list[int(rng.integers(len(inf_list)))]
            if record_events:
                events.append((t, "recovery", v))
            remove(v)
        else:
            while True:
                v = inf_list[int(rng.integers(len(inf_list)))]
                if rng.random() * maxdeg < g.degree(v):
                    break
            oe = g.out_edges(v)[int(rng.integers(g.degree(v)))]
            if record_events:
                events.append((t, "transmission", oe))
            w = g.v1(oe)
            if w not in infected:
                add(w)
                if single_source and dist[w] > kappa:
                    kappa = int(dist[w])
    return Trajectory(frozenset(initial), t, False, peak, kappa, events)


def kappa(g, lam, x, rng, horizon=math.inf):
    """Max graph distance from x ever infected; (value, censored flag)."""
    traj = gillespie(g, lam, [x], rng, horizon=horizon)
    return traj.kappa, traj.censored


# -- batched fast paths -------------------------------------------------


def _replica_seeds(seed, replicas):
    return np.random.SeedSequence(seed).generate_state(replicas, dtype=np.uint32)


def _run_batch(g, lam, initial, replicas, horizon, seed, dist_arr=None, t_grid=None):
    out_ptr, out_dst = g.csr_out()
    init = np.asarray(sorted(set(initial)), dtype=np.int64)
    if dist_arr is None:
        dist_arr = np.zeros(g.n, dtype=np.int64)
    if t_grid is None:
        t_grid = np.empty(0, dtype=np.float64)
    else:
        t_grid = np.asarray(t_grid, dtype=np.float64)
    seeds = _replica_seeds(seed, replicas)
    return _kernels.gillespie_batch(
        out_ptr, out_dst, init, float(lam), float(horizon), seeds, dist_arr, t_grid
    )


def extinction_samples(g, lam, initial, replicas, horizon, seed):
    """Independent replicas of tau; deterministic per (seed, replica index).

    Returns (taus, censored, peaks); censored entries hold the horizon, not
    a fake finite extinction time.
    """
    if replicas == 0:
        return (
            np.empty(0),
            np.empty(0, dtype=np.uint8),
            np.empty(0, dtype=np.int64),
        )
    taus, censored, peaks, _, _ = _run_batch(g, lam, initial, replicas, horizon, seed)
    return taus, censored.astype(bool), peaks


def kappa_samples(g, lam, x, replicas, horizon, seed):
    """Reach radius per replica, plus censoring flags."""
    dist_arr = np.maximum(g.dist_from(x), 0)
    taus, censored, _, max_dists, _ = _run_batch(
        g, lam, [x], replicas, horizon, seed, dist_arr=dist_arr
    )
    del taus
    return max_dists, censored.astype(bool)


def simulate_batch(g, lam, initial, replicas, horizon, seed):
    """Replicated runs reporting (taus, censored, peaks, max_dists).

    max_dists is the reach radius when the initial set is a single vertex
    and all zeros otherwise.
    """
    initial = sorted(set(initial))
    dist_arr = np.maximum(g.dist_from(initial[0]), 0) if len(initial) == 1 else None
    taus, censored, peaks, max_dists, _ = _run_batch(
        g, lam, initial, replicas, horizon, seed, dist_arr=dist_arr
    )
    return taus, censored.astype(bool), peaks, max_dists


def population_and_reach(g, lam, initial, replicas, t_grid, seed, dist_arr,
                         horizon=None):
    """Grid-sampled |xi_t| plus per-replica max of dist_arr over infections."""
    if horizon is None:
        horizon = float(max(t_grid)) + 1.0
    _, _, _, max_dists, grid_counts = _run_batch(
        g, lam, initial, replicas, horizon, seed, dist_arr=dist_arr, t_grid=t_grid
    )
    return grid_counts, max_dists


def population_at_times(g, lam, initial, replicas, t_grid, seed, horizon=None):
    """|xi_t| sampled at the grid times, one row per replica."""
    if horizon is None:
        horizon = float(max(t_grid)) + 1.0
    _, _, _, _, grid_counts = _run_batch(
        g, lam, initial, replicas, horizon, seed, t_grid=t_grid
    )
    return grid_counts


def survival_curve(g, lam, initial, replicas, t_grid, seed, dist_arr=None):
    """Empirical P[tau > t] on the grid, plus max-distance records.

    Returns (probs, se, max_dists) where max_dists is per-replica max of
    dist_arr over ever-infected vertices (zeros if dist_arr is None).
    """
    horizon = float(max(t_grid)) + 1e-9
    taus, censored, _, max_dists, _ = _run_batch(
        g, lam, initial, replicas, horizon, seed, dist_arr=dist_arr
    )
    taus = np.where(censored.astype(bool), np.inf, taus)
    probs = np.array([(taus > t).mean() for t in t_grid])
    se = np.sqrt(probs * (1.0 - probs) / replicas)
    return probs, se, max_dists
