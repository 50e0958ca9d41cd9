"""Binomial large-deviation helpers and the embedded-tree growth probe."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import build_regular_tree, embeds, RootedGraph


@dataclass(frozen=True)
class TailBoundQuery:
    m: int
    p: float
    delta: float

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("m must be non-negative")
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie strictly inside (0, 1)")
        if self.delta < 0.0 or self.p + self.delta > 1.0 + 1e-12:
            raise ValueError("need 0 <= delta <= 1 - p")


def psi(p, delta):
    """Rate function (p+d)log((p+d)/p) + (1-p-d)log((1-p-d)/(1-p)).

    Boundary convention 0*log(0) = 0 at delta = 1-p.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")
    if delta < 0.0 or p + delta > 1.0 + 1e-12:
        raise ValueError("need 0 <= delta <= 1 - p")
    q = p + delta
    out = q * math.log(q / p)
    if q < 1.0:
        out += (1.0 - q) * math.log((1.0 - q) / (1.0 - p))
    return out


def psi_sup_form(p, delta, lo=-60.0, hi=60.0, iters=200):
    """sup_t [ t(p+delta) - log(1 - p + p e^t) ] by golden-section search.

    Independent route to the same quantity; kept separate from psi on
    purpose so the two can be compared.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")
    q = p + delta

    def f(t):
        # log(1 - p + p e^t) computed stably for large |t|
        if t > 0:
            log_mgf = t + math.log(p + (1.0 - p) * math.exp(-t))
        else:
            log_mgf = math.log(1.0 - p + p * math.exp(t))
        return t * q - log_mgf

    gr = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - gr * (b - a), a + gr * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = f(d)
    return max(fc, fd, f(0.0), 0.0)


def binomial_tail_bound(query):
    """e^{-m psi_p(delta)}, the Chernoff bound on P[Bin(m,p) >= (p+delta)m]."""
    return math.exp(-query.m * psi(query.p, query.delta))


def exact_binomial_tail(m, p, k):
    """P[Bin(m, p) >= k] by direct summation (oracle; m <= 1000)."""
    if m > 1000:
        raise ValueError("exact summation limited to m <= 1000")
    if k <= 0:
        return 1.0
    if k > m:
        return 0.0
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0
    logp, logq = math.log(p), math.log(1.0 - p)
    terms = []
    for j in range(k, m + 1):
        logc = math.lgamma(m + 1) - math.lgamma(j + 1) - math.lgamma(m - j + 1)
        terms.append(math.exp(logc + j * logp + (m - j) * logq))
    return min(1.0, math.fsum(terms))


@dataclass(frozen=True)
class GrowthEstimate:
    replicas: int
    successes: int
    threshold: float
    estimate: float | None
    ci_low: float | None
    ci_high: float | None


def wilson_interval(successes, trials, z=1.96):
    if trials == 0:
        return None, None
    phat = successes / trials
    denom = 1.0 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def growth_check(g, x, lam, big_r, ell, alpha, replicas, seed, r=None):
    """Monte Carlo estimate of P[|xi^x at time R*ell| >= alpha^ell].

    Requires a vertex y within distance r of x such that (y, g) embeds the
    rooted regular tree of depth ell; this is an empirical probe at fixed
    finite parameters, not a verification of any asymptotic statement.
    """
    from . import cp  # local import to avoid a cycle at module load

    pattern = build_regular_tree(_branching(g), ell)
    dist = g.dist_from(x)
    candidates = sorted(range(g.n), key=lambda v: (dist[v] if dist[v] >= 0 else g.n + 1, v))
    ok = False
    for y in candidates:
        if r is not None and (dist[y] < 0 or dist[y] > r):
            break
        if embeds(RootedGraph(g, y), pattern) is not None:
            ok = True
            break
    if not ok:
        raise ValueError("no vertex within range embeds the depth-%d tree" % ell)

    threshold = float(alpha) ** ell
    if replicas == 0:
        return GrowthEstimate(0, 0, threshold, None, None, None)
    if threshold > g.n:
        return GrowthEstimate(replicas, 0, threshold, 0.0, 0.0, 0.0)

    t = float(big_r) * ell
    counts = cp.population_at_times(g, lam, [x], replicas, [t], seed)[:, 0]
    successes = int((counts >= threshold).sum())
    lo, hi = wilson_interval(successes, replicas)
    return GrowthEstimate(replicas, successes, threshold, successes / replicas, lo, hi)


def _branching(g):
    # Pattern trees use the host's branching factor d = max_degree - 1.
    return max(2, g.max_degree() - 1)
