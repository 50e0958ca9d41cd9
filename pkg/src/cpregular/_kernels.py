"""Numba batch kernel for the event-driven contact process.

One generic kernel serves extinction sampling, reach-radius tails,
survival curves and population time series.  Rates are exactly those of
the generator: every infected vertex recovers at rate 1 and every oriented
edge out of an infected vertex fires at rate lam; transmissions onto
already-infected vertices and along loops are no-ops that still consume an
event draw (thinning).
"""

import numpy as np
from numba import njit


@njit(cache=True)
def gillespie_batch(out_ptr, out_dst, init, lam, horizon, seeds, dist_arr, t_grid):
    n = out_ptr.size - 1
    reps = seeds.size
    n_grid = t_grid.size

    taus = np.empty(reps, dtype=np.float64)
    censored = np.zeros(reps, dtype=np.uint8)
    peaks = np.zeros(reps, dtype=np.int64)
    max_dists = np.zeros(reps, dtype=np.int64)
    grid_counts = np.zeros((reps, n_grid), dtype=np.int64)

    infected = np.zeros(n, dtype=np.uint8)
    inf_list = np.empty(n, dtype=np.int64)
    pos = np.empty(n, dtype=np.int64)

    maxdeg = 0
    for v in range(n):
        deg = out_ptr[v + 1] - out_ptr[v]
        if deg > maxdeg:
            maxdeg = deg

    for rep in range(reps):
        np.random.seed(seeds[rep])
        count = 0
        total_out = 0
        md = 0
        for j in range(init.size):
            v = init[j]
            if infected[v] == 0:
                infected[v] = 1
                inf_list[count] = v
                pos[v] = count
                count += 1
                total_out += out_ptr[v + 1] - out_ptr[v]
                if dist_arr[v] > md:
                    md = dist_arr[v]
        t = 0.0
        peak = count
        gi = 0

        while True:
            if count == 0:
                taus[rep] = t
                break
            rate = count + lam * total_out
            t_new = t - np.log(np.random.random()) / rate
            while gi < n_grid and t_grid[gi] < t_new:
                grid_counts[rep, gi] = count
                gi += 1
            if t_new > horizon:
                censored[rep] = 1
                taus[rep] = horizon
                while gi < n_grid:
                    grid_counts[rep, gi] = count
                    gi += 1
                for i in range(count):
                    infected[inf_list[i]] = 0
                count = 0
                break
            t = t_new
            if np.random.random() * rate < count:
                # recovery at a uniform infected vertex
                i = int(np.random.random() * count)
                v = inf_list[i]
                last = inf_list[count - 1]
                inf_list[i] = last
                pos[last] = i
                count -= 1
                infected[v] = 0
                total_out -= out_ptr[v + 1] - out_ptr[v]
            else:
                # transmission: source weighted by out-degree via rejection
                while True:
                    i = int(np.random.random() * count)
                    v = inf_list[i]
                    deg = out_ptr[v + 1] - out_ptr[v]
                    if np.random.random() * maxdeg < deg:
                        break
                k = out_ptr[v] + int(np.random.random() * deg)
                w = out_dst[k]
                if infected[w] == 0:
                    infected[w] = 1
                    inf_list[count] = w
                    pos[w] = count
                    count += 1
                    total_out += out_ptr[w + 1] - out_ptr[w]
                    if count > peak:
                        peak = count
                    if dist_arr[w] > md:
                        md = dist_arr[w]

        peaks[rep] = peak
        max_dists[rep] = md

    return taus, censored, peaks, max_dists, grid_counts
