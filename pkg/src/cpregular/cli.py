"""Command line front end.

Exit codes: 0 success, 2 result flagged unreliable (statistical violation
or boundary contamination), 1 error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import cp, cover, experiments, explore
from .bounds import TailBoundQuery, binomial_tail_bound, exact_binomial_tail
from .configmodel import sample_regular
from .graph import read_graph, write_graph


def _parse_init(spec, n):
    if spec == "all":
        return list(range(n))
    if spec.startswith("vertex:"):
        return [int(spec.split(":", 1)[1])]
    with open(spec) as fh:
        return sorted({int(tok) for tok in fh.read().split()})


def _parse_grid(text):
    return [float(tok) for tok in text.replace(",", " ").split()]


def cmd_gen_graph(args):
    g = sample_regular(args.n, args.d, np.random.default_rng(args.seed))
    write_graph(g, args.out)
    print("wrote %d vertices, %d edges to %s" % (g.n, len(g.edges), args.out))
    return 0


def cmd_simulate(args):
    g = read_graph(args.graph)
    initial = _parse_init(args.init, g.n)
    taus, censored, peaks, max_dists = cp.simulate_batch(
        g, args.lam, initial, args.replicas, args.horizon, args.seed
    )
    single = len(set(initial)) == 1
    with open(args.out, "w") as fh:
        fh.write("replica,tau,censored,peak,kappa\n")
        for i in range(args.replicas):
            kap = str(int(max_dists[i])) if single else ""
            fh.write("%d,%.10g,%d,%d,%s\n" % (
                i, taus[i], int(censored[i]), peaks[i], kap))
    print("wrote %d replicas to %s (censored fraction %.4f)"
          % (args.replicas, args.out, float(np.mean(censored))))
    return 0


def cmd_cover_check(args):
    g = read_graph(args.graph)
    c = cover.build_cover(g, args.root, args.depth)
    cover.check_cover(c)
    report = {
        "kind": "cover_check",
        "graph": args.graph,
        "root": args.root,
        "depth": args.depth,
        "nodes": c.n,
        "fibers": {str(v): len(nodes) for v, nodes in sorted(c.fibers().items())},
        "ok": True,
    }
    _emit(report, args.out)
    return 0


def cmd_domination_check(args):
    g = read_graph(args.graph)
    initial = _parse_init(args.init, g.n)
    t_grid = _parse_grid(args.t_grid)
    report = cover.domination_check(
        g, args.lam, initial, args.replicas, t_grid, args.depth, args.seed
    )
    if len(initial) == 1:
        report["kappa"] = cover.kappa_domination_check(
            g, args.lam, initial[0], args.replicas, args.depth, args.seed + 17
        )
    _emit(report, args.out)
    flagged = bool(report["violations"]) or report["boundary_contamination"] > 0.01
    if "kappa" in report:
        flagged = flagged or bool(report["kappa"]["violations"])
    return 2 if flagged else 0


def cmd_pass_stats(args):
    rng = np.random.default_rng(args.seed)
    seeds = list(range(args.seeds))
    result = explore.construction_run(args.n, args.d, seeds, args.r, args.ell, rng)
    report = {
        "kind": "pass_stats",
        "n": args.n, "d": args.d, "r": args.r, "ell": args.ell,
        "requested_seeds": args.seeds,
        "prepared": result.report.prepared,
        "kept_seeds": result.kept_seeds,
        "stats": result.stats,
        "constants": {
            "c_ell": explore.constants(args.d, args.r, args.ell).c_ell,
            "c_r_ell": explore.constants(args.d, args.r, args.ell).c_r_ell,
            "gamma_r": float(explore.constants(args.d, args.r, args.ell).gamma_r),
        },
        "passes": [
            {
                "seed": o.seed, "bud": o.bud, "success": o.success,
                "iterations": o.iterations,
                "short_collisions": o.short_collisions,
                "long_collisions": o.long_collisions,
                "quieted_buds": o.quieted_buds,
            }
            for o in result.outcomes
        ],
    }
    _emit(report, args.out)
    return 0 if result.stats["target_met"] else 2


def cmd_bounds(args):
    q = TailBoundQuery(args.m, args.p, args.delta)
    bound = binomial_tail_bound(q)
    print("chernoff_bound %.12g" % bound)
    if args.m <= 1000:
        import math
        k = math.ceil((args.p + args.delta) * args.m)
        print("exact_tail %.12g" % exact_binomial_tail(args.m, args.p, k))
    else:
        print("exact_tail unavailable (m > 1000)")
    return 0


def _load_config(args):
    if args.config:
        cfg = experiments.ExperimentConfig.from_file(args.config)
    else:
        cfg = experiments.ExperimentConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out_dir is not None:
        cfg.out_dir = args.out_dir
    return cfg


def cmd_scan_lambda(args):
    _, report = experiments.lambda_scan(_load_config(args))
    print(json.dumps(report["rows"], indent=2))
    return 0


def cmd_extinction_scaling(args):
    _, report = experiments.extinction_scaling(_load_config(args))
    print(json.dumps(report["per_lambda"], indent=2))
    return 0


def cmd_supercritical_iteration(args):
    report = experiments.supercritical_iteration(
        args.n, args.d, args.lam, args.eps, args.k, args.ell, args.r,
        args.replicas, args.seed, big_r=args.big_r, out_dir=args.out_dir,
    )
    print(json.dumps(report, indent=2))
    if report["vacuous"] or not report.get("extraction_ok", False):
        return 2
    return 0


def cmd_subcritical_decay(args):
    report = experiments.subcritical_decay(
        args.d, args.lam, args.ell_trunc, _parse_grid(args.t_grid),
        args.replicas, args.seed, out_dir=args.out_dir,
    )
    print(json.dumps(report, indent=2))
    return 2 if report["unreliable"] else 0


def _emit(report, out):
    text = json.dumps(report, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def build_parser():
    p = argparse.ArgumentParser(
        prog="cpregular",
        description="Contact process on random regular multigraphs",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("gen-graph", help="sample a uniform (d+1)-regular multigraph")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen_graph)

    sp = sub.add_parser("simulate", help="replicated extinction-time runs")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--init", default="all", help="all | vertex:k | path to id file")
    sp.add_argument("--replicas", type=int, default=100)
    sp.add_argument("--horizon", type=float, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("cover-check", help="build and validate a universal cover")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--root", type=int, default=0)
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_cover_check)

    sp = sub.add_parser("domination-check",
                        help="one-sided survival comparison against a truncated tree")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--init", default="vertex:0")
    sp.add_argument("--replicas", type=int, default=10000)
    sp.add_argument("--t-grid", default="0.5 1 2 4")
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_domination_check)

    sp = sub.add_parser("pass-stats",
                        help="run the construction-time exploration and report outcomes")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--ell", type=int, required=True)
    sp.add_argument("--seeds", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_pass_stats)

    sp = sub.add_parser("bounds", help="binomial tail bound vs exact tail")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.set_defaults(func=cmd_bounds)

    for name, fn in (("scan-lambda", cmd_scan_lambda),
                     ("extinction-scaling", cmd_extinction_scaling)):
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out-dir", default=None)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("supercritical-iteration")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, default=3)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--k", type=float, required=True)
    sp.add_argument("--ell", type=int, required=True)
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--big-r", type=float, default=1.0)
    sp.add_argument("--replicas", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out-dir", default=None)
    sp.set_defaults(func=cmd_supercritical_iteration)

    sp = sub.add_parser("subcritical-decay")
    sp.add_argument("--d", type=int, default=3)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--ell-trunc", type=int, required=True)
    sp.add_argument("--t-grid", default="0.5 1 2 3 4 5")
    sp.add_argument("--replicas", type=int, default=10000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out-dir", default=None)
    sp.set_defaults(func=cmd_subcritical_decay)

    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
