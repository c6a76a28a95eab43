"""Command-line interface.

Subcommands: gen (point sets), build (theta graph JSON), certify (spanning
ratio check), run (tracking experiment, per-replication CSVs + summary.json
+ trajectory.png), sweep (parameter sweep, sweep.csv + sweep.png).

Exit codes: 0 success, 1 configuration error, 2 internal invariant violation.
"""

import argparse
import os
import sys

from .geometry import ConeCountTooSmall, ConeSystem, spanning_ratio
from .harness import (ConfigError, ExperimentConfig, FingerprintMismatch,
                      NoData, generate_points, run_experiment, run_sweep,
                      save_trajectory, summarize, write_summary_json,
                      write_sweep_csv)
from .rng import INSTANCE_STREAM, make_rng
from .spanner import (NoEdgeInCone, RoutingDiverged, Unreachable,
                      build_theta_graph, certify_spanning_ratio,
                      load_graph_json, load_points, save_graph_json,
                      save_points)
from .world import EvolverConfig, QueryOffVertex

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INVARIANT = 2

_INVARIANT_ERRORS = (NoEdgeInCone, RoutingDiverged, Unreachable,
                     QueryOffVertex, FingerprintMismatch, AssertionError)


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; the CLI contract reserves 2 for
    # invariant violations, so remap usage errors to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="thetatrack",
                description="Theta-graph label tracking simulator")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[], help="generate a point set file")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--radius", type=float, default=1.0,
                   help="swap radius the instance must support (default 1.0)")
    g.add_argument("--out", required=True)

    b = sub.add_parser("build", help="build a theta graph from a point file")
    b.add_argument("--points", required=True)
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--plot", default=None, metavar="PNG",
                   help="also render the embedding to this file")

    c = sub.add_parser("certify", help="check the spanning ratio of a graph")
    c.add_argument("--graph", required=True)
    c.add_argument("--pairs", default="all",
                   help="number of random pairs to sample, or 'all' (default)")
    c.add_argument("--seed", type=int, default=0)

    r = sub.add_parser("run", help="run a tracking experiment")
    _add_experiment_args(r)
    r.add_argument("--out", required=True, help="output directory")

    s = sub.add_parser("sweep", help="sweep one parameter across values")
    _add_experiment_args(s)
    s.add_argument("--param", choices=("n", "c"), required=True)
    s.add_argument("--values", required=True,
                   help="comma-separated values for the swept parameter")
    s.add_argument("--out", default=".", help="output directory (default .)")
    return p


def _add_experiment_args(sp) -> None:
    sp.add_argument("--n", type=int, default=200)
    sp.add_argument("--k", type=int, default=8)
    sp.add_argument("--c", type=float, default=4.0)
    sp.add_argument("--evolver", default="random",
                    choices=("none", "random", "greedy", "evader"))
    sp.add_argument("--radius", type=float, default=1.0, help="evolver swap radius")
    sp.add_argument("--swaps-per-step", type=int, default=1)
    sp.add_argument("--overhead", type=float, default=0.5,
                    help="oracle label-switch time cost")
    sp.add_argument("--horizon", default="auto", help="simulated time, or 'auto'")
    sp.add_argument("--reps", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--init", choices=("perfect", "scrambled"), default="perfect")
    sp.add_argument("--points-file", default=None,
                    help="use this point set instead of uniform-square instances")
    sp.add_argument("--no-tracker", action="store_true",
                    help="let the evolver run unmanaged")
    sp.add_argument("--tail", type=float, default=0.25,
                    help="tail window fraction for summaries")
    sp.add_argument("--no-plot", action="store_true", help="skip figure output")


def _experiment_config(args) -> ExperimentConfig:
    horizon = args.horizon
    if horizon != "auto":
        try:
            horizon = float(horizon)
        except ValueError:
            raise ConfigError(f"field 'horizon': must be 'auto' or a number, got {horizon!r}")
    points = args.points_file if args.points_file else "uniform-square"
    n = args.n
    if args.points_file:
        n = len(load_points(args.points_file))
    return ExperimentConfig(
        n=n, k=args.k, c=args.c,
        evolver=EvolverConfig(args.evolver, args.radius, args.swaps_per_step),
        switch_overhead=args.overhead,
        horizon=horizon,
        replications=args.reps,
        seed=args.seed,
        init=args.init,
        points=points,
        tracker_enabled=not args.no_tracker,
    )


# ------------------------------------------------------------- subcommands


def _cmd_gen(args) -> int:
    if args.n < 2:
        raise ConfigError(f"field 'n': must be >= 2, got {args.n}")
    if args.seed < 0:
        raise ConfigError(f"field 'seed': must be >= 0, got {args.seed}")
    rng = make_rng(args.seed, INSTANCE_STREAM)
    pts = generate_points(args.n, rng, args.radius)
    save_points(args.out, pts)
    print(f"wrote {len(pts)} points to {args.out}")
    return EXIT_OK


def _cmd_build(args) -> int:
    pts = load_points(args.points)
    try:
        graph = build_theta_graph(pts, ConeSystem(args.k))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    save_graph_json(args.out, graph)
    print(f"wrote theta graph (n={graph.n}, k={args.k}, "
          f"{len(graph.edges)} undirected edges) to {args.out}")
    if args.plot:
        from .plots import plot_graph
        plot_graph(graph, args.plot, title=f"theta graph n={graph.n} k={args.k}")
        print(f"wrote figure to {args.plot}")
    return EXIT_OK


def _cmd_certify(args) -> int:
    graph = load_graph_json(args.graph)
    try:
        bound = spanning_ratio(graph.cs)
    except ConeCountTooSmall as exc:
        raise ConfigError(str(exc)) from None
    if args.pairs == "all":
        pairs = None
        n_pairs = graph.n * (graph.n - 1) // 2
    else:
        count = int(args.pairs)
        if count < 1:
            raise ConfigError(f"field 'pairs': must be >= 1 or 'all', got {args.pairs}")
        rng = make_rng(args.seed, INSTANCE_STREAM)
        pairs = []
        while len(pairs) < count:
            u, v = rng.integers(0, graph.n, size=2).tolist()
            if u != v:
                pairs.append((u, v))
        n_pairs = count
    worst = certify_spanning_ratio(graph, pairs)
    ok = worst <= bound + 1e-9
    print(f"max observed spanning ratio over {n_pairs} pairs: {worst:.6f}")
    print(f"bound 1/(1 - 2 sin(pi/k)) for k={graph.cs.k}: {bound:.6f}")
    print("PASS" if ok else "FAIL")
    if not ok:
        raise AssertionError("observed spanning ratio exceeds the bound")
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = _experiment_config(args)
    os.makedirs(args.out, exist_ok=True)
    trajectories = run_experiment(cfg)
    for i, traj in enumerate(trajectories):
        save_trajectory(os.path.join(args.out, f"rep_{i:03d}.csv"), traj)
    summary = summarize(trajectories, args.tail)
    write_summary_json(os.path.join(args.out, "summary.json"), cfg, summary, trajectories)
    if not args.no_plot:
        from .plots import plot_trajectories
        plot_trajectories(trajectories, os.path.join(args.out, "trajectory.png"),
                          title=f"n={cfg.n} k={cfg.k} c={cfg.c} "
                                f"evolver={cfg.evolver.kind} overhead={cfg.switch_overhead}")
    print(f"ran {cfg.replications} replication(s) to horizon {cfg.resolved_horizon():.1f}")
    print(f"mean tail distance: {summary.mean_tail_distance:.3f} "
          f"+/- {summary.stderr_tail_distance:.3f} (tail {args.tail:.0%}, "
          f"cap hits {summary.cap_hits})")
    print(f"outputs in {args.out}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    base = _experiment_config(args)
    try:
        if args.param == "n":
            values = [int(v) for v in args.values.split(",") if v]
        else:
            values = [float(v) for v in args.values.split(",") if v]
    except ValueError:
        raise ConfigError(f"field 'values': could not parse {args.values!r}")
    if not values:
        raise ConfigError("field 'values': empty")
    os.makedirs(args.out, exist_ok=True)
    rows = run_sweep(base, args.param, values, args.tail)
    header = f"{args.param:>8}  {'mean_tail_D':>12}  {'stderr':>10}  {'D/n':>8}  {'cap_hits':>8}"
    print(header)
    for row in rows:
        print(f"{row['value']:>8}  {row['mean_tail_distance']:>12.3f}  "
              f"{row['stderr_tail_distance']:>10.3f}  {row['ratio_to_n']:>8.4f}  "
              f"{row['cap_hits']:>8}")
    csv_path = os.path.join(args.out, "sweep.csv")
    write_sweep_csv(csv_path, rows)
    print(f"wrote {csv_path}")
    if not args.no_plot:
        from .plots import plot_sweep
        png_path = os.path.join(args.out, "sweep.png")
        plot_sweep(rows, png_path)
        print(f"wrote {png_path}")
    return EXIT_OK


_COMMANDS = {
    "gen": _cmd_gen,
    "build": _cmd_build,
    "certify": _cmd_certify,
    "run": _cmd_run,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _INVARIANT_ERRORS as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ConfigError, NoData, FileNotFoundError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
