"""Command-line interface.

Subcommands:
  spectrum        print a topology -> spectral-quantity table as CSV
  median-scaling  stop-time growth of the decentralized subgradient method on rings
  ridge           streaming ridge regression benchmark (random / grid network)
  run             execute a custom JSON config
  validate        check a config (and its mixing matrix) without running it

Examples:
  dsgdsim spectrum --kind ring --n 50 --rule lazy_metropolis
  dsgdsim median-scaling --n-list 10,20,30 --epsilon 0.1 --out out/median
  dsgdsim ridge --instance grid --reps 20 --horizon 1e5 --threads 4 --out out/grid
  dsgdsim run --config config.json --out out/custom --threads 4
  dsgdsim validate --config config.json

Exit codes: 0 success, 2 configuration error, 3 divergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .algorithms import DivergenceError
from .graphs import is_connected
from .harness import (
    ConfigError,
    ExitCode,
    build_mixing,
    build_topology,
    experiment_median_scaling,
    experiment_ridge,
    load_config,
    run_custom,
)
from .mixing import validate as validate_mixing


def _int_arg(text: str) -> int:
    """Integer CLI argument that also accepts scientific notation like 1e8."""
    value = float(text)
    if value != int(value):
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    return int(value)


def _int_list(text: str) -> list[int]:
    return [_int_arg(part) for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dsgdsim",
        description="Simulate consensus-based decentralized stochastic gradient methods.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="topology -> spectral quantity table")
    sp.add_argument("--config", type=Path, help="JSON file: {topologies: [...], rules: [...]}")
    sp.add_argument("--kind", choices=("ring", "path", "star", "complete", "grid",
                                       "tree", "erdos_renyi"))
    sp.add_argument("--n", type=_int_arg)
    sp.add_argument("--rows", type=_int_arg)
    sp.add_argument("--cols", type=_int_arg)
    sp.add_argument("--p", type=float)
    sp.add_argument("--seed", type=_int_arg, default=0)
    sp.add_argument("--rule", choices=("metropolis", "lazy_metropolis"),
                    default="lazy_metropolis")
    sp.add_argument("--out", type=Path, help="write CSV here instead of stdout")

    ms = sub.add_parser("median-scaling", help="ring-size scaling of the median stop time")
    ms.add_argument("--n-list", type=_int_list, default=[10, 20, 30])
    ms.add_argument("--epsilon", type=float, default=0.1)
    ms.add_argument("--horizon", type=_int_arg, default=10**8)
    ms.add_argument("--seed", type=_int_arg, default=0)
    ms.add_argument("--rule", choices=("metropolis", "lazy_metropolis"),
                    default="metropolis")
    ms.add_argument("--out", type=Path)

    rg = sub.add_parser("ridge", help="streaming ridge benchmark (decentralized vs centralized)")
    rg.add_argument("--instance", choices=("random", "grid", "both"), default="both")
    rg.add_argument("--reps", type=_int_arg, default=100)
    rg.add_argument("--horizon", type=_int_arg, default=10**5)
    rg.add_argument("--seed", type=_int_arg, default=0)
    rg.add_argument("--threads", type=_int_arg, default=1)
    rg.add_argument("--out", type=Path)

    rn = sub.add_parser("run", help="run a custom config file")
    rn.add_argument("--config", type=Path, required=True)
    rn.add_argument("--out", type=Path)
    rn.add_argument("--seed", type=_int_arg, help="override the config seed")
    rn.add_argument("--reps", type=_int_arg, help="override the config replication count")
    rn.add_argument("--threads", type=_int_arg, default=1)

    vd = sub.add_parser("validate", help="validate a config without running it")
    vd.add_argument("--config", type=Path, required=True)

    return parser


def _cmd_spectrum(args) -> int:
    if args.config is not None:
        spec = json.loads(args.config.read_text())
        topologies = spec.get("topologies", [])
        rules = spec.get("rules", ["lazy_metropolis"])
    else:
        if args.kind is None:
            raise ConfigError(["spectrum needs --config or --kind"])
        topo: dict = {"kind": args.kind}
        if args.kind == "grid":
            topo.update(rows=args.rows, cols=args.cols)
        else:
            topo["n"] = args.n
        if args.kind in ("erdos_renyi", "tree"):
            topo["seed"] = args.seed
        if args.kind == "erdos_renyi":
            topo["p"] = args.p
        topologies = [topo]
        rules = [args.rule]
    lines = ["topology,n,rule,lambda,inv_gap"]
    for topo in topologies:
        graph, accepted = build_topology(topo)
        label = topo["kind"]
        if accepted is not None:
            label = f"{topo['kind']}[p={topo['p']},seed={accepted}]"
        for rule in rules:
            W = build_mixing(rule, graph)
            inv_gap = 1.0 / (1.0 - W.lam)
            lines.append(f"{label},{graph.n},{rule},{W.lam:.17g},{inv_gap:.17g}")
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return ExitCode.OK


def _cmd_median_scaling(args) -> int:
    result = experiment_median_scaling(
        args.n_list, epsilon=args.epsilon, horizon=args.horizon,
        seed=args.seed, rule=args.rule, out_dir=args.out,
    )
    from .harness import median_scaling_csv

    sys.stdout.write(median_scaling_csv(result.rows))
    if result.out_dir is not None:
        print(f"wrote {result.out_dir}/median_scaling.csv")
    return ExitCode.OK


def _cmd_ridge(args) -> int:
    instances = ["random", "grid"] if args.instance == "both" else [args.instance]
    for instance in instances:
        out = None if args.out is None else Path(args.out) / instance
        result = experiment_ridge(
            instance, reps=args.reps, horizon=args.horizon, seed=args.seed,
            threads=args.threads, out_dir=out,
        )
        print(
            f"instance={instance} n={result.n} lambda={result.lam:.6f} "
            f"transient={result.transient} "
            f"transient_node_max={result.transient_node_max}"
        )
        if result.out_dir is not None:
            print(f"wrote {result.out_dir}")
    return ExitCode.OK


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.reps is not None:
        cfg.reps = args.reps
    result = run_custom(cfg, out_dir=args.out, threads=args.threads)
    if result.out_dir is not None:
        print(f"wrote {result.out_dir} ({cfg.reps} replications)")
    else:
        print(f"ran {cfg.reps} replications (no --out given, nothing written)")
    return ExitCode.OK


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    lam = None
    if cfg.topology is not None:
        graph, accepted = build_topology(cfg.topology)
        if cfg.mixing_rule is not None:
            W = build_mixing(cfg.mixing_rule, graph)
            problems = validate_mixing(W, graph)
            if problems:
                raise ConfigError(problems)
            lam = W.lam
        if not is_connected(graph):
            raise ConfigError(["topology is not connected"])
        if accepted is not None:
            print(f"accepted topology seed: {accepted}")
    print("config OK" + ("" if lam is None else f" (lambda={lam:.6f})"))
    return ExitCode.OK


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "median-scaling": _cmd_median_scaling,
    "ridge": _cmd_ridge,
    "run": _cmd_run,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return ExitCode.CONFIG
    except DivergenceError as exc:
        print(f"run diverged: {exc}", file=sys.stderr)
        return ExitCode.DIVERGENCE


if __name__ == "__main__":
    sys.exit(main())
