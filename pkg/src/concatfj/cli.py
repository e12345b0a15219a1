"""Command-line front end.

Exit codes: 0 success, 2 config error, 3 simulation error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from concatfj import analysis, experiments
from concatfj.config import (
    read_config,
    resolve_grid,
    resolve_simulate,
    resolve_sweep,
    write_manifest,
)
from concatfj.dynamics import run_issue_sequence
from concatfj.errors import ConfigError, SimulationError, SingularSystem

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SIMULATION = 3
EXIT_IO = 4


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    doc, base = read_config(args.config)
    obj, resolved = resolve_simulate(doc, base, seed=args.seed, tol=args.tol)
    out = _out_dir(args.out)
    try:
        trace = run_issue_sequence(
            obj["graph"], obj["theta0"], obj["y0"], obj["policy"], obj["issues"],
            method=obj["method"], metadata={"consensus_tol": obj["tol"]},
        )
    except SingularSystem as exc:
        raise SimulationError(
            f"{exc}. Violated assumption: at least one agent must be partially stubborn "
            "and every agent must be reachable from a stubborn one"
        ) from exc
    trace.to_csv(out / "trace.csv")
    trace.to_json(out / "trace.json")
    write_manifest(out, "simulate", resolved, ["trace.csv", "trace.json"], seed=args.seed)

    reached, s = analysis.consensus_reached(trace, obj["tol"])
    final_theta = " ".join(f"{v:.6g}" for v in trace.terminal_theta)
    print(f"issues: {trace.num_issues}  final d: {trace.d_series()[-1]:.6g}  final theta: {final_theta}")
    if reached:
        print(f"consensus: yes (d < {obj['tol']:g} first at issue {s})")
    else:
        print(f"consensus: no (d >= {obj['tol']:g} through issue {trace.num_issues})")
    return EXIT_OK


def _reduced_params(args) -> dict:
    params = {"delta0": None, "theta0": None, "c": None, "steps": 100,
              "variant": "two-agent"}
    if args.config:
        doc, _ = read_config(args.config)
        unknown = set(doc) - set(params)
        if unknown:
            raise ConfigError(f"unknown keys for reduced: {sorted(unknown)}")
        params.update(doc)
    for key in params:
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    missing = [k for k in ("delta0", "theta0", "c") if params[k] is None]
    if missing:
        raise ConfigError(f"missing parameters: {', '.join(missing)}")
    if params["variant"] not in ("two-agent", "polarized"):
        raise ConfigError(f"unknown variant {params['variant']!r}")
    params["delta0"] = float(params["delta0"])
    params["theta0"] = float(params["theta0"])
    params["c"] = float(params["c"])
    params["steps"] = int(params["steps"])
    if params["steps"] < 0:
        raise ConfigError("steps must be >= 0")
    return params


def cmd_reduced(args) -> int:
    p = _reduced_params(args)
    c = p["c"]
    # the two-agent variant accepts the whole extended domain, which contains D
    traj = analysis.reduced_trajectory(
        (p["delta0"], p["theta0"]), c, p["steps"], p["variant"], extended=True
    )
    lyap = np.array([analysis.lyapunov_value(c, row) for row in traj])
    out = _out_dir(args.out)
    names = ("delta", "theta") if p["variant"] == "two-agent" else ("d", "theta_bar")
    with open(out / "reduced.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", *names, "lyapunov"])
        for k, (row, v) in enumerate(zip(traj, lyap)):
            writer.writerow([k, _fmt(row[0]), _fmt(row[1]), _fmt(v)])
    write_manifest(out, "reduced", p, ["reduced.csv"])

    if p["variant"] == "two-agent":
        holds = analysis.check_two_agent_condition(c, p["delta0"], p["theta0"])
        label = "c*delta0 + theta0 < 1"
    else:
        holds = analysis.check_polarized_condition(c, p["delta0"], p["theta0"])
        label = "c*d0 + theta_max < 1"
    margin = analysis.two_agent_margin(c, p["delta0"], p["theta0"])
    print(f"condition {label}: {'holds' if holds else 'fails'} (margin {margin:.6g})")
    if not holds:
        print("no consensus guarantee; trajectory reported as simulated")
    nonincreasing = bool(np.all(np.diff(lyap) <= 0))
    print(f"lyapunov (a = c) non-increasing: {'yes' if nonincreasing else 'no'}")
    print(f"after {p['steps']} steps: {names[0]} = {traj[-1, 0]:.6g}, {names[1]} = {traj[-1, 1]:.6g}")
    return EXIT_OK


def cmd_check(args) -> int:
    c, delta0, theta0 = args.c, args.delta0, args.theta0
    if not 0 <= c <= 1:
        raise ConfigError(f"c must lie in [0, 1], got {c}")
    if not (0 <= delta0 <= 1 and 0 <= theta0 < 1):
        raise ConfigError(f"({delta0}, {theta0}) outside [0, 1] x [0, 1)")
    if args.variant == "two-agent":
        holds = analysis.check_two_agent_condition(c, delta0, theta0)
    else:
        holds = analysis.check_polarized_condition(c, delta0, theta0)
    verdict = {
        "variant": args.variant,
        "c": c,
        "delta0": delta0,
        "theta0": theta0,
        "consensus_guaranteed": holds,
        "margin": analysis.two_agent_margin(c, delta0, theta0),
    }
    print(json.dumps(verdict))
    return EXIT_OK


def cmd_grid(args) -> int:
    doc = read_config(args.config)[0] if args.config else {}
    cfg, resolved = resolve_grid(doc, seed=args.seed, tol=args.tol)
    out = _out_dir(args.out)
    cells = experiments.run_grid(cfg, workers=args.workers)
    experiments.write_grid_csv(cells, out / "grid.csv")
    write_manifest(out, "grid", resolved, ["grid.csv"], seed=cfg.seed)
    n_cons = sum(cell.classification == "consensus" for cell in cells)
    below = [cell for cell in cells if experiments.below_guarantee_line(cell, cfg.resolution)]
    bad = sum(cell.classification != "consensus" for cell in below)
    print(f"cells: {len(cells)}  consensus: {n_cons}  disagreement: {len(cells) - n_cons}")
    print(f"cells strictly below theta_max = 1 - d0 classified disagreement: {bad} of {len(below)}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    doc = read_config(args.config)[0] if args.config else {}
    cfg, resolved = resolve_sweep(doc, seed=args.seed)
    out = _out_dir(args.out)
    result = experiments.run_sweep(cfg, workers=args.workers)
    experiments.write_sweep_csv(result, out / "sweep.csv")
    write_manifest(out, "sweep", resolved, ["sweep.csv"], seed=cfg.seed)
    first = result.first_below(0.05)
    for c, d in result.d.items():
        s = first[c]
        print(f"c = {c:g}: first d < 0.05 at issue {s if s is not None else '-'}, final d = {d[-1]:.3g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="concatfj",
        description="Concatenated Friedkin-Johnsen dynamics with vote-driven stubbornness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one issue sequence from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, help="override the random graph seed")
    p.add_argument("--tol", type=float, help="consensus tolerance on d(s)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reduced", help="iterate a reduced planar model")
    p.add_argument("--config", help="JSON parameters or a previous run manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--delta0", type=float,
                   help="initial delta in [0, 1] (d0 for the polarized variant)")
    p.add_argument("--theta0", type=float, help="initial theta (theta_max for the polarized variant)")
    p.add_argument("--c", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--variant", choices=["two-agent", "polarized"])
    p.set_defaults(func=cmd_reduced)

    p = sub.add_parser("check", help="evaluate a sufficient condition for consensus")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--delta0", type=float, required=True)
    p.add_argument("--theta0", type=float, required=True)
    p.add_argument("--variant", choices=["two-agent", "polarized"], default="two-agent")
    p.set_defaults(func=cmd_check)

    for name, func, helptext in (
        ("grid", cmd_grid, "grid search over initial spread and stubbornness"),
        ("sweep", cmd_sweep, "convergence under decreasing stubbornness for several c"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="JSON config or a previous run manifest (defaults otherwise)")
        p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--workers", type=int,
                       help=f"worker processes (default: ${experiments.WORKERS_ENV} or 1)")
        if name == "grid":
            p.add_argument("--tol", type=float, help="consensus tolerance on d at the last issue")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, KeyError, TypeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
