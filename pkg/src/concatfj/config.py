"""Experiment config files and run manifests.

Config files are JSON with ``graph``, ``policy`` and ``experiment`` sections
(``simulate`` also reads ``initial``).  A run manifest carries the fully
resolved config under ``resolved_config`` and can be passed back as a config.
"""

from __future__ import annotations

import json
from pathlib import Path

from concatfj import __version__
from concatfj.dynamics import as_opinions, as_stubbornness
from concatfj.errors import ConfigError
from concatfj.experiments import DEFAULT_C_VALUES, GridConfig, SweepConfig
from concatfj.network import (
    InfluenceGraph,
    complete_uniform,
    from_weights,
    load_graph,
    random_strongly_connected,
)
from concatfj.voting import DECREASING, INCREASING, StubbornnessPolicy

MANIFEST_NAME = "manifest.json"


def read_config(path) -> tuple[dict, Path]:
    """Load a config or manifest; returns the config dict and its directory."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    if "resolved_config" in doc:
        doc = doc["resolved_config"]
    return doc, path.parent


def _section(doc: dict, name: str) -> dict:
    sec = doc.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"section {name!r} must be an object")
    return sec


def _reject_unknown(sec: dict, allowed: set, name: str) -> None:
    unknown = set(sec) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {sorted(unknown)}")


def resolve_graph(sec: dict, base_dir: Path, seed=None) -> tuple[InfluenceGraph, dict]:
    kind = sec.get("kind", "weights" if "weights" in sec else "complete")
    if kind == "weights":
        _reject_unknown(sec, {"kind", "weights", "n"}, "graph")
        g = from_weights(sec["weights"])
        return g, {"kind": "weights", "weights": g.weights.tolist()}
    if kind == "file":
        _reject_unknown(sec, {"kind", "path"}, "graph")
        path = Path(sec["path"])
        if not path.is_absolute():
            path = base_dir / path
        g = load_graph(path)
        # inline so a rerun from the manifest does not depend on the file
        return g, {"kind": "weights", "weights": g.weights.tolist()}
    if kind == "complete":
        _reject_unknown(sec, {"kind", "n"}, "graph")
        n = int(sec["n"])
        return complete_uniform(n), {"kind": "complete", "n": n}
    if kind == "random":
        _reject_unknown(sec, {"kind", "n", "seed", "density"}, "graph")
        n = int(sec["n"])
        s = int(seed if seed is not None else sec.get("seed", 0))
        density = float(sec.get("density", 0.3))
        return random_strongly_connected(n, s, density), {
            "kind": "random", "n": n, "seed": s, "density": density,
        }
    raise ConfigError(f"unknown graph kind {kind!r}")


def resolve_simulate(doc: dict, base_dir: Path, seed=None, tol=None) -> tuple[dict, dict]:
    """Returns (objects, resolved_config) for the ``simulate`` subcommand."""
    _reject_unknown(doc, {"graph", "initial", "policy", "experiment"}, "config")
    g, graph_doc = resolve_graph(_section(doc, "graph"), base_dir, seed)
    init = _section(doc, "initial")
    _reject_unknown(init, {"opinions", "stubbornness"}, "initial")
    if "opinions" not in init or "stubbornness" not in init:
        raise ConfigError("section 'initial' needs 'opinions' and 'stubbornness'")
    y0 = as_opinions(init["opinions"], g.n)
    theta0 = as_stubbornness(init["stubbornness"], g.n)
    policy = StubbornnessPolicy.from_dict(_section(doc, "policy"))
    exp = _section(doc, "experiment")
    _reject_unknown(exp, {"issues", "method", "tol"}, "experiment")
    issues = int(exp.get("issues", 100))
    if issues < 0:
        raise ConfigError(f"issues must be >= 0, got {issues}")
    method = exp.get("method", "closed")
    if method not in ("closed", "iterative"):
        raise ConfigError(f"unknown method {method!r}")
    tol = float(tol if tol is not None else exp.get("tol", 1e-3))
    resolved = {
        "graph": graph_doc,
        "initial": {"opinions": y0.tolist(), "stubbornness": theta0.tolist()},
        "policy": policy.to_dict(),
        "experiment": {"issues": issues, "method": method, "tol": tol},
    }
    objects = {"graph": g, "y0": y0, "theta0": theta0, "policy": policy,
               "issues": issues, "method": method, "tol": tol}
    return objects, resolved


def resolve_grid(doc: dict, seed=None, tol=None) -> tuple[GridConfig, dict]:
    _reject_unknown(doc, {"graph", "policy", "experiment"}, "config")
    graph = _section(doc, "graph")
    _reject_unknown(graph, {"kind", "n"}, "graph")
    if graph.get("kind", "complete") != "complete":
        raise ConfigError("the grid experiment runs on the complete uniform graph only")
    policy = _section(doc, "policy")
    _reject_unknown(policy, {"kind", "c"}, "policy")
    if policy.get("kind", INCREASING) != INCREASING:
        raise ConfigError("the grid experiment uses the increasing policy only")
    exp = _section(doc, "experiment")
    _reject_unknown(exp, {"resolution", "trials", "issues", "tol", "seed"}, "experiment")
    d = GridConfig()
    cfg = GridConfig(
        n=int(graph.get("n", d.n)),
        resolution=int(exp.get("resolution", d.resolution)),
        trials=int(exp.get("trials", d.trials)),
        issues=int(exp.get("issues", d.issues)),
        c=float(policy.get("c", d.c)),
        tol=float(tol if tol is not None else exp.get("tol", d.tol)),
        seed=int(seed if seed is not None else exp.get("seed", d.seed)),
    )
    resolved = {
        "graph": {"kind": "complete", "n": cfg.n},
        "policy": {"kind": INCREASING, "c": cfg.c},
        "experiment": {"resolution": cfg.resolution, "trials": cfg.trials,
                       "issues": cfg.issues, "tol": cfg.tol, "seed": cfg.seed},
    }
    return cfg, resolved


def resolve_sweep(doc: dict, seed=None) -> tuple[SweepConfig, dict]:
    _reject_unknown(doc, {"graph", "policy", "experiment"}, "config")
    graph = _section(doc, "graph")
    _reject_unknown(graph, {"kind", "n", "density"}, "graph")
    if graph.get("kind", "random") != "random":
        raise ConfigError("the sweep experiment runs on a random strongly connected graph only")
    policy = _section(doc, "policy")
    _reject_unknown(policy, {"kind", "epsilon", "c_values"}, "policy")
    if policy.get("kind", DECREASING) != DECREASING:
        raise ConfigError("the sweep experiment uses the decreasing policy only")
    exp = _section(doc, "experiment")
    _reject_unknown(exp, {"issues", "seed", "c_values"}, "experiment")
    d = SweepConfig()
    c_values = exp.get("c_values", policy.get("c_values", list(DEFAULT_C_VALUES)))
    cfg = SweepConfig(
        n=int(graph.get("n", d.n)),
        c_values=tuple(c_values),
        epsilon=float(policy.get("epsilon", d.epsilon)),
        issues=int(exp.get("issues", d.issues)),
        seed=int(seed if seed is not None else exp.get("seed", d.seed)),
        density=float(graph.get("density", d.density)),
    )
    resolved = {
        "graph": {"kind": "random", "n": cfg.n, "density": cfg.density},
        "policy": {"kind": DECREASING, "epsilon": cfg.epsilon},
        "experiment": {"issues": cfg.issues, "seed": cfg.seed, "c_values": list(cfg.c_values)},
    }
    return cfg, resolved


def write_manifest(out_dir, subcommand: str, resolved: dict, outputs: list, seed=None) -> Path:
    manifest = {
        "subcommand": subcommand,
        "version": __version__,
        "seed": seed,
        "resolved_config": resolved,
        "outputs": list(outputs),
    }
    path = Path(out_dir) / MANIFEST_NAME
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path

