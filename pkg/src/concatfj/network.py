"""Directed influence networks with row-stochastic weights.

Entry ``weights[i, j]`` is the influence of agent ``j`` on agent ``i``; an
edge exists wherever the entry is nonzero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import connected_components

from concatfj.errors import ConfigError, NegativeWeight, NotRowStochastic, TooSmall

INPUT_ROW_TOL = 1e-9


@dataclass(frozen=True)
class InfluenceGraph:
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def to_dict(self) -> dict:
        return {"n": self.n, "weights": self.weights.tolist()}

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))


def _validate(w: np.ndarray, tol: float) -> None:
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ConfigError(f"weight matrix must be square, got shape {w.shape}")
    if w.shape[0] < 2:
        raise TooSmall(f"need at least 2 agents, got {w.shape[0]}")
    if not np.all(np.isfinite(w)):
        raise ConfigError("weight matrix contains non-finite entries")
    if np.any(w < 0):
        i, j = np.argwhere(w < 0)[0]
        raise NegativeWeight(f"negative weight w[{i},{j}] = {w[i, j]}")
    dev = np.abs(w.sum(axis=1) - 1.0)
    if dev.max() > tol:
        i = int(dev.argmax())
        raise NotRowStochastic(f"row {i} sums to {w[i].sum():.12g}, expected 1")


def from_weights(matrix) -> InfluenceGraph:
    """Validate a user-supplied weight matrix and wrap it."""
    w = np.asarray(matrix, dtype=float)
    _validate(w, INPUT_ROW_TOL)
    return InfluenceGraph(w)


def complete_uniform(n: int) -> InfluenceGraph:
    if n < 2:
        raise TooSmall(f"need at least 2 agents, got {n}")
    return InfluenceGraph(np.full((n, n), 1.0 / n))


def is_strongly_connected(g: InfluenceGraph) -> bool:
    ncomp, _ = connected_components(g.weights != 0, directed=True, connection="strong")
    return ncomp == 1


def random_strongly_connected(n: int, seed: int, density: float = 0.5) -> InfluenceGraph:
    """Random row-stochastic graph that is strongly connected by construction.

    A directed Hamiltonian cycle over a random permutation of the agents is
    always present; every other entry (self-loops included) is switched on
    independently with probability ``density``.  Active entries get weights
    drawn from (0, 1] and each row is normalized to sum to one.
    """
    if n < 2:
        raise TooSmall(f"need at least 2 agents, got {n}")
    if not 0 < density <= 1:
        raise ConfigError(f"density must lie in (0, 1], got {density}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    pattern = rng.random((n, n)) < density
    pattern[order, np.roll(order, 1)] = True
    w = np.where(pattern, 1.0 - rng.random((n, n)), 0.0)
    w /= w.sum(axis=1, keepdims=True)
    return InfluenceGraph(w)


def load_graph(path) -> InfluenceGraph:
    """Read a graph file of the form ``{"n": int, "weights": [[...], ...]}``."""
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict) or "weights" not in doc:
        raise ConfigError(f"{path}: graph file needs a 'weights' entry")
    g = from_weights(doc["weights"])
    if "n" in doc and doc["n"] != g.n:
        raise ConfigError(f"{path}: n = {doc['n']} but weights are {g.n}x{g.n}")
    return g
