"""Within-issue Friedkin-Johnsen evolution and the issue-to-issue engine.

During issue ``s`` opinions follow

    y(t+1) = (I - Theta) W y(t) + Theta y(0)

and the limit y(s, inf) = V y(s, 0) with V = (I - (I - Theta) W)^-1 Theta
becomes the starting point of issue ``s + 1``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from concatfj.errors import ConfigError, DimensionMismatch, NoConvergence, SingularSystem
from concatfj.network import InfluenceGraph
from concatfj.voting import StubbornnessPolicy, distances, median_vote, update_stubbornness

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10**6
# beyond this condition number I - (I - Theta) W is treated as singular
MAX_CONDITION = 1e12


def as_opinions(y, n: Optional[int] = None) -> np.ndarray:
    y = np.array(y, dtype=float)
    if y.ndim != 1:
        raise DimensionMismatch(f"opinions must be a vector, got shape {y.shape}")
    if n is not None and y.shape[0] != n:
        raise DimensionMismatch(f"expected {n} opinions, got {y.shape[0]}")
    if not np.all((y >= 0) & (y <= 1)):
        raise ConfigError("opinions must lie in [0, 1]")
    return y


def as_stubbornness(theta, n: Optional[int] = None) -> np.ndarray:
    theta = np.array(theta, dtype=float)
    if theta.ndim != 1:
        raise DimensionMismatch(f"stubbornness must be a vector, got shape {theta.shape}")
    if n is not None and theta.shape[0] != n:
        raise DimensionMismatch(f"expected {n} stubbornness values, got {theta.shape[0]}")
    if not np.all((theta >= 0) & (theta <= 1)):
        raise ConfigError("stubbornness must lie in [0, 1]")
    return theta


def satisfies_initial_assumption(theta) -> bool:
    """No agent fully stubborn and at least one partially stubborn."""
    theta = np.asarray(theta, dtype=float)
    return bool(np.all(theta < 1) and np.any(theta > 0))


def within_issue_step(g: InfluenceGraph, theta, y_t, y0) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    y_t = np.asarray(y_t, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    if not (theta.shape == y_t.shape == y0.shape == (g.n,)):
        raise DimensionMismatch(
            f"graph has {g.n} agents; got theta {theta.shape}, y_t {y_t.shape}, y0 {y0.shape}"
        )
    return (1.0 - theta) * (g.weights @ y_t) + theta * y0


def issue_transfer_matrix(g: InfluenceGraph, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (g.n,):
        raise DimensionMismatch(f"graph has {g.n} agents, theta has shape {theta.shape}")
    if not np.any(theta > 0):
        raise SingularSystem(
            "I - (I - Theta) W is singular: no agent is partially stubborn "
            "(at least one theta_i > 0 is required)"
        )
    m = np.eye(g.n) - (1.0 - theta)[:, None] * g.weights
    if np.linalg.cond(m) > MAX_CONDITION:
        raise SingularSystem(
            "I - (I - Theta) W is numerically singular: some closed group of agents "
            "contains no partially stubborn agent (check strong connectivity and theta > 0)"
        )
    return np.linalg.solve(m, np.diag(theta))


def final_opinion_closed_form(g: InfluenceGraph, theta, y0) -> np.ndarray:
    return issue_transfer_matrix(g, theta) @ np.asarray(y0, dtype=float)


def final_opinion_iterative(
    g: InfluenceGraph, theta, y0, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER
) -> np.ndarray:
    """Iterate the within-issue update until successive max-norm change < tol."""
    y0 = np.asarray(y0, dtype=float)
    y = y0
    for _ in range(max_iter):
        y_next = within_issue_step(g, theta, y, y0)
        if np.max(np.abs(y_next - y)) < tol:
            return y_next
        y = y_next
    raise NoConvergence(f"no fixed point within {max_iter} iterations at tol {tol}")


@dataclass
class IssueRecord:
    """One discussed issue: what went in, what came out, and the vote on it."""

    s: int
    theta: np.ndarray  # stubbornness used during the issue
    y_initial: np.ndarray
    y_final: np.ndarray
    mu: float  # vote on the final opinions
    delta: np.ndarray  # distance of each final opinion to the vote
    d: float  # spread of the initial opinions


@dataclass
class IssueTrace:
    records: list
    terminal_opinions: np.ndarray
    terminal_theta: np.ndarray
    policy: StubbornnessPolicy
    metadata: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.terminal_opinions.shape[0]

    @property
    def num_issues(self) -> int:
        return len(self.records)

    def opinions(self) -> np.ndarray:
        """Opinions entering issue s, for s = 0 .. num_issues (row s > 0 is the result of issue s-1)."""
        return np.array([r.y_initial for r in self.records] + [self.terminal_opinions])

    def thetas(self) -> np.ndarray:
        return np.array([r.theta for r in self.records] + [self.terminal_theta])

    def d_series(self) -> np.ndarray:
        y = self.opinions()
        return y.max(axis=1) - y.min(axis=1)

    def mu_series(self) -> np.ndarray:
        return np.array([median_vote(row) for row in self.opinions()])

    def to_rows(self) -> list:
        header = (
            ["s"]
            + [f"y_{i + 1}" for i in range(self.n)]
            + [f"theta_{i + 1}" for i in range(self.n)]
            + ["mu", "d"]
        )
        rows = [header]
        for s, (y, th, mu, d) in enumerate(
            zip(self.opinions(), self.thetas(), self.mu_series(), self.d_series())
        ):
            rows.append([str(s)] + [_fmt(v) for v in y] + [_fmt(v) for v in th] + [_fmt(mu), _fmt(d)])
        return rows

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            csv.writer(fh).writerows(self.to_rows())

    def to_dict(self) -> dict:
        return {
            "metadata": self.metadata,
            "policy": self.policy.to_dict(),
            "issues": [
                {
                    "s": r.s,
                    "theta": r.theta.tolist(),
                    "y_initial": r.y_initial.tolist(),
                    "y_final": r.y_final.tolist(),
                    "mu": r.mu,
                    "delta_next": r.delta.tolist(),
                    "d": r.d,
                }
                for r in self.records
            ],
            "terminal": {
                "s": self.num_issues,
                "y_initial": self.terminal_opinions.tolist(),
                "theta": self.terminal_theta.tolist(),
                "d": float(self.terminal_opinions.max() - self.terminal_opinions.min()),
            },
        }

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))


def _fmt(x) -> str:
    return format(float(x), ".17g")


def run_issue_sequence(
    g: InfluenceGraph,
    theta0,
    y0,
    policy: StubbornnessPolicy,
    num_issues: int,
    method: str = "closed",
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    metadata: Optional[dict] = None,
) -> IssueTrace:
    """Evolve opinions and stubbornness over ``num_issues`` issues.

    ``method`` selects how each issue's limit is computed: ``"closed"`` solves
    the linear system, ``"iterative"`` runs the within-issue update to a fixed point.
    """
    if num_issues < 0:
        raise ConfigError(f"num_issues must be >= 0, got {num_issues}")
    if method not in ("closed", "iterative"):
        raise ConfigError(f"unknown method {method!r}")
    theta = as_stubbornness(theta0, g.n)
    y = as_opinions(y0, g.n)
    policy = policy.bind(theta)

    records = []
    for s in range(num_issues):
        if method == "closed":
            y_final = final_opinion_closed_form(g, theta, y)
        else:
            y_final = final_opinion_iterative(g, theta, y, tol, max_iter)
        mu = median_vote(y_final)
        delta = distances(y_final, mu)
        records.append(IssueRecord(s, theta, y, y_final, mu, delta, float(y.max() - y.min())))
        theta = update_stubbornness(theta, delta, policy)
        y = y_final

    meta = {"method": method, "tol": tol, "max_iter": max_iter}
    meta.update(metadata or {})
    return IssueTrace(records, y, theta, policy, meta)
