"""Seeded Monte-Carlo harnesses: the (d0, theta_max) grid and the sweep over c.

Every grid cell draws from its own random stream, derived from the master
seed and the cell's grid indices, so results do not depend on how cells are
distributed over worker processes.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from concatfj.dynamics import run_issue_sequence
from concatfj.errors import ConfigError, PolicyError
from concatfj.network import InfluenceGraph, complete_uniform, random_strongly_connected
from concatfj.voting import DECREASING, INCREASING, StubbornnessPolicy, update_stubbornness

DEFAULT_C_VALUES = (0.0, -0.2, -0.4, -0.6, -0.8, -1.0)
WORKERS_ENV = "CONCATFJ_WORKERS"
MAX_RESAMPLE = 10_000


@dataclass
class GridConfig:
    n: int = 8
    resolution: int = 21
    trials: int = 25
    issues: int = 500
    c: float = 1.0
    tol: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if self.resolution < 2:
            raise ConfigError(f"resolution must be >= 2, got {self.resolution}")
        if self.trials < 1 or self.issues < 1:
            raise ConfigError("trials and issues must both be >= 1")
        if not 0 <= self.c <= 1:
            raise PolicyError(f"grid uses the increasing policy; c must lie in [0, 1], got {self.c}")
        if not self.tol > 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")

    def axis(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.resolution)


@dataclass(frozen=True)
class GridCell:
    i: int  # index along d0
    j: int  # index along theta_max
    d0: float
    theta_max: float
    trials: int
    converged: int

    @property
    def classification(self) -> str:
        return "consensus" if self.converged == self.trials else "disagreement"


@dataclass
class SweepConfig:
    n: int = 10
    c_values: tuple = DEFAULT_C_VALUES
    epsilon: float = 1e-6
    issues: int = 5000
    seed: int = 0
    density: float = 0.3

    def __post_init__(self):
        self.c_values = tuple(float(c) for c in self.c_values)
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if not self.c_values:
            raise ConfigError("c_values must not be empty")
        for c in self.c_values:
            if not -1 <= c <= 0:
                raise PolicyError(f"sweep uses the decreasing policy; c must lie in [-1, 0], got {c}")
        if not self.epsilon > 0:
            raise PolicyError(f"epsilon must be positive, got {self.epsilon}")
        if self.issues < 1:
            raise ConfigError("issues must be >= 1")
        if not 0 < self.density <= 1:
            raise ConfigError(f"density must lie in (0, 1], got {self.density}")


@dataclass
class SweepResult:
    config: SweepConfig
    graph: InfluenceGraph
    y0: np.ndarray
    theta0: np.ndarray
    d: dict = field(default_factory=dict)  # c -> d(s) for s = 0 .. issues

    def first_below(self, level: float) -> dict:
        """Per c, the first issue with d(s) < level (None if never)."""
        out = {}
        for c, d in self.d.items():
            hits = np.flatnonzero(d < level)
            out[c] = int(hits[0]) if hits.size else None
        return out


def resolve_workers(workers=None) -> int:
    if workers is None:
        workers = os.environ.get(WORKERS_ENV, 1)
    workers = int(workers)
    if workers < 1:
        raise ConfigError(f"worker count must be >= 1, got {workers}")
    return workers


def cell_rng(seed: int, i: int, j: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i, j)))


def sample_cell_instance(d0: float, theta_max: float, n: int, rng: np.random.Generator):
    """Opinions uniform on [0, d0] with two agents pinned at 0 and d0,
    stubbornness uniform on [0, theta_max].

    Stubbornness is redrawn until some agent is partially stubborn; with
    theta_max = 0 that cannot happen and the all-zero profile is returned.
    """
    if not (0 <= d0 <= 1 and 0 <= theta_max <= 1):
        raise ConfigError(f"d0 and theta_max must lie in [0, 1], got ({d0}, {theta_max})")
    y = rng.uniform(0.0, d0, n)
    y[0], y[1] = 0.0, d0
    theta = rng.uniform(0.0, theta_max, n)
    if theta_max > 0:
        for _ in range(MAX_RESAMPLE):
            if np.any(theta > 0):
                break
            theta = rng.uniform(0.0, theta_max, n)
    # uniform(0, 1) can return values within rounding of 1; keep agents short of full stubbornness
    theta = np.minimum(theta, np.nextafter(1.0, 0.0))
    return y, theta


def _stationary(w: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eig(w.T)
    k = int(np.argmin(np.abs(vals - 1.0)))
    pi = np.real(vecs[:, k])
    return pi / pi.sum()


def simulate_batch(
    w: np.ndarray, y0: np.ndarray, theta0: np.ndarray, policy: StubbornnessPolicy, issues: int, tol: float
) -> np.ndarray:
    """Final spread d(issues) for a batch of independent trials on one graph.

    ``y0`` and ``theta0`` have shape (trials, n).  Trials whose stubbornness is
    identically zero follow pure averaging, whose within-issue limit is the
    stationary-weighted mean.  Since every issue map is row-stochastic the
    spread never grows, so the loop stops once all trials sit well below ``tol``.
    """
    y = np.array(y0, dtype=float)
    theta = np.array(theta0, dtype=float)
    trials, n = y.shape
    eye = np.eye(n)
    pi = None
    bound = policy.bind(theta) if policy.kind == DECREASING else policy
    for _ in range(issues):
        spread = y.max(axis=1) - y.min(axis=1)
        if np.all(spread < 0.5 * tol):
            break
        averaging = ~np.any(theta > 0, axis=1)
        y_final = np.empty_like(y)
        if np.any(~averaging):
            th = theta[~averaging]
            m = eye[None, :, :] - (1.0 - th)[:, :, None] * w[None, :, :]
            rhs = (th * y[~averaging])[:, :, None]
            y_final[~averaging] = np.linalg.solve(m, rhs)[:, :, 0]
        if np.any(averaging):
            if pi is None:
                pi = _stationary(w)
            y_final[averaging] = (y[averaging] @ pi)[:, None]
        mu = np.median(y_final, axis=1)
        delta = np.abs(y_final - mu[:, None])
        theta = update_stubbornness(theta, delta, bound)
        y = y_final
    return y.max(axis=1) - y.min(axis=1)


def _run_cell(args):
    config, i, j = args
    axis = config.axis()
    d0, theta_max = float(axis[i]), float(axis[j])
    rng = cell_rng(config.seed, i, j)
    samples = [sample_cell_instance(d0, theta_max, config.n, rng) for _ in range(config.trials)]
    y0 = np.array([s[0] for s in samples])
    theta0 = np.array([s[1] for s in samples])
    w = complete_uniform(config.n).weights
    policy = StubbornnessPolicy(INCREASING, config.c)
    final = simulate_batch(w, y0, theta0, policy, config.issues, config.tol)
    return GridCell(i, j, d0, theta_max, config.trials, int(np.sum(final < config.tol)))


def run_grid(config: GridConfig, workers=None) -> list:
    """Classify every (d0, theta_max) cell; cells come back in row-major (d0, theta_max) order."""
    jobs = [(config, i, j) for i in range(config.resolution) for j in range(config.resolution)]
    workers = resolve_workers(workers)
    if workers == 1:
        return [_run_cell(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_cell, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def below_guarantee_line(cell: GridCell, resolution: int) -> bool:
    """Strictly below theta_max = 1 - d0, decided on grid indices to avoid rounding."""
    return cell.i + cell.j < resolution - 1


def sample_sweep_instance(config: SweepConfig):
    g = random_strongly_connected(config.n, config.seed, config.density)
    rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(1,)))
    y0 = rng.random(config.n)
    for _ in range(MAX_RESAMPLE):
        theta0 = rng.random(config.n)
        if np.any(theta0 > 0):
            break
    return g, y0, theta0


def _run_sweep_c(args):
    g, y0, theta0, c, epsilon, issues = args
    policy = StubbornnessPolicy(DECREASING, c, epsilon)
    return run_issue_sequence(g, theta0, y0, policy, issues).d_series()


def run_sweep(config: SweepConfig, workers=None) -> SweepResult:
    """Decreasing-stubbornness runs for each c on one shared realization."""
    g, y0, theta0 = sample_sweep_instance(config)
    jobs = [(g, y0, theta0, c, config.epsilon, config.issues) for c in config.c_values]
    workers = resolve_workers(workers)
    if workers == 1:
        series = [_run_sweep_c(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            series = list(pool.map(_run_sweep_c, jobs))
    return SweepResult(config, g, y0, theta0, dict(zip(config.c_values, series)))


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_grid_csv(cells, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["d0", "theta_max", "trials", "converged_count", "classification"])
        for cell in cells:
            writer.writerow(
                [_fmt(cell.d0), _fmt(cell.theta_max), cell.trials, cell.converged, cell.classification]
            )


def write_sweep_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["c", "s", "d"])
        for c, d in result.d.items():
            for s, value in enumerate(d):
                writer.writerow([_fmt(c), s, _fmt(value)])


def config_dict(config) -> dict:
    doc = asdict(config)
    if "c_values" in doc:
        doc["c_values"] = list(doc["c_values"])
    return doc

