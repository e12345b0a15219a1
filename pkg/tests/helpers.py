"""Random instance families shared by several test modules."""

import numpy as np

from concatfj.network import random_strongly_connected


def random_instance(rng, n_max=12):
    """A strongly connected graph, a stubbornness profile with at least one
    partially stubborn agent (some agents exactly zero), and opinions in [0, 1]."""
    n = int(rng.integers(2, n_max + 1))
    g = random_strongly_connected(n, int(rng.integers(2**31)), float(rng.uniform(0.05, 1.0)))
    theta = np.where(rng.random(n) < 0.3, 0.0, rng.random(n))
    if not np.any(theta > 0):
        theta[rng.integers(n)] = rng.uniform(0.05, 0.95)
    y0 = rng.random(n)
    return g, theta, y0


def brute_force_fixed_point(w, theta, y0, steps=200_000, tol=1e-15):
    """Plain loop over agents, independent of the vectorized code paths."""
    n = len(y0)
    y = list(y0)
    for _ in range(steps):
        new = [
            (1 - theta[i]) * sum(w[i][j] * y[j] for j in range(n)) + theta[i] * y0[i]
            for i in range(n)
        ]
        if max(abs(a - b) for a, b in zip(new, y)) < tol:
            return np.array(new)
        y = new
    return np.array(y)


def transitive_closure(adj):
    """Warshall reachability over a boolean adjacency matrix."""
    n = len(adj)
    reach = [[bool(adj[i][j]) or i == j for j in range(n)] for i in range(n)]
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                for j in range(n):
                    if reach[k][j]:
                        reach[i][j] = True
    return reach
