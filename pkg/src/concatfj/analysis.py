"""Consensus detection, reduced planar models, and sufficient conditions.

Two-agent reduction (symmetric pair, w = 1/2, shared stubbornness)::

    delta' = theta * delta
    theta' = theta + c (1 - theta) delta theta

on D = [0, 0.5] x [0, 1), or on the extended domain [0, 1] x [0, 1) for one
agent facing everybody else.  The polarized reduction tracks the spread
``d`` between the two extreme agents and their worst-case stubbornness.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np

from concatfj.errors import DomainViolation, PolicyError


class ReducedState(NamedTuple):
    delta: float
    theta: float


class PolarizedState(NamedTuple):
    d: float
    theta_bar: float


def max_distance(y) -> float:
    y = np.asarray(y, dtype=float)
    return float(y.max() - y.min())


def consensus_reached(trace, tol: float = 1e-3) -> tuple[bool, Optional[int]]:
    """First issue index whose spread d(s) drops below ``tol``.

    ``trace`` is an IssueTrace or a plain sequence of d(s) values.
    """
    d = trace.d_series() if hasattr(trace, "d_series") else np.asarray(trace, dtype=float)
    hits = np.flatnonzero(d < tol)
    if hits.size == 0:
        return False, None
    return True, int(hits[0])


def _check_gain(c: float) -> None:
    if not 0.0 <= c <= 1.0:
        raise PolicyError(f"reduced models need c in [0, 1], got {c}")


def _check_domain(delta: float, theta: float, delta_max: float, name: str) -> None:
    if not (0.0 <= delta <= delta_max and 0.0 <= theta < 1.0):
        raise DomainViolation(
            f"({delta}, {theta}) outside {name} = [0, {delta_max}] x [0, 1)"
        )


def _two_agent_map(delta: float, theta: float, c: float) -> ReducedState:
    return ReducedState(theta * delta, theta + c * (1.0 - theta) * delta * theta)


def _polarized_map(d: float, theta_bar: float, c: float) -> PolarizedState:
    d_next = theta_bar * d
    return PolarizedState(d_next, theta_bar + c * (1.0 - theta_bar) * d_next)


def two_agent_reduced_step(state: ReducedState, c: float, extended: bool = False) -> ReducedState:
    _check_gain(c)
    delta, theta = state
    if extended:
        _check_domain(delta, theta, 1.0, "extended domain")
    else:
        _check_domain(delta, theta, 0.5, "two-agent domain")
    return _two_agent_map(delta, theta, c)


def polarized_reduced_step(state: PolarizedState, c: float) -> PolarizedState:
    """Worst-case update of the two extreme agents.

    The stubbornness increment carries the gain ``c`` so that the recursion
    is the one whose sufficient condition is c d(0) + theta_max < 1.
    """
    _check_gain(c)
    d, theta_bar = state
    _check_domain(d, theta_bar, 1.0, "polarized domain")
    return _polarized_map(d, theta_bar, c)


def reduced_trajectory(state, c: float, steps: int, variant: str = "two-agent", extended: bool = False) -> np.ndarray:
    """Iterate a reduced map; returns an array of shape (steps + 1, 2).

    Only the starting state is checked against the domain.  Trajectories
    heading for the theta = 1 line of fixed points can reach it exactly in
    floating point, where the map is still well defined.
    """
    if variant == "two-agent":
        two_agent_reduced_step(ReducedState(*state), c, extended)
        step = _two_agent_map
    elif variant == "polarized":
        polarized_reduced_step(PolarizedState(*state), c)
        step = _polarized_map
    else:
        raise ValueError(f"unknown variant {variant!r}")
    out = np.empty((steps + 1, 2))
    out[0] = state
    x, y = state
    for k in range(steps):
        x, y = step(x, y, c)
        out[k + 1] = (x, y)
    return out


def lyapunov_value(a: float, state) -> float:
    """a * delta + theta; a decrease certificate for a >= c."""
    delta, theta = state
    return a * delta + theta


def lyapunov_decrement(a: float, state, c: float) -> float:
    """Exact one-step change of ``lyapunov_value`` under the two-agent map.

    a (theta delta - delta) + c (1 - theta) delta theta factors as
    delta (1 - theta) (c theta - a), which is <= 0 whenever c theta <= a.
    """
    delta, theta = state
    return delta * (1.0 - theta) * (c * theta - a)


def two_agent_margin(c: float, delta0: float, theta0: float) -> float:
    return 1.0 - (c * delta0 + theta0)


def check_two_agent_condition(c: float, delta0: float, theta0: float) -> bool:
    """Sufficient condition for consensus of the two-agent (or one-versus-all) reduction."""
    return c * delta0 + theta0 < 1.0


def check_polarized_condition(c: float, d0: float, theta_max: float) -> bool:
    """Sufficient condition for consensus on the complete uniform graph."""
    return c * d0 + theta_max < 1.0
