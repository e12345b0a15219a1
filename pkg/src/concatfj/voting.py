"""Median vote, distance to the vote, and stubbornness update rules."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from concatfj.errors import DimensionMismatch, PolicyError

INCREASING = "increasing"
DECREASING = "decreasing"
CONSTANT = "constant"
KINDS = (INCREASING, DECREASING, CONSTANT)

DEFAULT_EPSILON = 1e-6
# keeps every agent short of full stubbornness under the decreasing rule
THETA_CEILING = 1.0 - 1e-12


@dataclass(frozen=True)
class StubbornnessPolicy:
    """How stubbornness moves from one issue to the next.

    ``increasing``: theta + c (1 - theta) delta, with c in [0, 1].
    ``decreasing``: theta - |c| theta delta + epsilon theta0, with c in [-1, 0]
    and epsilon > 0; ``theta0`` is the stubbornness at the first issue.
    ``constant``: theta unchanged, c ignored.
    """

    kind: str = INCREASING
    c: float = 1.0
    epsilon: float = DEFAULT_EPSILON
    theta0: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PolicyError(f"unknown policy kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == INCREASING and not 0.0 <= self.c <= 1.0:
            raise PolicyError(f"increasing policy needs c in [0, 1], got {self.c}")
        if self.kind == DECREASING:
            if not -1.0 <= self.c <= 0.0:
                raise PolicyError(f"decreasing policy needs c in [-1, 0], got {self.c}")
            if not self.epsilon > 0:
                raise PolicyError(f"decreasing policy needs epsilon > 0, got {self.epsilon}")
        if self.theta0 is not None:
            object.__setattr__(self, "theta0", np.array(self.theta0, dtype=float))

    def bind(self, theta0) -> "StubbornnessPolicy":
        """Return a copy anchored to ``theta0`` unless one is already set."""
        if self.theta0 is not None:
            return self
        return StubbornnessPolicy(self.kind, self.c, self.epsilon, theta0)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "c": self.c, "epsilon": self.epsilon}

    @classmethod
    def from_dict(cls, doc: dict) -> "StubbornnessPolicy":
        unknown = set(doc) - {"kind", "c", "epsilon"}
        if unknown:
            raise PolicyError(f"unknown policy keys {sorted(unknown)}")
        kind = doc.get("kind", INCREASING)
        default_c = -1.0 if kind == DECREASING else (0.0 if kind == CONSTANT else 1.0)
        return cls(kind, float(doc.get("c", default_c)), float(doc.get("epsilon", DEFAULT_EPSILON)))


def median_vote(y) -> float:
    """Median opinion; for an even number of agents, the midpoint of the two central values."""
    return float(np.median(np.asarray(y, dtype=float)))


def distances(y, mu: float) -> np.ndarray:
    return np.abs(np.asarray(y, dtype=float) - mu)


def update_stubbornness(theta, delta, policy: StubbornnessPolicy) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if theta.shape != delta.shape:
        raise DimensionMismatch(f"theta has shape {theta.shape}, delta {delta.shape}")
    if policy.kind == CONSTANT:
        return theta.copy()
    if policy.kind == INCREASING:
        return theta + policy.c * (1.0 - theta) * delta
    if policy.theta0 is None:
        raise PolicyError("decreasing policy used before being bound to the initial stubbornness")
    if policy.theta0.shape != theta.shape:
        raise DimensionMismatch(f"theta0 has shape {policy.theta0.shape}, theta {theta.shape}")
    new = theta - abs(policy.c) * theta * delta + policy.epsilon * policy.theta0
    return np.clip(new, 0.0, THETA_CEILING)
