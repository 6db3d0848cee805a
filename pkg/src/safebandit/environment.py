"""Stochastic linear reward environment.

The true parameter lives here and is hidden from the policies; the
harness uses it only for regret and safety accounting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geometry import EllipsoidArmSet, _check_vector

FEASIBILITY_TOL = 1e-9

_STREAM_IDS = {"noise": 0, "exploration": 1, "policy": 2}


def worst_case_baseline_bound(x, S: float) -> float:
    """Certified reward lower bound -S * ||x|| for an arbitrary arm x."""
    if S <= 0:
        raise ValueError("S must be positive")
    return -S * float(np.linalg.norm(np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class EnvironmentSpec:
    """Ground truth of one bandit instance.

    Invariants checked at construction: ||theta_star|| <= param_bound,
    the baseline arm is feasible, its expected reward is at least
    baseline_bound, and safety_threshold < baseline_bound (otherwise
    there is no exploration budget).
    """

    theta_star: np.ndarray
    param_bound: float
    noise_scale: float
    arm_set: EllipsoidArmSet
    baseline_arm: np.ndarray
    baseline_bound: float
    safety_threshold: float

    def __post_init__(self):
        theta = np.asarray(self.theta_star, dtype=float)
        theta = _check_vector(theta, self.arm_set.dim, "theta_star")
        x0 = np.asarray(self.baseline_arm, dtype=float)
        x0 = _check_vector(x0, self.arm_set.dim, "baseline_arm")
        theta.setflags(write=False)
        x0.setflags(write=False)
        object.__setattr__(self, "theta_star", theta)
        object.__setattr__(self, "baseline_arm", x0)
        if self.param_bound <= 0:
            raise ValueError("param_bound must be positive")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be nonnegative")
        if np.linalg.norm(theta) > self.param_bound * (1 + 1e-12):
            raise ValueError("||theta_star|| exceeds param_bound")
        if not self.arm_set.contains(x0, tol=FEASIBILITY_TOL):
            raise ValueError("baseline_arm lies outside the arm set")
        if float(x0 @ theta) < self.baseline_bound - 1e-12:
            raise ValueError("baseline arm's expected reward is below baseline_bound")
        if self.safety_threshold >= self.baseline_bound:
            raise ValueError("safety_threshold must be strictly below baseline_bound")

    @property
    def dim(self) -> int:
        return self.arm_set.dim

    def expected_reward(self, x) -> float:
        x = _check_vector(x, self.dim)
        return float(x @ self.theta_star)

    def sample_reward(self, x, rng: np.random.Generator,
                      noise: Optional[Callable[[np.random.Generator], float]] = None) -> float:
        """One observation <x, theta*> + eta from the given noise stream.

        The default noise law is Normal(0, noise_scale^2); a different
        sub-Gaussian generator may be plugged in via `noise`.
        """
        x = _check_vector(x, self.dim)
        if not self.arm_set.contains(x, tol=FEASIBILITY_TOL):
            raise ValueError("arm lies outside the feasible set")
        if noise is not None:
            eta = float(noise(rng))
        elif self.noise_scale > 0:
            eta = self.noise_scale * float(rng.standard_normal())
        else:
            eta = 0.0
        return float(x @ self.theta_star) + eta

    @property
    def optimal_arm(self) -> np.ndarray:
        return self.arm_set.support(self.theta_star)

    @property
    def optimal_reward(self) -> float:
        return self.expected_reward(self.optimal_arm)


def replication_streams(master_seed: int, replication: int) -> dict[str, np.random.Generator]:
    """Named random streams for one replication.

    Streams are keyed by (master seed, replication index, stream name) so
    every draw is reproducible regardless of interleaving: "noise" feeds
    the reward noise, "exploration" the random exploration directions,
    "policy" any tie-breaking a policy needs.
    """
    return {
        name: np.random.default_rng(
            np.random.SeedSequence(entropy=master_seed, spawn_key=(replication, sid))
        )
        for name, sid in _STREAM_IDS.items()
    }
