"""Conservative linear UCB baseline over a discretized boundary arm set.

A reconstruction of a conservative UCB policy: play the optimistic arm
whenever a high-probability lower bound on the cumulative reward (after
playing it) still clears the fraction (1 - alpha) of the accumulated
baseline reward; otherwise fall back to the baseline arm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .estimator import RlsEstimator, confidence_radius
from .geometry import EllipsoidArmSet


@dataclass(frozen=True)
class ClucbConfig:
    """alpha is the budget fraction (threshold (1 - alpha) * t * b0);
    boundary_points is the boundary discretization count."""

    alpha: float = 0.2
    delta: float = 0.1
    boundary_points: int = 256
    regularization: float = 0.1
    param_bound: float = 1.0
    noise_scale: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.boundary_points < 3:
            raise ValueError("boundary_points must be at least 3")
        if self.regularization <= 0:
            raise ValueError("regularization must be positive")


def discretize_boundary(arm_set: EllipsoidArmSet, K: int) -> np.ndarray:
    """K uniformly spaced (in angle) boundary arms; planar sets only.

    The induced optimality gap in any direction theta is at most
    ||theta|| * sqrt(lambda_max(H)) * (1 - cos(pi / K)).
    """
    if arm_set.dim != 2:
        raise ValueError("boundary discretization is only implemented for d = 2")
    if K < 3:
        raise ValueError("K must be at least 3")
    return arm_set.boundary_grid(K)


def discretization_gap_bound(arm_set: EllipsoidArmSet, K: int, theta_norm: float = 1.0) -> float:
    """Analytic bound on max reward lost to the boundary discretization."""
    return theta_norm * math.sqrt(arm_set.eig_max) * (1.0 - math.cos(math.pi / K))


def ucb_arm(est: RlsEstimator, arms: np.ndarray, r: float) -> tuple[np.ndarray, float]:
    """Arm maximizing <x, theta_hat> + r ||x||_{Vinv}; ties go to the lowest index."""
    arms = np.asarray(arms, dtype=float)
    if arms.ndim != 2 or arms.shape[0] == 0:
        raise ValueError("arms must be a nonempty (n, d) array")
    theta = est.estimate()
    scores = arms @ theta + r * np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", arms, est.Vinv, arms), 0.0))
    i = int(np.argmax(scores))
    return arms[i].copy(), float(scores[i])


class ClucbState:
    """Per-replication bookkeeping: estimator plus the split of play
    history into baseline plays and non-baseline arms."""

    def __init__(self, dim: int, lam: float):
        self.estimator = RlsEstimator(dim, lam)
        self.baseline_plays = 0
        self._history = []  # non-baseline arms, in play order
        self._history_arr = np.empty((0, dim))
        self.t = 0

    @property
    def nonbaseline_history(self) -> np.ndarray:
        if self._history_arr.shape[0] != len(self._history):
            self._history_arr = np.array(self._history) if self._history \
                else np.empty((0, self.estimator.dim))
        return self._history_arr

    def record(self, arm: np.ndarray, y: float, is_baseline: bool) -> None:
        """Absorb the stage outcome after the reward is observed."""
        self.estimator.update(arm, y)
        if is_baseline:
            self.baseline_plays += 1
        else:
            self._history.append(np.asarray(arm, dtype=float).copy())
        self.t += 1


def budget_check(state: ClucbState, candidate: np.ndarray, cfg: ClucbConfig,
                 r: float, b0: float) -> bool:
    """True iff the certified cumulative reward after playing `candidate`
    clears (1 - alpha) * t * b0, with t the stage now being played.

    Non-baseline history enters through per-arm LCBs at the current
    radius; baseline plays are credited their known bound b0.
    """
    t = state.t + 1
    est = state.estimator
    theta = est.estimate()
    hist = state.nonbaseline_history
    total = state.baseline_plays * b0
    if hist.shape[0]:
        norms = np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", hist, est.Vinv, hist), 0.0))
        total += float(np.sum(hist @ theta - r * norms))
    total += est.lcb(candidate, r)
    return total >= (1.0 - cfg.alpha) * t * b0


def clucb_step(state: ClucbState, cfg: ClucbConfig, arms: np.ndarray,
               baseline_arm: np.ndarray, b0: float, t: int, L: float) -> tuple[np.ndarray, bool]:
    """Choose the stage-t arm. Returns (arm, is_baseline).

    The overall risk budget is split across stages as
    delta_t = 6 delta / (pi^2 t^2). Call state.record() once the reward
    has been observed.
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    delta_t = min(6.0 * cfg.delta / (math.pi**2 * t * t), 1.0)
    r = confidence_radius(t, delta_t, state.estimator.dim, cfg.regularization,
                          cfg.param_bound, cfg.noise_scale, L)
    candidate, _ = ucb_arm(state.estimator, arms, r)
    if np.array_equal(candidate, np.asarray(baseline_arm, dtype=float)):
        return candidate, True
    if budget_check(state, candidate, cfg, r, b0):
        return candidate, False
    return np.asarray(baseline_arm, dtype=float).copy(), True
