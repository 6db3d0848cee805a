"""Regularized least-squares estimation with incremental inverse maintenance.

The information matrix V = lam*I + sum x_k x_k^T and its inverse are kept
in lockstep; the inverse is updated per observation by the
Sherman-Morrison rank-one formula and refreshed from a direct inverse
every REFRESH_PERIOD updates to cap numerical drift.
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import _eigmin_unchecked, weighted_norm

REFRESH_PERIOD = 512


def confidence_radius(t: int, delta: float, d: int, lam: float,
                      S: float, sigma_eta: float, L: float) -> float:
    """High-probability radius of the parameter confidence ellipsoid.

    sigma_eta * sqrt(d * log((1 + t L^2 / lam) / delta)) + sqrt(lam) * S.
    Increasing in t, strictly decreasing in delta.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if t < 1:
        raise ValueError("t must be at least 1")
    return sigma_eta * math.sqrt(d * math.log((1.0 + t * L * L / lam) / delta)) \
        + math.sqrt(lam) * S


class RlsEstimator:
    """Online ridge regression state for one run loop.

    Mutated in place by exactly one episode; never shared.
    """

    def __init__(self, dim: int, lam: float):
        if lam <= 0:
            raise ValueError("regularization must be positive")
        self.dim = dim
        self.lam = lam
        self.t = 0
        self.V = lam * np.eye(dim)
        self.Vinv = (1.0 / lam) * np.eye(dim)
        self.xy_sum = np.zeros(dim)
        self._since_refresh = 0
        self._eigmin_cache = lam

    def update(self, x, y: float) -> None:
        """Absorb one observation (x, y)."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"arm has shape {x.shape}, expected ({self.dim},)")
        self.V += np.outer(x, x)
        Vx = self.Vinv @ x
        self.Vinv -= np.outer(Vx, Vx) / (1.0 + float(x @ Vx))
        self.xy_sum += x * y
        self.t += 1
        self._since_refresh += 1
        if self._since_refresh >= REFRESH_PERIOD:
            self.refresh()
        self._eigmin_cache = None

    def refresh(self) -> None:
        """Recompute Vinv from V by direct factorization."""
        Vinv = np.linalg.inv(self.V)
        self.Vinv = 0.5 * (Vinv + Vinv.T)
        self._since_refresh = 0

    def estimate(self) -> np.ndarray:
        """Current parameter estimate Vinv @ sum(x_k y_k)."""
        return self.Vinv @ self.xy_sum

    def min_eigenvalue(self) -> float:
        """lambda_min(V); nondecreasing over updates, always >= lam."""
        if self._eigmin_cache is None:
            self._eigmin_cache = _eigmin_unchecked(self.V)
        return self._eigmin_cache

    def lcb(self, x, r: float) -> float:
        """Lower confidence bound <x, estimate> - r * ||x||_{Vinv}."""
        if r < 0:
            raise ValueError("radius must be nonnegative")
        x = np.asarray(x, dtype=float)
        return float(x @ self.estimate()) - r * weighted_norm(x, self.Vinv)

    def ucb(self, x, r: float) -> float:
        """Upper confidence bound <x, estimate> + r * ||x||_{Vinv}."""
        if r < 0:
            raise ValueError("radius must be nonnegative")
        x = np.asarray(x, dtype=float)
        return float(x @ self.estimate()) + r * weighted_norm(x, self.Vinv)

    def copy(self) -> "RlsEstimator":
        dup = RlsEstimator(self.dim, self.lam)
        dup.t = self.t
        dup.V = self.V.copy()
        dup.Vinv = self.Vinv.copy()
        dup.xy_sum = self.xy_sum.copy()
        dup._since_refresh = self._since_refresh
        dup._eigmin_cache = self._eigmin_cache
        return dup
