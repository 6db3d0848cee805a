"""Ellipsoidal arm-set geometry and small dense symmetric linear algebra.

Everything here assumes small dimension (the simulations use d = 2), so
full eigendecompositions per call are cheap and preferred over anything
incremental.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SYMMETRY_TOL = 1e-10
DIRECTION_MIN_NORM = 1e-12


def _check_vector(x, d: int, name: str = "x") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (d,):
        raise ValueError(f"{name} has shape {x.shape}, expected ({d},)")
    return x


def _check_symmetric(M, tol: float = SYMMETRY_TOL) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    asym = np.max(np.abs(M - M.T)) if M.size else 0.0
    if asym > tol:
        raise ValueError(f"matrix is not symmetric (max |M - M^T| = {asym:.3e})")
    return M


def min_eigenvalue(M) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    M = _check_symmetric(M)
    return _eigmin_unchecked(M)


def _eigmin_unchecked(M: np.ndarray) -> float:
    # 2x2 fast path: exact via the characteristic polynomial. Matters in
    # the simulation hot loop where this runs once per stage.
    if M.shape == (2, 2):
        a, bb, c = M[0, 0], 0.5 * (M[0, 1] + M[1, 0]), M[1, 1]
        half_tr = 0.5 * (a + c)
        disc = math.sqrt(max(0.25 * (a - c) ** 2 + bb * bb, 0.0))
        return half_tr - disc
    return float(np.linalg.eigvalsh(M)[0])


def max_eigenvalue(M) -> float:
    """Largest eigenvalue of a symmetric matrix."""
    M = _check_symmetric(M)
    if M.shape == (2, 2):
        a, bb, c = M[0, 0], 0.5 * (M[0, 1] + M[1, 0]), M[1, 1]
        half_tr = 0.5 * (a + c)
        disc = math.sqrt(max(0.25 * (a - c) ** 2 + bb * bb, 0.0))
        return half_tr + disc
    return float(np.linalg.eigvalsh(M)[-1])


def matrix_sqrt(H) -> np.ndarray:
    """Symmetric positive-definite square root of a positive-definite matrix."""
    H = _check_symmetric(H)
    w, Q = np.linalg.eigh(H)
    if w[0] <= 0:
        raise ValueError(f"matrix is not positive definite (min eigenvalue {w[0]:.3e})")
    R = (Q * np.sqrt(w)) @ Q.T
    return 0.5 * (R + R.T)


def weighted_norm(x, M) -> float:
    """||x||_M = sqrt(x^T M x) for positive-semidefinite M.

    Quadratic forms in [-1e-12, 0) are clamped to zero; they are
    floating-point noise near the PSD boundary.
    """
    x = np.asarray(x, dtype=float)
    M = np.asarray(M, dtype=float)
    if M.shape != (x.shape[0], x.shape[0]):
        raise ValueError(f"shape mismatch: x {x.shape}, M {M.shape}")
    q = float(x @ M @ x)
    if q < -1e-12:
        raise ValueError(f"quadratic form is negative ({q:.3e}); M is not PSD")
    return math.sqrt(max(q, 0.0))


def _max_norm_over_boundary(center: np.ndarray, H: np.ndarray) -> float:
    """max ||x|| over the boundary of {x : (x-center)^T H^{-1} (x-center) = 1}.

    In the eigenbasis of H the stationarity condition gives
    z_i = c_i * w_i / (mu - w_i) with a scalar multiplier mu > max(w),
    pinned down by sum_i w_i z_i^2 / w_i^2 ... = 1; solved by bisection.
    """
    w, Q = np.linalg.eigh(H)
    c = Q.T @ center
    lmax = float(w[-1])
    top = np.isclose(w, lmax, rtol=1e-12, atol=1e-14)

    if np.all(np.abs(c[top]) < 1e-13):
        # Degenerate: the center has no component along the widest axis, so
        # the multiplier sits at lmax and the leftover budget goes there.
        rest = ~top
        if not rest.any():
            return math.sqrt(float(np.sum(c**2)) + lmax)
        spent = float(np.sum(w[rest] * c[rest] ** 2 / (lmax - w[rest]) ** 2))
        if spent <= 1.0:
            z = np.zeros_like(c)
            z[rest] = c[rest] * w[rest] / (lmax - w[rest])
            return math.sqrt(float(np.sum((c + z) ** 2)) + lmax * (1.0 - spent))
        # fall through: budget exhausted before reaching mu = lmax

    def g(mu: float) -> float:
        return float(np.sum(w * c**2 / (mu - w) ** 2))

    hi = lmax + math.sqrt(float(np.sum(w * c**2)))  # g(hi) <= 1 by construction
    lo = lmax
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lmax or g(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    mu = hi
    z = c * w / (mu - w)
    return float(np.linalg.norm(c + z))


@dataclass(frozen=True)
class EllipsoidArmSet:
    """The feasible arm set {x : (x - center)^T shape^{-1} (x - center) <= 1}.

    Immutable; the square root, inverse, extreme eigenvalues, and the
    maximum Euclidean norm over the set are computed once at construction.
    """

    center: np.ndarray
    shape: np.ndarray
    sqrt_shape: np.ndarray = field(init=False, repr=False)
    inv_shape: np.ndarray = field(init=False, repr=False)
    eig_min: float = field(init=False)
    eig_max: float = field(init=False)
    max_norm: float = field(init=False)
    _eig_w: np.ndarray = field(init=False, repr=False)
    _eig_Q: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        center = _check_vector(np.asarray(self.center, dtype=float),
                               np.asarray(self.center).shape[0], "center")
        shape = _check_symmetric(self.shape)
        if shape.shape[0] != center.shape[0]:
            raise ValueError("center and shape dimensions disagree")
        w, Q = np.linalg.eigh(shape)
        if w[0] <= 0:
            raise ValueError(f"shape matrix is not positive definite (min eigenvalue {w[0]:.3e})")
        center.setflags(write=False)
        shape = shape.copy()
        shape.setflags(write=False)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "eig_min", float(w[0]))
        object.__setattr__(self, "eig_max", float(w[-1]))
        sqrt_shape = matrix_sqrt(shape)
        sqrt_shape.setflags(write=False)
        object.__setattr__(self, "sqrt_shape", sqrt_shape)
        inv_shape = np.linalg.inv(shape)
        inv_shape = 0.5 * (inv_shape + inv_shape.T)
        inv_shape.setflags(write=False)
        object.__setattr__(self, "inv_shape", inv_shape)
        L = _max_norm_over_boundary(center, shape)
        L = max(L, float(np.linalg.norm(center)))
        object.__setattr__(self, "max_norm", L)
        w = w.copy()
        w.setflags(write=False)
        Q = Q.copy()
        Q.setflags(write=False)
        object.__setattr__(self, "_eig_w", w)
        object.__setattr__(self, "_eig_Q", Q)

    @classmethod
    def ball(cls, center, radius: float) -> "EllipsoidArmSet":
        center = np.asarray(center, dtype=float)
        if radius <= 0:
            raise ValueError("radius must be positive")
        return cls(center=center, shape=radius**2 * np.eye(center.shape[0]))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def contains(self, x, tol: float = 0.0) -> bool:
        """True iff (x - center)^T shape^{-1} (x - center) <= 1 + tol."""
        x = _check_vector(x, self.dim)
        dx = x - self.center
        return float(dx @ self.inv_shape @ dx) <= 1.0 + tol

    def support(self, direction) -> np.ndarray:
        """argmax_{x in set} <x, direction>, i.e. center + H d / ||d||_H."""
        d = _check_vector(direction, self.dim, "direction")
        nd = weighted_norm(d, self.shape)
        if np.linalg.norm(d) <= DIRECTION_MIN_NORM or nd <= DIRECTION_MIN_NORM:
            raise ValueError("support direction is degenerate (norm below 1e-12)")
        return self.center + self.shape @ d / nd

    def project(self, y) -> np.ndarray:
        """Euclidean projection of y onto the set.

        Exact: Newton on the Lagrange multiplier in the eigenbasis of the
        shape matrix.
        """
        y = _check_vector(y, self.dim, "y")
        dy = y - self.center
        if float(dy @ self.inv_shape @ dy) <= 1.0:
            return y.copy()
        w, Q = self._eig_w, self._eig_Q
        u = Q.T @ dy
        a = w * u * u

        # h(nu) = sum_i a_i / (w_i + nu)^2 is convex and decreasing for
        # nu >= 0, so Newton from nu = 0 (where h > 1, since y is outside)
        # increases monotonically to the root and never overshoots.
        nu = 0.0
        if len(w) == 2:
            a0, a1, w0, w1 = float(a[0]), float(a[1]), float(w[0]), float(w[1])
            for _ in range(200):
                p0 = w0 + nu
                p1 = w1 + nu
                h = a0 / (p0 * p0) + a1 / (p1 * p1)
                dh = -2.0 * (a0 / (p0 * p0 * p0) + a1 / (p1 * p1 * p1))
                delta = (1.0 - h) / dh
                nu += delta
                if delta <= 1e-15 * (1.0 + nu):
                    break
        else:
            for _ in range(200):
                p = w + nu
                h = float(np.sum(a / (p * p)))
                dh = -2.0 * float(np.sum(a / (p * p * p)))
                delta = (1.0 - h) / dh
                nu += delta
                if delta <= 1e-15 * (1.0 + nu):
                    break
        z = u * w / (w + nu)
        return self.center + Q @ z

    def boundary_grid(self, n: int) -> np.ndarray:
        """n points uniformly spaced in angle on the boundary (d = 2 only)."""
        if self.dim != 2:
            raise ValueError("boundary_grid is only defined for d = 2")
        phi = 2.0 * math.pi * np.arange(n) / n
        circle = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        return self.center + circle @ self.sqrt_shape.T
