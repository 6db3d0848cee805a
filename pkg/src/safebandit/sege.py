"""Safe Exploration and Greedy Exploitation (SEGE) decision rule.

Each stage either plays the certainty-equivalent (greedy) arm, when its
lower confidence bound clears the safety threshold and enough
information has accumulated, or a safe exploration arm mixing the
current safe arm with a random boundary point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .environment import EnvironmentSpec
from .estimator import RlsEstimator, confidence_radius
from .geometry import DIRECTION_MIN_NORM, EllipsoidArmSet, weighted_norm

GREEDY = "GREEDY"
EXPLORE_FROM_LCB = "EXPLORE_FROM_LCB"
EXPLORE_FROM_BASELINE = "EXPLORE_FROM_BASELINE"

SCHEDULE_FORMS = ("summable-quadratic", "floor-exponential", "constant")


class OptimizerError(RuntimeError):
    """Raised when the LCB-arm solver fails to converge."""


@dataclass(frozen=True)
class RiskSchedule:
    """Per-stage risk levels delta_t.

    summable-quadratic: delta_t = 6 * delta_bar / (pi^2 t^2) (sums to delta_bar)
    floor-exponential:  delta_t = delta_bar * exp(-K sqrt(t))
    constant:           delta_t = delta_bar
    """

    form: str = "summable-quadratic"
    delta_bar: float = 0.1
    K: float = 0.0

    def __post_init__(self):
        if self.form not in SCHEDULE_FORMS:
            raise ValueError(f"unknown risk schedule form {self.form!r}")
        if not 0.0 < self.delta_bar <= 1.0:
            raise ValueError("delta_bar must lie in (0, 1]")
        if self.K < 0:
            raise ValueError("K must be nonnegative")


def risk_level(schedule: RiskSchedule, t: int) -> float:
    """delta_t for stage t >= 1, clamped to (0, 1]."""
    if t < 1:
        raise ValueError("t must be at least 1")
    if schedule.form == "summable-quadratic":
        val = 6.0 * schedule.delta_bar / (math.pi**2 * t * t)
    elif schedule.form == "floor-exponential":
        val = schedule.delta_bar * math.exp(-schedule.K * math.sqrt(t))
    else:
        val = schedule.delta_bar
    # The formula value is always mathematically positive; guard against
    # floating-point underflow (exp(-K sqrt(t)) flushes to 0 for K sqrt(t)
    # beyond ~745) so downstream log(1/delta) stays finite.
    return min(max(val, 1e-308), 1.0)


def rho_bar(b0: float, b: float, S: float, eig_max_shape: float) -> float:
    """Largest safe mixing weight min{1, (b0 - b) / (2 S sqrt(lambda_max(H)))}."""
    if b >= b0:
        raise ValueError("safety threshold must be below the baseline bound")
    if S <= 0 or eig_max_shape <= 0:
        raise ValueError("S and the shape eigenvalue must be positive")
    return min(1.0, (b0 - b) / (2.0 * S * math.sqrt(eig_max_shape)))


@dataclass(frozen=True)
class SegeConfig:
    """Tunables of the SEGE policy.

    mixing_weight is rho; info_gate_scale is the constant c in the
    lambda_min(V) >= c * sqrt(t) information gate.
    """

    mixing_weight: float
    info_gate_scale: float
    regularization: float
    risk_schedule: RiskSchedule
    exploration_dist: str = "sphere"

    def __post_init__(self):
        if not 0.0 < self.mixing_weight <= 1.0:
            raise ValueError("mixing_weight must lie in (0, 1]")
        if self.info_gate_scale <= 0 and not math.isinf(self.info_gate_scale):
            raise ValueError("info_gate_scale must be positive")
        if self.regularization <= 0:
            raise ValueError("regularization must be positive")
        if self.exploration_dist != "sphere":
            raise ValueError("only the unit-sphere exploration distribution is implemented")

    def validate_mixing(self, b0: float, b: float, S: float, eig_max_shape: float) -> None:
        cap = rho_bar(b0, b, S, eig_max_shape)
        # Inclusive with slack: the reference setup runs exactly at the cap.
        if self.mixing_weight > cap * (1.0 + 1e-9):
            raise ValueError(
                f"mixing_weight {self.mixing_weight} exceeds the safe cap {cap}"
            )


@dataclass(frozen=True)
class SegeDecision:
    """Outcome of one SEGE stage.

    lcb_arm_value is NaN when the stage short-circuited to the baseline
    branch via an upper bound without solving for the exact LCB arm, or
    on greedy stages; lcb_of_greedy is NaN when the estimate was
    degenerate and no greedy arm exists.
    """

    arm: np.ndarray
    tag: str
    lcb_of_greedy: float
    lcb_arm_value: float
    eig_gate: bool
    delta: float
    radius: float
    lambda_min: float
    lcb_arm_point: Optional[np.ndarray] = None


def sample_exploration_direction(d: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform direction on the unit sphere in R^d, exactly normalized."""
    if d < 1:
        raise ValueError("d must be at least 1")
    while True:
        z = rng.standard_normal(d)
        n = np.linalg.norm(z)
        if n > 1e-12:
            return z / n


def safe_exploration_arm(safe_arm, rho: float, arm_set: EllipsoidArmSet,
                         zeta) -> np.ndarray:
    """(1 - rho) * safe_arm + rho * (center + sqrt(H) zeta).

    A convex combination of two feasible points, hence feasible.
    """
    safe_arm = np.asarray(safe_arm, dtype=float)
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    if not arm_set.contains(safe_arm, tol=1e-9):
        raise ValueError("safe arm lies outside the feasible set")
    zeta = np.asarray(zeta, dtype=float)
    boundary_point = arm_set.center + arm_set.sqrt_shape @ zeta
    return (1.0 - rho) * safe_arm + rho * boundary_point


def greedy_arm(theta_hat, arm_set: EllipsoidArmSet) -> np.ndarray:
    """Arm maximizing the estimated reward: the support point of theta_hat."""
    return arm_set.support(theta_hat)


def select_safe_arm(lcb_arm_point, lcb_value: float, b0: float,
                    baseline_arm) -> np.ndarray:
    """The LCB arm if its bound certifies baseline-level reward, else the baseline."""
    if lcb_value >= b0:
        return np.asarray(lcb_arm_point, dtype=float)
    return np.asarray(baseline_arm, dtype=float)


def lcb_arm(est: RlsEstimator, arm_set: EllipsoidArmSet, r: float,
            x0: Optional[np.ndarray] = None,
            grad_tol: float = 1e-9, max_iter: int = 10_000):
    """Maximize g(x) = <x, theta_hat> - r * ||x||_{Vinv} over the arm set.

    g is concave; projected gradient ascent with backtracking and exact
    ellipsoid projection converges from any feasible start. Returns
    (argmax, max value). Raises OptimizerError on non-convergence.
    """
    if r < 0:
        raise ValueError("radius must be nonnegative")
    theta = est.estimate()
    Vinv = est.Vinv

    if r == 0.0:
        if np.linalg.norm(theta) > DIRECTION_MIN_NORM:
            x = arm_set.support(theta)
            return x, float(x @ theta)
        return arm_set.center.copy(), float(arm_set.center @ theta)

    def value(x):
        return float(x @ theta) - r * weighted_norm(x, Vinv)

    def gradient(x):
        Vx = Vinv @ x
        n = math.sqrt(max(float(x @ Vx), 0.0))
        if n < 1e-14:
            return theta.copy()
        return theta - (r / n) * Vx

    if x0 is not None and arm_set.contains(x0, tol=1e-9):
        x = np.asarray(x0, dtype=float).copy()
    elif np.linalg.norm(theta) > DIRECTION_MIN_NORM:
        x = arm_set.support(theta)
    else:
        x = arm_set.center.copy()

    fx = value(x)
    step = 1.0
    x_prev = g_prev = None
    for _ in range(max_iter):
        g = gradient(x)
        # Projected-gradient stationarity probe at unit step.
        probe = arm_set.project(x + g)
        if np.linalg.norm(probe - x) < grad_tol:
            return x, fx
        # Barzilai-Borwein spectral trial step; a plain gradient step
        # zigzags badly when Vinv is ill-conditioned.
        s = step
        if x_prev is not None:
            dx = x - x_prev
            dg = g - g_prev
            denom = -float(dx @ dg)
            if denom > 0.0:
                s = float(dx @ dx) / denom
        s = min(max(s, 1e-14), 1e14)
        x_prev, g_prev = x, g
        moved = False
        for _ in range(80):
            cand = arm_set.project(x + s * g)
            d = cand - x
            if float(d @ d) == 0.0:
                break
            fc = value(cand)
            # Armijo (for projection steps g.d >= ||d||^2 / s > 0), plus
            # strict improvement so roundoff-level cycling cannot be
            # accepted forever once fx has converged to full precision.
            if fc > fx and fc >= fx + 1e-4 * float(g @ d):
                x, fx = cand, fc
                step = s
                moved = True
                break
            s *= 0.5
        if not moved:
            # Progress below floating-point resolution; the value is
            # already accurate to roundoff even if the point is not.
            return x, fx
    raise OptimizerError("LCB-arm projected gradient ascent did not converge")


@dataclass(frozen=True)
class ProblemView:
    """What a policy is allowed to see of the environment."""

    arm_set: EllipsoidArmSet
    baseline_arm: np.ndarray
    baseline_bound: float
    safety_threshold: float
    param_bound: float
    noise_scale: float

    @classmethod
    def of(cls, env: EnvironmentSpec) -> "ProblemView":
        return cls(arm_set=env.arm_set, baseline_arm=env.baseline_arm,
                   baseline_bound=env.baseline_bound,
                   safety_threshold=env.safety_threshold,
                   param_bound=env.param_bound, noise_scale=env.noise_scale)

    @property
    def max_norm(self) -> float:
        return self.arm_set.max_norm


def sege_step(est: RlsEstimator, cfg: SegeConfig, view: ProblemView, t: int,
              exploration_rng: np.random.Generator,
              lcb_warm_start: Optional[np.ndarray] = None) -> SegeDecision:
    """One SEGE stage: greedy if certified safe and informed, else explore.

    The information gate is evaluated on V_{t-1}, the matrix available
    before the stage-t arm is chosen; the radius uses the stage index t.
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    arm_set = view.arm_set
    delta = risk_level(cfg.risk_schedule, t)
    r = confidence_radius(t, delta, arm_set.dim, cfg.regularization,
                          view.param_bound, view.noise_scale, view.max_norm)
    lam_min = est.min_eigenvalue()
    gate = lam_min >= cfg.info_gate_scale * math.sqrt(t)

    theta = est.estimate()
    theta_norm = float(np.linalg.norm(theta))
    lcb_greedy = math.nan
    best_linear = float(arm_set.center @ theta)
    if theta_norm > DIRECTION_MIN_NORM:
        x_ce = arm_set.support(theta)
        best_linear = float(x_ce @ theta)
        lcb_greedy = est.lcb(x_ce, r)
        if gate and lcb_greedy >= view.safety_threshold:
            return SegeDecision(arm=x_ce, tag=GREEDY, lcb_of_greedy=lcb_greedy,
                                lcb_arm_value=math.nan, eig_gate=True,
                                delta=delta, radius=r, lambda_min=lam_min)

    # Exploration branch. max_x <x, theta> bounds the best possible LCB
    # from above; when it cannot reach b0 the baseline branch is decided
    # without solving for the exact LCB arm.
    x_lcb = None
    if best_linear < view.baseline_bound:
        safe = view.baseline_arm
        tag = EXPLORE_FROM_BASELINE
        lcb_val = math.nan
    else:
        x_lcb, lcb_val = lcb_arm(est, arm_set, r, x0=lcb_warm_start)
        safe = select_safe_arm(x_lcb, lcb_val, view.baseline_bound, view.baseline_arm)
        tag = EXPLORE_FROM_LCB if lcb_val >= view.baseline_bound else EXPLORE_FROM_BASELINE

    zeta = sample_exploration_direction(arm_set.dim, exploration_rng)
    arm = safe_exploration_arm(safe, cfg.mixing_weight, arm_set, zeta)
    return SegeDecision(arm=arm, tag=tag, lcb_of_greedy=lcb_greedy,
                        lcb_arm_value=lcb_val, eig_gate=gate,
                        delta=delta, radius=r, lambda_min=lam_min,
                        lcb_arm_point=x_lcb)
