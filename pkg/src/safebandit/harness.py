"""Monte Carlo experiment runner with per-stage traces and aggregation.

Every replication is driven by named random streams derived from
(master seed, replication index), so traces are bit-reproducible and
independent of execution order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import sege
from .clucb import ClucbConfig, ClucbState, clucb_step, discretize_boundary
from .environment import EnvironmentSpec, replication_streams
from .estimator import RlsEstimator, confidence_radius
from .geometry import DIRECTION_MIN_NORM, EllipsoidArmSet
from .sege import ProblemView, SegeConfig

POLICY_SEGE = "sege"
POLICY_CLUCB = "clucb"
POLICY_BASELINE = "baseline"
POLICY_GREEDY = "greedy"
ALL_POLICIES = (POLICY_SEGE, POLICY_CLUCB, POLICY_BASELINE, POLICY_GREEDY)

TAG_BASELINE = "BASELINE"
TAG_UCB = "UCB"
_EXPLORATION_TAGS = frozenset(
    {sege.EXPLORE_FROM_LCB, sege.EXPLORE_FROM_BASELINE, TAG_BASELINE}
)

DEFAULT_SNAPSHOT_STAGES = (250, 500, 1000, 2000, 5000, 10000, 50000)


@dataclass
class SafeSetSnapshot:
    """Estimator state and confidence radius frozen at one stage."""

    stage: int
    estimator: RlsEstimator
    radius: float


@dataclass
class RunTrace:
    """Per-stage record of one replication."""

    policy: str
    master_seed: int
    replication: int
    arms: np.ndarray            # (T, d)
    tags: list                  # str per stage
    rewards: np.ndarray         # observed Y_t
    expected: np.ndarray        # <X_t, theta*>
    regret_inc: np.ndarray      # <X* - X_t, theta*>
    lambda_min: np.ndarray      # lambda_min(V_{t-1})
    delta: np.ndarray           # risk level used (NaN if the policy has none)
    violated: np.ndarray        # expected reward below the safety threshold
    exploration_count: np.ndarray  # running count of non-greedy stages
    optimal_reward: float
    safety_threshold: float
    snapshots: list = field(default_factory=list)

    def __len__(self) -> int:
        return self.arms.shape[0]

    @property
    def cum_regret(self) -> np.ndarray:
        return np.cumsum(self.regret_inc)


@dataclass
class AggregateSummary:
    """Stagewise statistics across replications of one policy."""

    policy: str
    stages: np.ndarray
    reward_mean: np.ndarray
    reward_min: np.ndarray
    reward_max: np.ndarray
    cum_regret_mean: np.ndarray
    cum_regret_min: np.ndarray
    cum_regret_max: np.ndarray
    total_violations: int
    mean_exploration_count: float
    seeds: list


def run_episode(policy: str, env: EnvironmentSpec, T: int, master_seed: int,
                replication: int = 0,
                sege_config: Optional[SegeConfig] = None,
                clucb_config: Optional[ClucbConfig] = None,
                snapshot_stages: Sequence[int] = ()) -> RunTrace:
    """Simulate one replication of `policy` for T stages."""
    if T < 1:
        raise ValueError("T must be at least 1")
    if policy not in ALL_POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {ALL_POLICIES}")

    streams = replication_streams(master_seed, replication)
    noise_rng = streams["noise"]
    exploration_rng = streams["exploration"]
    d = env.dim
    view = ProblemView.of(env)
    theta_star = env.theta_star
    x_star_reward = env.optimal_reward
    b = env.safety_threshold
    snapshot_set = set(snapshot_stages)

    arms = np.empty((T, d))
    tags: list = [None] * T
    rewards = np.empty(T)
    expected = np.empty(T)
    lambda_min = np.empty(T)
    delta = np.full(T, math.nan)
    exploration_count = np.empty(T, dtype=np.int64)
    snapshots: list = []

    if policy == POLICY_SEGE:
        if sege_config is None:
            raise ValueError("sege_config is required for the sege policy")
        est = RlsEstimator(d, sege_config.regularization)
        warm = None
        n_explore = 0
        for i in range(T):
            t = i + 1
            dec = sege.sege_step(est, sege_config, view, t, exploration_rng,
                                 lcb_warm_start=warm)
            if dec.lcb_arm_point is not None:
                warm = dec.lcb_arm_point
            if t in snapshot_set:
                snapshots.append(SafeSetSnapshot(t, est.copy(), dec.radius))
            arm = dec.arm
            y = env.sample_reward(arm, noise_rng)
            est.update(arm, y)
            arms[i] = arm
            tags[i] = dec.tag
            rewards[i] = y
            lambda_min[i] = dec.lambda_min
            delta[i] = dec.delta
            if dec.tag != sege.GREEDY:
                n_explore += 1
            exploration_count[i] = n_explore

    elif policy == POLICY_CLUCB:
        if clucb_config is None:
            raise ValueError("clucb_config is required for the clucb policy")
        arms_grid = discretize_boundary(env.arm_set, clucb_config.boundary_points)
        state = ClucbState(d, clucb_config.regularization)
        n_explore = 0
        L = view.max_norm
        for i in range(T):
            t = i + 1
            delta_t = min(6.0 * clucb_config.delta / (math.pi**2 * t * t), 1.0)
            lambda_min[i] = state.estimator.min_eigenvalue()
            if t in snapshot_set:
                r_snap = confidence_radius(t, delta_t, d, clucb_config.regularization,
                                           clucb_config.param_bound,
                                           clucb_config.noise_scale, L)
                snapshots.append(SafeSetSnapshot(t, state.estimator.copy(), r_snap))
            arm, is_baseline = clucb_step(state, clucb_config, arms_grid,
                                          env.baseline_arm, env.baseline_bound, t, L)
            y = env.sample_reward(arm, noise_rng)
            state.record(arm, y, is_baseline)
            arms[i] = arm
            tags[i] = TAG_BASELINE if is_baseline else TAG_UCB
            rewards[i] = y
            delta[i] = delta_t
            if is_baseline:
                n_explore += 1
            exploration_count[i] = n_explore

    elif policy == POLICY_BASELINE:
        lam = sege_config.regularization if sege_config is not None else 0.1
        est = RlsEstimator(d, lam)
        x0 = env.baseline_arm
        for i in range(T):
            lambda_min[i] = est.min_eigenvalue()
            y = env.sample_reward(x0, noise_rng)
            est.update(x0, y)
            arms[i] = x0
            tags[i] = TAG_BASELINE
            rewards[i] = y
            exploration_count[i] = i + 1

    else:  # unsafe greedy: the certainty-equivalent arm every stage, no gate
        lam = sege_config.regularization if sege_config is not None else 0.1
        est = RlsEstimator(d, lam)
        n_explore = 0
        for i in range(T):
            lambda_min[i] = est.min_eigenvalue()
            theta = est.estimate()
            if float(np.linalg.norm(theta)) > DIRECTION_MIN_NORM:
                arm = env.arm_set.support(theta)
                tag = sege.GREEDY
            else:
                arm = env.baseline_arm
                tag = TAG_BASELINE
                n_explore += 1
            y = env.sample_reward(arm, noise_rng)
            est.update(arm, y)
            arms[i] = arm
            tags[i] = tag
            rewards[i] = y
            exploration_count[i] = n_explore

    expected[:] = arms @ theta_star
    regret_inc = x_star_reward - expected
    violated = expected < b
    return RunTrace(policy=policy, master_seed=master_seed, replication=replication,
                    arms=arms, tags=tags, rewards=rewards, expected=expected,
                    regret_inc=regret_inc, lambda_min=lambda_min, delta=delta,
                    violated=violated, exploration_count=exploration_count,
                    optimal_reward=x_star_reward, safety_threshold=b,
                    snapshots=snapshots)


def _episode_job(args):
    policy, env, T, master_seed, rep, sege_config, clucb_config, snaps = args
    return run_episode(policy, env, T, master_seed, rep,
                       sege_config=sege_config, clucb_config=clucb_config,
                       snapshot_stages=snaps)


def run_replications(policy: str, env: EnvironmentSpec, T: int, master_seed: int,
                     replications: int,
                     sege_config: Optional[SegeConfig] = None,
                     clucb_config: Optional[ClucbConfig] = None,
                     snapshot_stages: Sequence[int] = (),
                     workers: int = 1) -> list[RunTrace]:
    """Run independent replications; only replication 0 captures snapshots.

    Results are ordered by replication index, so the output does not
    depend on scheduling even with workers > 1.
    """
    jobs = [(policy, env, T, master_seed, rep, sege_config, clucb_config,
             tuple(snapshot_stages) if rep == 0 else ())
            for rep in range(replications)]
    if workers <= 1:
        return [_episode_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_episode_job, jobs))


def aggregate(traces: Sequence[RunTrace], b: float) -> AggregateSummary:
    """Stagewise mean/min/max bands and violation totals across traces."""
    if not traces:
        raise ValueError("need at least one trace")
    T = len(traces[0])
    if any(len(tr) != T for tr in traces):
        raise ValueError("traces have mismatched lengths")
    expected = np.stack([tr.expected for tr in traces])
    cum = np.stack([tr.cum_regret for tr in traces])
    violations = int(sum(np.count_nonzero(tr.expected < b) for tr in traces))
    return AggregateSummary(
        policy=traces[0].policy,
        stages=np.arange(1, T + 1),
        reward_mean=expected.mean(axis=0),
        reward_min=expected.min(axis=0),
        reward_max=expected.max(axis=0),
        cum_regret_mean=cum.mean(axis=0),
        cum_regret_min=cum.min(axis=0),
        cum_regret_max=cum.max(axis=0),
        total_violations=violations,
        mean_exploration_count=float(
            np.mean([tr.exploration_count[-1] for tr in traces])
        ),
        seeds=[(tr.master_seed, tr.replication) for tr in traces],
    )


def safe_set_grid(est: RlsEstimator, arm_set: EllipsoidArmSet, r: float,
                  grid: int):
    """LCB values and arm-set membership on a lattice over the bounding box.

    Returns (xs, ys, lcb_values, inside) with lcb_values of shape
    (grid, grid) indexed [iy, ix].
    """
    if grid < 16:
        raise ValueError("grid must be at least 16")
    half = np.sqrt(np.diag(arm_set.shape))
    xs = np.linspace(arm_set.center[0] - half[0], arm_set.center[0] + half[0], grid)
    ys = np.linspace(arm_set.center[1] - half[1], arm_set.center[1] + half[1], grid)
    X, Y = np.meshgrid(xs, ys)
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    theta = est.estimate()
    norms = np.sqrt(np.maximum(
        np.einsum("ij,jk,ik->i", pts, est.Vinv, pts), 0.0))
    lcb = (pts @ theta - r * norms).reshape(grid, grid)
    dx = pts - arm_set.center
    inside = (np.einsum("ij,jk,ik->i", dx, arm_set.inv_shape, dx) <= 1.0)
    return xs, ys, lcb, inside.reshape(grid, grid)


def safe_set_snapshot(est: RlsEstimator, arm_set: EllipsoidArmSet, r: float,
                      b: float, grid: int = 200) -> list[np.ndarray]:
    """Boundary polylines of {x in arm set : LCB(x) >= b}.

    The LCB = b contour is extracted on a grid x grid lattice and clipped
    to the arm set; an empty safe set yields an empty list.
    """
    import contourpy

    if arm_set.dim != 2:
        raise ValueError("safe-set snapshots are only defined for d = 2")
    xs, ys, lcb, _ = safe_set_grid(est, arm_set, r, grid)
    gen = contourpy.contour_generator(x=xs, y=ys, z=lcb)
    cell = math.hypot(xs[1] - xs[0], ys[1] - ys[0])
    polylines = []
    for line in gen.lines(b):
        line = np.asarray(line)
        keep = np.array([arm_set.contains(p, tol=2.0 * cell) for p in line])
        if keep.any():
            polylines.append(line[keep])
    return polylines
