"""Safe-exploration / greedy-exploitation policy components."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from safebandit.environment import replication_streams
from safebandit.estimator import RlsEstimator
from safebandit.geometry import EllipsoidArmSet
from safebandit.sege import (EXPLORE_FROM_BASELINE, GREEDY, ProblemView,
                             RiskSchedule, SegeConfig, greedy_arm, lcb_arm,
                             rho_bar, risk_level, safe_exploration_arm,
                             sample_exploration_direction, sege_step,
                             select_safe_arm)

UNIT_DISK = EllipsoidArmSet.ball([1.0, 1.0], 1.0)
THETA_STAR = np.array([0.6, 0.8])
B0 = float(np.dot([1.2, 1.9], THETA_STAR))  # 2.24
B = 0.8 * B0                                # 1.792


def reference_view():
    return ProblemView(arm_set=UNIT_DISK, baseline_arm=np.array([1.2, 1.9]),
                       baseline_bound=B0, safety_threshold=B,
                       param_bound=1.0, noise_scale=1.0)


def reference_config(**overrides):
    kw = dict(mixing_weight=rho_bar(B0, B, 1.0, UNIT_DISK.eig_max),
              info_gate_scale=0.5, regularization=0.1,
              risk_schedule=RiskSchedule("summable-quadratic", 0.1))
    kw.update(overrides)
    return SegeConfig(**kw)


# ---------------------------------------------------------------------------
# mixing-weight cap

def test_rho_bar_reference_value():
    assert rho_bar(2.24, 0.8 * 2.24, 1.0, 1.0) == pytest.approx(0.224, abs=1e-12)


def test_rho_bar_clamps_to_one():
    assert rho_bar(10.0, 0.0, 1.0, 1.0) == 1.0


def test_rho_bar_general_values():
    assert rho_bar(3.0, 1.0, 2.0, 4.0) == pytest.approx(0.25)


def test_rho_bar_rejects_empty_budget():
    with pytest.raises(ValueError):
        rho_bar(1.0, 1.0, 1.0, 1.0)


def test_config_rejects_mixing_above_cap():
    with pytest.raises(ValueError):
        reference_config().validate_mixing(B0, B, 1.0, 2.0 * UNIT_DISK.eig_max)


def test_config_accepts_mixing_at_cap():
    reference_config().validate_mixing(B0, B, 1.0, UNIT_DISK.eig_max)


# ---------------------------------------------------------------------------
# exploration directions

def test_direction_is_unit_norm():
    rng = np.random.default_rng(0)
    for _ in range(200):
        z = sample_exploration_direction(2, rng)
        assert abs(np.linalg.norm(z) - 1.0) < 1e-12


def test_direction_moments():
    rng = np.random.default_rng(1)
    draws = np.array([sample_exploration_direction(2, rng) for _ in range(200_000)])
    assert np.abs(draws.mean(axis=0)).max() < 0.01
    cov = np.cov(draws.T, bias=True)
    assert np.abs(cov - 0.5 * np.eye(2)).max() < 0.01


def test_direction_rejects_bad_dimension():
    with pytest.raises(ValueError):
        sample_exploration_direction(0, np.random.default_rng(0))


# ---------------------------------------------------------------------------
# safe exploration arm

def test_zero_mixing_returns_safe_arm():
    safe = np.array([1.2, 1.9])
    np.testing.assert_array_equal(
        safe_exploration_arm(safe, 0.0, UNIT_DISK, [1.0, 0.0]), safe)


def test_center_mixing_radius():
    out = safe_exploration_arm(UNIT_DISK.center, 0.999, UNIT_DISK,
                               [0.0, 1.0])
    assert np.linalg.norm(out - UNIT_DISK.center) == pytest.approx(0.999)


def test_reference_mixing_arithmetic():
    out = safe_exploration_arm([1.2, 1.9], 0.224, UNIT_DISK, [1.0, 0.0])
    np.testing.assert_allclose(out, [1.3792, 1.6984], atol=1e-12)


def test_rejects_infeasible_safe_arm():
    with pytest.raises(ValueError):
        safe_exploration_arm([2.5, 1.0], 0.2, UNIT_DISK, [1.0, 0.0])


@given(st.integers(0, 10_000), st.floats(0.0, 1.0))
def test_mixed_arm_is_feasible(seed, rho):
    rng = np.random.default_rng(seed)
    zeta = sample_exploration_direction(2, rng)
    phi = rng.uniform(0, 2 * math.pi)
    safe = UNIT_DISK.center + rng.uniform(0, 1) * np.array(
        [math.cos(phi), math.sin(phi)])
    out = safe_exploration_arm(safe, rho, UNIT_DISK, zeta)
    assert UNIT_DISK.contains(out, tol=1e-9)


@given(st.integers(0, 10_000))
def test_deterministic_safety_of_exploration_arm(seed):
    # Any mixing of a baseline-level arm with a boundary point keeps the
    # expected reward at or above the safety threshold.
    rng = np.random.default_rng(seed)
    cap = rho_bar(B0, B, 1.0, UNIT_DISK.eig_max)
    rho = rng.uniform(0.0, cap)
    zeta = sample_exploration_direction(2, rng)
    while True:
        phi = rng.uniform(0, 2 * math.pi)
        safe = UNIT_DISK.center + rng.uniform(0, 1) * np.array(
            [math.cos(phi), math.sin(phi)])
        if float(safe @ THETA_STAR) >= B0:
            break
    out = safe_exploration_arm(safe, rho, UNIT_DISK, zeta)
    assert float(out @ THETA_STAR) >= B - 1e-10


# ---------------------------------------------------------------------------
# greedy and safe-arm selection

def test_greedy_arm_at_true_parameter():
    np.testing.assert_allclose(greedy_arm(THETA_STAR, UNIT_DISK), [1.6, 1.8],
                               atol=1e-14)


def test_greedy_arm_axis_direction():
    np.testing.assert_allclose(greedy_arm([0.0, 1.0], UNIT_DISK), [1.0, 2.0])


def test_select_safe_arm_boundary_inclusive():
    arm = np.array([0.5, 0.5])
    np.testing.assert_array_equal(select_safe_arm(arm, B0, B0, [1.2, 1.9]), arm)


def test_select_safe_arm_sentinel_falls_back():
    np.testing.assert_array_equal(
        select_safe_arm([0.5, 0.5], -math.inf, B0, [1.2, 1.9]), [1.2, 1.9])


def test_select_safe_arm_strict_fallthrough():
    np.testing.assert_array_equal(
        select_safe_arm([0.5, 0.5], B0 - 1e-9, B0, [1.2, 1.9]), [1.2, 1.9])


# ---------------------------------------------------------------------------
# risk schedules

def test_summable_quadratic_first_stage():
    sched = RiskSchedule("summable-quadratic", 0.1)
    assert risk_level(sched, 1) == pytest.approx(0.6 / math.pi**2, abs=1e-12)
    assert risk_level(sched, 1) == pytest.approx(0.0607927, abs=1e-7)


def test_constant_schedule():
    sched = RiskSchedule("constant", 0.1)
    assert all(risk_level(sched, t) == 0.1 for t in (1, 7, 10**6))


def test_floor_exponential_degenerates_at_zero_rate():
    sched = RiskSchedule("floor-exponential", 0.5, K=0.0)
    assert all(risk_level(sched, t) == 0.5 for t in (1, 99))


def test_summable_schedule_total_budget():
    sched = RiskSchedule("summable-quadratic", 0.3)
    total = sum(risk_level(sched, t) for t in range(1, 100_001))
    assert total <= 0.3 + 1e-12


@given(st.sampled_from(["summable-quadratic", "floor-exponential", "constant"]),
       st.floats(1e-6, 1.0), st.floats(0.0, 5.0), st.integers(1, 10**9))
def test_risk_levels_in_unit_interval(form, delta_bar, K, t):
    assert 0.0 < risk_level(RiskSchedule(form, delta_bar, K), t) <= 1.0


def test_schedule_rejects_unknown_form():
    with pytest.raises(ValueError):
        RiskSchedule("linear", 0.1)


# ---------------------------------------------------------------------------
# LCB-arm optimization

def test_lcb_arm_zero_radius_is_support():
    est = RlsEstimator(2, lam=0.1)
    est.update([1.0, 0.0], 2.0)
    x, v = lcb_arm(est, UNIT_DISK, 0.0)
    theta = est.estimate()
    np.testing.assert_allclose(x, UNIT_DISK.support(theta), atol=1e-12)
    assert v == pytest.approx(float(x @ theta))


def test_lcb_arm_degenerate_estimate_centered_set():
    # With theta_hat = 0 the objective -r||x|| peaks at the origin.
    E = EllipsoidArmSet.ball([0.0, 0.0], 1.0)
    est = RlsEstimator(2, lam=0.1)
    x, v = lcb_arm(est, E, 2.0)
    assert v == pytest.approx(0.0, abs=1e-9)
    assert np.linalg.norm(x) < 1e-6


def test_lcb_arm_matches_grid_oracle():
    rng = np.random.default_rng(101)
    est = RlsEstimator(2, lam=0.1)
    for _ in range(100):
        phi = rng.uniform(0, 2 * math.pi)
        x = UNIT_DISK.center + rng.uniform(0, 1) * np.array(
            [math.cos(phi), math.sin(phi)])
        est.update(x, float(x @ THETA_STAR) + rng.standard_normal())
    xs, vs = lcb_arm(est, UNIT_DISK, 1.0)
    assert UNIT_DISK.contains(xs, tol=1e-9)
    nb = 50_000
    phi = np.linspace(0, 2 * math.pi, nb, endpoint=False)
    ring = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    pts = np.vstack([UNIT_DISK.center + ring,
                     UNIT_DISK.center + ring * rng.uniform(0, 1, (nb, 1))])
    theta = est.estimate()
    vals = pts @ theta - np.sqrt(np.maximum(
        np.einsum("ij,jk,ik->i", pts, est.Vinv, pts), 0.0))
    assert vs >= vals.max() - 1e-4


@given(st.integers(0, 10_000), st.floats(0.0, 8.0), st.integers(0, 60))
def test_lcb_arm_dominates_baseline(seed, r, n):
    rng = np.random.default_rng(seed)
    est = RlsEstimator(2, lam=0.1)
    for _ in range(n):
        phi = rng.uniform(0, 2 * math.pi)
        x = UNIT_DISK.center + rng.uniform(0, 1) * np.array(
            [math.cos(phi), math.sin(phi)])
        est.update(x, float(x @ THETA_STAR) + rng.standard_normal())
    _, vs = lcb_arm(est, UNIT_DISK, r)
    assert vs >= est.lcb([1.2, 1.9], r) - 1e-6


def test_lcb_arm_rejects_negative_radius():
    with pytest.raises(ValueError):
        lcb_arm(RlsEstimator(2, lam=0.1), UNIT_DISK, -1.0)


# ---------------------------------------------------------------------------
# full decision step

def test_first_stage_explores_from_baseline():
    est = RlsEstimator(2, lam=0.1)
    rng = replication_streams(0, 0)["exploration"]
    dec = sege_step(est, reference_config(), reference_view(), 1, rng)
    assert dec.tag == EXPLORE_FROM_BASELINE
    assert not dec.eig_gate
    assert UNIT_DISK.contains(dec.arm, tol=1e-9)


def test_primed_estimator_goes_greedy():
    est = RlsEstimator(2, lam=0.1)
    est.V = 1e6 * np.eye(2)
    est.Vinv = 1e-6 * np.eye(2)
    est.xy_sum = 1e6 * THETA_STAR
    est._eigmin_cache = None
    rng = replication_streams(0, 0)["exploration"]
    dec = sege_step(est, reference_config(), reference_view(), 100, rng)
    assert dec.tag == GREEDY
    np.testing.assert_allclose(dec.arm, [1.6, 1.8], atol=1e-9)
    assert dec.lcb_of_greedy >= B
    assert dec.eig_gate


def test_unreachable_gate_never_greedy():
    cfg = reference_config(info_gate_scale=math.inf)
    est = RlsEstimator(2, lam=0.1)
    view = reference_view()
    rng = replication_streams(3, 0)["exploration"]
    noise = replication_streams(3, 0)["noise"]
    for t in range(1, 101):
        dec = sege_step(est, cfg, view, t, rng)
        assert dec.tag != GREEDY
        est.update(dec.arm, float(dec.arm @ THETA_STAR) + noise.standard_normal())


def test_gate_and_feasibility_consistency_over_run():
    cfg = reference_config()
    est = RlsEstimator(2, lam=0.1)
    view = reference_view()
    streams = replication_streams(99, 0)
    for t in range(1, 501):
        dec = sege_step(est, cfg, view, t, streams["exploration"])
        assert UNIT_DISK.contains(dec.arm, tol=1e-9)
        if dec.tag == GREEDY:
            assert dec.lambda_min >= cfg.info_gate_scale * math.sqrt(t)
            assert dec.lcb_of_greedy >= B
        y = float(dec.arm @ THETA_STAR) + float(streams["noise"].standard_normal())
        est.update(dec.arm, y)


def test_step_rejects_nonpositive_stage():
    with pytest.raises(ValueError):
        sege_step(RlsEstimator(2, lam=0.1), reference_config(),
                  reference_view(), 0, np.random.default_rng(0))
