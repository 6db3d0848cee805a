"""Stagewise-safe linear stochastic bandit simulations."""

from .clucb import ClucbConfig, ClucbState, budget_check, clucb_step, discretize_boundary, ucb_arm
from .config import ConfigError, ExperimentConfig, default_config_path, load_config, resolve, save_config
from .environment import EnvironmentSpec, replication_streams, worst_case_baseline_bound
from .estimator import RlsEstimator, confidence_radius
from .geometry import EllipsoidArmSet, matrix_sqrt, min_eigenvalue, weighted_norm
from .harness import (AggregateSummary, RunTrace, aggregate, run_episode,
                      run_replications, safe_set_snapshot)
from .sege import (GREEDY, EXPLORE_FROM_BASELINE, EXPLORE_FROM_LCB, OptimizerError,
                   ProblemView, RiskSchedule, SegeConfig, SegeDecision, greedy_arm,
                   lcb_arm, rho_bar, risk_level, safe_exploration_arm,
                   sample_exploration_direction, sege_step, select_safe_arm)

__version__ = "0.1.0"
