"""Experiment configuration: YAML load/save, validation, and resolution.

A config file is a YAML mapping (see configs/sec6.cfg for the shipped
reference setup). `load_config` validates every invariant and reports
violations with the offending field path; `resolve` turns the config
into concrete environment and policy objects, resolving "auto" values.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
import yaml

from .clucb import ClucbConfig
from .environment import EnvironmentSpec, worst_case_baseline_bound
from .geometry import EllipsoidArmSet
from .sege import RiskSchedule, SegeConfig, rho_bar

VALID_POLICIES = ("sege", "clucb", "baseline", "greedy", "all")


class ConfigError(ValueError):
    """Configuration parse or validation failure; message names the field."""


@dataclass
class RiskScheduleSection:
    form: str = "summable-quadratic"
    delta_bar: float = 0.1
    K: float = 0.0


@dataclass
class SegeSection:
    rho: Union[str, float] = "auto"       # "auto" resolves to the safe cap
    c: float = 0.5
    regularization: float = 0.1
    risk_schedule: RiskScheduleSection = field(default_factory=RiskScheduleSection)


@dataclass
class ClucbSection:
    alpha: float = 0.2
    delta: float = 0.1
    boundary_points: int = 256
    regularization: float = 0.1


@dataclass
class ExperimentConfig:
    dimension: int = 2
    center: list = field(default_factory=lambda: [1.0, 1.0])
    radius: Optional[float] = 1.0          # shorthand for shape = radius^2 * I
    shape: Optional[list] = None           # full shape matrix, rows as lists
    theta_star: list = field(default_factory=lambda: [0.6, 0.8])
    param_bound: float = 1.0
    noise_scale: float = 1.0
    baseline_arm: list = field(default_factory=lambda: [1.2, 1.9])
    baseline_bound: Union[str, float] = "auto"   # auto | worst-case | number
    safety_fraction: Optional[float] = 0.8       # b = fraction * b0
    safety_threshold: Optional[float] = None     # explicit b, overrides fraction
    policy: str = "sege"
    horizon: int = 1000
    replications: int = 10
    master_seed: int = 0
    output_dir: str = "out"
    snapshot_stages: list = field(default_factory=lambda: [250, 500, 1000, 2000, 5000, 10000, 50000])
    sege: SegeSection = field(default_factory=SegeSection)
    clucb: ClucbSection = field(default_factory=ClucbSection)


@dataclass
class ResolvedExperiment:
    """Concrete objects built from a validated config."""

    env: EnvironmentSpec
    sege_config: SegeConfig
    clucb_config: ClucbConfig
    policies: list
    horizon: int
    replications: int
    master_seed: int
    output_dir: str
    snapshot_stages: list
    resolved: dict  # logged "auto" resolutions and derived quantities


def _build(section_cls, data: dict, path: str):
    known = {f: t for f, t in section_cls.__dataclass_fields__.items()}
    extra = set(data) - set(known)
    if extra:
        raise ConfigError(f"{path}: unknown field(s) {sorted(extra)}")
    return data


def _config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    data = dict(data)
    _build(ExperimentConfig, data, "<root>")
    if "sege" in data:
        sub = dict(data["sege"] or {})
        _build(SegeSection, sub, "sege")
        if "risk_schedule" in sub:
            rs = dict(sub["risk_schedule"] or {})
            _build(RiskScheduleSection, rs, "sege.risk_schedule")
            sub["risk_schedule"] = RiskScheduleSection(**rs)
        data["sege"] = SegeSection(**sub)
    if "clucb" in data:
        sub = dict(data["clucb"] or {})
        _build(ClucbSection, sub, "clucb")
        data["clucb"] = ClucbSection(**sub)
    return ExperimentConfig(**data)


def load_config(path) -> ExperimentConfig:
    """Parse and fully validate a config file."""
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    cfg = _config_from_dict(raw)
    resolve(cfg)  # surfaces every invariant violation now, not at run time
    return cfg


def save_config(cfg: ExperimentConfig, path) -> None:
    """Write a config so that load_config round-trips to an equal object."""
    Path(path).write_text(yaml.safe_dump(asdict(cfg), sort_keys=False))


def resolve(cfg: ExperimentConfig) -> ResolvedExperiment:
    """Build environment and policy objects; raise ConfigError on any
    invariant violation, naming the field responsible."""
    d = cfg.dimension
    center = np.asarray(cfg.center, dtype=float)
    if center.shape != (d,):
        raise ConfigError(f"center: expected {d} components, got {center.shape}")
    if cfg.shape is not None:
        shape = np.asarray(cfg.shape, dtype=float)
    elif cfg.radius is not None:
        if cfg.radius <= 0:
            raise ConfigError("radius: must be positive")
        shape = cfg.radius**2 * np.eye(d)
    else:
        raise ConfigError("arm set: one of radius or shape is required")
    try:
        arm_set = EllipsoidArmSet(center=center, shape=shape)
    except ValueError as exc:
        raise ConfigError(f"shape: {exc}") from exc

    theta = np.asarray(cfg.theta_star, dtype=float)
    x0 = np.asarray(cfg.baseline_arm, dtype=float)

    if cfg.baseline_bound == "auto":
        b0 = float(x0 @ theta)
    elif cfg.baseline_bound == "worst-case":
        b0 = worst_case_baseline_bound(x0, cfg.param_bound)
    elif isinstance(cfg.baseline_bound, (int, float)):
        b0 = float(cfg.baseline_bound)
    else:
        raise ConfigError(f"baseline_bound: expected auto, worst-case, or a number, "
                          f"got {cfg.baseline_bound!r}")

    if cfg.safety_threshold is not None:
        b = float(cfg.safety_threshold)
    elif cfg.safety_fraction is not None:
        b = float(cfg.safety_fraction) * b0
    else:
        raise ConfigError("safety: one of safety_threshold or safety_fraction is required")
    if b >= b0:
        raise ConfigError("safety_threshold: b >= b0 (no exploration budget)")

    try:
        env = EnvironmentSpec(theta_star=theta, param_bound=cfg.param_bound,
                              noise_scale=cfg.noise_scale, arm_set=arm_set,
                              baseline_arm=x0, baseline_bound=b0,
                              safety_threshold=b)
    except ValueError as exc:
        raise ConfigError(f"environment: {exc}") from exc

    cap = rho_bar(b0, b, cfg.param_bound, arm_set.eig_max)
    if cfg.sege.rho == "auto":
        rho = cap
    elif isinstance(cfg.sege.rho, (int, float)):
        rho = float(cfg.sege.rho)
    else:
        raise ConfigError(f"sege.rho: expected auto or a number, got {cfg.sege.rho!r}")
    rs = cfg.sege.risk_schedule
    try:
        schedule = RiskSchedule(form=rs.form, delta_bar=rs.delta_bar, K=rs.K)
        sege_config = SegeConfig(mixing_weight=rho, info_gate_scale=cfg.sege.c,
                                 regularization=cfg.sege.regularization,
                                 risk_schedule=schedule)
        sege_config.validate_mixing(b0, b, cfg.param_bound, arm_set.eig_max)
    except ValueError as exc:
        raise ConfigError(f"sege: {exc}") from exc

    try:
        clucb_config = ClucbConfig(alpha=cfg.clucb.alpha, delta=cfg.clucb.delta,
                                   boundary_points=cfg.clucb.boundary_points,
                                   regularization=cfg.clucb.regularization,
                                   param_bound=cfg.param_bound,
                                   noise_scale=cfg.noise_scale)
    except ValueError as exc:
        raise ConfigError(f"clucb: {exc}") from exc

    if cfg.policy not in VALID_POLICIES:
        raise ConfigError(f"policy: expected one of {VALID_POLICIES}, got {cfg.policy!r}")
    policies = ["sege", "clucb", "baseline", "greedy"] if cfg.policy == "all" \
        else [cfg.policy]

    if cfg.horizon < 1:
        raise ConfigError("horizon: must be at least 1")
    if cfg.replications < 1:
        raise ConfigError("replications: must be at least 1")

    snaps = [int(s) for s in cfg.snapshot_stages if int(s) <= cfg.horizon]
    resolved = {
        "b0": b0,
        "b": b,
        "rho": rho,
        "rho_bar": cap,
        "optimal_arm": [float(v) for v in env.optimal_arm],
        "optimal_reward": env.optimal_reward,
        "max_arm_norm": arm_set.max_norm,
        "snapshot_stages": snaps,
    }
    return ResolvedExperiment(env=env, sege_config=sege_config,
                              clucb_config=clucb_config, policies=policies,
                              horizon=cfg.horizon, replications=cfg.replications,
                              master_seed=cfg.master_seed, output_dir=cfg.output_dir,
                              snapshot_stages=snaps, resolved=resolved)


def default_config_path() -> Path:
    """Path of the shipped reference configuration."""
    return Path(__file__).parent / "configs" / "sec6.cfg"
