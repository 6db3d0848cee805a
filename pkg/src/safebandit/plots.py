"""Static vector-graphic figures: reward bands, regret curves, safe sets."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .environment import EnvironmentSpec
from .harness import AggregateSummary, SafeSetSnapshot, safe_set_snapshot

_COLORS = {"sege": "tab:blue", "clucb": "tab:green",
           "baseline": "tab:gray", "greedy": "tab:red"}


def _color(policy: str) -> str:
    return _COLORS.get(policy, "tab:purple")


def stagewise_reward_plot(summaries: dict, b: float, b0: float, path) -> None:
    """Mean expected reward per stage with min/max band, plus the safety
    threshold and baseline bound reference lines."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for policy, agg in summaries.items():
        ax.plot(agg.stages, agg.reward_mean, color=_color(policy), label=policy)
        ax.fill_between(agg.stages, agg.reward_min, agg.reward_max,
                        color=_color(policy), alpha=0.2, linewidth=0)
    ax.axhline(b, color="red", linestyle="--", linewidth=1, label="safety threshold b")
    ax.axhline(b0, color="black", linestyle=":", linewidth=1, label="baseline bound b0")
    ax.set_xlabel("stage t")
    ax.set_ylabel("expected reward")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def cumulative_regret_plot(summaries: dict, path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for policy, agg in summaries.items():
        ax.plot(agg.stages, agg.cum_regret_mean, color=_color(policy), label=policy)
        ax.fill_between(agg.stages, agg.cum_regret_min, agg.cum_regret_max,
                        color=_color(policy), alpha=0.2, linewidth=0)
    ax.set_xlabel("stage t")
    ax.set_ylabel("cumulative regret")
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def safe_set_plot(snapshots: list, env: EnvironmentSpec, path,
                  grid: int = 200) -> None:
    """Overlay of safe-set boundaries at successive stages on the arm set."""
    arm_set = env.arm_set
    b = env.safety_threshold
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    boundary = arm_set.boundary_grid(512)
    boundary = np.vstack([boundary, boundary[:1]])
    ax.plot(boundary[:, 0], boundary[:, 1], color="black", linewidth=1.2,
            label="arm set boundary")
    n = max(len(snapshots), 1)
    for k, snap in enumerate(snapshots):
        shade = 0.25 + 0.7 * (k + 1) / n
        for line in safe_set_snapshot(snap.estimator, arm_set, snap.radius, b, grid):
            ax.plot(line[:, 0], line[:, 1], color="tab:blue", alpha=shade,
                    linewidth=1.0)
        ax.plot([], [], color="tab:blue", alpha=shade, label=f"t = {snap.stage}")
    x0 = env.baseline_arm
    xs = env.optimal_arm
    ax.plot(x0[0], x0[1], "o", color="tab:blue", markersize=6, label="baseline arm")
    ax.plot(xs[0], xs[1], "*", color="black", markersize=10, label="optimal arm")
    ax.set_aspect("equal")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.legend(loc="lower left", fontsize=7)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
