"""Command-line entry point.

    safebandit run --config sec6.cfg [--seed N] [--reps N] [--horizon N]
                   [--policy sege|clucb|baseline|greedy|all] [--out DIR]
    safebandit validate --config sec6.cfg
    safebandit snapshot --config sec6.cfg --stages 250 1000 5000 [--out DIR]

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from pathlib import Path

import yaml

from .config import ConfigError, ExperimentConfig, load_config, resolve
from .harness import run_replications
from .traceio import trace_filename, write_summary, write_trace


def _load(path: str) -> ExperimentConfig:
    try:
        return load_config(path)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        raise SystemExit(1)


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    updates = {}
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if args.reps is not None:
        updates["replications"] = args.reps
    if args.horizon is not None:
        updates["horizon"] = args.horizon
    if args.policy is not None:
        updates["policy"] = args.policy
    if args.out is not None:
        updates["output_dir"] = args.out
    return dataclasses.replace(cfg, **updates) if updates else cfg


def run_command(cfg: ExperimentConfig) -> int:
    """Run all configured policies; write traces, summary, and plots."""
    try:
        exp = resolve(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    out = Path(exp.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    traces_by_policy = {}
    trace_files = {}
    timings = {}
    try:
        for policy in exp.policies:
            t0 = time.perf_counter()
            traces = run_replications(
                policy, exp.env, exp.horizon, exp.master_seed, exp.replications,
                sege_config=exp.sege_config, clucb_config=exp.clucb_config,
                snapshot_stages=exp.snapshot_stages if policy in ("sege", "clucb") else (),
            )
            timings[policy] = time.perf_counter() - t0
            files = []
            for trace in traces:
                name = trace_filename(policy, trace.replication)
                write_trace(trace, out / name)
                files.append(name)
            traces_by_policy[policy] = traces
            trace_files[policy] = files

        write_summary(out / "summary.yaml", dataclasses.asdict(cfg),
                      exp.resolved, traces_by_policy, trace_files)
        # Wall-clock timings live in a sidecar: summary files must be
        # byte-identical across reruns of the same seed.
        (out / "timings.txt").write_text(
            "".join(f"{p}: {s:.3f} s\n" for p, s in timings.items()))

        from .harness import aggregate
        from .plots import cumulative_regret_plot, safe_set_plot, stagewise_reward_plot

        summaries = {p: aggregate(trs, exp.env.safety_threshold)
                     for p, trs in traces_by_policy.items()}
        stagewise_reward_plot(summaries, exp.env.safety_threshold,
                              exp.env.baseline_bound, out / "stagewise_reward.svg")
        cumulative_regret_plot(summaries, out / "cumulative_regret.svg")
        snapshots = []
        for policy in exp.policies:
            if traces_by_policy[policy][0].snapshots:
                snapshots = traces_by_policy[policy][0].snapshots
                break
        safe_set_plot(snapshots, exp.env, out / "safe_sets.svg")
    except Exception as exc:  # noqa: BLE001 - report, then fail with code 2
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    return 0


def validate_command(cfg: ExperimentConfig) -> int:
    try:
        exp = resolve(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    print(yaml.safe_dump({"resolved": exp.resolved}, sort_keys=True), end="")
    return 0


def snapshot_command(cfg: ExperimentConfig, stages: list) -> int:
    try:
        exp = resolve(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    stages = sorted(set(int(s) for s in stages))
    if not stages:
        print("config error: no snapshot stages given", file=sys.stderr)
        return 1
    out = Path(exp.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        from .harness import run_episode
        from .plots import safe_set_plot
        from .harness import safe_set_snapshot

        trace = run_episode("sege", exp.env, max(stages), exp.master_seed, 0,
                            sege_config=exp.sege_config, snapshot_stages=stages)
        safe_set_plot(trace.snapshots, exp.env, out / "safe_sets.svg")
        for snap in trace.snapshots:
            lines = safe_set_snapshot(snap.estimator, exp.env.arm_set,
                                      snap.radius, exp.env.safety_threshold)
            with open(out / f"safe_set_t{snap.stage}.csv", "w") as fh:
                fh.write("segment,x1,x2\n")
                for k, line in enumerate(lines):
                    for p in line:
                        fh.write(f"{k},{p[0]!r},{p[1]!r}\n")
    except Exception as exc:  # noqa: BLE001
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="safebandit",
                                     description="Safe linear bandit simulations")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the configured experiment")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--reps", type=int, default=None)
    p_run.add_argument("--horizon", type=int, default=None)
    p_run.add_argument("--policy", choices=["sege", "clucb", "baseline", "greedy", "all"],
                       default=None)
    p_run.add_argument("--out", default=None)

    p_val = sub.add_parser("validate", help="validate a config and print resolved values")
    p_val.add_argument("--config", required=True)

    p_snap = sub.add_parser("snapshot", help="emit safe-set snapshots at given stages")
    p_snap.add_argument("--config", required=True)
    p_snap.add_argument("--stages", type=int, nargs="+", required=True)
    p_snap.add_argument("--seed", type=int, default=None)
    p_snap.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = _load(args.config)
    if args.command == "run":
        return run_command(_apply_overrides(cfg, args))
    if args.command == "validate":
        return validate_command(cfg)
    if args.command == "snapshot":
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, master_seed=args.seed)
        if args.out is not None:
            cfg = dataclasses.replace(cfg, output_dir=args.out)
        return snapshot_command(cfg, args.stages)
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
