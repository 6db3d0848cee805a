"""Trace and summary file emission.

Traces are plain delimited text, one row per stage; everything in the
summary is recomputable from the trace files. Floats are written with
repr so identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import yaml

from .harness import RunTrace, aggregate

TRACE_COLUMNS_FIXED = ["t", "policy"]
TRACE_COLUMNS_TAIL = ["tag", "y", "expected_reward", "regret_increment",
                      "cum_regret", "lambda_min", "delta_t", "violated"]


def _fmt(v: float) -> str:
    return repr(float(v))


def trace_filename(policy: str, replication: int) -> str:
    return f"{policy}_rep{replication:03d}_trace.csv"


def write_trace(trace: RunTrace, path) -> None:
    d = trace.arms.shape[1]
    header = TRACE_COLUMNS_FIXED + [f"arm_{i}" for i in range(d)] + TRACE_COLUMNS_TAIL
    cum = trace.cum_regret
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(len(trace)):
            row = [str(i + 1), trace.policy]
            row += [_fmt(v) for v in trace.arms[i]]
            row += [trace.tags[i], _fmt(trace.rewards[i]), _fmt(trace.expected[i]),
                    _fmt(trace.regret_inc[i]), _fmt(cum[i]),
                    _fmt(trace.lambda_min[i]), _fmt(trace.delta[i]),
                    str(int(trace.violated[i]))]
            w.writerow(row)


def read_trace(path) -> dict:
    """Trace file back as a dict of numpy columns (for checks and plots)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = {name: [] for name in header}
    for row in body:
        for name, val in zip(header, row):
            cols[name].append(val)
    out = {}
    for name, vals in cols.items():
        if name in ("policy", "tag"):
            out[name] = vals
        elif name in ("t", "violated"):
            out[name] = np.array(vals, dtype=int)
        else:
            out[name] = np.array(vals, dtype=float)
    return out


def write_summary(path, config_echo: dict, resolved: dict,
                  traces_by_policy: dict, trace_files: dict) -> None:
    """Nested key-value summary: config echo, resolved autos, per-policy
    aggregates. Timings are deliberately kept out (determinism contract)."""
    policies = {}
    for policy, traces in traces_by_policy.items():
        b = traces[0].safety_threshold
        agg = aggregate(traces, b)
        final = len(traces[0])
        policies[policy] = {
            "replications": len(traces),
            "horizon": final,
            "total_stagewise_violations": agg.total_violations,
            "mean_exploration_count": float(agg.mean_exploration_count),
            "mean_cumulative_regret_final": float(agg.cum_regret_mean[-1]),
            "min_cumulative_regret_final": float(agg.cum_regret_min[-1]),
            "max_cumulative_regret_final": float(agg.cum_regret_max[-1]),
            "mean_expected_reward_final": float(agg.reward_mean[-1]),
            "trace_files": trace_files[policy],
        }
    doc = {"config": config_echo, "resolved": resolved, "policies": policies}
    Path(path).write_text(yaml.safe_dump(doc, sort_keys=True))
