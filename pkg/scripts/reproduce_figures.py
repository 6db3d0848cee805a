#!/usr/bin/env python3
"""Reproduce the reference-experiment figures end to end.

Runs the bundled 2-D disk setup for all four policies, writes the
per-replication traces, the aggregate summary, and the three figures
(stagewise expected reward, cumulative regret, safe-set snapshots)
into the requested output directory. This is a thin wrapper around
the ``safebandit`` CLI so the exact commands stay copy-pasteable.

Usage:
    python3 scripts/reproduce_figures.py [--out DIR] [--reps N]
                                         [--horizon T] [--seed SEED]
"""

import argparse
import sys

from safebandit.cli import main as cli_main
from safebandit.config import default_config_path


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="out/figures",
                        help="output directory (default: out/figures)")
    parser.add_argument("--reps", type=int, default=10,
                        help="replications per policy (default: 10)")
    parser.add_argument("--horizon", type=int, default=1000,
                        help="stages per replication (default: 1000)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the master seed from the config")
    args = parser.parse_args()

    config = str(default_config_path())
    run_argv = ["run", "--config", config, "--policy", "all",
                "--reps", str(args.reps), "--horizon", str(args.horizon),
                "--out", args.out]
    if args.seed is not None:
        run_argv += ["--seed", str(args.seed)]
    rc = cli_main(run_argv)
    if rc != 0:
        return rc

    snap_argv = ["snapshot", "--config", config,
                 "--stages", "250", "500", str(args.horizon),
                 "--out", args.out]
    if args.seed is not None:
        snap_argv += ["--seed", str(args.seed)]
    return cli_main(snap_argv)


if __name__ == "__main__":
    sys.exit(main())
