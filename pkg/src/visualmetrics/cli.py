"""Command line entry point for the verification scenarios.

Usage:  visualmetrics <scenario> --config <path> [--out <dir>]
                      [--seed <u64>] [--jobs <n>]

Writes <scenario>.csv (one evidence row per check) and <scenario>.json
(summary, config echo, module hashes) under the output directory and
exits 0 exactly when every row passes.
"""

from __future__ import annotations

import argparse
import pathlib
import sys

from .config import load_config
from .evidence import write_csv, write_summary
from .scenarios import RUNNERS, SCENARIOS


def build_parser():
    parser = argparse.ArgumentParser(
        prog="visualmetrics",
        description="Numerical checks for boundary visual metrics of "
        "strictly pseudoconvex domains.",
    )
    parser.add_argument("scenario", choices=sorted(SCENARIOS))
    parser.add_argument("--config", required=True, help="flat key=value file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="overrides run.seed from the config")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker processes for independent work items")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else int(cfg.get("run.seed", 0))
    out_dir = pathlib.Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = RUNNERS[args.scenario](cfg, seed=seed, jobs=max(args.jobs, 1))
    write_csv(out_dir / f"{args.scenario}.csv", rows)
    summary = write_summary(
        out_dir / f"{args.scenario}.json", args.scenario, rows, cfg, seed
    )
    status = "PASS" if summary["all_pass"] else "FAIL"
    print(f"{args.scenario}: {summary['passed']}/{summary['rows']} rows pass "
          f"[{status}]")
    return 0 if summary["all_pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
