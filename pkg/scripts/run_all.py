#!/usr/bin/env python3
"""Run every built-in scenario and print a one-line verdict summary each.

The N-prefixed scenarios violate an assumption on purpose, so the expected
outcome of a full sweep is "all S pass, all N report a violation"; the exit
code is the worst per-scenario code (0 verified, 1 violated/inconclusive,
3 runtime error).
"""

import argparse
import sys
from pathlib import Path

from parapos.runner import manifest_exit_code, run_scenario
from parapos.scenarios import REGISTRY, get_scenario


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="parapos_out", help="output base directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the sampling seed of the checks")
    parser.add_argument("--only", nargs="*", metavar="NAME",
                        help="subset of scenario names (default: all)")
    args = parser.parse_args(argv)

    names = args.only or list(REGISTRY)
    unknown = [n for n in names if n not in REGISTRY]
    if unknown:
        parser.error(f"unknown scenarios: {', '.join(unknown)}")

    worst = 0
    for name in names:
        manifest = run_scenario(get_scenario(name),
                                out_dir=Path(args.out) / name, seed=args.seed)
        code = manifest_exit_code(manifest)
        worst = max(worst, code)
        states = {tag: v.status for tag, v in sorted(manifest.verdicts.items())}
        print(f"{name:24s} exit={code}  " +
              "  ".join(f"{tag}:{status}" for tag, status in states.items()))
        if manifest.error:
            print(f"{'':24s} error: {manifest.error}")
    return worst


if __name__ == "__main__":
    sys.exit(main())
