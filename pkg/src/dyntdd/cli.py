"""Command-line campaign runner.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys

from .campaign import CampaignError, execute_campaign, parse_campaign


def _float_list(text: str):
    return tuple(float(x) for x in text.split(",") if x.strip())


def _int_list(text: str):
    return tuple(int(x) for x in text.split(",") if x.strip())


def _str_list(text: str):
    return tuple(x.strip() for x in text.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dyntdd",
        description="Run a duplexing-scheme comparison campaign and write a results CSV.")
    p.add_argument("--config", metavar="PATH", help="campaign configuration file (YAML)")
    p.add_argument("--schemes", type=_str_list, metavar="LIST",
                   help="comma-separated subset of s1,s2,s3,s4,s5")
    p.add_argument("--lambdas", type=_float_list, metavar="LIST",
                   help="comma-separated DL arrival rates in packets/s per cell")
    p.add_argument("--seeds", type=_int_list, metavar="LIST",
                   help="comma-separated run seeds")
    p.add_argument("--duration-ms", type=int, dest="duration_ms", metavar="N")
    p.add_argument("--warmup-ms", type=int, dest="warmup_ms", metavar="N")
    p.add_argument("--out", dest="output_path", metavar="PATH")
    p.add_argument("--jobs", type=int, default=None, metavar="N",
                   help="parallel runs (default: CPU count)")
    p.add_argument("--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "schemes": args.schemes,
        "lambdas": args.lambdas,
        "seeds": args.seeds,
        "duration_ms": args.duration_ms,
        "warmup_ms": args.warmup_ms,
        "output_path": args.output_path,
    }
    try:
        cfg = parse_campaign(args.config, overrides)
    except CampaignError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    try:
        execute_campaign(cfg, jobs=args.jobs, verbose=args.verbose)
    except Exception as exc:  # runtime failure: flag the partial CSV
        try:
            with open(cfg.output_path, "a") as fh:
                fh.write(f"# error: {exc}\n")
        except OSError:
            pass
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    if args.verbose:
        print(f"wrote {cfg.output_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
