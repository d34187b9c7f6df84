#!/usr/bin/env python3
"""Run the acceptance suites and write every trace CSV and JSON report to disk.

    python scripts/run_suites.py --out runs/ --suite 3 4 --seed 7
"""
import argparse
import json
import os
import sys

from logitcond.experiments import SUITES


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="suite_runs", help="output directory")
    ap.add_argument("--seed", type=int, default=20240101)
    ap.add_argument("--suite", nargs="*", default=sorted(SUITES), choices=sorted(SUITES))
    args = ap.parse_args(argv)
    os.makedirs(args.out, exist_ok=True)
    summary = {}
    ok = True
    for key in args.suite:
        res = SUITES[key](seed=args.seed, out_dir=args.out)
        print(res.summary(), flush=True)
        summary[res.name] = {"passed": res.passed, "digest": res.digest(), "artifacts": len(res.digests),
                             "lines": res.lines}
        ok = ok and res.passed
    with open(os.path.join(args.out, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump({"seed": args.seed, "suites": summary}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
