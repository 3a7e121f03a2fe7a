#!/usr/bin/env python3
"""Run the fixed claim suite and write the JSON report next to a summary.

Usage: python scripts/repro_claims.py [--seed N] [--out report.json]
"""

import argparse
import json
from pathlib import Path

from delegatebox.repro import run_repro


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out", default=None)
    args = parser.parse_args()

    result = run_repro(args.seed)
    text = json.dumps(result, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"wrote {args.out}")
    for row in result["rows"]:
        mark = "pass" if row["pass"] else "FAIL"
        print(f"[{mark}] {row['name']}")
    print("all_pass:", result["all_pass"])
    return 0 if result["all_pass"] else 1


if __name__ == "__main__":
    raise SystemExit(main())
