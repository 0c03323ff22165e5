"""Run every acceptance check and write a JSON report.

    python scripts/reproduce_results.py --seed 0 --out results/acceptance.json
"""

import argparse
import json
import sys
from pathlib import Path

from xorgames.acceptance import run_all


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("results/acceptance.json"))
    args = ap.parse_args()

    results = run_all(args.seed, log=print)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps([r.to_dict() for r in results], indent=2))
    print(f"report written to {args.out}")
    return 0 if all(r.passed for r in results) else 2


if __name__ == "__main__":
    sys.exit(main())
