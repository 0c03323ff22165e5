"""Tabulate classical and quantum bias of the perturbed AND game over a (p, q) grid.

Writes a CSV and prints a coarse text map of the quantum advantage.
"""

import argparse
from pathlib import Path

from xorgames.cli import sweep_rows, write_sweep_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--step", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--restarts", type=int, default=8)
    ap.add_argument("--out", type=Path, default=Path("results/region_sweep.csv"))
    args = ap.parse_args()

    rows = list(sweep_rows((0.5, 1.0), (0.5, 1.0), args.step, seed=args.seed, restarts=args.restarts))
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(rows, args.out)

    qs = sorted({r["q"] for r in rows}, reverse=True)
    ps = sorted({r["p"] for r in rows})
    table = {(r["p"], r["q"]): r["quantum_lower"] - r["classical_bias"] for r in rows}
    print("advantage eps_Q - eps_C (rows q, columns p)")
    print("q\\p   " + " ".join(f"{p:5.2f}" for p in ps))
    for q in qs:
        print(f"{q:5.2f} " + " ".join(f"{table[p, q]:5.3f}" for p in ps))
    print(f"{len(rows)} rows written to {args.out}")


if __name__ == "__main__":
    main()
