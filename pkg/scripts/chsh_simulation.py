"""Monte Carlo play of the explicit region strategies, compared with their exact win rates."""

import argparse
import math

from xorgames.game import build_perturbed_and_game
from xorgames.strategies import build_region1_strategy, build_region2_strategy, operator_bias, simulate_rounds

POINTS = [(2, 1.0, 1.0), (2, 0.9, 0.8), (1, 0.75, 0.5), (1, 0.6, 0.8)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rounds", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--shards", type=int, default=4)
    args = ap.parse_args()

    print(f"{'region':>6} {'p':>5} {'q':>5} {'exact':>10} {'empirical':>10} {'z':>6}")
    for region, p, q in POINTS:
        build = build_region1_strategy if region == 1 else build_region2_strategy
        s = build(p, q)
        g = build_perturbed_and_game(p, q)
        exact = (1 + operator_bias(g, s)) / 2
        sim = simulate_rounds(g, s, args.rounds, seed=args.seed, shards=args.shards)
        z = (sim.win_rate - exact) / math.sqrt(exact * (1 - exact) / args.rounds)
        print(f"{region:>6} {p:5.2f} {q:5.2f} {exact:10.6f} {sim.win_rate:10.6f} {z:6.2f}")


if __name__ == "__main__":
    main()
