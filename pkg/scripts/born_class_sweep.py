"""Exact absorption probabilities across a family of weight rules.

For w(a) = a**power over a range of powers, solve the chain for every state
and report the worst deviation from a_i / N. Prints a CSV to stdout.

    python scripts/born_class_sweep.py --M 3 --N 12 --powers 0 0.5 1 2 4
"""

import argparse
import sys

import numpy as np

from bornchain import enumerate_states, make_model, solve_chain


def rule(power):
    if power == 0:
        return make_model("uniform")
    if power == 1:
        return make_model("linear")
    return None


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--M", type=int, default=3)
    parser.add_argument("--N", type=int, default=12)
    parser.add_argument("--powers", type=float, nargs="+", default=[0, 0.5, 1, 2, 4])
    args = parser.parse_args()

    space = enumerate_states(args.M, args.N)
    print("power,states,max_born_deviation,max_expected_total")
    for power in args.powers:
        model = rule(power) or make_model("custom", lambda a: float(a) ** power, N=args.N)
        sol = solve_chain(model, space)
        dev = np.max(np.abs(sol.absorb - space.states / args.N))
        print(f"{power:g},{len(space)},{dev:.3e},{sol.expected_total.max():.6g}")
    sys.stdout.flush()


if __name__ == "__main__":
    main()
