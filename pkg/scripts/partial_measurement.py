"""Truncated evolution: how the distribution of a_1 spreads with k.

Runs ``trials`` truncated trials for each k and prints the mean and spread
of the first intensity plus the fraction of trials already pure.

    python scripts/partial_measurement.py --a 10 10 --model linear --k 0 10 50 200 1000
"""

import argparse

import numpy as np

from bornchain import IntensityState, make_model, simulate_trials


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--a", type=int, nargs="+", default=[10, 10])
    parser.add_argument("--model", choices=["uniform", "linear"], default="linear")
    parser.add_argument("--k", type=int, nargs="+", default=[0, 10, 50, 200, 1000])
    parser.add_argument("--trials", type=int, default=20_000)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    state = IntensityState(tuple(args.a))
    model = make_model(args.model)
    print("k,mean_a1,sd_a1,pure_fraction")
    for k in args.k:
        recs = simulate_trials(state, model, args.trials, args.seed, mode="partial", k=k)
        a1 = recs.final_states[:, 0]
        pure = np.mean(recs.final_states.max(axis=1) == state.N)
        print(f"{k},{a1.mean():.4f},{a1.std(ddof=1):.4f},{pure:.4f}")


if __name__ == "__main__":
    main()
