"""How far the pooled half-sum total-step estimate sits from the exact mean.

With two nonzero components the estimate is exact. With more it is not, and
this prints the exact oracle mean next to the estimate for every state.

    python scripts/total_steps_gap.py --model uniform --M 3 --N 9
"""

import argparse

from bornchain import IntensityState, enumerate_states, make_model, predict_steps, solve_chain


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--model", choices=["uniform", "linear", "square"], default="uniform")
    parser.add_argument("--M", type=int, default=3)
    parser.add_argument("--N", type=int, default=9)
    args = parser.parse_args()

    if args.model == "square":
        model = make_model("custom", lambda a: a * a, N=args.N)
    else:
        model = make_model(args.model)
    space = enumerate_states(args.M, args.N)
    sol = solve_chain(model, space)
    print("state,exact_total,estimate,ratio,heuristic")
    for row, exact in zip(space.states.tolist(), sol.expected_total):
        pred = predict_steps(IntensityState(tuple(row)), model)
        ratio = pred.total / exact if exact else 1.0
        print(f"{':'.join(map(str, row))},{exact:.10g},{pred.total:.10g},{ratio:.6f},{int(pred.heuristic)}")


if __name__ == "__main__":
    main()
