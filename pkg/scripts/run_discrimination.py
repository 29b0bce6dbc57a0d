#!/usr/bin/env python3
"""State-discrimination experiment: identify which of M known states a
promised test state is, counting search queries across a sweep of M."""
import argparse
import sys

import numpy as np

sys.path.insert(0, "src")

from qknn_sim import datasets, kmax, qknn  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--M", default="16,64,256")
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=979)
    args = ap.parse_args()

    m_values = [int(v) for v in args.M.split(",")]
    means = []
    for M in m_values:
        root = np.random.SeedSequence((args.seed, M))
        hits, queries = 0, []
        for seq in root.spawn(args.trials):
            rng = np.random.default_rng(seq)
            states, chosen = datasets.gen_discrimination_instance(
                M, args.n, int(rng.integers(0, 2 ** 31)))
            train = qknn.TrainSet(states, list(range(M)))
            found, res = qknn.discriminate(
                states[chosen], train,
                kmax.SearchConfig(seed=int(rng.integers(0, 2 ** 31))))
            hits += found == chosen
            queries.append(res.queries_to_solution
                           if res.queries_to_solution is not None
                           else res.oracle_queries)
        means.append(float(np.mean(queries)))
        print(f"M={M:4d}: correct {hits}/{args.trials}, "
              f"mean queries {np.mean(queries):.1f} +- {np.std(queries):.1f}")
    if len(m_values) >= 2:
        print(f"query slope vs M: {kmax.fit_loglog_slope(m_values, means):.3f}")


if __name__ == "__main__":
    main()
