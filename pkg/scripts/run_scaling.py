#!/usr/bin/env python3
"""Query-count scaling of the k-maxima search over random tables.

Sweeps the table size at fixed k and the neighbor count at fixed M=256,
printing mean oracle queries (total, and up to the first moment the top-k
set is assembled) with fitted log-log slopes.
"""
import argparse
import math
import sys

sys.path.insert(0, "src")

from qknn_sim import kmax  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--M", default="16,32,64,128,256,512,1024")
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=606)
    args = ap.parse_args()

    m_values = [int(v) for v in args.M.split(",")]
    rows = kmax.scaling_experiment(m_values, args.k, args.trials,
                                   kmax.SearchConfig(seed=args.seed))
    print(f"{'M':>6s} {'total':>10s} {'to-solution':>12s} {'exact':>6s}")
    for r in rows:
        print(f"{r.M:6d} {r.mean_queries:10.1f} {r.mean_queries_to_solution:12.1f} "
              f"{r.success_rate:6.2f}")
    if len(rows) >= 2:
        slope_sol = kmax.fit_loglog_slope(m_values,
                                          [r.mean_queries_to_solution for r in rows])
        slope_tot = kmax.fit_loglog_slope(m_values, [r.mean_queries for r in rows])
        print(f"slope: to-solution {slope_sol:.3f}, total {slope_tot:.3f}")

    print("\nsqrt(k) trend at M=256:")
    k_values = [1, 2, 4, 8]
    means = []
    for k in k_values:
        row = kmax.scaling_experiment([256], k, args.trials,
                                      kmax.SearchConfig(seed=args.seed + 101))[0]
        means.append(row.mean_queries_to_solution)
        print(f"  k={k}: {row.mean_queries_to_solution:.1f}")
    coeff = sum(q * math.sqrt(k) for q, k in zip(means, k_values)) / sum(k_values)
    rel = max(abs(q - coeff * math.sqrt(k)) / (coeff * math.sqrt(k))
              for q, k in zip(means, k_values))
    print(f"  max relative deviation from c*sqrt(k): {rel:.3f}")


if __name__ == "__main__":
    main()
