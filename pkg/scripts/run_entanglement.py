#!/usr/bin/env python3
"""Entanglement-classification experiment across all schemes and both modes.

Generates a fresh corpus per scheme and seed, runs the classical baseline
and the quantum search path on a 90/10 split, and prints a table of mean
accuracies plus the classical/quantum prediction agreement rate.
"""
import argparse
import sys

import numpy as np

sys.path.insert(0, "src")

from qknn_sim import datasets, kmax, qadc, qknn  # noqa: E402


def run_scheme(scheme, per_class, k, b, seeds, quantum=True):
    acc_c, acc_q, agree, points = [], [], 0, 0
    for seed in seeds:
        corpus = datasets.gen_corpus(scheme, per_class, seed=1000 + seed)
        rng = np.random.default_rng(seed)
        order = rng.permutation(len(corpus))
        cut = int(round(len(corpus) * 0.9))
        train = qknn.TrainSet(corpus.states[order[:cut]],
                              [corpus.labels[i] for i in order[:cut]])
        hits_c = hits_q = 0
        test_idx = order[cut:]
        seqs = np.random.SeedSequence(seed).spawn(len(test_idx))
        for idx, seq in zip(test_idx, seqs):
            state, truth = corpus.states[idx], corpus.labels[idx]
            c = qknn.classical_knn(state, train, k, b=b)
            hits_c += c.label == truth
            if quantum:
                q = qknn.qknn_classify(
                    state, train, k, qadc.PrecisionConfig(b),
                    kmax.SearchConfig(seed=int(seq.generate_state(1)[0] % 2 ** 31)))
                hits_q += q.label == truth
                agree += q.label == c.label
                points += 1
        acc_c.append(hits_c / len(test_idx))
        if quantum:
            acc_q.append(hits_q / len(test_idx))
    return (float(np.mean(acc_c)),
            float(np.mean(acc_q)) if quantum else None,
            agree / points if points else None)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--per-class", type=int, default=1000)
    ap.add_argument("--k", type=int, default=5)
    ap.add_argument("--b", type=int, default=12)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--classical-only", action="store_true")
    args = ap.parse_args()

    print(f"{'scheme':20s} {'classical':>10s} {'quantum':>10s} {'agreement':>10s}")
    for scheme in datasets.SCHEMES:
        c, q, a = run_scheme(scheme, args.per_class, args.k, args.b,
                             range(args.seeds), quantum=not args.classical_only)
        q_str = f"{q:.4f}" if q is not None else "-"
        a_str = f"{a:.4f}" if a is not None else "-"
        print(f"{scheme:20s} {c:10.4f} {q_str:>10s} {a_str:>10s}")


if __name__ == "__main__":
    main()
