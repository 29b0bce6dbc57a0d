"""Command-line entry point and experiment orchestration.

Subcommands: gen-data, classify, verify, bench, discriminate.
Config precedence is flags > config file > defaults; the config file is
plain ``key = value`` lines (same keys as the long flags, hyphens or
underscores), with ``#`` comments. All outputs are machine readable: JSON
lines for corpora and reports, CSV with a ``# qknn-sim v1`` header comment
for result tables. Exit codes: 0 ok, 1 validation error, 2 runtime error,
3 verification failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import datasets, kmax, oracle, qadc, qknn, subroutines
from .statevec import RegisterLayout, SimulationError, StateVector, pauli_x

CSV_HEADER = "# qknn-sim v1"

_DEFAULTS = {
    "scheme": "2q-sep-vs-ent",
    "M": "64",
    "n": 2,
    "k": 5,
    "b": 12,
    "mode": "classical",
    "seed": 0,
    "trials": 100,
    "budget_rounds": 30,
    "lam": 1.2,
    "out": None,
    "corpus": None,
    "per_class": 100,
    "split": 0.9,
    "inject_fault": None,
}


@dataclass
class RunConfig:
    subcommand: str
    scheme: str
    M: str  # single value or comma-separated sweep
    n: int
    k: int
    b: int
    mode: str
    seed: int
    trials: int
    budget_rounds: int
    lam: float
    out: str | None
    corpus: str | None
    per_class: int
    split: float
    inject_fault: str | None

    def m_values(self) -> list[int]:
        try:
            return [int(v) for v in str(self.M).split(",") if v.strip()]
        except ValueError as exc:
            raise SimulationError(f"bad --M value {self.M!r}") from exc

    def search_config(self, seed: int | None = None) -> kmax.SearchConfig:
        return kmax.SearchConfig(self.lam, self.budget_rounds,
                                 self.seed if seed is None else seed)


def parse_config_file(path: str) -> dict:
    values: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SimulationError(f"{path}:{lineno}: expected key = value")
            key, _, val = line.partition("=")
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _coerce(key: str, value):
    if value is None or key in ("scheme", "mode", "out", "corpus", "inject_fault", "M"):
        return value
    if key in ("lam", "split"):
        return float(value)
    return int(value)


def build_run_config(args: argparse.Namespace) -> RunConfig:
    file_values = parse_config_file(args.config) if args.config else {}
    merged = {}
    for f in fields(RunConfig):
        if f.name == "subcommand":
            continue
        flag_val = getattr(args, f.name, None)
        if flag_val is not None:
            merged[f.name] = flag_val
        elif f.name in file_values:
            merged[f.name] = _coerce(f.name, file_values[f.name])
        else:
            merged[f.name] = _DEFAULTS[f.name]
    return RunConfig(subcommand=args.subcommand, **merged)


def _write_lines(path: str | None, lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# --- subcommands -----------------------------------------------------------------


def cmd_gen_data(cfg: RunConfig) -> int:
    if cfg.scheme not in datasets.SCHEMES:
        raise SimulationError(f"unknown scheme {cfg.scheme!r}; choose from {datasets.SCHEMES}")
    corpus = datasets.gen_corpus(cfg.scheme, cfg.per_class, cfg.seed)
    out = cfg.out or f"corpus_{cfg.scheme}.jsonl"
    datasets.write_corpus(corpus, out)
    counts = {}
    for label in corpus.labels:
        counts[label] = counts.get(label, 0) + 1
    for label in datasets.CLASSES[cfg.scheme]:
        print(f"{label}: {counts.get(label, 0)}")
    print(f"wrote {len(corpus)} records to {out}")
    return 0


def split_corpus(corpus: datasets.LabeledStateCorpus, split: float, seed: int):
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(corpus))
    cut = int(round(len(corpus) * split))
    if cut < 1 or cut >= len(corpus):
        raise SimulationError("split leaves an empty train or test side")
    return order[:cut], order[cut:]


def cmd_classify(cfg: RunConfig) -> int:
    if cfg.corpus is None:
        raise SimulationError("classify needs --corpus FILE")
    corpus = datasets.read_corpus(cfg.corpus)
    train_idx, test_idx = split_corpus(corpus, cfg.split, cfg.seed)
    train = qknn.TrainSet(corpus.states[train_idx],
                          [corpus.labels[i] for i in train_idx])
    if cfg.k > train.M:
        raise SimulationError("k exceeds the train-set size")
    if cfg.mode not in ("classical", "oracle-abstract", "circuit-exact"):
        raise SimulationError(f"unknown mode {cfg.mode!r}")
    rows = [CSV_HEADER, "test_id,true_label,predicted,queries,mode"]
    hits = 0
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(test_idx))
    for pos, (idx, seq) in enumerate(zip(test_idx, seeds)):
        state = corpus.states[idx]
        truth = corpus.labels[idx]
        if cfg.mode == "classical":
            result = qknn.classical_knn(state, train, cfg.k, b=cfg.b)
        else:
            search = cfg.search_config(int(seq.generate_state(1)[0] % 2 ** 31))
            result = qknn.qknn_classify(state, train, cfg.k, qadc.PrecisionConfig(cfg.b),
                                        search, mode=cfg.mode)
        hits += result.label == truth
        rows.append(f"{idx},{truth},{result.label},{result.oracle_queries},{cfg.mode}")
    accuracy = hits / len(test_idx)
    _write_lines(cfg.out, rows + [f"# accuracy={accuracy:.6f}"])
    print(f"accuracy: {accuracy:.4f} over {len(test_idx)} test states ({cfg.mode})")
    return 0


def cmd_bench(cfg: RunConfig) -> int:
    m_values = cfg.m_values()
    traces: list = []
    rows = kmax.scaling_experiment(m_values, cfg.k, cfg.trials, cfg.search_config(),
                                   trace_sink=traces)
    lines = [CSV_HEADER, "M,k,trials,mean_queries,std_queries,mean_queries_to_solution,success_rate"]
    for r in rows:
        lines.append(f"{r.M},{r.k},{r.trials},{r.mean_queries:.4f},{r.std_queries:.4f},"
                     f"{r.mean_queries_to_solution:.4f},{r.success_rate:.4f}")
    if len(rows) >= 2:
        slope_total = kmax.fit_loglog_slope([r.M for r in rows],
                                            [r.mean_queries for r in rows])
        slope_sol = kmax.fit_loglog_slope([r.M for r in rows],
                                          [r.mean_queries_to_solution for r in rows])
        lines.append(f"# fitted_slope_total={slope_total:.4f}")
        lines.append(f"# fitted_slope_to_solution={slope_sol:.4f}")
        print(f"fitted slope (queries to solution): {slope_sol:.4f}")
    _write_lines(cfg.out, lines)
    if cfg.out:
        _write_lines(cfg.out + ".traces.jsonl", traces)
    return 0


def cmd_discriminate(cfg: RunConfig) -> int:
    lines = [CSV_HEADER, "M,n,trials,success_rate,mean_queries,std_queries"]
    means = []
    m_values = cfg.m_values()
    for M in m_values:
        root = np.random.SeedSequence((cfg.seed, M))
        hits, queries = 0, []
        for seq in root.spawn(cfg.trials):
            rng = np.random.default_rng(seq)
            inst_seed = int(rng.integers(0, 2 ** 31))
            states, chosen = datasets.gen_discrimination_instance(M, cfg.n, inst_seed)
            train = qknn.TrainSet(states, list(range(M)))
            search = kmax.SearchConfig(cfg.lam, cfg.budget_rounds,
                                       int(rng.integers(0, 2 ** 31)))
            found, res = qknn.discriminate(states[chosen], train, search)
            hits += found == chosen
            queries.append(res.queries_to_solution
                           if res.queries_to_solution is not None else res.oracle_queries)
        rate = hits / cfg.trials
        means.append(float(np.mean(queries)))
        lines.append(f"{M},{cfg.n},{cfg.trials},{rate:.4f},{np.mean(queries):.4f},"
                     f"{np.std(queries):.4f}")
        print(f"M={M}: success {rate:.3f}, mean queries {np.mean(queries):.1f}")
    if len(m_values) >= 2:
        slope = kmax.fit_loglog_slope(m_values, means)
        lines.append(f"# fitted_slope={slope:.4f}")
        print(f"fitted slope: {slope:.4f}")
    _write_lines(cfg.out, lines)
    return 0


# --- verification suites ------------------------------------------------------------


def _check(name: str, deviation: float, tolerance: float) -> dict:
    return {"name": name, "max_deviation": float(deviation),
            "tolerance": tolerance, "pass": bool(deviation <= tolerance)}


def _suite_swap_test(rng: np.random.Generator, pairs: int) -> dict:
    layout = RegisterLayout.from_sizes([("train", 2), ("test", 2), ("B", 1)])
    worst = 0.0
    for _ in range(pairs):
        psi, phi = datasets.haar_random_state(2, rng), datasets.haar_random_state(2, rng)
        state = StateVector.zero_state(layout)
        state = state.apply_circuit(subroutines.make_V(phi, layout, register="train").circuit)
        state = state.apply_circuit(subroutines.make_V(psi, layout, register="test").circuit)
        out = subroutines.swap_test_apply(state, layout)
        F = abs(np.vdot(psi, phi)) ** 2
        worst = max(worst, abs(out.measure_probs("B")[0] - (1 + F) / 2))
    return _check("swap_test_probability_law", worst, 1e-10)


def _suite_hadamard_test(rng: np.random.Generator, pairs: int) -> dict:
    layout = RegisterLayout.from_sizes([("index", 1), ("data", 2), ("B", 1)])
    worst = 0.0
    for _ in range(pairs):
        v = datasets.haar_random_state(2, rng).real
        v /= np.linalg.norm(v)
        us = np.stack([datasets.haar_random_state(2, rng).real for _ in range(2)])
        us /= np.linalg.norm(us, axis=1, keepdims=True)
        V = subroutines.make_V(v.astype(complex), layout, register="data")
        W = subroutines.make_W(us.astype(complex), layout, index="index", train="data")
        for j in range(2):
            state = StateVector.zero_state(layout)
            if j:
                state = state.apply(pauli_x(0))
            out = subroutines.hadamard_test_apply(state, layout, V, W)
            want = (1 + float(v @ us[j])) / 2
            got = float(out.collapse("index", j).measure_probs("B")[0])
            worst = max(worst, abs(got - want))
    return _check("hadamard_test_probability_law", worst, 1e-10)


def _suite_eigenstructure(rng: np.random.Generator, instances: int) -> dict:
    worst = 0.0
    for _ in range(instances):
        psi = datasets.haar_random_state(1, rng)
        phi = datasets.haar_random_state(1, rng)
        rep = subroutines.verify_eigendecomposition(psi, phi)
        if not rep.degenerate:
            worst = max(worst, rep.eigenphase_error, rep.decomposition_error)
    return _check("reflection_eigenstructure", worst, 1e-9)


def _suite_comparators(width: int, inject_fault: str | None) -> dict:
    worst = 0
    chain = tuple(range(2 * width + 1, 3 * width))
    circ = oracle.build_J(tuple(range(width)), tuple(range(width, 2 * width)),
                          2 * width, chain)
    if inject_fault == "comparator":
        circ.append(pauli_x(2 * width))  # negated comparator fixture
    nq = 3 * width
    for a in range(2 ** width):
        for b_val in range(2 ** width):
            x = a | (b_val << width)
            y = oracle.classical_action(circ, nq, x)
            got = (y >> (2 * width)) & 1
            ancilla_dirty = (y >> (2 * width + 1)) != 0 or (y & (2 ** (2 * width) - 1)) != x
            worst = max(worst, abs(got - (1 if a > b_val else 0)) + ancilla_dirty)
    return _check(f"comparator_J_exhaustive_b{width}", worst, 0)


def _suite_membership(m: int) -> dict:
    import itertools
    worst = 0
    iq, pq = tuple(range(m)), tuple(range(m, 2 * m))
    chain, tgt = tuple(range(2 * m, 3 * m)), 3 * m
    for size in (1, 2, 3):
        for A in itertools.combinations(range(2 ** m), size):
            circ = oracle.Circuit()
            for i in A:
                circ.extend(oracle.build_D(i, iq, pq, chain, tgt))
            for j in range(2 ** m):
                y = oracle.classical_action(circ, 3 * m + 1, j)
                chi = 1 if j in A else 0
                worst = max(worst, abs(((y >> (3 * m)) & 1) - chi)
                            + ((y & (2 ** (3 * m) - 1)) != j))
    return _check(f"membership_D_cascade_m{m}", worst, 0)


def _suite_oracle_equivalence() -> dict:
    cfg = qadc.PrecisionConfig(2)
    layout = oracle.oracle_layout(1, 1, 2)
    psi = np.array([1, 0], dtype=complex)
    phis = np.array([[1, 0], [0, 1]], dtype=complex)
    V = subroutines.make_V(psi, layout, register="test")
    W = subroutines.make_W(phis, layout)
    table = oracle.quantize_table(np.array([1.0, 0.0]), 2)
    worst = 0.0
    for y, A in [(0, frozenset({0})), (1, frozenset({1})), (1, frozenset({0, 1}))]:
        oc = oracle.assemble_O_yA(V, W, layout, cfg, y, A)
        handle = oracle.oracle_abstract(table, y, A)
        for j in range(2):
            dist = oc.q3_distribution(j)
            expected = int(handle.f(j))
            worst = max(worst, abs(dist[expected] - 1.0))
    return _check("oracle_circuit_vs_abstract", worst, 1e-9)


def _suite_folding() -> dict:
    worst = 0
    for b in range(2, 9):
        table = qadc.arithmetic_table(qadc.PrecisionConfig(b))
        for t in range(2 ** b):
            worst = max(worst, abs(int(table[t]) - int(table[(2 ** b - t) % 2 ** b])))
    return _check("arithmetic_theta_folding", worst, 0)


def cmd_verify(cfg: RunConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    checks = [
        _suite_swap_test(rng, 50),
        _suite_hadamard_test(rng, 25),
        _suite_eigenstructure(rng, 25),
        _suite_comparators(3, cfg.inject_fault),
        _suite_membership(2),
        _suite_oracle_equivalence(),
        _suite_folding(),
    ]
    report = {"invariants": checks, "all_pass": all(c["pass"] for c in checks)}
    text = json.dumps(report, indent=2)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0 if report["all_pass"] else 3


# --- entry point ---------------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qknn-sim",
                                     description="fidelity-based quantum kNN simulator")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in ("gen-data", "classify", "verify", "bench", "discriminate"):
        p = sub.add_parser(name)
        p.add_argument("--scheme", choices=datasets.SCHEMES)
        p.add_argument("--M", help="table size, or comma-separated sweep")
        p.add_argument("--n", type=int, help="qubits per state")
        p.add_argument("--k", type=int, help="number of neighbors")
        p.add_argument("--b", type=int, help="similarity register bits")
        p.add_argument("--mode", choices=("classical", "oracle-abstract", "circuit-exact"))
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--budget-rounds", dest="budget_rounds", type=int)
        p.add_argument("--lambda", dest="lam", type=float)
        p.add_argument("--out")
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--corpus", help="corpus JSONL path (classify)")
        p.add_argument("--per-class", dest="per_class", type=int)
        p.add_argument("--split", type=float)
        p.add_argument("--inject-fault", dest="inject_fault",
                       choices=("comparator",), help=argparse.SUPPRESS)
    return parser


_COMMANDS = {
    "gen-data": cmd_gen_data,
    "classify": cmd_classify,
    "verify": cmd_verify,
    "bench": cmd_bench,
    "discriminate": cmd_discriminate,
}


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = build_run_config(args)
        return _COMMANDS[args.subcommand](cfg)
    except (SimulationError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
