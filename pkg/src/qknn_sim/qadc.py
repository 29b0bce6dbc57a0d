"""Analog-to-digital conversion of similarity values.

The chain has two halves. E^amp loads the train/test interference state so
that the similarity (fidelity or real inner product) sits in the amplitude
of an ancilla; E^dig runs phase estimation on the reflection operator,
converts the estimated phase to the similarity with a reversible arithmetic
permutation, and uncomputes every work register. Their composition maps
|j>|0> -> |j>|F_j> (or |j>|X_j> for the dot-product variant).

Digital encodings:
- fidelity: unsigned fixed point in [0, 1 - 2**-b]; F = 1 saturates to the
  all-ones string (order is preserved, which is all the comparator needs).
- dot product: offset binary round_b((X+1)/2), so one comparator works for
  both paths.
Rounding is to nearest, ties to even. The arithmetic permutation evaluates
on the folded phase representative min(t, 2**b - t), which makes the
theta <-> 1-theta branch invariance exact by construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .statevec import (
    Circuit,
    Gate,
    RegisterLayout,
    SimulationError,
    StateVector,
    basis_permutation,
    hadamard,
)
from .subroutines import (
    ReflectionOperator,
    StatePrepOracle,
    build_G,
    build_H_dot,
    build_U,
    make_V,
    make_W,
    qpe_circuit,
)

CIRCUIT_MAX_BITS = 8  # phase/fid register width cap at desk scale


@dataclass(frozen=True)
class PrecisionConfig:
    """Bit width of the phase and similarity registers; epsilon = 2**-b."""

    b: int

    def __post_init__(self):
        if not 2 <= self.b <= 30:
            raise SimulationError("precision bits must be in [2, 30]")

    @property
    def epsilon(self) -> float:
        return 2.0 ** (-self.b)

    def require_circuit_scale(self) -> None:
        if self.b > CIRCUIT_MAX_BITS:
            raise SimulationError(
                f"circuit-level registers support b <= {CIRCUIT_MAX_BITS}, got {self.b}")


@dataclass(frozen=True)
class QuantizedValue:
    """A b-bit fraction: value = bits / 2**b in [0, 1)."""

    bits: int
    b: int

    def __post_init__(self):
        if not 0 <= self.bits < 2 ** self.b:
            raise SimulationError("quantized bits out of range")

    @property
    def value(self) -> float:
        return self.bits / 2 ** self.b

    @classmethod
    def from_value(cls, x: float, b: int) -> "QuantizedValue":
        return cls(round_bits(x, b), b)


def round_bits(x: float, b: int) -> int:
    """Nearest b-bit fraction (ties to even), saturating into [0, 2**b - 1]."""
    t = int(np.round(x * 2 ** b))
    return min(max(t, 0), 2 ** b - 1)


def quantize_fidelity(F: float, b: int) -> int:
    return round_bits(min(max(F, 0.0), 1.0), b)


def quantize_dot(X: float, b: int) -> int:
    return round_bits((min(max(X, -1.0), 1.0) + 1.0) / 2.0, b)


def quantize_array(values: np.ndarray, b: int, measure: str = "fidelity") -> np.ndarray:
    """Vectorized digitization of a similarity table."""
    x = np.asarray(values, dtype=float)
    x = np.clip(x, 0.0, 1.0) if measure == "fidelity" else (np.clip(x, -1.0, 1.0) + 1.0) / 2.0
    return np.clip(np.round(x * 2 ** b), 0, 2 ** b - 1).astype(np.int64)


def _phase_to_similarity(t: int, b: int) -> float:
    """2*sin^2(pi*theta) - 1 evaluated on the folded phase representative."""
    folded = min(t, 2 ** b - t) if t else 0
    theta = folded / 2 ** b
    return 2.0 * math.sin(math.pi * theta) ** 2 - 1.0


def arithmetic_table(cfg: PrecisionConfig, mode: str = "fidelity") -> np.ndarray:
    """Digital output g(t) for each b-bit phase value t."""
    out = np.empty(2 ** cfg.b, dtype=np.int64)
    for t in range(2 ** cfg.b):
        v = _phase_to_similarity(t, cfg.b)
        if mode == "fidelity":
            out[t] = quantize_fidelity(v, cfg.b)
        elif mode == "dot":
            out[t] = quantize_dot(v, cfg.b)
        elif mode == "abs":
            out[t] = quantize_fidelity(math.sqrt(max(v, 0.0)), cfg.b)
        else:
            raise SimulationError(f"unknown arithmetic mode {mode!r}")
    return out


def arithmetic_map(cfg: PrecisionConfig, layout: RegisterLayout, mode: str = "fidelity",
                   phase: str = "phase", fid: str = "fid") -> Gate:
    """Reversible |t>|z> -> |t>|z XOR g(t)> permutation on (phase, fid).

    On a fresh fid register this writes the digitized similarity; the XOR
    completion extends the map to a bijection on every other input.
    """
    cfg.require_circuit_scale()
    table = arithmetic_table(cfg, mode)
    b = cfg.b
    if layout.size(phase) != b or layout.size(fid) != b:
        raise SimulationError("phase/fid register width does not match precision")
    size = 2 ** (2 * b)
    local = np.arange(size)
    t = local & (2 ** b - 1)
    z = local >> b
    perm = t | ((z ^ table[t]) << b)
    targets = layout.qubits(phase) + layout.qubits(fid)
    return basis_permutation(targets, perm, f"QA[{mode}]")


# --- the QADC operators ------------------------------------------------------


def _require_fresh(state: StateVector, registers) -> None:
    for reg in registers:
        if not state.register_is_zero(reg):
            raise SimulationError(f"register {reg!r} is not fresh")


def apply_E_amp(state: StateVector, layout: RegisterLayout, V: StatePrepOracle,
                W: StatePrepOracle, train: str = "train", test: str = "test",
                b: str = "B") -> StateVector:
    """|j>|0> -> |j>|Psi_j>: train-state load, test-state load, swap test."""
    _require_fresh(state, (train, test, b))
    state = state.apply_circuit(W.circuit)
    return state.apply_circuit(build_U(V, layout, train, test, b))


def apply_E_dig(state: StateVector, layout: RegisterLayout, G: ReflectionOperator,
                cfg: PrecisionConfig, phase: str = "phase", fid: str = "fid",
                arith_mode: str | None = None) -> StateVector:
    """|j>|Psi_j> -> |j>|F_j>: phase estimation, arithmetic, full uncompute."""
    _require_fresh(state, (phase, fid))
    qpe = qpe_circuit(G, layout.qubits(phase))
    state = state.apply_circuit(qpe)
    state = state.apply(arithmetic_map(cfg, layout, arith_mode or G.kind, phase, fid))
    state = state.apply_circuit(qpe.inverse())
    return state.apply_circuit(G.amp_circuit.inverse())


def fidelity_qadc_circuit(V: StatePrepOracle, W: StatePrepOracle, layout: RegisterLayout,
                          cfg: PrecisionConfig, index: str = "index", train: str = "train",
                          test: str = "test", b: str = "B", phase: str = "phase",
                          fid: str = "fid") -> Circuit:
    """The full F operator |j>|0> -> |j>|F_j> as a gate sequence."""
    cfg.require_circuit_scale()
    G = build_G(V, W, layout, index, train, test, b)
    qpe = qpe_circuit(G, layout.qubits(phase))
    circ = Circuit()
    circ.extend(G.amp_circuit)
    circ.extend(qpe)
    circ.append(arithmetic_map(cfg, layout, "fidelity", phase, fid))
    circ.extend(qpe.inverse())
    circ.extend(G.amp_circuit.inverse())
    return circ


def apply_F(state: StateVector, layout: RegisterLayout, V: StatePrepOracle,
            W: StatePrepOracle, cfg: PrecisionConfig, train: str = "train",
            test: str = "test", b: str = "B", phase: str = "phase",
            fid: str = "fid", arith_mode: str | None = None) -> StateVector:
    """F = E^dig E^amp on the fidelity path."""
    _require_fresh(state, (train, test, b, phase, fid))
    G = build_G(V, W, layout, "index", train, test, b)
    state = apply_E_amp(state, layout, V, W, train, test, b)
    return apply_E_dig(state, layout, G, cfg, phase, fid, arith_mode)


def apply_X_dot(state: StateVector, layout: RegisterLayout, V: StatePrepOracle,
                W: StatePrepOracle, cfg: PrecisionConfig, data: str = "data",
                b: str = "B", phase: str = "phase", fid: str = "fid") -> StateVector:
    """Dot-product analogue: Hadamard test plus phase estimation on H."""
    _require_fresh(state, (data, b, phase, fid))
    H = build_H_dot(V, W, layout, "index", data, b)
    state = state.apply_circuit(H.amp_circuit)
    qpe = qpe_circuit(H, layout.qubits(phase))
    state = state.apply_circuit(qpe)
    state = state.apply(arithmetic_map(cfg, layout, "dot", phase, fid))
    state = state.apply_circuit(qpe.inverse())
    return state.apply_circuit(H.amp_circuit.inverse())


# --- standalone abs-QADC ------------------------------------------------------


@dataclass(eq=False)
class QadcResult:
    state: StateVector
    layout: RegisterLayout
    branch_distributions: np.ndarray  # (d, 2**b) conditional fid distributions


def abs_qadc(prep_unitary: np.ndarray, cfg: PrecisionConfig) -> QadcResult:
    """Digitize |c_i| for the state prepared by ``prep_unitary``.

    Output approximates (1/sqrt(d)) sum_i |i>|r_i> with r_i the b-bit
    value nearest |c_i|; exact whenever the induced phases are dyadic.
    The train-register role is played by a basis copy of the index.
    """
    cfg.require_circuit_scale()
    prep_unitary = np.asarray(prep_unitary, dtype=complex)
    d = prep_unitary.shape[0]
    n = int(round(math.log2(d)))
    if d > 2 ** 10:
        raise SimulationError("abs-QADC limited to dimension 2**10")
    layout = RegisterLayout.from_sizes([
        ("index", n), ("train", n), ("test", n), ("B", 1),
        ("phase", cfg.b), ("fid", cfg.b),
    ])
    psi = prep_unitary[:, 0]
    V = make_V(psi, layout, register="test")
    copies = np.eye(d, dtype=complex)  # |j>|0> -> |j>|j>
    W = make_W(copies, layout)
    state = StateVector.zero_state(layout)
    for q in layout.qubits("index"):
        state = state.apply(hadamard(q))
    state = apply_F(state, layout, V, W, cfg, arith_mode="abs")
    # conditional distribution of fid given each index value
    probs = state.measure_probs(["index", "fid"]).reshape(2 ** cfg.b, d)
    norm = probs.sum(axis=0, keepdims=True)
    branch = (probs / np.where(norm > 0, norm, 1.0)).T
    return QadcResult(state, layout, branch)


def fid_distribution(state: StateVector, index_value: int,
                     index: str = "index", fid: str = "fid") -> np.ndarray:
    """Conditional distribution over fid outcomes given an index outcome."""
    probs = state.measure_probs([index, fid])
    layout = state.layout
    m = layout.size(index)
    arr = probs.reshape(-1, 2 ** m)[:, index_value]
    total = arr.sum()
    if total <= 0:
        raise SimulationError(f"index value {index_value} has zero probability")
    return arr / total
