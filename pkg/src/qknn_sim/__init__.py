"""Simulator and experiment harness for fidelity-based quantum k-nearest
neighbors: a dense state-vector engine, the interference-test subroutines
and reflection operators, amplitude-to-digital conversion, the threshold
search oracle, and the k-maxima classifier loop."""

from .kmax import KMaxResult, SearchConfig, grover_search_unknown, k_maxima
from .qadc import PrecisionConfig
from .qknn import TrainSet, classical_knn, discriminate, qknn_classify
from .statevec import Circuit, Gate, RegisterLayout, StateVector

__all__ = [
    "Circuit",
    "Gate",
    "KMaxResult",
    "PrecisionConfig",
    "RegisterLayout",
    "SearchConfig",
    "StateVector",
    "TrainSet",
    "classical_knn",
    "discriminate",
    "grover_search_unknown",
    "k_maxima",
    "qknn_classify",
]
