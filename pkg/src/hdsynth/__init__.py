"""Exact synthesis of unitaries on a qudit pair H_n (x) H_m with CINC and local gates."""

from hdsynth.circuit import Circuit, Dims, count_gates, gate_matrix, simulate
from hdsynth.counting import cinc_upper_bound, partition_tree, predict_structure
from hdsynth.numerics import haar_random_unitary
from hdsynth.synthesis import SynthOptions, synth_unitary

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "Dims",
    "SynthOptions",
    "cinc_upper_bound",
    "count_gates",
    "gate_matrix",
    "haar_random_unitary",
    "partition_tree",
    "predict_structure",
    "simulate",
    "synth_unitary",
]
