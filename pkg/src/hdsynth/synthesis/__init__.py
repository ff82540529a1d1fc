"""Decomposition of qudit-pair unitaries into CINC and local gates."""

from hdsynth.synthesis.primitives import (
    EBasisSolution,
    SynthesisError,
    e_basis,
    solve_e_basis,
    synth_controlled_diagonal,
    synth_controlled_unitary,
    synth_multiplexor,
    synth_ucr_x,
    synth_ucr_z,
)
from hdsynth.synthesis.recursive import (
    CsdStepResult,
    SynthesisReport,
    SynthOptions,
    csd_step,
    decompose_recursive,
    eliminate_commuting,
    lower_to_cinc,
    prune_zv,
    split_zv,
    synth_unitary,
    v_support,
)

__all__ = [
    "CsdStepResult",
    "EBasisSolution",
    "SynthOptions",
    "SynthesisError",
    "SynthesisReport",
    "csd_step",
    "decompose_recursive",
    "e_basis",
    "eliminate_commuting",
    "lower_to_cinc",
    "prune_zv",
    "solve_e_basis",
    "split_zv",
    "synth_controlled_diagonal",
    "synth_controlled_unitary",
    "synth_multiplexor",
    "synth_ucr_x",
    "synth_ucr_z",
    "synth_unitary",
    "v_support",
]
