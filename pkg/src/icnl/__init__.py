"""First-order simulator for photon-pair interference circuits.

Sources create signal-idler pairs at first order in the pump-scaled
coupling; path alignment, polarization optics and post-selection turn that
into interference experiments. The package provides the exact truncated
amplitude algebra, an effective superposer picture, a brute-force Fock
oracle, builders for the canonical experiments, a circuit-description
language, a command-line front end and an HTTP service.
"""

from .analysis import (
    ConditionalDensity,
    conditional_density,
    fidelity,
    occupancy_probability,
    pair_probability_coefficient,
    sweep,
)
from .effective import (
    EffState,
    eff_apply_nl,
    eff_apply_unitary,
    eff_nonlinearity_witness,
    eff_vacuum,
    effective_to_unitary,
    translation_matrix,
    unitary_to_effective,
)
from .gates import Circuit, GateApplication, simulate
from .perturb import KetState, PerturbAmp, amp_mul, make_state, phase_factor, vacuum_state

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "ConditionalDensity",
    "EffState",
    "GateApplication",
    "KetState",
    "PerturbAmp",
    "amp_mul",
    "conditional_density",
    "eff_apply_nl",
    "eff_apply_unitary",
    "eff_nonlinearity_witness",
    "eff_vacuum",
    "effective_to_unitary",
    "fidelity",
    "make_state",
    "occupancy_probability",
    "pair_probability_coefficient",
    "phase_factor",
    "simulate",
    "sweep",
    "translation_matrix",
    "unitary_to_effective",
    "vacuum_state",
    "__version__",
]
