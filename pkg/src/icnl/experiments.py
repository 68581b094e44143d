"""Builders for the canonical interference circuits and the modular
superposition synthesizer.

Each builder also exports its circuit as canonical DSL text so the golden
files double as parser fixtures. The superposition synthesizer solves the
unitary recursion U1|HH> = phi_1, U2|HH> = U1^-1 phi_2, ... and realizes
weights by repeating the corresponding source.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import GateParameterError
from .gates import (
    Circuit,
    align,
    bs,
    hwp,
    nl,
    nl1p,
    object_channel,
    phase,
    simulate,
    unitary,
    unitary2,
)
from .linalg import completion_unitary
from .perturb import KetState, make_state

FRUSTRATED_PATHS = ("s1", "i1", "s2", "i2")
OBJECT_PATHS = ("s1", "i1", "s2", "i2", "w")
SINGLE_PUMP_PATHS = ("p1", "s1", "i1", "p2", "s2", "i2")


def build_frustrated(phi: float) -> Circuit:
    """Two coherently pumped sources with both output paths aligned.

    The pair amplitude picks up ``1 + exp(-i*phi)``, so the detection rate
    fringes with the inter-source phase and vanishes at ``phi = pi``.
    """
    return Circuit(
        FRUSTRATED_PATHS,
        (
            nl("s1", "i1"),
            phase("i1", phi),
            align("s1", "s2"),
            align("i1", "i2"),
            nl("s2", "i2"),
        ),
    )


def build_bell() -> Circuit:
    """Frustrated layout with half-wave plates instead of the phase.

    The rotated first-pass pair and the freshly created second pair add up
    to ``|HH> + |VV>`` on (s2, i2): a maximally entangled polarization
    state, heralded with probability of order |kappa|^2.
    """
    return Circuit(
        FRUSTRATED_PATHS,
        (
            nl("s1", "i1"),
            hwp("s1"),
            hwp("i1"),
            align("s1", "s2"),
            align("i1", "i2"),
            nl("s2", "i2"),
        ),
    )


def build_object_id(t: float, gamma: float, with_bs: bool = False) -> Circuit:
    """Identification of a point-like object with undetected photons.

    The first idler probes the object, its path is aligned into the second
    source, and only the two signal photons are kept. ``with_bs`` appends
    the recombining beam splitter in front of the signal detectors.
    """
    ops = (
        nl("s1", "i1"),
        object_channel("i1", "w", t, gamma),
        align("i1", "i2"),
        nl("s2", "i2"),
    )
    if with_bs:
        ops = ops + (bs("s1", "s2"),)
    return Circuit(OBJECT_PATHS, ops)


def single_pump_initial(paths: Sequence[str] = SINGLE_PUMP_PATHS) -> KetState:
    """One pump photon shared coherently between the two sources
    (unnormalized ``|H00>|000> + |000>|H00>``)."""
    paths = tuple(paths)
    return make_state(paths, {"H00000": 1.0, "000H00": 1.0})


def build_frustrated_single_pump(phi: float, phase_on: str = "idler") -> Circuit:
    """Frustrated generation driven by a single pump photon.

    ``phase_on`` chooses whether the phase shifter sits on the idler or the
    signal arm; the cancellation at ``phi = pi`` is the same either way.
    """
    if phase_on not in ("idler", "signal"):
        raise GateParameterError(f"phase_on must be 'idler' or 'signal', got {phase_on!r}")
    shifted = "i1" if phase_on == "idler" else "s1"
    return Circuit(
        SINGLE_PUMP_PATHS,
        (
            nl1p("p1", "s1", "i1"),
            phase(shifted, phi),
            align("s1", "s2"),
            align("i1", "i2"),
            nl1p("p2", "s2", "i2"),
        ),
    )


# ---------------------------------------------------------------------------
# Modular superposition of prescribed states


@dataclass(frozen=True)
class SuperpositionSpec:
    """Targets to superpose, with positive integer weights.

    Two-photon mode: unit 4-vectors over (HH, HV, VH, VV) realized with
    two-path unitaries. Single-photon-marginal mode: unit 2-vectors over
    (H, V) realized with signal-only unitaries, the idler photon being
    discarded.
    """

    targets: tuple[tuple[complex, ...], ...]
    weights: tuple[int, ...] = ()
    mode: str = "two-photon"

    def __post_init__(self):
        if self.mode not in ("two-photon", "single-photon-marginal"):
            raise GateParameterError(f"unknown superposition mode {self.mode!r}")
        if not self.targets:
            raise GateParameterError("at least one target state is required")
        if not self.weights:
            object.__setattr__(self, "weights", (1,) * len(self.targets))
        if len(self.weights) != len(self.targets):
            raise GateParameterError("one weight per target is required")
        if any(w < 1 or int(w) != w for w in self.weights):
            raise GateParameterError(f"weights must be positive integers, got {self.weights}")
        dim = 4 if self.mode == "two-photon" else 2
        frozen = []
        for t in self.targets:
            vec = np.asarray(t, dtype=complex)
            if vec.shape != (dim,):
                raise GateParameterError(
                    f"target has dimension {vec.shape}, mode {self.mode!r} expects {dim}"
                )
            if abs(np.linalg.norm(vec) - 1.0) > 1e-10:
                raise GateParameterError("target states must be unit norm")
            frozen.append(tuple(complex(x) for x in vec))
        object.__setattr__(self, "targets", tuple(frozen))

    @property
    def dim(self) -> int:
        return 4 if self.mode == "two-photon" else 2


def solve_unitaries(spec: SuperpositionSpec) -> list[np.ndarray]:
    """Unitaries U_i with U_1 ... U_i |first-basis-ket> = target_i.

    Each U_i maps the first basis ket onto the residual target (all earlier
    unitaries undone) and is completed deterministically by a Householder
    reflection, which pins the otherwise free gauge.
    """
    acc_inverse = np.eye(spec.dim, dtype=complex)
    out = []
    for target in spec.targets:
        residual = acc_inverse @ np.asarray(target, dtype=complex)
        u = completion_unitary(residual)
        out.append(u)
        acc_inverse = u.conj().T @ acc_inverse
    return out


def build_superposition(spec: SuperpositionSpec, skip_nl: int | None = None) -> Circuit:
    """Alternating source/unitary chain whose pair sector is the weighted
    superposition ``sum_i k_i * target_i`` (unnormalized).

    Weight ``k_i`` repeats the i-th source ``k_i`` times in a row;
    ``skip_nl`` (1-based) drops one copy of a source, which removes exactly
    one ``target_i`` from the output.
    """
    n = len(spec.targets)
    if skip_nl is not None and not 1 <= skip_nl <= n:
        raise GateParameterError(f"skip_nl must be in 1..{n}, got {skip_nl}")
    unitaries = solve_unitaries(spec)
    ops = []
    for m in range(n, 0, -1):
        repeats = spec.weights[m - 1] - (1 if skip_nl == m else 0)
        ops.extend(nl("s", "i") for _ in range(repeats))
        if spec.mode == "two-photon":
            ops.append(unitary2("s", "i", unitaries[m - 1]))
        else:
            ops.append(unitary("s", unitaries[m - 1]))
    return Circuit(("s", "i"), tuple(ops))


def superposition_output(spec: SuperpositionSpec, skip_nl: int | None = None) -> np.ndarray:
    """Run the synthesized circuit and return the pair-sector vector.

    Two-photon mode: 4-vector over (HH, HV, VH, VV) on (s, i).
    Single-photon-marginal mode: 2-vector over (H, V) on the signal (the
    idler photon is always H and factors out).
    """
    final = simulate(build_superposition(spec, skip_nl=skip_nl))
    kappa = final.kappa_amplitudes()
    out = np.zeros(spec.dim, dtype=complex)
    if spec.mode == "two-photon":
        order = ("HH", "HV", "VH", "VV")
        for occ, amp in kappa.items():
            out[order.index(occ)] = amp
    else:
        for occ, amp in kappa.items():
            out["HV".index(occ[0])] += amp
    return out


# ---------------------------------------------------------------------------
# Canonical DSL exports (golden files; see the dsl module for the grammar)

FRUSTRATED_ICL = """\
paths s1 i1 s2 i2
param PHI = pi
nl s1 i1
phase i1 PHI
align s1 s2
align i1 i2
nl s2 i2
measure s2 i2
sweep PHI 0 2 * pi 65
"""

BELL_ICL = """\
paths s1 i1 s2 i2
nl s1 i1
hwp s1
hwp i1
align s1 s2
align i1 i2
nl s2 i2
trace_keep s2 i2
"""

OBJECT_ID_ICL = """\
paths s1 i1 s2 i2 w
param T = 0.7
param GAMMA = 0
nl s1 i1
object i1 w T GAMMA
align i1 i2
nl s2 i2
trace_keep s1 s2
"""

FRUSTRATED_SINGLE_PUMP_ICL = """\
paths p1 s1 i1 p2 s2 i2
param PHI = pi
init |H00000> + |000H00>
nl1p p1 s1 i1
phase i1 PHI
align s1 s2
align i1 i2
nl1p p2 s2 i2
"""


def golden_sources() -> dict[str, str]:
    """The four canonical circuit files keyed by file name."""
    return {
        "frustrated.icl": FRUSTRATED_ICL,
        "bell.icl": BELL_ICL,
        "object_id.icl": OBJECT_ID_ICL,
        "frustrated_single_pump.icl": FRUSTRATED_SINGLE_PUMP_ICL,
    }
