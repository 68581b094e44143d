"""Effective nonunitary picture for coherently pumped circuits.

Dropping the undetectable vacuum turns a source into a *superposer*: it
adds a fixed ``|HH>`` onto whatever two-photon polarization state is
already there. That map is nonunitary and, viewed on bare polarization
vectors, nonlinear; carrying an explicit auxiliary coordinate restores a
linear matrix form (a 5x5 translation matrix on a single path pair).

Multi-path states live in a direct sum of 4-dimensional polarization
blocks, one block per (signal, idler) path pair; a block only materializes
once a gate touches it. Conversions to and from the full first-order state
are exact, including bit-level agreement of simulating a circuit in either
picture.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import BlockStructureError, PathError
from .linalg import matvec, require_unitary
from .perturb import KetState, PerturbAmp, VACUUM, make_state

POL_BASIS = ("HH", "HV", "VH", "VV")

Block = tuple[complex, complex, complex, complex]
_ZERO_BLOCK: Block = (0j, 0j, 0j, 0j)


@dataclass(frozen=True)
class EffState:
    """Auxiliary scalar plus sparse (signal, idler) polarization blocks."""

    signals: tuple[str, ...]
    idlers: tuple[str, ...]
    aux: complex = 1.0 + 0j
    blocks: Mapping[tuple[str, str], Block] = field(default_factory=dict)

    def __post_init__(self):
        if set(self.signals) & set(self.idlers):
            raise PathError("signal and idler registries must be disjoint")
        for ns, ni in self.blocks:
            self._check_pair(ns, ni)

    def _check_pair(self, ns: str, ni: str) -> None:
        if ns not in self.signals:
            raise PathError(f"{ns!r} is not a registered signal path")
        if ni not in self.idlers:
            raise PathError(f"{ni!r} is not a registered idler path")

    def block(self, ns: str, ni: str) -> Block:
        self._check_pair(ns, ni)
        return self.blocks.get((ns, ni), _ZERO_BLOCK)

    def with_blocks(self, blocks: Mapping[tuple[str, str], Block]) -> "EffState":
        pruned = {key: vec for key, vec in blocks.items() if any(x != 0 for x in vec)}
        return EffState(self.signals, self.idlers, self.aux, pruned)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EffState):
            return NotImplemented
        if (self.signals, self.idlers, self.aux) != (other.signals, other.idlers, other.aux):
            return False
        keys = set(self.blocks) | set(other.blocks)
        return all(self.block(*k) == other.block(*k) for k in keys)


def eff_vacuum(signals: Iterable[str], idlers: Iterable[str]) -> EffState:
    """Effective vacuum: auxiliary entry 1, every block zero."""
    return EffState(tuple(signals), tuple(idlers))


def eff_apply_nl(state: EffState, ns: str, ni: str) -> EffState:
    """Superposer on pair (ns, ni): adds ``aux * |HH>`` to that block."""
    state._check_pair(ns, ni)
    blocks = dict(state.blocks)
    vec = list(state.block(ns, ni))
    vec[0] = vec[0] + state.aux
    blocks[(ns, ni)] = tuple(vec)
    return state.with_blocks(blocks)


def eff_apply_unitary(state: EffState, ns: str, ni: str, matrix) -> EffState:
    """Block-diagonal ``1 (+) U``: multiplies one block, leaves aux alone."""
    require_unitary(matrix, 4)
    state._check_pair(ns, ni)
    blocks = dict(state.blocks)
    blocks[(ns, ni)] = tuple(matvec(matrix, state.block(ns, ni), 0j))
    return state.with_blocks(blocks)


def translation_matrix() -> np.ndarray:
    """5x5 matrix of the superposer over basis (aux, HH, HV, VH, VV)."""
    m = np.eye(5, dtype=complex)
    m[1, 0] = 1.0
    return m


def superpose_block(vec: Sequence[complex]) -> list[complex]:
    """Bare superposer on a 4-vector: ``v + e_HH`` (auxiliary fixed at 1)."""
    out = list(vec)
    out[0] = out[0] + 1.0
    return out


def eff_nonlinearity_witness(
    psi1: EffState,
    psi2: EffState,
    c1: complex,
    c2: complex,
    pair: tuple[str, str],
    tol: float = 1e-12,
) -> bool:
    """True iff the superposer fails linearity on ``c1*psi1 + c2*psi2``.

    Works on the bare 4-vector picture of the given pair, where the
    superposer is affine: it respects combinations with ``c1 + c2 = 1``
    (up to rounding, hence the tolerance) and breaks all others by a full
    ``(c1 + c2 - 1)|HH>``.
    """
    v1 = psi1.block(*pair)
    v2 = psi2.block(*pair)
    combined = [c1 * a + c2 * b for a, b in zip(v1, v2)]
    lhs = superpose_block(combined)
    rhs = [c1 * a + c2 * b for a, b in zip(superpose_block(v1), superpose_block(v2))]
    return any(abs(l - r) > tol for l, r in zip(lhs, rhs))


def unitary_to_effective(
    state: KetState, signals: Iterable[str], idlers: Iterable[str]
) -> EffState:
    """Extract the one-pair sector of a first-order state into pair blocks.

    Requires the zeroth order to be pure vacuum and every one-pair term to
    occupy exactly one signal and one idler path; anything else is reported
    with the offending ket.
    """
    sig = tuple(signals)
    idl = tuple(idlers)
    if set(sig) | set(idl) != set(state.paths) or len(sig) + len(idl) != len(state.paths):
        raise PathError("signal/idler registries must partition the state's paths")
    vac = state.vacuum_occ
    blocks: dict[tuple[str, str], list[complex]] = {}
    aux = 0j
    for occ, amp in state.terms.items():
        if amp.c01 != 0:
            raise BlockStructureError(
                f"term {occ!r} carries a kappa-bar component, which the effective "
                "picture does not represent"
            )
        if occ == vac:
            aux = amp.c00
        elif amp.c00 != 0:
            raise BlockStructureError(
                f"zeroth-order component is not pure vacuum: term {occ!r}"
            )
        if amp.c10 == 0:
            continue
        occupied = [(state.paths[k], occ[k]) for k in range(len(occ)) if occ[k] != VACUUM]
        on_sig = [(p, sym) for p, sym in occupied if p in sig]
        on_idl = [(p, sym) for p, sym in occupied if p in idl]
        if len(on_sig) != 1 or len(on_idl) != 1:
            raise BlockStructureError(
                f"one-pair term {occ!r} does not occupy exactly one (signal, idler) pair"
            )
        (ps, ss), (pi, si) = on_sig[0], on_idl[0]
        key = (ps, pi)
        vec = blocks.setdefault(key, [0j, 0j, 0j, 0j])
        vec[POL_BASIS.index(ss + si)] = amp.c10 * 1j
    if aux != 1:
        raise BlockStructureError(f"vacuum amplitude must be exactly 1, got {aux!r}")
    return EffState(sig, idl, aux, {k: tuple(v) for k, v in blocks.items()})


def effective_to_unitary(eff: EffState, paths: Iterable[str] | None = None) -> KetState:
    """Rebuild ``|vac> - i*kappa*|psi_eff>`` over an explicit path order."""
    path_tuple = tuple(paths) if paths is not None else eff.signals + eff.idlers
    if set(path_tuple) != set(eff.signals) | set(eff.idlers) or len(path_tuple) != len(
        eff.signals
    ) + len(eff.idlers):
        raise PathError("paths must enumerate exactly the signal and idler registries")
    pos = {p: k for k, p in enumerate(path_tuple)}
    terms: dict[str, PerturbAmp] = {VACUUM * len(path_tuple): PerturbAmp(eff.aux)}
    for (ns, ni), vec in eff.blocks.items():
        for idx, coeff in enumerate(vec):
            if coeff == 0:
                continue
            chars = [VACUUM] * len(path_tuple)
            chars[pos[ns]] = POL_BASIS[idx][0]
            chars[pos[ni]] = POL_BASIS[idx][1]
            terms["".join(chars)] = PerturbAmp(c10=-1j * coeff)
    return make_state(path_tuple, terms)
