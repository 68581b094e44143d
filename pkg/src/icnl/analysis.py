"""Post-selected quantities: pair probabilities, reduced densities, sweeps.

Detection always post-selects on the photon pair existing, so every
density matrix here is normalized within the one-pair sector. Loss of
coherence comes out of the partial trace alone: a reflected photon sitting
on a different loss path is orthogonal environment, nothing more.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Collection, Iterable, Mapping, Protocol, Sequence

import numpy as np

from .errors import EmptyKappaSectorError, PathError, UnknownParameterError
from .perturb import KetState, VACUUM


def pair_probability_coefficient(state: KetState) -> float:
    """Sum of |kappa-coefficient|^2 over non-vacuum terms.

    The physical pair-detection probability is this coefficient times the
    numeric |kappa|^2; the vacuum term never triggers a detector.
    """
    vac = state.vacuum_occ
    total = 0.0
    for occ, amp in state.terms.items():
        if occ == vac:
            continue
        total += amp.c10.real * amp.c10.real + amp.c10.imag * amp.c10.imag
    return total


@dataclass(frozen=True)
class ConditionalDensity:
    """Unit-trace Hermitian matrix over labeled kets of the kept paths."""

    paths: tuple[str, ...]
    basis: tuple[str, ...]
    matrix: np.ndarray

    def entry(self, row: str, col: str) -> complex:
        return complex(self.matrix[self.basis.index(row), self.basis.index(col)])

    def probability(self, ket: str) -> float:
        return self.entry(ket, ket).real


def _kappa_terms(state: KetState) -> dict[str, complex]:
    kappa = state.kappa_amplitudes()
    if not kappa:
        raise EmptyKappaSectorError("one-pair sector is empty; nothing to post-select on")
    return kappa


def conditional_density(state: KetState, keep: Sequence[str]) -> ConditionalDensity:
    """Density matrix of the post-selected pair, traced down to ``keep``.

    The one-pair sector is normalized, everything outside ``keep`` is
    traced out, and the result is renormalized to unit trace. Basis kets
    are the occurring restrictions, sorted with 0 < H < V per symbol.
    """
    keep = tuple(keep)
    if len(set(keep)) != len(keep) or not keep:
        raise PathError(f"kept paths must be distinct and nonempty, got {list(keep)}")
    idx = [state.index(p) for p in keep]
    other = [k for k in range(len(state.paths)) if k not in idx]
    kappa = _kappa_terms(state)

    grouped: dict[str, dict[str, complex]] = {}
    for occ, amp in kappa.items():
        kept_occ = "".join(occ[k] for k in idx)
        env = "".join(occ[k] for k in other)
        grouped.setdefault(env, {})[kept_occ] = amp

    basis = tuple(sorted({r for block in grouped.values() for r in block}))
    pos = {r: k for k, r in enumerate(basis)}
    rho = np.zeros((len(basis), len(basis)), dtype=complex)
    for block in grouped.values():
        for r1, a1 in block.items():
            for r2, a2 in block.items():
                rho[pos[r1], pos[r2]] += a1 * a2.conjugate()
    rho /= np.trace(rho).real
    return ConditionalDensity(keep, basis, rho)


def trace_paths(rho: ConditionalDensity, keep: Sequence[str]) -> ConditionalDensity:
    """Trace a reduced density further down to a subset of its paths."""
    keep = tuple(keep)
    idx = [rho.paths.index(p) for p in keep]
    other = [k for k in range(len(rho.paths)) if k not in idx]
    restricted = sorted({"".join(b[k] for k in idx) for b in rho.basis})
    pos = {r: k for k, r in enumerate(restricted)}
    out = np.zeros((len(restricted), len(restricted)), dtype=complex)
    for r1, b1 in enumerate(rho.basis):
        for r2, b2 in enumerate(rho.basis):
            if all(b1[k] == b2[k] for k in other):
                out[pos["".join(b1[k] for k in idx)], pos["".join(b2[k] for k in idx)]] += (
                    rho.matrix[r1, r2]
                )
    return ConditionalDensity(keep, tuple(restricted), out)


def fidelity(rho: ConditionalDensity, psi: Sequence[complex]) -> float:
    """``<psi| rho |psi>`` for a pure target state."""
    vec = np.asarray(psi, dtype=complex)
    if vec.shape != (len(rho.basis),):
        raise ValueError(
            f"state has dimension {vec.shape}, density expects {len(rho.basis)}"
        )
    return float(np.real(vec.conj() @ rho.matrix @ vec))


def occupancy_probability(state: KetState, path: str) -> float:
    """Probability, within the normalized one-pair sector, that ``path``
    holds a photon. This is the click probability of a detector on it."""
    ip = state.index(path)
    kappa = _kappa_terms(state)
    total = 0.0
    hit = 0.0
    for occ, amp in kappa.items():
        w = amp.real * amp.real + amp.imag * amp.imag
        total += w
        if occ[ip] != VACUUM:
            hit += w
    return hit / total


class SweepTemplate(Protocol):
    """Anything that can rebuild and run itself for given parameter values."""

    @property
    def param_names(self) -> Collection[str]: ...

    def run(self, overrides: Mapping[str, float]) -> KetState: ...


@dataclass(frozen=True)
class CallableTemplate:
    """Adapter turning a plain builder function into a sweep template."""

    names: tuple[str, ...]
    build: Callable[[Mapping[str, float]], KetState]

    @property
    def param_names(self) -> Collection[str]:
        return self.names

    def run(self, overrides: Mapping[str, float]) -> KetState:
        return self.build(overrides)


@dataclass(frozen=True)
class SweepRow:
    value: float
    pair_coefficient: float
    detectors: dict[str, float]


def sweep(
    template: SweepTemplate,
    name: str,
    values: Iterable[float],
    detectors: Sequence[str] = (),
) -> list[SweepRow]:
    """Run the template once per grid value, in grid order.

    Rows are independent; detector columns hold post-selected occupancy
    probabilities and are omitted at points where the pair sector vanishes
    (nothing reaches a detector there).
    """
    if name not in template.param_names:
        raise UnknownParameterError(
            f"parameter {name!r} is not declared by the template "
            f"(have {sorted(template.param_names)})"
        )
    rows = []
    for v in values:
        state = template.run({name: v})
        dets = {}
        for p in detectors:
            try:
                dets[p] = occupancy_probability(state, p)
            except EmptyKappaSectorError:
                pass
        rows.append(SweepRow(v, pair_probability_coefficient(state), dets))
    return rows
