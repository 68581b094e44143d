"""Gate set for first-order pair-creation circuits.

All gates are pure functions ``KetState -> KetState``. Pair creation
(``apply_nl``) adds an ``H H`` partner term at order kappa when the two
target paths are empty, and a vacuum partner at order kbar when both hold
an ``H`` photon; because the series algebra truncates at first order, a
source already at order kappa passes through unchanged. Path alignment is
a full two-qutrit swap. Polarization optics, the beam splitter and the
lossy-object channel act on occupation symbols and never change the series
order.

``Circuit`` is an immutable list of gate applications addressed by path
label; ``simulate`` folds it over an initial state (vacuum by default).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping

from .errors import GateParameterError, PathError, SubspaceError
from .linalg import matrix_rows, matvec, require_unitary
from .perturb import (
    AMP_ZERO,
    KetState,
    PerturbAmp,
    VACUUM,
    phase_factor,
    vacuum_state,
)

_MINUS_I_KAPPA = PerturbAmp(c10=-1j)
_MINUS_I_KBAR = PerturbAmp(c01=-1j)

PAULI_X = ((0j, 1 + 0j), (1 + 0j, 0j))
HADAMARD_2 = tuple(
    tuple(complex(x) / math.sqrt(2.0) for x in row) for row in ((1, 1), (1, -1))
)

# Single-photon-pump pair creation acts on a 10-state truncated subspace of
# (pump, signal, idler); anything else signals a modeling error.
_SINGLE_PUMP_SUBSPACE = frozenset(
    ["000", "H00", "0H0", "0V0", "00H", "00V", "0HH", "0HV", "0VH", "0VV"]
)


def _indices(state: KetState, *paths: str) -> tuple[int, ...]:
    if len(set(paths)) != len(paths):
        raise PathError(f"gate targets must be distinct, got {list(paths)}")
    return tuple(state.index(p) for p in paths)


def _set_symbols(occ: str, assignments: dict[int, str]) -> str:
    chars = list(occ)
    for idx, sym in assignments.items():
        chars[idx] = sym
    return "".join(chars)


def _add(terms: dict[str, PerturbAmp], occ: str, amp: PerturbAmp) -> None:
    if amp.is_zero:
        return
    prior = terms.get(occ)
    terms[occ] = amp if prior is None else prior + amp


def _prune(terms: dict[str, PerturbAmp]) -> dict[str, PerturbAmp]:
    return {occ: a for occ, a in terms.items() if not a.is_zero}


def apply_nl(state: KetState, s: str, i: str, scale: complex = 1.0) -> KetState:
    """Coherently pumped pair creation on signal path ``s`` and idler ``i``.

    ``|00> -> |00> - i*kappa*|HH>`` and ``|HH> -> |HH> - i*kbar*|00>``; the
    seven remaining two-qutrit basis states pass through unchanged.
    """
    a, b = _indices(state, s, i)
    out: dict[str, PerturbAmp] = {}
    for occ, amp in state.terms.items():
        _add(out, occ, amp)
        pair = occ[a] + occ[b]
        if pair == "00":
            _add(out, _set_symbols(occ, {a: "H", b: "H"}), amp * (scale * _MINUS_I_KAPPA))
        elif pair == "HH":
            _add(
                out,
                _set_symbols(occ, {a: VACUUM, b: VACUUM}),
                amp * (scale.conjugate() * _MINUS_I_KBAR),
            )
    return state.with_terms(_prune(out))


def apply_nl_single_photon_pump(
    state: KetState, p: str, s: str, i: str, g: complex = 1.0
) -> KetState:
    """Pair creation driven by a single pump photon on path ``p``.

    ``|H00> -> |H00> - i*g*kappa*|0HH>`` and the reverse branch at order
    kbar; ``g`` rescales the formal first-order parameter (kappa := g for
    unit scale). Terms outside the truncated (pump, signal, idler)
    subspace are rejected.
    """
    ip, isig, iidl = _indices(state, p, s, i)
    out: dict[str, PerturbAmp] = {}
    for occ, amp in state.terms.items():
        triple = occ[ip] + occ[isig] + occ[iidl]
        if triple not in _SINGLE_PUMP_SUBSPACE:
            raise SubspaceError(
                f"term {occ!r} lies outside the single-photon-pump subspace on "
                f"({p}, {s}, {i})"
            )
        _add(out, occ, amp)
        if triple == "H00":
            _add(
                out,
                _set_symbols(occ, {ip: VACUUM, isig: "H", iidl: "H"}),
                amp * (g * _MINUS_I_KAPPA),
            )
        elif triple == "0HH":
            _add(
                out,
                _set_symbols(occ, {ip: "H", isig: VACUUM, iidl: VACUUM}),
                amp * (complex(g).conjugate() * _MINUS_I_KBAR),
            )
    return state.with_terms(_prune(out))


def apply_swap(state: KetState, a: str, b: str) -> KetState:
    """Path alignment: full two-qutrit swap of the occupation symbols."""
    ia, ib = _indices(state, a, b)
    out: dict[str, PerturbAmp] = {}
    for occ, amp in state.terms.items():
        _add(out, _set_symbols(occ, {ia: occ[ib], ib: occ[ia]}), amp)
    return state.with_terms(out)


def apply_phase(state: KetState, p: str, phi: float) -> KetState:
    """Multiply every occupied symbol on ``p`` by ``exp(-i*phi)``."""
    (ip,) = _indices(state, p)
    factor = phase_factor(phi)
    out: dict[str, PerturbAmp] = {}
    for occ, amp in state.terms.items():
        _add(out, occ, amp if occ[ip] == VACUUM else factor * amp)
    return state.with_terms(_prune(out))


def _grouped_matvec(
    state: KetState,
    slots: list[str],
    symbol_of_slot: Callable[[str], tuple[int, ...] | None],
    rebuild: Callable[[str, str], str],
    matrix,
) -> KetState:
    """Apply a matrix on a labeled sub-basis, grouping terms that share the
    rest of their occupation so each block multiplies in a fixed order."""
    groups: dict[str, list[PerturbAmp]] = {}
    passthrough: dict[str, PerturbAmp] = {}
    for occ, amp in state.terms.items():
        key = symbol_of_slot(occ)
        if key is None:
            _add(passthrough, occ, amp)
        else:
            rest, slot_idx = key
            vec = groups.setdefault(rest, [AMP_ZERO] * len(slots))
            vec[slot_idx] = vec[slot_idx] + amp
    out = dict(passthrough)
    for rest, vec in groups.items():
        new_vec = matvec(matrix, vec, AMP_ZERO)
        for slot_idx, amp in enumerate(new_vec):
            _add(out, rebuild(rest, slots[slot_idx]), amp)
    return state.with_terms(_prune(out))


def apply_pol_unitary(state: KetState, p: str, matrix) -> KetState:
    """2x2 unitary on the {H, V} symbol of path ``p``; vacuum is fixed."""
    require_unitary(matrix, 2)
    rows = matrix_rows(matrix)
    (ip,) = _indices(state, p)

    def classify(occ: str):
        if occ[ip] == VACUUM:
            return None
        rest = occ[:ip] + "_" + occ[ip + 1 :]
        return rest, "HV".index(occ[ip])

    def rebuild(rest: str, sym: str) -> str:
        return rest.replace("_", sym)

    return _grouped_matvec(state, ["H", "V"], classify, rebuild, rows)


def apply_hwp(state: KetState, p: str) -> KetState:
    """Half-wave plate: swaps H and V on path ``p``."""
    return apply_pol_unitary(state, p, PAULI_X)


_POL_PAIRS = ["HH", "HV", "VH", "VV"]


def apply_two_path_pol_unitary(state: KetState, a: str, b: str, matrix) -> KetState:
    """4x4 unitary on the joint polarization of paths ``a`` and ``b``.

    Basis order (HH, HV, VH, VV) with ``a`` major. Terms where either path
    is empty pass through unchanged.
    """
    require_unitary(matrix, 4)
    rows = matrix_rows(matrix)
    ia, ib = _indices(state, a, b)

    def classify(occ: str):
        if occ[ia] == VACUUM or occ[ib] == VACUUM:
            return None
        rest = _set_symbols(occ, {ia: "_", ib: "_"})
        return rest, _POL_PAIRS.index(occ[ia] + occ[ib])

    def rebuild(rest: str, pair: str) -> str:
        first = rest.replace("_", pair[0], 1)
        return first.replace("_", pair[1], 1)

    return _grouped_matvec(state, _POL_PAIRS, classify, rebuild, rows)


def apply_beam_splitter(
    state: KetState, a: str, b: str, convention: str = "hadamard"
) -> KetState:
    """Polarization-preserving beam splitter on path modes ``a`` and ``b``.

    Default Hadamard convention: ``|X0> -> (|X0>+|0X>)/sqrt2`` and
    ``|0X> -> (|X0>-|0X>)/sqrt2``; ``convention="symmetric"`` uses the
    i-phase splitter instead. Input terms occupying both paths are outside
    the single-photon path-mode subspace and rejected.
    """
    if convention == "hadamard":
        rows = HADAMARD_2
    elif convention == "symmetric":
        r = 1.0 / math.sqrt(2.0)
        rows = ((complex(r), 1j * r), (1j * r, complex(r)))
    else:
        raise GateParameterError(f"unknown beam-splitter convention {convention!r}")
    ia, ib = _indices(state, a, b)
    for occ in state.terms:
        if occ[ia] != VACUUM and occ[ib] != VACUUM:
            raise SubspaceError(
                f"beam splitter on ({a}, {b}) requires at most one occupied input, got {occ!r}"
            )

    out: dict[str, PerturbAmp] = {}
    groups: dict[tuple[str, str], list[PerturbAmp]] = {}
    for occ, amp in state.terms.items():
        if occ[ia] == VACUUM and occ[ib] == VACUUM:
            _add(out, occ, amp)
            continue
        pol = occ[ia] if occ[ia] != VACUUM else occ[ib]
        rest = _set_symbols(occ, {ia: "_", ib: "_"})
        vec = groups.setdefault((rest, pol), [AMP_ZERO, AMP_ZERO])
        vec[0 if occ[ia] != VACUUM else 1] = amp
    for (rest, pol), vec in groups.items():
        new_vec = matvec(rows, vec, AMP_ZERO)
        _add(out, _set_symbols(rest, {ia: pol, ib: VACUUM}), new_vec[0])
        _add(out, _set_symbols(rest, {ia: VACUUM, ib: pol}), new_vec[1])
    return state.with_terms(_prune(out))


def apply_object(state: KetState, i: str, w: str, t: float, gamma: float) -> KetState:
    """Point-like object of transmittance ``t`` and phase ``gamma`` on path
    ``i``, scattering the reflected photon into loss path ``w``.

    ``|X0> -> t*exp(i*gamma)*|X0> + sqrt(1-t^2)*|0X>`` for X in {H, V};
    polarization is untouched. ``w`` must be empty in every input term.
    (The formal unitary completion sends ``|0X>`` to
    ``-sqrt(1-t^2)|X0> + t*exp(-i*gamma)|0X>``, but an occupied loss path
    never occurs here, so it is rejected rather than implemented.)
    """
    if not 0.0 <= t <= 1.0:
        raise GateParameterError(f"transmittance must lie in [0, 1], got {t}")
    ii, iw = _indices(state, i, w)
    through = t * phase_factor(gamma).conjugate()
    reflected = math.sqrt(1.0 - t * t)
    out: dict[str, PerturbAmp] = {}
    for occ, amp in state.terms.items():
        if occ[iw] != VACUUM:
            raise SubspaceError(f"loss path {w!r} must be empty, got term {occ!r}")
        if occ[ii] == VACUUM:
            _add(out, occ, amp)
            continue
        _add(out, occ, through * amp)
        _add(out, _set_symbols(occ, {ii: VACUUM, iw: occ[ii]}), reflected * amp)
    return state.with_terms(_prune(out))


def apply_gcnot(state: KetState, control: str, target: str) -> KetState:
    """Generalized CNOT: toggles the target symbol 0 <-> H when the control
    holds an H photon; identity otherwise (a V target is never touched)."""
    ic, it = _indices(state, control, target)
    out: dict[str, PerturbAmp] = {}
    for occ, amp in state.terms.items():
        if occ[ic] == "H" and occ[it] in "0H":
            flipped = "H" if occ[it] == VACUUM else VACUUM
            _add(out, _set_symbols(occ, {it: flipped}), amp)
        else:
            _add(out, occ, amp)
    return state.with_terms(out)


def apply_g_gate(state: KetState, p: str, scale: complex = 1.0) -> KetState:
    """Single-qutrit pair-creation rotation at first order.

    ``|0> -> |0> - i*kappa|H>``, ``|H> -> |H> - i*kbar|0>``, ``|V> -> |V>``
    (with ``scale`` rescaling kappa). This is the elementary gate both
    decompositions below are built from.
    """
    (ip,) = _indices(state, p)
    out: dict[str, PerturbAmp] = {}
    for occ, amp in state.terms.items():
        _add(out, occ, amp)
        if occ[ip] == VACUUM:
            _add(out, _set_symbols(occ, {ip: "H"}), amp * (scale * _MINUS_I_KAPPA))
        elif occ[ip] == "H":
            _add(
                out,
                _set_symbols(occ, {ip: VACUUM}),
                amp * (complex(scale).conjugate() * _MINUS_I_KBAR),
            )
    return state.with_terms(_prune(out))


Controls = tuple[tuple[str, str], ...]


def _control_indices(state: KetState, controls: Controls, target: str) -> list[tuple[int, str]]:
    _indices(state, target, *(p for p, _ in controls))
    resolved = []
    for p, sym in controls:
        if sym not in "0H":
            raise GateParameterError(f"control symbol must be '0' or 'H', got {sym!r}")
        resolved.append((state.index(p), sym))
    return resolved


def apply_mcnot(state: KetState, controls: Controls, target: str) -> KetState:
    """Multi-controlled 0<->H toggle; each control fires on a given symbol."""
    (it,) = _indices(state, target)
    resolved = _control_indices(state, controls, target)
    out: dict[str, PerturbAmp] = {}
    for occ, amp in state.terms.items():
        if all(occ[idx] == sym for idx, sym in resolved) and occ[it] in "0H":
            flipped = "H" if occ[it] == VACUUM else VACUUM
            _add(out, _set_symbols(occ, {it: flipped}), amp)
        else:
            _add(out, occ, amp)
    return state.with_terms(out)


def apply_controlled_g(
    state: KetState, controls: Controls, target: str, scale: complex = 1.0
) -> KetState:
    """G rotation on ``target`` gated on control symbols."""
    (it,) = _indices(state, target)
    resolved = _control_indices(state, controls, target)
    out: dict[str, PerturbAmp] = {}
    for occ, amp in state.terms.items():
        if not all(occ[idx] == sym for idx, sym in resolved):
            _add(out, occ, amp)
            continue
        _add(out, occ, amp)
        if occ[it] == VACUUM:
            _add(out, _set_symbols(occ, {it: "H"}), amp * (scale * _MINUS_I_KAPPA))
        elif occ[it] == "H":
            _add(
                out,
                _set_symbols(occ, {it: VACUUM}),
                amp * (complex(scale).conjugate() * _MINUS_I_KBAR),
            )
    return state.with_terms(_prune(out))


# ---------------------------------------------------------------------------
# Circuit representation


@dataclass(frozen=True)
class GateApplication:
    """One gate: kind, ordered target paths, and plain-python parameters."""

    kind: str
    targets: tuple[str, ...]
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        spec = _GATES.get(self.kind)
        if spec is None:
            raise GateParameterError(f"unknown gate kind {self.kind!r}")
        arity = spec.arity
        if arity is not None and len(self.targets) != arity:
            raise GateParameterError(
                f"{self.kind} requires {arity} paths, got {len(self.targets)}"
            )
        if len(set(self.targets)) != len(self.targets):
            raise PathError(f"gate targets must be distinct, got {list(self.targets)}")
        spec.validate(self)


@dataclass(frozen=True)
class Circuit:
    """Ordered gate applications over a registry of path labels."""

    paths: tuple[str, ...]
    ops: tuple[GateApplication, ...]

    def __post_init__(self):
        registered = set(self.paths)
        if len(registered) != len(self.paths):
            raise PathError(f"duplicate path labels in {list(self.paths)}")
        for op in self.ops:
            for p in op.targets:
                if p not in registered:
                    raise PathError(f"gate {op.kind!r} targets unregistered path {p!r}")
            for p, _ in op.params.get("controls", ()):
                if p not in registered:
                    raise PathError(f"gate {op.kind!r} controls unregistered path {p!r}")


@dataclass(frozen=True)
class _GateSpec:
    arity: int | None
    apply: Callable[[KetState, GateApplication], KetState]
    validate: Callable[[GateApplication], None] = lambda op: None


def _validate_matrix(dim: int):
    def check(op: GateApplication) -> None:
        require_unitary(op.params["matrix"], dim)

    return check


def _validate_object(op: GateApplication) -> None:
    t = op.params["t"]
    if not 0.0 <= t <= 1.0:
        raise GateParameterError(f"transmittance must lie in [0, 1], got {t}")


_GATES: dict[str, _GateSpec] = {
    "nl": _GateSpec(2, lambda st, op: apply_nl(st, *op.targets, scale=op.params.get("scale", 1.0))),
    "nl1p": _GateSpec(
        3, lambda st, op: apply_nl_single_photon_pump(st, *op.targets, g=op.params.get("g", 1.0))
    ),
    "align": _GateSpec(2, lambda st, op: apply_swap(st, *op.targets)),
    "phase": _GateSpec(1, lambda st, op: apply_phase(st, op.targets[0], op.params["phi"])),
    "hwp": _GateSpec(1, lambda st, op: apply_hwp(st, op.targets[0])),
    "unitary": _GateSpec(
        1,
        lambda st, op: apply_pol_unitary(st, op.targets[0], op.params["matrix"]),
        _validate_matrix(2),
    ),
    "unitary2": _GateSpec(
        2,
        lambda st, op: apply_two_path_pol_unitary(st, *op.targets, op.params["matrix"]),
        _validate_matrix(4),
    ),
    "bs": _GateSpec(
        2,
        lambda st, op: apply_beam_splitter(
            st, *op.targets, convention=op.params.get("convention", "hadamard")
        ),
    ),
    "object": _GateSpec(
        2,
        lambda st, op: apply_object(st, *op.targets, op.params["t"], op.params["gamma"]),
        _validate_object,
    ),
    "gcnot": _GateSpec(2, lambda st, op: apply_gcnot(st, *op.targets)),
    "g": _GateSpec(
        1, lambda st, op: apply_g_gate(st, op.targets[0], op.params.get("scale", 1.0))
    ),
    "mcnot": _GateSpec(
        1, lambda st, op: apply_mcnot(st, op.params["controls"], op.targets[0])
    ),
    "controlled_g": _GateSpec(
        1,
        lambda st, op: apply_controlled_g(
            st, op.params["controls"], op.targets[0], op.params.get("scale", 1.0)
        ),
    ),
}


def nl(s: str, i: str) -> GateApplication:
    return GateApplication("nl", (s, i))


def nl1p(p: str, s: str, i: str, g: complex = 1.0) -> GateApplication:
    return GateApplication("nl1p", (p, s, i), {"g": g})


def align(a: str, b: str) -> GateApplication:
    return GateApplication("align", (a, b))


def phase(p: str, phi: float) -> GateApplication:
    return GateApplication("phase", (p,), {"phi": phi})


def hwp(p: str) -> GateApplication:
    return GateApplication("hwp", (p,))


def unitary(p: str, matrix) -> GateApplication:
    return GateApplication("unitary", (p,), {"matrix": matrix_rows(matrix)})


def unitary2(a: str, b: str, matrix) -> GateApplication:
    return GateApplication("unitary2", (a, b), {"matrix": matrix_rows(matrix)})


def bs(a: str, b: str, convention: str = "hadamard") -> GateApplication:
    return GateApplication("bs", (a, b), {"convention": convention})


def object_channel(i: str, w: str, t: float, gamma: float) -> GateApplication:
    return GateApplication("object", (i, w), {"t": float(t), "gamma": float(gamma)})


def gcnot(control: str, target: str) -> GateApplication:
    return GateApplication("gcnot", (control, target))


def g_gate(p: str, scale: complex = 1.0) -> GateApplication:
    return GateApplication("g", (p,), {"scale": scale})


def mcnot(controls: Iterable[tuple[str, str]], target: str) -> GateApplication:
    return GateApplication("mcnot", (target,), {"controls": tuple(controls)})


def controlled_g(
    controls: Iterable[tuple[str, str]], target: str, scale: complex = 1.0
) -> GateApplication:
    return GateApplication(
        "controlled_g", (target,), {"controls": tuple(controls), "scale": scale}
    )


def apply(state: KetState, op: GateApplication) -> KetState:
    return _GATES[op.kind].apply(state, op)


def simulate(circuit: Circuit, initial: KetState | None = None) -> KetState:
    """Fold the circuit over ``initial`` (vacuum on the registry by default).

    The initial state may register more paths than the circuit touches, but
    every circuit path must be present.
    """
    state = vacuum_state(circuit.paths) if initial is None else initial
    registered = set(state.paths)
    for p in circuit.paths:
        if p not in registered:
            raise PathError(f"initial state lacks circuit path {p!r}")
    for op in circuit.ops:
        state = apply(state, op)
    return state


# ---------------------------------------------------------------------------
# Decompositions into two-level primitives


def nl_decomposition(s: str, i: str) -> Circuit:
    """Pair creation as [g-CNOT, G on the signal, g-CNOT].

    The composition reproduces ``apply_nl`` exactly on the span of
    ``|00>`` and ``|HH>`` and deviates from the identity only at first
    order on the remaining seven basis states.
    """
    return Circuit((s, i), (gcnot(s, i), g_gate(s), gcnot(s, i)))


def gray_code_decomposition(p: str, s: str, i: str) -> Circuit:
    """Single-photon-pump pair creation from two-level controlled gates.

    A Gray-code chain of multi-controlled toggles walks ``|H00>`` onto the
    partner of ``|0HH>`` that differs only in the pump symbol, a controlled
    G rotation mixes the pair, and the chain is undone. The composition
    equals ``apply_nl_single_photon_pump`` on the whole truncated subspace.
    """
    walk = (
        mcnot(((p, "H"), (i, "0")), s),
        mcnot(((p, "H"), (s, "H")), i),
        mcnot(((s, "H"), (i, "H")), p),
    )
    core = controlled_g(((s, "H"), (i, "H")), p)
    return Circuit((p, s, i), walk + (core,) + tuple(reversed(walk)))
