"""Brute-force truncated-Fock-space oracle for the exact source Hamiltonian.

The oracle keeps one bosonic mode per (path, polarization) plus a single
coherent pump mode shared by every source, each mode truncated at a photon
cutoff. Pair creation applies ``exp(-i(g a_p as+ ai+ + h.c.))`` through a
dense scaling-and-squaring matrix exponential on the local (pump, signal,
idler) factor; linear optics exponentiates the quadratic generator of its
2x2 single-photon matrix. Nothing here knows about the first-order
truncation, which is exactly why it can referee it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, logm

from .errors import FockDimensionError, GateParameterError, UnsupportedGateError
from .gates import Circuit, HADAMARD_2, PAULI_X
from .perturb import KetState, VACUUM, phase_factor

PUMP = "pump"
DEFAULT_DIM_LIMIT = 4096
DEFAULT_PATH_CUTOFF = 2
COHERENT_NORM_TOL = 1e-10


def pump_cutoff(alpha: complex, tol: float = COHERENT_NORM_TOL) -> int:
    """Smallest cutoff representing the coherent pump to norm error < tol."""
    x = abs(alpha) ** 2
    term = math.exp(-x)
    tail = 1.0 - term
    n = 0
    while tail > tol:
        n += 1
        term *= x / n
        tail -= term
        if n > 200:
            raise GateParameterError(f"pump amplitude {alpha!r} too large to truncate")
    return n


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """Number-basis amplitudes of |alpha> truncated to ``dim`` levels.

    Renormalized to a unit vector; with the cutoff from ``pump_cutoff`` the
    direction differs from the true coherent state by < 1e-10.
    """
    amps = np.zeros(dim, dtype=complex)
    amps[0] = math.exp(-abs(alpha) ** 2 / 2.0)
    for n in range(1, dim):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    return amps / np.linalg.norm(amps)


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


@dataclass(frozen=True)
class FockSpace:
    """Ordered truncated modes; mode 0 is always the shared pump."""

    modes: tuple[str, ...]
    dims: tuple[int, ...]
    dim_limit: int = DEFAULT_DIM_LIMIT

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def axis(self, mode: str) -> int:
        try:
            return self.modes.index(mode)
        except ValueError:
            raise GateParameterError(f"unknown Fock mode {mode!r}") from None


def path_mode(path: str, pol: str = "H") -> str:
    return f"{path}.{pol}"


def make_space(
    paths: tuple[str, ...],
    pol_paths: frozenset[str],
    alpha: complex,
    cutoff: int = DEFAULT_PATH_CUTOFF,
    dim_limit: int = DEFAULT_DIM_LIMIT,
) -> FockSpace:
    """Space with H modes for all paths, V modes where polarization mixes."""
    modes = [PUMP]
    dims = [pump_cutoff(alpha) + 1]
    for p in paths:
        modes.append(path_mode(p, "H"))
        dims.append(cutoff + 1)
        if p in pol_paths:
            modes.append(path_mode(p, "V"))
            dims.append(cutoff + 1)
    return FockSpace(tuple(modes), tuple(dims), dim_limit)


@dataclass
class FockState:
    """Dense amplitude tensor, one axis per mode."""

    space: FockSpace
    tensor: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.tensor))


def initial_state(space: FockSpace, alpha: complex) -> FockState:
    """Coherent pump, all path modes empty."""
    tensor = np.zeros(space.dims, dtype=complex)
    idx = (slice(None),) + (0,) * (len(space.dims) - 1)
    tensor[idx] = coherent_amplitudes(alpha, space.dims[0])
    return FockState(space, tensor)


def _apply_local(state: FockState, matrix: np.ndarray, modes: tuple[str, ...]) -> FockState:
    """Contract a dense operator over the given mode axes."""
    axes = [state.space.axis(m) for m in modes]
    dims = [state.space.dims[a] for a in axes]
    op = matrix.reshape(dims + dims)
    moved = np.tensordot(op, state.tensor, axes=(list(range(len(axes), 2 * len(axes))), axes))
    return FockState(state.space, np.moveaxis(moved, list(range(len(axes))), axes))


def evolve_nl_exact(state: FockState, p: str, s: str, i: str, g: complex) -> FockState:
    """Exact pair creation ``exp(-i(g a_p as+ ai+ + h.c.))`` on three modes.

    The dense exponential acts on the (pump, signal-H, idler-H) factor; all
    other modes are strict spectators of this Hamiltonian, so the embedding
    into the full space is exact.
    """
    space = state.space
    if space.dim > space.dim_limit:
        raise FockDimensionError(
            f"Fock space dimension {space.dim} exceeds the limit {space.dim_limit}"
        )
    modes = (p, path_mode(s, "H"), path_mode(i, "H"))
    dp, ds, di = (space.dims[space.axis(m)] for m in modes)
    lower = np.kron(np.kron(annihilation(dp), annihilation(ds).conj().T), annihilation(di).conj().T)
    ham = g * lower + np.conj(g) * lower.conj().T
    return _apply_local(state, expm(-1j * ham), modes)


def apply_mode_unitary(state: FockState, u2, modes: tuple[str, str]) -> FockState:
    """Linear-optics element: lift a 2x2 single-photon unitary to Fock space
    via its quadratic generator, exact on every photon-number sector that
    fits inside the cutoffs."""
    u = np.asarray(u2, dtype=complex)
    gen = logm(u)
    gen = (gen - gen.conj().T) / 2.0
    d0, d1 = (state.space.dims[state.space.axis(m)] for m in modes)
    a0, a1 = annihilation(d0), annihilation(d1)
    eye0, eye1 = np.eye(d0, dtype=complex), np.eye(d1, dtype=complex)
    k = (
        gen[0, 0] * np.kron(a0.conj().T @ a0, eye1)
        + gen[0, 1] * np.kron(a0.conj().T, a1)
        + gen[1, 0] * np.kron(a0, a1.conj().T)
        + gen[1, 1] * np.kron(eye0, a1.conj().T @ a1)
    )
    return _apply_local(state, expm(k), modes)


def apply_path_phase(state: FockState, path: str, phi: float) -> FockState:
    """Multiply each photon on the path by exp(-i*phi) (diagonal, exact)."""
    factor = phase_factor(phi)
    tensor = state.tensor
    for pol in "HV":
        mode = path_mode(path, pol)
        if mode not in state.space.modes:
            continue
        axis = state.space.axis(mode)
        dim = state.space.dims[axis]
        shape = [1] * tensor.ndim
        shape[axis] = dim
        tensor = tensor * (factor ** np.arange(dim)).reshape(shape)
    return FockState(state.space, tensor)


def apply_path_swap(state: FockState, a: str, b: str) -> FockState:
    """Path alignment: exchange the mode contents of the two paths."""
    tensor = state.tensor
    for pol in "HV":
        ma, mb = path_mode(a, pol), path_mode(b, pol)
        in_a = ma in state.space.modes
        in_b = mb in state.space.modes
        if in_a != in_b:
            raise GateParameterError(
                f"paths {a!r} and {b!r} carry different polarization modes"
            )
        if in_a:
            tensor = np.swapaxes(tensor, state.space.axis(ma), state.space.axis(mb))
    return FockState(state.space, tensor)


# ---------------------------------------------------------------------------
# First-order comparison harness


def _paths_needing_v(circuit: Circuit) -> frozenset[str]:
    """Paths whose V mode can populate: touched by polarization mixing, or
    connected to one through alignment / beam splitting / the object."""
    need = set()
    for op in circuit.ops:
        if op.kind in ("hwp", "unitary"):
            need.update(op.targets)
        elif op.kind == "unitary2":
            raise UnsupportedGateError(
                "two-path polarization unitaries have no linear-optics counterpart"
            )
    pairs = [op.targets for op in circuit.ops if op.kind in ("align", "bs", "object")]
    changed = True
    while changed:
        changed = False
        for a, b in pairs:
            if (a in need) != (b in need):
                need.update((a, b))
                changed = True
    return frozenset(need)


_SUPPORTED = {"nl", "align", "phase", "hwp", "unitary", "bs", "object"}


def run_circuit_exact(
    circuit: Circuit,
    g: complex,
    alpha: complex,
    cutoff: int = DEFAULT_PATH_CUTOFF,
    dim_limit: int = DEFAULT_DIM_LIMIT,
) -> FockState:
    """Evolve the exact truncated-Fock state through a supported circuit."""
    for op in circuit.ops:
        if op.kind not in _SUPPORTED:
            raise UnsupportedGateError(f"gate {op.kind!r} has no exact Fock counterpart")
    space = make_space(circuit.paths, _paths_needing_v(circuit), alpha, cutoff, dim_limit)
    state = initial_state(space, alpha)
    for op in circuit.ops:
        if op.kind == "nl":
            state = evolve_nl_exact(state, PUMP, op.targets[0], op.targets[1], g)
        elif op.kind == "align":
            state = apply_path_swap(state, *op.targets)
        elif op.kind == "phase":
            state = apply_path_phase(state, op.targets[0], op.params["phi"])
        elif op.kind == "hwp":
            p = op.targets[0]
            state = apply_mode_unitary(state, PAULI_X, (path_mode(p, "H"), path_mode(p, "V")))
        elif op.kind == "unitary":
            p = op.targets[0]
            state = apply_mode_unitary(
                state, op.params["matrix"], (path_mode(p, "H"), path_mode(p, "V"))
            )
        elif op.kind == "bs":
            a, b = op.targets
            if op.params.get("convention", "hadamard") != "hadamard":
                u = np.array([[1, 1j], [1j, 1]], dtype=complex) / math.sqrt(2.0)
            else:
                u = np.asarray(HADAMARD_2)
            for pol in "HV":
                if path_mode(a, pol) in space.modes:
                    state = apply_mode_unitary(state, u, (path_mode(a, pol), path_mode(b, pol)))
        elif op.kind == "object":
            i, w = op.targets
            t, gamma = op.params["t"], op.params["gamma"]
            u = np.array(
                [
                    [t * phase_factor(gamma).conjugate(), -math.sqrt(1 - t * t)],
                    [math.sqrt(1 - t * t), t * phase_factor(gamma)],
                ],
                dtype=complex,
            )
            for pol in "HV":
                if path_mode(i, pol) in space.modes:
                    state = apply_mode_unitary(state, u, (path_mode(i, pol), path_mode(w, pol)))
    return state


def project_pump(state: FockState, alpha: complex) -> np.ndarray:
    """Overlap with the undepleted coherent pump: amplitudes per path-mode
    occupation, pump axis contracted away."""
    coh = coherent_amplitudes(alpha, state.space.dims[0])
    return np.tensordot(coh.conj(), state.tensor, axes=(0, 0))


def predicted_tensor(final: KetState, space: FockSpace, kappa: complex) -> np.ndarray:
    """Dense amplitude tensor predicted by the first-order engine."""
    shape = space.dims[1:]
    pred = np.zeros(shape, dtype=complex)
    for occ, amp in final.terms.items():
        index = [0] * len(shape)
        for path, sym in zip(final.paths, occ):
            if sym == VACUUM:
                continue
            index[space.axis(path_mode(path, sym)) - 1] = 1
        pred[tuple(index)] += amp.c00 + amp.c10 * kappa + amp.c01 * np.conj(kappa)
    return pred


@dataclass(frozen=True)
class FirstOrderReport:
    """Outcome of one oracle-versus-first-order comparison."""

    g: complex
    alpha: complex
    max_deviation: float
    bound_coefficient: float
    passed: bool
    norm_drift: float

    @property
    def kappa(self) -> complex:
        return self.g * self.alpha

    @property
    def c_effective(self) -> float:
        scale = abs(self.kappa) ** 2
        return self.max_deviation / scale if scale else 0.0


def compare_first_order(
    circuit: Circuit,
    g: complex,
    alpha: complex,
    bound_coefficient: float = 10.0,
    cutoff: int = DEFAULT_PATH_CUTOFF,
    dim_limit: int = DEFAULT_DIM_LIMIT,
) -> FirstOrderReport:
    """Run both engines and bound their amplitude deviation by C*|g*alpha|^2.

    The oracle state is projected onto the undepleted pump and compared
    entrywise against the first-order prediction, over every truncated
    basis state (so amplitudes the first order cannot produce count too).
    """
    from .gates import simulate  # local import keeps module load cheap

    exact = run_circuit_exact(circuit, g, alpha, cutoff, dim_limit)
    drift = abs(exact.norm - initial_state(exact.space, alpha).norm)
    projected = project_pump(exact, alpha)
    final = simulate(circuit)
    pred = predicted_tensor(final, exact.space, g * alpha)
    max_dev = float(np.max(np.abs(projected - pred)))
    bound = bound_coefficient * abs(g * alpha) ** 2
    return FirstOrderReport(
        g=g,
        alpha=alpha,
        max_deviation=max_dev,
        bound_coefficient=bound_coefficient,
        passed=max_dev <= bound,
        norm_drift=drift,
    )
