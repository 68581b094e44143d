"""Small linear-algebra helpers shared by the state engines.

``matvec`` is deliberately a plain Python loop with a fixed summation
order: the unitary-picture and effective-picture engines must produce
bit-identical amplitudes, so both route every matrix application through
this one function.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import NonUnitaryMatrixError

UNITARY_TOL = 1e-10


def matvec(matrix, vec: Sequence, zero):
    """Multiply ``matrix @ vec`` accumulating in ascending column order.

    ``vec`` entries only need ``+`` and left-multiplication by scalars, so
    this works for plain complex numbers and for truncated-series
    amplitudes alike.
    """
    out = []
    for k in range(len(vec)):
        acc = zero
        row = matrix[k]
        for j in range(len(vec)):
            acc = acc + row[j] * vec[j]
        out.append(acc)
    return out


def require_unitary(matrix, dim: int, *, tol: float = UNITARY_TOL) -> np.ndarray:
    """Validate that ``matrix`` is a ``dim x dim`` unitary; return it as an array."""
    u = np.asarray(matrix, dtype=complex)
    if u.shape != (dim, dim):
        raise NonUnitaryMatrixError(f"expected a {dim}x{dim} matrix, got shape {u.shape}")
    defect = np.max(np.abs(u.conj().T @ u - np.eye(dim)))
    if defect > tol:
        raise NonUnitaryMatrixError(f"matrix is not unitary (defect {defect:.3e} > {tol:.1e})")
    return u


def matrix_rows(matrix) -> tuple:
    """Freeze a matrix into nested tuples of python complex numbers."""
    u = np.asarray(matrix, dtype=complex)
    return tuple(tuple(complex(x) for x in row) for row in u)


def completion_unitary(target: Sequence[complex]) -> np.ndarray:
    """Deterministic unitary whose first column is ``target``.

    Built from a single Householder reflection combined with a phase so
    that the first basis vector maps exactly onto ``target``. A target
    equal to the first basis vector yields the identity.
    """
    v = np.asarray(target, dtype=complex)
    n = v.shape[0]
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > UNITARY_TOL:
        raise NonUnitaryMatrixError(f"target vector must be unit norm, got {norm!r}")
    v = v / norm
    phase = v[0] / abs(v[0]) if abs(v[0]) > 0 else 1.0 + 0j
    e0 = np.zeros(n, dtype=complex)
    e0[0] = 1.0
    u = v - phase * e0
    nsq = np.vdot(u, u).real
    scale = np.eye(n, dtype=complex)
    scale[0, 0] = phase
    if nsq < 1e-24:
        return scale
    reflector = np.eye(n, dtype=complex) - 2.0 * np.outer(u, u.conj()) / nsq
    return reflector @ scale
