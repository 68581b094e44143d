"""First-order amplitude algebra and sparse multi-path qutrit states.

Every amplitude is a truncated power series ``c00 + c10*kappa + c01*kbar``
in the formal pair-creation parameter ``kappa`` (coupling times pump
amplitude) and its conjugate ``kbar``. Products drop every contribution of
combined order >= 2, so destructive interference between pair-creation
amplitudes cancels exactly instead of down to a floating-point tolerance.
Numeric values of ``kappa`` enter only when converting to probabilities.

A path holds at most one photon, so its state is a qutrit: ``0`` (empty),
``H`` (one horizontally polarized photon) or ``V`` (vertical). A multi-path
state is a sparse map from occupation strings (one symbol per registered
path) to series amplitudes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Literal, Mapping

from .errors import PathError

VACUUM = "0"
SYMBOLS = "0HV"

Order = Literal["zeroth", "kappa", "kappa-bar"]


@dataclass(frozen=True)
class PerturbAmp:
    """Truncated series ``c00 + c10*kappa + c01*kbar``."""

    c00: complex = 0j
    c10: complex = 0j
    c01: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "c00", complex(self.c00))
        object.__setattr__(self, "c10", complex(self.c10))
        object.__setattr__(self, "c01", complex(self.c01))

    def __add__(self, other: "PerturbAmp") -> "PerturbAmp":
        return PerturbAmp(self.c00 + other.c00, self.c10 + other.c10, self.c01 + other.c01)

    def __sub__(self, other: "PerturbAmp") -> "PerturbAmp":
        return PerturbAmp(self.c00 - other.c00, self.c10 - other.c10, self.c01 - other.c01)

    def __neg__(self) -> "PerturbAmp":
        return PerturbAmp(-self.c00, -self.c10, -self.c01)

    def __mul__(self, other):
        if isinstance(other, PerturbAmp):
            return amp_mul(self, other)
        return PerturbAmp(other * self.c00, other * self.c10, other * self.c01)

    def __rmul__(self, scalar) -> "PerturbAmp":
        # Scalars multiply from the left so both engines share rounding.
        return PerturbAmp(scalar * self.c00, scalar * self.c10, scalar * self.c01)

    @property
    def is_zero(self) -> bool:
        return self.c00 == 0 and self.c10 == 0 and self.c01 == 0


AMP_ZERO = PerturbAmp()
AMP_ONE = PerturbAmp(1.0)
KAPPA = PerturbAmp(c10=1.0)
KAPPA_BAR = PerturbAmp(c01=1.0)


def amp_mul(a: PerturbAmp, b: PerturbAmp) -> PerturbAmp:
    """Truncated product: order-2 terms (kappa^2, kappa*kbar, kbar^2) vanish."""
    return PerturbAmp(
        a.c00 * b.c00,
        a.c00 * b.c10 + a.c10 * b.c00,
        a.c00 * b.c01 + a.c01 * b.c00,
    )


def phase_factor(phi: float) -> complex:
    """``exp(-i*phi)`` with exact values at multiples of pi/2.

    Algebraically forced cancellations (for example a pair amplitude
    ``1 + exp(-i*pi)``) must vanish identically, so the quarter-turn
    points return exact unit values instead of rounded cos/sin pairs.
    """
    r = phi / math.pi
    k = round(r)
    if r == k:
        return (-1.0 + 0j) if k % 2 else (1.0 + 0j)
    h = round(2.0 * r)
    if 2.0 * r == h:
        return -1j if h % 4 == 1 else 1j
    return cmath.exp(-1j * phi)


def _validate_occupation(occ: str, n_paths: int) -> None:
    if len(occ) != n_paths:
        raise PathError(f"occupation {occ!r} has {len(occ)} symbols, expected {n_paths}")
    for ch in occ:
        if ch not in SYMBOLS:
            raise PathError(f"invalid occupation symbol {ch!r} in {occ!r}")


@dataclass(frozen=True)
class KetState:
    """Sparse state: occupation string -> truncated-series amplitude.

    Values are immutable after construction; every operation returns a new
    state with exactly-zero amplitudes pruned.
    """

    paths: tuple[str, ...]
    terms: Mapping[str, PerturbAmp]

    def index(self, path: str) -> int:
        try:
            return self.paths.index(path)
        except ValueError:
            raise PathError(f"path {path!r} is not registered (have {list(self.paths)})") from None

    def amplitude(self, occ: str) -> PerturbAmp:
        _validate_occupation(occ, len(self.paths))
        return self.terms.get(occ, AMP_ZERO)

    @property
    def vacuum_occ(self) -> str:
        return VACUUM * len(self.paths)

    def with_terms(self, terms: Mapping[str, PerturbAmp]) -> "KetState":
        return KetState(self.paths, {occ: a for occ, a in terms.items() if not a.is_zero})

    def extract_order(self, which: Order) -> "KetState":
        """Sub-state holding one series coefficient as a plain amplitude.

        For ``kappa`` the coefficients are divided by ``-i`` so that the
        full state reads ``|vac> - i*kappa*|extracted>`` exactly; the
        ``kappa-bar`` sector is treated symmetrically.
        """
        if which == "zeroth":
            pick = lambda a: a.c00
        elif which == "kappa":
            pick = lambda a: a.c10 * 1j
        elif which == "kappa-bar":
            pick = lambda a: a.c01 * 1j
        else:
            raise ValueError(f"unknown order selector {which!r}")
        return self.with_terms({occ: PerturbAmp(pick(a)) for occ, a in self.terms.items()})

    def kappa_amplitudes(self) -> dict[str, complex]:
        """One-pair sector as plain complex amplitudes (kappa coefficient / -i)."""
        out = {}
        for occ, a in self.terms.items():
            if a.c10 != 0:
                out[occ] = a.c10 * 1j
        return out


def make_state(paths: Iterable[str], terms: Mapping[str, PerturbAmp | complex]) -> KetState:
    """Build a validated state; plain scalars become zeroth-order amplitudes."""
    path_tuple = tuple(paths)
    _validate_paths(path_tuple)
    clean: dict[str, PerturbAmp] = {}
    for occ, amp in terms.items():
        _validate_occupation(occ, len(path_tuple))
        if not isinstance(amp, PerturbAmp):
            amp = PerturbAmp(amp)
        if not amp.is_zero:
            clean[occ] = amp
    return KetState(path_tuple, clean)


def _validate_paths(paths: tuple[str, ...]) -> None:
    if not paths:
        raise PathError("at least one path label is required")
    if len(set(paths)) != len(paths):
        raise PathError(f"duplicate path labels in {list(paths)}")


def vacuum_state(paths: Iterable[str]) -> KetState:
    """All-empty state with unit amplitude."""
    path_tuple = tuple(paths)
    _validate_paths(path_tuple)
    return KetState(path_tuple, {VACUUM * len(path_tuple): AMP_ONE})
