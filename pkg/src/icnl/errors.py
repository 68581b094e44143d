"""Exception hierarchy shared across the package."""

from __future__ import annotations


class IcnlError(Exception):
    """Base class for all errors raised by this package."""


class PathError(IcnlError):
    """Unknown, duplicate, or otherwise invalid path label."""


class GateParameterError(IcnlError):
    """Gate parameter outside its allowed range or of the wrong shape."""


class NonUnitaryMatrixError(GateParameterError):
    """Matrix handed to a unitary gate fails the unitarity check."""


class SubspaceError(IcnlError):
    """State term lies outside the subspace a gate is defined on."""


class EmptyKappaSectorError(IcnlError):
    """Post-selection requested but the one-pair sector is empty."""


class BlockStructureError(IcnlError):
    """State cannot be mapped onto (signal, idler) pair blocks."""


class FockDimensionError(IcnlError):
    """Truncated Fock space exceeds the configured dimension limit."""


class UnsupportedGateError(IcnlError):
    """Gate has no exact counterpart in the requested engine."""


class UnknownParameterError(IcnlError):
    """Sweep or override refers to a parameter that is not declared."""
