"""Shared exception types.

Exit-code mapping used by the CLI lives in cli.py; the library raises these
directly and never calls sys.exit.
"""


class CoarseCoverError(Exception):
    """Base class for all library errors."""


class ConfigError(CoarseCoverError):
    """Malformed configuration, unknown object reference, bad parameters."""


class UnsupportedWindow(CoarseCoverError):
    """Requested window is empty or not representable for this covering."""


class WindowOverflow(CoarseCoverError):
    """A star expansion escaped the interior of the finite window."""


class Disconnected(CoarseCoverError):
    """No chain joins the two points inside the window."""


class NotAMetric(CoarseCoverError):
    """Distance matrix fails symmetry, zero diagonal, or triangle inequality."""


class AboveCap(CoarseCoverError):
    """Word distance exceeds the search cap."""

    def __init__(self, cap):
        super().__init__(f"word distance exceeds cap {cap}")
        self.cap = cap


class ResourceLimit(CoarseCoverError):
    """Element or sample budget exhausted; .partial may hold partial output."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class DegenerateSample(CoarseCoverError):
    """Sample too small or collapsed for the requested fit."""


class GridTooCoarse(CoarseCoverError):
    """Refinement-by-2 moved a quadrature value beyond the declared tolerance."""

    def __init__(self, coarse, fine, tol):
        super().__init__(
            f"refinement check failed: value moved from {coarse:.6g} to {fine:.6g} "
            f"(tolerance {tol:.3g})"
        )
        self.coarse = coarse
        self.fine = fine
        self.tol = tol


class TruncationDominates(CoarseCoverError):
    """Declared tail bound of the integrand exceeds the requested tolerance."""


class EmptySupport(CoarseCoverError):
    """Adapted support of the function is empty at the given tolerance."""


class IndexMismatch(CoarseCoverError):
    """Coefficient indices do not match the nerve's index set."""


class UnsupportedCovering(CoarseCoverError):
    """Operation not defined for this covering kind."""


class NotSurjectiveOnWindow(CoarseCoverError):
    """Induced index map misses part of the target window."""
