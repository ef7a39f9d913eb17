"""Exception hierarchy for synthctl.

All library errors derive from :class:`SynthctlError` so callers can catch
one base class. The CLI maps input problems to exit code 2 and numeric
failures to exit code 3.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "SynthctlError",
    "InvalidSpecificationError",
    "NumericInputError",
    "ConvergenceError",
    "PanelFormatError",
    "SimulationError",
]


class SynthctlError(Exception):
    """Base class for all synthctl errors."""


class InvalidSpecificationError(SynthctlError):
    """A configuration, spec, or argument combination is not valid."""


class NumericInputError(SynthctlError):
    """Numeric inputs are unusable (non-finite values, bad shapes)."""


class ConvergenceError(SynthctlError):
    """The solver hit its iteration cap before reaching tolerance.

    Carries the best iterate found and its duality gap so callers can
    inspect (or accept) the partial result.
    """

    def __init__(self, message: str, weights: np.ndarray, gap: float):
        super().__init__(message)
        self.weights = weights
        self.gap = gap


class PanelFormatError(InvalidSpecificationError):
    """A panel CSV could not be parsed; records the offending position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class SimulationError(SynthctlError):
    """A Monte Carlo cell failed (e.g. too many non-converged replications)."""
