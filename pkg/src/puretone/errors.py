"""Exception types shared across the package.

The command-line interface maps these onto stable process exit codes:
configuration problems exit 2, resonant profiles exit 3, detected wave
steepening exits 4, and iteration failures exit 5.
"""

from __future__ import annotations

__all__ = [
    "PuretoneError",
    "ConfigError",
    "ResonanceError",
    "BlowUpError",
    "ConvergenceError",
]


class PuretoneError(Exception):
    """Base class for all package-specific failures.

    ``exit_code`` is the process status the command-line interface uses
    when the error terminates a run.
    """

    exit_code = 1


class ConfigError(PuretoneError):
    """Malformed or inconsistent run configuration."""

    exit_code = 2


class ResonanceError(PuretoneError):
    """A required divisor vanished: the profile is resonant at this mode."""

    exit_code = 3


class BlowUpError(PuretoneError):
    """The time derivative grew past the steepening threshold.

    Attributes
    ----------
    distance : float
        Position (in the evolution variable) at which detection fired.
    """

    exit_code = 4

    def __init__(self, message: str, distance: float = float("nan")) -> None:
        super().__init__(message)
        self.distance = distance


class ConvergenceError(PuretoneError):
    """An iteration failed to reach its tolerance."""

    exit_code = 5
