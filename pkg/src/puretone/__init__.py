"""Pure-tone periodic waves in one-dimensional gas dynamics.

The package constructs and validates space- and time-periodic sound waves
supported on a stationary entropy profile.  The pipeline runs

``thermo``     equation of state, quiet states, non-dimensional scaling maps
``profiles``   entropy profiles (piecewise-constant and sampled) and perturbations
``series``     trigonometric time series and the mode operator algebra
``divisors``   small divisors, base frequencies and resonance classification
``sturm``      Pruefer integration of the linearized system on general profiles
``evolve``     nonlinear spectral marching in the material coordinate
``bifurcate``  Liapunov-Schmidt solver producing pure-tone solutions
``tile``       reflection assembly of the minimal tile and PDE verification
``cli``        command-line orchestration and JSON reports
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    BlowUpError,
    ConfigError,
    ConvergenceError,
    PuretoneError,
    ResonanceError,
)
from .profiles import PiecewiseConstantProfile, SampledProfile
from .series import TrigSeries
from .thermo import GammaLawGas, QuietState

__all__ = [
    "GammaLawGas",
    "QuietState",
    "PiecewiseConstantProfile",
    "SampledProfile",
    "TrigSeries",
    "PuretoneError",
    "ConfigError",
    "ResonanceError",
    "BlowUpError",
    "ConvergenceError",
    "__version__",
]
