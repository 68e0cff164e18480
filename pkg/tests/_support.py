"""Shared helpers for the test suite.

Reference computations here are written independently of the package
internals they check: divisors through a dense matrix chain, evolution
through characteristics, Duhamel coefficients through an off-the-shelf ODE
integrator.
"""

from __future__ import annotations

import math

import numpy as np

from puretone.profiles import PiecewiseConstantProfile

# Interface factor that puts mode 1 exactly in the kernel of the two-piece
# profile with unit scaled widths: cot(1)^2.
SQUARE_JUMP = 1.0 / math.tan(1.0) ** 2


def square_wave() -> PiecewiseConstantProfile:
    """Two unit scaled widths with the kernel-condition interface factor."""
    return PiecewiseConstantProfile((1.0, 1.0), (SQUARE_JUMP,))


def random_profile(
    rng: np.random.Generator,
    n_jumps: int | None = None,
    max_jumps: int = 5,
    theta_range: tuple[float, float] = (0.3, 1.5),
    jump_range: tuple[float, float] = (0.5, 2.0),
    normalized: bool = False,
) -> PiecewiseConstantProfile:
    """A random piecewise-constant profile in the scaled frame."""
    if n_jumps is None:
        n_jumps = int(rng.integers(0, max_jumps + 1))
    widths = tuple(rng.uniform(*theta_range, size=n_jumps + 1))
    jumps = tuple(rng.uniform(*jump_range, size=n_jumps))
    profile = PiecewiseConstantProfile(widths, jumps)
    return profile.normalized() if normalized else profile


def rotation(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s], [s, c]])


def reference_divisor(
    profile: PiecewiseConstantProfile,
    period: float,
    k: int,
    flavor: str = "periodic-tile",
) -> float:
    """Dense matrix-chain divisor, written independently of the package.

    Multiplies the mode-``k`` transfer factors left to right as plain 2x2
    arrays — rotations for delays, ``diag(1, J)`` for interfaces, a
    floating-point rotation by ``-k pi / 2`` for the quarter-period shift —
    and reads off the sine component.
    """
    omega_hat = k * 2.0 * math.pi / period
    vec = np.array([1.0, 0.0])
    for m, theta in enumerate(profile.widths):
        vec = rotation(omega_hat * theta) @ vec
        if m < len(profile.jumps):
            vec = np.diag([1.0, profile.jumps[m]]) @ vec
    if flavor == "periodic-tile":
        vec = rotation(-k * math.pi / 2.0) @ vec
    return float(vec[1])
