"""Equation of state and non-dimensional scaling maps for a gamma-law gas.

The constitutive law is expressed with pressure and entropy as the
independent variables,

    v(p, s) = p**(-1/gamma) * exp(s / c_p),          c_p = gamma * c_v,

so that v_p < 0 and v_pp > 0 for every admissible state: the law is
genuinely nonlinear with convex volume.  A :class:`QuietState` bundles the
gas with a constant background pressure ``p_bar`` and provides the
linearized wavespeed data and the exact non-dimensionalizing change of
variables used by the nonlinear solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["GammaLawGas", "QuietState"]


@dataclass(frozen=True)
class GammaLawGas:
    """Polytropic (gamma-law) gas with adiabatic exponent ``gamma > 1``.

    ``c_v`` fixes the entropy scale; all public formulas depend on entropy
    only through ``s / c_p`` or ``s / c_v``.
    """

    gamma: float
    c_v: float = 1.0

    def __post_init__(self) -> None:
        if self.gamma <= 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if self.c_v <= 0.0:
            raise ValueError(f"c_v must be positive, got {self.c_v}")

    @property
    def c_p(self) -> float:
        return self.gamma * self.c_v

    @property
    def nu(self) -> float:
        """Nonlinearity exponent ``(gamma + 1) / (gamma - 1)`` of the scaled wavespeed."""
        return (self.gamma + 1.0) / (self.gamma - 1.0)

    # ------------------------------------------------------------------
    # constitutive law
    # ------------------------------------------------------------------
    def specific_volume(self, p, s):
        """``v(p, s) = p**(-1/gamma) * exp(s/c_p)``."""
        p = np.asarray(p, dtype=float)
        if np.any(p <= 0.0):
            raise ValueError("pressure must be positive")
        out = p ** (-1.0 / self.gamma) * np.exp(np.asarray(s, dtype=float) / self.c_p)
        return out if out.ndim else float(out)

    def pressure(self, v, s):
        """Inverse law ``p(v, s) = v**(-gamma) * exp(s/c_v)``."""
        v = np.asarray(v, dtype=float)
        if np.any(v <= 0.0):
            raise ValueError("specific volume must be positive")
        out = v ** (-self.gamma) * np.exp(np.asarray(s, dtype=float) / self.c_v)
        return out if out.ndim else float(out)

    def dv_dp(self, p, s):
        """``v_p = -(1/gamma) p**(-1 - 1/gamma) exp(s/c_p) < 0``."""
        p = np.asarray(p, dtype=float)
        out = -(1.0 / self.gamma) * p ** (-1.0 - 1.0 / self.gamma) * np.exp(
            np.asarray(s, dtype=float) / self.c_p
        )
        return out if out.ndim else float(out)

    def d2v_dp2(self, p, s):
        """``v_pp = (1/gamma)(1 + 1/gamma) p**(-2 - 1/gamma) exp(s/c_p) > 0``."""
        p = np.asarray(p, dtype=float)
        out = (
            (1.0 / self.gamma)
            * (1.0 + 1.0 / self.gamma)
            * p ** (-2.0 - 1.0 / self.gamma)
            * np.exp(np.asarray(s, dtype=float) / self.c_p)
        )
        return out if out.ndim else float(out)

    def jump_ratio(self, s_left: float, s_right: float) -> float:
        """Interface factor ``J = exp(-(s_right - s_left) / (2 c_p))``.

        This is the amount by which the odd (velocity-like) part of the
        scaled state is multiplied when crossing the interface left to
        right; ``J = 1`` iff the entropy is continuous.
        """
        return float(np.exp(-(s_right - s_left) / (2.0 * self.c_p)))


@dataclass(frozen=True)
class QuietState:
    """A gamma-law gas at rest under constant pressure ``p_bar``.

    The quiet state is the exact stationary solution about which
    everything else in the package is built; entropy may vary with the
    material coordinate without disturbing it.
    """

    gas: GammaLawGas
    p_bar: float

    def __post_init__(self) -> None:
        if self.p_bar <= 0.0:
            raise ValueError(f"p_bar must be positive, got {self.p_bar}")

    # ------------------------------------------------------------------
    # linearized wavespeed
    # ------------------------------------------------------------------
    def sigma_squared(self, s):
        """Squared slowness ``sigma^2(s) = -v_p(p_bar, s) > 0``."""
        return -self.gas.dv_dp(self.p_bar, s)

    def sigma(self, s):
        """Slowness ``sigma(s) = sqrt(-v_p(p_bar, s))``; also the width
        stretch factor of the non-dimensional material coordinate."""
        return np.sqrt(self.sigma_squared(s))

    def scaled_width(self, width, s):
        """Material width converted to the non-dimensional frame."""
        return self.sigma(s) * width

    # ------------------------------------------------------------------
    # non-dimensionalization
    # ------------------------------------------------------------------
    def nondim_forward(self, p, u, s):
        """Map physical ``(p, u)`` at entropy ``s`` to scaled ``(w, wstar)``.

        ``w`` depends on pressure only; ``wstar`` carries the entropy
        weight, which is what produces the interface factor
        :meth:`GammaLawGas.jump_ratio` at entropy jumps.
        """
        g = self.gas.gamma
        p = np.asarray(p, dtype=float)
        if np.any(p <= 0.0):
            raise ValueError("pressure must be positive")
        beta = (g - 1.0) / (2.0 * g)
        w = (p / self.p_bar) ** beta - 1.0
        wstar = (
            (g - 1.0)
            / (2.0 * np.sqrt(g))
            * np.exp(-np.asarray(s, dtype=float) / (2.0 * self.gas.c_p))
            * self.p_bar ** (-beta)
            * np.asarray(u, dtype=float)
        )
        return w, wstar

    def nondim_inverse(self, w, wstar, s):
        """Exact inverse of :meth:`nondim_forward`."""
        g = self.gas.gamma
        w = np.asarray(w, dtype=float)
        if np.any(1.0 + w <= 0.0):
            raise ValueError("scaled state outside the admissible region 1 + w > 0")
        beta = (g - 1.0) / (2.0 * g)
        p = self.p_bar * (1.0 + w) ** (1.0 / beta)
        u = (
            np.asarray(wstar, dtype=float)
            * (2.0 * np.sqrt(g) / (g - 1.0))
            * np.exp(np.asarray(s, dtype=float) / (2.0 * self.gas.c_p))
            * self.p_bar**beta
        )
        return p, u
