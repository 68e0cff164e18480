"""Sturm-Liouville analysis of the linearized system in the physical frame.

The k-th Fourier mode of the linearization solves the first-order system

    phi' = -omega psi,        psi' = sigma(x)^2 omega phi,        x in [0, ell],

with ``(phi, psi)`` continuous across wavespeed discontinuities.  The module
integrates it in polar (Pruefer) form: with ``rho = sqrt(sigma)``,

    phi = r cos(theta) / rho,     psi = r rho sin(theta),

the angle and log-amplitude satisfy, writing ``mu = (log sigma)' / 2``,

    theta'  = omega sigma - mu sin(2 theta),      (log r)' = mu cos(2 theta),

with the branch-continuous transfer ``theta+ = h(J, theta-)``,
``J = sigma-/sigma+``, at discontinuities.  A companion solution started a
quarter turn ahead completes the fundamental matrix; the frequency
derivative ``zeta = d theta / d omega`` and the inhomogeneous (Duhamel)
quadratures ride along in the same state vector.

Wavespeed models are exponential-in-x per cell (constant entropy slope),
which covers both piecewise-constant profiles (slope zero, interface
factors) and sampled profiles with linear interpolation (continuous,
nonzero slope).  Smooth cells are advanced either in closed form (constant
wavespeed, no source) or by an embedded adaptive Runge-Kutta 4(5) scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .divisors import _h, _h_dx
from .errors import ConvergenceError
from .profiles import PiecewiseConstantProfile, SampledProfile
from .thermo import QuietState

__all__ = [
    "SturmModel",
    "build_sturm_model",
    "integrate_prufer",
    "PruferSolution",
    "fundamental_matrix",
    "prufer_divisor",
    "eigenfrequency",
    "Eigenfrequency",
    "dtheta_domega",
    "eigenfunction",
    "duhamel_bifurcation_coefficient",
    "DuhamelCoefficient",
]

# state vector layout: theta, log r, companion theta, companion log r,
# zeta = d theta/d omega, quad = int r^2 sigma, and the two source quadratures
_N_STATE = 8


@dataclass(frozen=True)
class SturmModel:
    """Wavespeed field on [0, ell] as exponential cells with interface factors.

    Within cell ``i``, ``sigma(x) = sigma_start[i] * exp(2 mu[i] (x - x_nodes[i]))``.
    At the interior node ``i+1`` the field jumps by ``jump_factors[i] =
    sigma(left) / sigma(right)`` (1.0 where continuous).  ``vpp_scale`` is the
    constant ratio of the second pressure derivative of specific volume to
    ``sigma^2`` for the underlying quiet state; it feeds the inhomogeneous
    quadratures and is ``None`` for purely geometric models.
    """

    x_nodes: tuple[float, ...]
    sigma_start: tuple[float, ...]
    mu: tuple[float, ...]
    jump_factors: tuple[float, ...]
    vpp_scale: float | None = None

    def __post_init__(self) -> None:
        n = len(self.sigma_start)
        if len(self.x_nodes) != n + 1:
            raise ValueError("need one more node than cells")
        if len(self.mu) != n:
            raise ValueError("need one slope per cell")
        if len(self.jump_factors) != n - 1:
            raise ValueError("need one interface factor per interior node")
        if any(b <= a for a, b in zip(self.x_nodes, self.x_nodes[1:])):
            raise ValueError("cell nodes must be strictly increasing")
        if any(s <= 0.0 for s in self.sigma_start):
            raise ValueError("wavespeed must be positive")
        if any(j <= 0.0 for j in self.jump_factors):
            raise ValueError("interface factors must be positive")

    @property
    def n_cells(self) -> int:
        return len(self.sigma_start)

    @property
    def ell(self) -> float:
        return self.x_nodes[-1]

    @property
    def rho0(self) -> float:
        return math.sqrt(self.sigma_start[0])

    def sigma_end(self, i: int) -> float:
        """Wavespeed at the right end of cell ``i`` (left limit)."""
        dx = self.x_nodes[i + 1] - self.x_nodes[i]
        return self.sigma_start[i] * math.exp(2.0 * self.mu[i] * dx)

    def sigma_at(self, x) -> np.ndarray:
        """Wavespeed samples, right-continuous at interfaces."""
        x_arr = np.asarray(x, dtype=float)
        nodes = np.asarray(self.x_nodes)
        idx = np.clip(np.searchsorted(nodes, x_arr, side="right") - 1, 0, self.n_cells - 1)
        s0 = np.asarray(self.sigma_start)[idx]
        m = np.asarray(self.mu)[idx]
        return s0 * np.exp(2.0 * m * (x_arr - nodes[idx]))

    def sigma_integral(self) -> float:
        """Exact integral of the wavespeed over [0, ell]."""
        total = 0.0
        for i in range(self.n_cells):
            dx = self.x_nodes[i + 1] - self.x_nodes[i]
            if self.mu[i] == 0.0:
                total += self.sigma_start[i] * dx
            else:
                total += self.sigma_start[i] * math.expm1(2.0 * self.mu[i] * dx) / (
                    2.0 * self.mu[i]
                )
        return total

    def tv_log_sqrt_sigma(self) -> float:
        """Total variation of ``log sqrt(sigma)``: smooth part plus interface part."""
        smooth = sum(
            abs(m) * (b - a) for m, a, b in zip(self.mu, self.x_nodes, self.x_nodes[1:])
        )
        jumped = sum(0.5 * abs(math.log(j)) for j in self.jump_factors)
        return smooth + jumped


def build_sturm_model(profile, quiet: QuietState) -> SturmModel:
    """Assemble the wavespeed model of a profile over a quiet state.

    Piecewise-constant profiles give constant cells whose interface factors
    are exactly the profile's jump factors; sampled profiles give continuous
    exponential cells (linear interpolation of the level between nodes) or a
    staircase with interfaces at midpoints (nearest-node interpolation).
    """
    vpp_scale = (quiet.gas.gamma + 1.0) / (quiet.gas.gamma * quiet.p_bar)
    if isinstance(profile, PiecewiseConstantProfile):
        sig = tuple(float(s) for s in profile.sigma_pieces(quiet))
        nodes = (0.0, *np.cumsum(profile.widths))
        return SturmModel(
            tuple(float(v) for v in nodes),
            sig,
            (0.0,) * profile.n_pieces,
            tuple(float(j) for j in profile.jumps),
            vpp_scale,
        )
    if isinstance(profile, SampledProfile):
        x = np.asarray(profile.x, dtype=float)
        s = np.asarray(profile.s, dtype=float)
        sig = np.asarray(quiet.sigma(s), dtype=float)
        if profile.interp == "linear":
            # log sigma = const + s/(2 c_p), so mu = (log sigma)'/2 = s'/(4 c_p)
            mu = np.diff(s) / (4.0 * quiet.gas.c_p * np.diff(x))
            return SturmModel(
                tuple(float(v) for v in x),
                tuple(float(v) for v in sig[:-1]),
                tuple(float(v) for v in mu),
                (1.0,) * (x.size - 2),
                vpp_scale,
            )
        mids = 0.5 * (x[:-1] + x[1:])
        nodes = (float(x[0]), *(float(m) for m in mids), float(x[-1]))
        jump_factors = tuple(float(sig[i] / sig[i + 1]) for i in range(x.size - 1))
        return SturmModel(
            nodes,
            tuple(float(v) for v in sig),
            (0.0,) * x.size,
            jump_factors,
            vpp_scale,
        )
    raise TypeError(f"unsupported profile type {type(profile).__name__}")


# ----------------------------------------------------------------------
# integration
# ----------------------------------------------------------------------
_DP_C = (0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0)
_DP_A = (
    (),
    (0.2,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0),
)
_DP_B5 = (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0)
_DP_ERR = tuple(
    b5 - b4
    for b5, b4 in zip(
        _DP_B5,
        (
            5179.0 / 57600.0,
            0.0,
            7571.0 / 16695.0,
            393.0 / 640.0,
            -92097.0 / 339200.0,
            187.0 / 2100.0,
            1.0 / 40.0,
        ),
    )
)


def _cell_rhs(omega, sigma0, mu, x0, src_scale, rho0):
    """Right-hand side of the Pruefer state in one exponential cell."""

    def rhs(x: float, y: np.ndarray) -> np.ndarray:
        sigma = sigma0 * math.exp(2.0 * mu * (x - x0))
        th, lr, tht, lrt, ze, _q, _a, _b = y
        s2, c2 = math.sin(2.0 * th), math.cos(2.0 * th)
        r2 = math.exp(2.0 * lr)
        out = np.empty(_N_STATE)
        out[0] = omega * sigma - mu * s2
        out[1] = mu * c2
        out[2] = omega * sigma + mu * math.sin(2.0 * tht)
        out[3] = -mu * math.cos(2.0 * tht)
        out[4] = sigma - 2.0 * mu * c2 * ze
        out[5] = r2 * sigma
        if src_scale:
            inv_rho = 1.0 / math.sqrt(sigma)
            phi = rho0 * math.exp(lr) * inv_rho * math.cos(th)
            phi_t = -math.exp(lrt) * inv_rho * math.sin(tht) / rho0
            vpp_omega = src_scale * sigma * sigma * omega
            out[6] = vpp_omega * phi * phi_t
            out[7] = -vpp_omega * phi * phi
        else:
            out[6] = 0.0
            out[7] = 0.0
        return out

    return rhs


def _rk45(rhs, x0: float, x1: float, y: np.ndarray, rtol: float, atol: float) -> np.ndarray:
    """Advance ``y`` from ``x0`` to ``x1`` with embedded RK4(5) step control."""
    span = x1 - x0
    if span <= 0.0:
        return y
    x = x0
    h = span
    k = [None] * 7
    while x < x1 - 1e-14 * (abs(x1) + 1.0):
        h = min(h, x1 - x)
        k[0] = rhs(x, y)
        for i in range(1, 7):
            yi = y.copy()
            for j, a in enumerate(_DP_A[i]):
                if a:
                    yi += (h * a) * k[j]
            k[i] = rhs(x + _DP_C[i] * h, yi)
        y5 = y.copy()
        for j, b in enumerate(_DP_B5):
            if b:
                y5 += (h * b) * k[j]
        err = np.zeros(_N_STATE)
        for j, e in enumerate(_DP_ERR):
            if e:
                err += (h * e) * k[j]
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
        if err_norm <= 1.0:
            x += h
            y = y5
            grow = 5.0 if err_norm == 0.0 else min(5.0, 0.9 * err_norm ** -0.2)
            h *= grow
        else:
            h *= max(0.2, 0.9 * err_norm ** -0.2)
            if h < 1e-14 * span:
                raise ConvergenceError(f"step size underflow at x={x}")
    return y


def _apply_interface(y: np.ndarray, j: float) -> None:
    """Exact transfer of the Pruefer state across a wavespeed discontinuity."""
    th, tht = y[0], y[2]
    c, s = math.cos(th), math.sin(th)
    y[1] += 0.5 * math.log(c * c / j + j * s * s)
    y[4] *= _h_dx(j, th)
    y[0] = _h(j, th)
    ct, st = math.cos(tht), math.sin(tht)
    y[3] += 0.5 * math.log(st * st / j + j * ct * ct)
    y[2] = _h(1.0 / j, tht)


@dataclass(frozen=True)
class PruferSolution:
    """Pruefer state along the interval, recorded at requested points.

    ``states`` has one row per point: the eight state components followed by
    the local wavespeed (left limit at interfaces), which fixes the polar
    radius ``rho = sqrt(sigma)`` used to reconstruct solution values.
    """

    model: SturmModel
    omega: float
    x: np.ndarray
    states: np.ndarray

    def _col(self, i: int) -> np.ndarray:
        return self.states[:, i]

    @property
    def theta_end(self) -> float:
        return float(self.states[-1, 0])

    @property
    def zeta_end(self) -> float:
        return float(self.states[-1, 4])

    @property
    def source_end(self) -> tuple[float, float]:
        return float(self.states[-1, 6]), float(self.states[-1, 7])

    def columns(self) -> np.ndarray:
        """Identity-normalized fundamental matrices, shape ``(len(x), 2, 2)``."""
        rho0 = self.model.rho0
        th, lr = self._col(0), self._col(1)
        tht, lrt = self._col(2), self._col(3)
        rho = np.sqrt(self._col(8))
        r, rt = np.exp(lr), np.exp(lrt)
        out = np.empty((self.x.size, 2, 2))
        out[:, 0, 0] = rho0 * r / rho * np.cos(th)
        out[:, 1, 0] = rho0 * r * rho * np.sin(th)
        out[:, 0, 1] = -rt / rho * np.sin(tht) / rho0
        out[:, 1, 1] = rt * rho * np.cos(tht) / rho0
        return out

    def angle_separation(self) -> np.ndarray:
        """``theta - companion theta`` at the recorded points."""
        return self._col(0) - self._col(2)

    def determinants(self) -> np.ndarray:
        """Wronskians ``r r~ cos(theta - theta~)`` at the recorded points."""
        return np.exp(self._col(1) + self._col(3)) * np.cos(self.angle_separation())

    def quadrature_gap(self) -> float:
        """Residual of the identity ``r^2 zeta = int r^2 sigma`` at the right end."""
        r2 = math.exp(2.0 * self.states[-1, 1])
        return abs(r2 * self.states[-1, 4] - self.states[-1, 5])


def integrate_prufer(
    model: SturmModel,
    omega: float,
    x_eval=None,
    include_source: bool = False,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> PruferSolution:
    """March the Pruefer state across all cells, recording at ``x_eval``.

    Constant-wavespeed cells advance in closed form when no source
    quadrature is requested; all other cells use the adaptive embedded
    scheme.  Recorded states at interface locations are left limits.  The
    right endpoint is always recorded last.
    """
    if omega <= 0.0:
        raise ValueError(f"frequency must be positive, got {omega}")
    ell = model.ell
    if x_eval is None:
        pts = np.array([ell])
    else:
        pts = np.atleast_1d(np.asarray(x_eval, dtype=float))
        if np.any(pts < 0.0) or np.any(pts > ell * (1.0 + 1e-12)):
            raise ValueError("evaluation points must lie in [0, ell]")
        if np.any(np.diff(pts) < 0.0):
            raise ValueError("evaluation points must be sorted")
        if pts.size == 0 or pts[-1] < ell:
            pts = np.append(pts, ell)
    src = (model.vpp_scale or 0.0) if include_source else 0.0
    if include_source and model.vpp_scale is None:
        raise ValueError("model carries no thermodynamic scale for the source terms")
    rho0 = model.rho0

    y = np.zeros(_N_STATE)
    states = np.empty((pts.size, _N_STATE + 1))
    ip = 0
    while ip < pts.size and pts[ip] <= 0.0:
        states[ip, :_N_STATE] = y
        states[ip, _N_STATE] = model.sigma_start[0]
        ip += 1
    for c in range(model.n_cells):
        x_lo, x_hi = model.x_nodes[c], model.x_nodes[c + 1]
        sigma0, mu = model.sigma_start[c], model.mu[c]
        rhs = None if (mu == 0.0 and not src) else _cell_rhs(omega, sigma0, mu, x_lo, src, rho0)
        x_cur = x_lo
        while True:
            x_next = pts[ip] if ip < pts.size and pts[ip] < x_hi else x_hi
            if x_next > x_cur:
                if rhs is None:
                    d = x_next - x_cur
                    adv = sigma0 * d
                    y[0] += omega * adv
                    y[2] += omega * adv
                    y[4] += adv
                    y[5] += math.exp(2.0 * y[1]) * adv
                else:
                    y = _rk45(rhs, x_cur, x_next, y, rtol, atol)
                x_cur = x_next
            if ip < pts.size and pts[ip] <= x_cur:
                states[ip, :_N_STATE] = y
                states[ip, _N_STATE] = sigma0 * math.exp(2.0 * mu * (x_cur - x_lo))
                ip += 1
                continue
            if x_cur >= x_hi:
                break
        if c < model.n_cells - 1:
            j = model.jump_factors[c]
            if j != 1.0:
                _apply_interface(y, j)
    return PruferSolution(model, float(omega), pts, states)


def fundamental_matrix(model: SturmModel, omega: float, x_eval=None) -> np.ndarray:
    """Identity-normalized fundamental matrix of the mode system.

    Returns the matrix at the right endpoint, or the stacked matrices at
    ``x_eval`` when given.  The Wronskian is 1 at every point up to
    integration error.
    """
    sol = integrate_prufer(model, omega, x_eval)
    mats = sol.columns()
    return mats if x_eval is not None else mats[-1]


def prufer_divisor(
    model: SturmModel, period: float, k: int, flavor: str = "periodic-tile"
) -> float:
    """The k-th small divisor, computed by integration in the physical frame.

    The mode-k coefficient pair ``(a, b)`` of the scaled representation maps
    to the solution pair as ``(phi, psi) = (a, sigma b)``; propagating the
    pure cosine column and converting back at the right end reproduces the
    matrix-product divisor of the correspondingly scaled profile, up to
    integration error only.
    """
    if k < 1:
        raise ValueError(f"mode index must be >= 1, got {k}")
    if flavor not in ("periodic-tile", "acoustic"):
        raise ValueError(f"unknown flavor {flavor!r}")
    omega = k * 2.0 * math.pi / period
    sol = integrate_prufer(model, omega)
    psi_mat = sol.columns()[-1]
    sigma_end = float(sol.states[-1, _N_STATE])
    a_n = float(psi_mat[0, 0])
    b_n = float(psi_mat[1, 0]) / sigma_end
    if flavor == "acoustic":
        return b_n
    return (b_n, -a_n, -b_n, a_n)[k % 4]


# ----------------------------------------------------------------------
# eigenfrequencies and eigenfunctions
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Eigenfrequency:
    """The k-th frequency at which the output angle reaches ``k pi / 2``."""

    k: int
    omega: float
    period: float
    residual: float
    slope: float  # d theta(ell) / d omega at omega_k


def eigenfrequency(model: SturmModel, k: int) -> Eigenfrequency:
    """Solve ``theta(ell; omega) = k pi / 2`` for the k-th eigenfrequency.

    The output angle deviates from ``omega int sigma`` by at most the total
    variation of ``log sqrt(sigma)``, which brackets the root; the angle is
    strictly increasing in ``omega`` (its derivative is the positive
    quadrature ``int r^2 sigma / r(ell)^2``), so bisection to width 1e-8
    followed by two Newton steps converges.
    """
    if k < 1:
        raise ValueError(f"mode index must be >= 1, got {k}")
    target = k * math.pi / 2.0
    i_sigma = model.sigma_integral()
    tv = model.tv_log_sqrt_sigma()
    lo = max(1e-12, (target - tv) / i_sigma)
    hi = (target + tv) / i_sigma + 1e-12

    def angle(w: float) -> float:
        return integrate_prufer(model, w).theta_end

    while angle(lo) > target:  # defensive; the variation bound makes these unreachable
        lo *= 0.5
    while angle(hi) < target:
        hi *= 2.0
    while hi - lo > 1e-8:
        mid = 0.5 * (lo + hi)
        if angle(mid) <= target:
            lo = mid
        else:
            hi = mid
    omega = 0.5 * (lo + hi)
    slope = math.nan
    for _ in range(2):
        sol = integrate_prufer(model, omega)
        slope = sol.zeta_end
        omega -= (sol.theta_end - target) / slope
    residual = abs(integrate_prufer(model, omega).theta_end - target)
    return Eigenfrequency(
        k, float(omega), float(k * 2.0 * math.pi / omega), float(residual), float(slope)
    )


def dtheta_domega(model: SturmModel, omega: float) -> float:
    """Frequency derivative of the output angle; strictly positive."""
    return integrate_prufer(model, omega).zeta_end


def eigenfunction(model: SturmModel, k: int, x_eval) -> tuple[np.ndarray, np.ndarray, Eigenfrequency]:
    """Sample the k-th eigenfunction pair, normalized to ``phi(0) = 1``.

    Returns ``(phi, psi, eig)`` at the points ``x_eval``; for odd ``k`` the
    first component vanishes at the right end, for even ``k`` the second.
    """
    eig = eigenfrequency(model, k)
    sol = integrate_prufer(model, eig.omega, x_eval)
    mats = sol.columns()
    n = np.atleast_1d(np.asarray(x_eval)).size
    return mats[:n, 0, 0], mats[:n, 1, 0], eig


# ----------------------------------------------------------------------
# the bifurcation sign via Duhamel quadratures
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class DuhamelCoefficient:
    """Inhomogeneous response of the mode system at its own eigenfrequency."""

    k: int
    omega: float
    a_end: float
    b_end: float
    phi_hat: float
    psi_hat: float
    coefficient: float


def duhamel_bifurcation_coefficient(model: SturmModel, k: int) -> DuhamelCoefficient:
    """Quadrature coefficients of the quadratic response at the k-th eigenfrequency.

    Integrates ``a' = v_pp omega phi phi~`` and ``b' = -v_pp omega phi^2``
    along the interval, forms the endpoint response
    ``(phi^, psi^) = Psi(ell) (a, b)``, and reads off the coefficient that
    the bifurcation equation pairs against: the first component for odd
    ``k``, the second for even.  Since ``v_pp`` has one sign, ``b(ell)``
    has the opposite sign; this is checked and guarantees the coefficient
    is nonzero for odd ``k``.
    """
    if model.vpp_scale is None:
        raise ValueError("model carries no thermodynamic scale for the source terms")
    eig = eigenfrequency(model, k)
    sol = integrate_prufer(model, eig.omega, include_source=True)
    a_end, b_end = sol.source_end
    if model.vpp_scale > 0.0 and not b_end < 0.0:
        raise AssertionError(f"source quadrature must be negative, got {b_end}")
    if model.vpp_scale < 0.0 and not b_end > 0.0:
        raise AssertionError(f"source quadrature must be positive, got {b_end}")
    psi_mat = sol.columns()[-1]
    phi_hat = psi_mat[0, 0] * a_end + psi_mat[0, 1] * b_end
    psi_hat = psi_mat[1, 0] * a_end + psi_mat[1, 1] * b_end
    coefficient = phi_hat if k % 2 == 1 else psi_hat
    return DuhamelCoefficient(
        k, eig.omega, float(a_end), float(b_end), float(phi_hat), float(psi_hat), float(coefficient)
    )
