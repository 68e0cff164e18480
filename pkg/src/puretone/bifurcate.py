"""Liapunov-Schmidt solver for pure-tone states of the boundary operator.

The linearized boundary operator acts mode-diagonally on even data: the
k-th cosine mode returns its small divisor times the k-th sine mode.  At
the k-th reference period the k-th divisor vanishes, so the kernel is the
two-dimensional span of the constant and of the k-th cosine.  This module
splits even data accordingly,

    y = z * 1 + alpha * cos_k + W,        W in the complement,

solves the auxiliary (complement) equation with a frozen diagonal
preconditioner built from the nonzero divisors, and drives the remaining
scalar bifurcation function -- the k-th sine coefficient of the boundary
residual -- to zero in ``z`` by a safeguarded secant iteration.  The
result is a genuinely nonlinear time-periodic state agreeing with the
linear k-mode at leading order in ``alpha``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .divisors import base_frequency, divisor_pc
from .errors import ConvergenceError, ResonanceError
from .evolve import boundary_operator
from .profiles import PiecewiseConstantProfile
from .series import TrigSeries

__all__ = [
    "Decomposition",
    "build_decomposition",
    "AuxiliarySolution",
    "solve_auxiliary",
    "bifurcation_function",
    "PureToneSolution",
    "solve_pure_tone",
    "continuation",
    "ContinuationResult",
]


@dataclass(frozen=True)
class Decomposition:
    """Kernel/complement split of even data at the k-th reference period.

    ``divisors[j-1]`` is the j-th small divisor at the reference period;
    the k-th entry is numerically zero (the kernel direction) and every
    other retained entry is bounded away from zero, which the constructor
    enforces.  The reciprocal divisors form the frozen preconditioner of
    the auxiliary equation.
    """

    profile: PiecewiseConstantProfile
    k: int
    n_modes: int
    nu: float
    flavor: str
    period: float
    divisors: np.ndarray
    resonance_tol: float

    @property
    def kernel_dimension(self) -> int:
        return 2  # the constant and the k-th cosine

    def complement_indices(self) -> np.ndarray:
        idx = np.arange(1, self.n_modes + 1)
        return idx[idx != self.k]


def build_decomposition(
    profile: PiecewiseConstantProfile,
    k: int,
    n_modes: int,
    nu: float,
    flavor: str = "periodic-tile",
    resonance_tol: float = 1e-9,
) -> Decomposition:
    """Fix the reference period of mode ``k`` and audit every retained divisor.

    Raises :class:`ResonanceError` when any complement divisor falls below
    ``resonance_tol`` -- the preconditioner would blow up -- and reports the
    offending mode indices.
    """
    if not 1 <= k <= n_modes:
        raise ValueError(f"need 1 <= k <= n_modes, got k={k}, n_modes={n_modes}")
    if flavor == "acoustic" and k % 2 == 1:
        raise ValueError("acoustic kernels exist only at even mode numbers")
    base = base_frequency(profile, k)
    deltas = np.array(
        [divisor_pc(profile, base.period, j, flavor) for j in range(1, n_modes + 1)]
    )
    if abs(deltas[k - 1]) > 1e-8:
        raise ArithmeticError(
            f"divisor {k} is {deltas[k - 1]:.3e} at its own reference period; "
            "the frequency solve is inconsistent"
        )
    small = [int(j) for j in range(1, n_modes + 1) if j != k and abs(deltas[j - 1]) < resonance_tol]
    if small:
        raise ResonanceError(
            f"profile is resonant at the mode-{k} reference period: "
            f"divisors of modes {small} fall below {resonance_tol:.1e}"
        )
    return Decomposition(
        profile, k, n_modes, float(nu), flavor, base.period, deltas, resonance_tol
    )


def _assemble(dec: Decomposition, alpha: float, z: float, w: np.ndarray) -> TrigSeries:
    """Even data ``z + alpha cos_k + W`` from complement coefficients ``w``."""
    cos = np.zeros(dec.n_modes + 1)
    cos[0] = z
    cos[dec.k] = alpha
    cos[dec.complement_indices()] = w
    return TrigSeries(dec.period, cos, np.zeros(dec.n_modes + 1))


@dataclass(frozen=True)
class AuxiliarySolution:
    """Complement solution at fixed kernel coordinates ``(alpha, z)``."""

    y: TrigSeries
    w: np.ndarray
    residual: TrigSeries
    weighted_residual: float
    n_iterations: int


def solve_auxiliary(
    dec: Decomposition,
    alpha: float,
    z: float,
    w0: np.ndarray | None = None,
    tol: float = 1e-12,
    max_iterations: int = 200,
) -> AuxiliarySolution:
    """Drive the complement residual to zero at frozen kernel coordinates.

    Iterates the divisor-preconditioned correction ``a_j <- a_j - r_j / delta_j``
    over the complement modes, where ``r_j`` are the sine coefficients of the
    boundary residual.  Convergence is measured by the preconditioned norm
    ``sqrt(sum (r_j / delta_j)^2)``, which bounds the correction size.
    """
    idx = dec.complement_indices()
    inv_delta = 1.0 / dec.divisors[idx - 1]
    w = np.zeros(idx.size) if w0 is None else np.asarray(w0, dtype=float).copy()
    for it in range(1, max_iterations + 1):
        y = _assemble(dec, alpha, z, w)
        residual = boundary_operator(dec.profile, y, dec.nu, dec.flavor)
        weighted = residual.sin[idx] * inv_delta
        norm = float(np.sqrt(np.sum(weighted**2)))
        if norm < tol:
            return AuxiliarySolution(y, w, residual, norm, it)
        w = w - weighted
    raise ConvergenceError(
        f"auxiliary iteration stalled at weighted residual {norm:.3e} "
        f"after {max_iterations} iterations (alpha={alpha:.3e}, z={z:.3e})"
    )


def bifurcation_function(
    dec: Decomposition,
    alpha: float,
    z: float,
    w0: np.ndarray | None = None,
    tol: float = 1e-12,
) -> tuple[float, AuxiliarySolution]:
    """The scalar bifurcation function ``f(alpha, z)`` and its auxiliary state.

    ``f`` is the k-th sine coefficient of the boundary residual at the
    auxiliary solution; its zeros in ``z`` are pure-tone states.
    """
    aux = solve_auxiliary(dec, alpha, z, w0=w0, tol=tol)
    return float(aux.residual.sin[dec.k]), aux


@dataclass(frozen=True)
class PureToneSolution:
    """A nonlinear time-periodic state with prescribed k-mode amplitude."""

    y0: TrigSeries
    k: int
    alpha: float
    z: float
    period: float
    residual_norm: float
    deviation_norm: float
    n_function_evaluations: int

    def deviation_ratio_base(self) -> float:
        """Deviation from the pure linear mode, for quadratic-order checks."""
        return self.deviation_norm


def _solution_from(dec: Decomposition, alpha: float, z: float, aux: AuxiliarySolution, n_evals: int) -> PureToneSolution:
    residual_norm = float(np.max(np.abs(aux.residual.sin)))
    linear = TrigSeries.pure_cosine(dec.k, dec.n_modes, dec.period, alpha)
    deviation = (aux.y - linear).coeff_norm()
    return PureToneSolution(
        aux.y, dec.k, alpha, z, dec.period, residual_norm, float(deviation), n_evals
    )


def solve_pure_tone(
    dec: Decomposition,
    alpha: float,
    z0: float = 0.0,
    w0: np.ndarray | None = None,
    aux_tol: float = 1e-12,
    f_tol: float = 1e-13,
    max_secant_steps: int = 60,
    max_expansions: int = 4,
) -> PureToneSolution:
    """Solve the bifurcation equation in ``z`` at fixed amplitude ``alpha``.

    A first Newton-like guess from a finite-difference slope seeds a
    bracket around the root; the bracket is expanded geometrically at most
    ``max_expansions`` times if it fails to straddle a sign change, then a
    bracket-safeguarded secant iteration polishes the root to ``f_tol``.
    The auxiliary complement solve is warm-started across evaluations.
    """
    if alpha == 0.0:
        raise ValueError("amplitude must be nonzero; the zero state is trivial")
    warm = {"w": w0}
    evals = 0

    def f_of(zv: float) -> tuple[float, AuxiliarySolution]:
        nonlocal evals
        fv, aux = bifurcation_function(dec, alpha, zv, w0=warm["w"], tol=aux_tol)
        warm["w"] = aux.w
        evals += 1
        return fv, aux

    f0, aux0 = f_of(z0)
    if abs(f0) < f_tol:
        return _solution_from(dec, alpha, z0, aux0, evals)
    dz = 1e-7 * max(abs(alpha), abs(z0), 1e-7)
    f1, _ = f_of(z0 + dz)
    slope = (f1 - f0) / dz
    if slope == 0.0:
        raise ConvergenceError("bifurcation function is locally flat in z")
    step = -f0 / slope
    z_lo, z_hi = z0 + step - abs(step), z0 + step + abs(step)
    half = abs(step)
    if half == 0.0:
        half = dz
        z_lo, z_hi = z0 - half, z0 + half
    f_lo, aux_lo = f_of(z_lo)
    f_hi, aux_hi = f_of(z_hi)
    expansions = 0
    while f_lo * f_hi > 0.0:
        if expansions >= max_expansions:
            raise ConvergenceError(
                f"no sign change of the bifurcation function within "
                f"[{z_lo:.6e}, {z_hi:.6e}] after {expansions} expansions"
            )
        half *= 4.0
        center = z0 + step
        z_lo, z_hi = center - half, center + half
        f_lo, aux_lo = f_of(z_lo)
        f_hi, aux_hi = f_of(z_hi)
        expansions += 1
    if abs(f_lo) < f_tol:
        return _solution_from(dec, alpha, z_lo, aux_lo, evals)
    if abs(f_hi) < f_tol:
        return _solution_from(dec, alpha, z_hi, aux_hi, evals)
    za, fa = z_lo, f_lo
    zb, fb = z_hi, f_hi
    for _ in range(max_secant_steps):
        zc = zb - fb * (zb - za) / (fb - fa)
        if not z_lo < zc < z_hi:  # secant left the bracket: bisect instead
            zc = 0.5 * (z_lo + z_hi)
        fc, auxc = f_of(zc)
        if abs(fc) < f_tol:
            return _solution_from(dec, alpha, zc, auxc, evals)
        if f_lo * fc < 0.0:
            z_hi = zc
        else:
            z_lo, f_lo = zc, fc
        za, fa = zb, fb
        zb, fb = zc, fc
    raise ConvergenceError(
        f"secant iteration did not reach |f| < {f_tol:.1e}; last f = {fb:.3e}"
    )


@dataclass(frozen=True)
class ContinuationResult:
    """Solutions along an amplitude schedule, with the first failure if any."""

    solutions: tuple[PureToneSolution, ...]
    failed_alpha: float | None
    failure_reason: str | None


def continuation(
    dec: Decomposition,
    alphas,
    aux_tol: float = 1e-12,
    f_tol: float = 1e-13,
) -> ContinuationResult:
    """Solve along an increasing amplitude schedule with warm starts.

    Marches through ``alphas``, seeding each solve with the previous
    complement coefficients and kernel offset.  Stops at the first
    amplitude where the solver fails -- an empirical trust-region boundary
    -- and reports the successes together with the failure point.
    """
    sols: list[PureToneSolution] = []
    z_prev = 0.0
    w_prev: np.ndarray | None = None
    for alpha in alphas:
        try:
            sol = solve_pure_tone(
                dec, float(alpha), z0=z_prev, w0=w_prev, aux_tol=aux_tol, f_tol=f_tol
            )
        except (ConvergenceError, ResonanceError) as err:
            return ContinuationResult(tuple(sols), float(alpha), str(err))
        sols.append(sol)
        z_prev = sol.z
        idx = dec.complement_indices()
        w_prev = sol.y0.cos[idx]
    return ContinuationResult(tuple(sols), None, None)
