"""Small divisors of the linearized problem for piecewise-constant entropy.

On a profile with scaled widths ``theta_0..theta_n`` and interface factors
``J_1..J_n``, the linearization acts on the k-th coefficient pair through
the 2x2 product

    P^{-k} . R(k w theta_n) . M(J_n) ... M(J_1) . R(k w theta_0),    w = 2 pi / T,

and the k-th divisor is the odd-component output of the cosine input,

    delta_k = (0 1) P^{-k} R(...) ... R(...) (1 0)^T            (periodic tile)
    delta_k = (0 1)        R(...) ... R(...) (1 0)^T            (acoustic).

This module evaluates divisors and their parameter gradients, tracks the
angle representation through the branch-continuous jump-angle function,
solves for base frequencies (the periods making ``delta_k = 0``), and
classifies resonances.  Everything here is exact linear algebra -- no ODE
integration and no truncation beyond floating point.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .profiles import PiecewiseConstantProfile

__all__ = [
    "rotation",
    "jump_matrix",
    "quarter",
    "jump_angle",
    "h",
    "jump_angle_dx",
    "jump_angle_dj",
    "divisor_pc",
    "divisor_gradient",
    "divisor_table",
    "DivisorTable",
    "gamma_angles",
    "final_angle",
    "base_frequency",
    "BaseFrequency",
    "nonresonance_check",
    "NonresonanceReport",
    "resonance_scan",
    "ScanResult",
]

_FLAVORS = ("periodic-tile", "acoustic")

# tan magnitude past which an angle is treated as sitting on the axis
_AXIS_TAN = 1.0e15


def rotation(phi: float) -> np.ndarray:
    """Counterclockwise rotation matrix through ``phi``."""
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


def jump_matrix(j: float) -> np.ndarray:
    """Interface action on a coefficient pair: ``diag(1, J)``."""
    return np.array([[1.0, 0.0], [0.0, float(j)]])


def quarter() -> np.ndarray:
    """Quarter-turn ``P = R(pi/2)`` (exact integer entries)."""
    return np.array([[0.0, -1.0], [1.0, 0.0]])


def _row_after_quarter_power(v: np.ndarray, k: int) -> float:
    """Return ``(0 1) P^{-k} v`` using exact integer arithmetic for ``P^{-k}``."""
    r = k % 4
    if r == 0:
        return float(v[1])
    if r == 1:
        return float(-v[0])
    if r == 2:
        return float(-v[1])
    return float(v[0])


def _unpack(profile: PiecewiseConstantProfile) -> tuple[np.ndarray, np.ndarray]:
    return np.asarray(profile.widths, dtype=float), np.asarray(profile.jumps, dtype=float)


def _fingerprint(profile: PiecewiseConstantProfile, period: float) -> str:
    payload = f"{profile.to_json()}|T={period!r}".encode()
    return hashlib.sha256(payload).hexdigest()[:16]


# ----------------------------------------------------------------------
# the branch-continuous jump-angle function
# ----------------------------------------------------------------------
def _h(j: float, x: float) -> float:
    """Scalar branch-continuous ``Arctan(J tan x)``; hot path, math-module only."""
    w = round(x / math.pi)
    t = math.tan(x - w * math.pi)
    if abs(t) > _AXIS_TAN:
        return x
    return math.atan(j * t) + w * math.pi


def _h_dx(j: float, x: float) -> float:
    t = math.tan(x - round(x / math.pi) * math.pi)
    if abs(t) > _AXIS_TAN:
        return 1.0 / j
    return j * (1.0 + t * t) / (1.0 + (j * t) ** 2)


def _h_dj(j: float, x: float) -> float:
    t = math.tan(x - round(x / math.pi) * math.pi)
    if abs(t) > _AXIS_TAN:
        return 0.0
    return t / (1.0 + (j * t) ** 2)


def jump_angle(j: float, x):
    """Angle of ``diag(1, J)`` applied to a unit vector at angle ``x``.

    Computed as ``Arctan(J tan x)`` continued across branch boundaries: the
    branch integer is the winding count ``round(x / pi)``, which follows any
    continuous trajectory of ``x`` because the interface map never moves an
    angle out of its quadrant.  Axis points are fixed: ``h(J, m pi/2) = m pi/2``.
    """
    if j <= 0.0:
        raise ValueError(f"interface factor must be positive, got {j}")
    if np.ndim(x) == 0:
        return _h(j, float(x))
    x_arr = np.asarray(x, dtype=float)
    winding = np.round(x_arr / np.pi)
    t = np.tan(x_arr - winding * np.pi)
    out = np.arctan(j * t) + winding * np.pi
    return np.where(np.abs(t) > _AXIS_TAN, x_arr, out)


def jump_angle_dx(j: float, x):
    """Partial of :func:`jump_angle` in the angle: ``J (1 + t^2) / (1 + J^2 t^2)``."""
    if np.ndim(x) == 0:
        return _h_dx(j, float(x))
    x_arr = np.asarray(x, dtype=float)
    t = np.tan(x_arr - np.round(x_arr / np.pi) * np.pi)
    return np.where(
        np.abs(t) > _AXIS_TAN, 1.0 / j, j * (1.0 + t * t) / (1.0 + (j * t) ** 2)
    )


def jump_angle_dj(j: float, x):
    """Partial of :func:`jump_angle` in the interface factor: ``t / (1 + J^2 t^2)``."""
    if np.ndim(x) == 0:
        return _h_dj(j, float(x))
    x_arr = np.asarray(x, dtype=float)
    t = np.tan(x_arr - np.round(x_arr / np.pi) * np.pi)
    return np.where(np.abs(t) > _AXIS_TAN, 0.0, t / (1.0 + (j * t) ** 2))


# Contract alias: the branch-continuous interface angle map is exposed
# under its short conventional name as well.
h = jump_angle


# ----------------------------------------------------------------------
# divisors
# ----------------------------------------------------------------------
def divisor_pc(
    profile: PiecewiseConstantProfile, period: float, k: int, flavor: str = "periodic-tile"
) -> float:
    """The k-th small divisor at reference period ``period``."""
    if k < 1:
        raise ValueError(f"mode index must be >= 1, got {k}")
    if period <= 0.0:
        raise ValueError(f"period must be positive, got {period}")
    if flavor not in _FLAVORS:
        raise ValueError(f"unknown flavor {flavor!r}")
    widths, jumps = _unpack(profile)
    omega_hat = k * 2.0 * np.pi / period
    v = np.array([1.0, 0.0])
    for m, theta in enumerate(widths):
        v = rotation(omega_hat * theta) @ v
        if m < jumps.size:
            v = np.array([v[0], jumps[m] * v[1]])
    if flavor == "acoustic":
        return float(v[1])
    return _row_after_quarter_power(v, k)


def divisor_gradient(
    profile: PiecewiseConstantProfile, period: float, k: int, flavor: str = "periodic-tile"
) -> tuple[float, np.ndarray, np.ndarray]:
    """Divisor and its exact gradients in the widths and interface factors.

    Returns ``(delta_k, d_delta/d_theta, d_delta/d_J)``.  The gradients come
    from splitting the matrix product at the differentiated factor: with
    ``u`` the partial product on the left and ``v`` on the right,
    ``d/d theta_m`` inserts ``(k 2 pi / T) P`` next to the rotation and
    ``d/d J_m`` replaces the interface matrix by ``diag(0, 1)``.
    """
    widths, jumps = _unpack(profile)
    omega_hat = k * 2.0 * np.pi / period
    factors: list[np.ndarray] = []
    for m, theta in enumerate(widths):
        factors.append(rotation(omega_hat * theta))
        if m < jumps.size:
            factors.append(jump_matrix(jumps[m]))

    n_f = len(factors)
    prefix = [np.array([1.0, 0.0])]
    for f in factors:
        prefix.append(f @ prefix[-1])

    if flavor == "acoustic":
        suffix_end = np.array([0.0, 1.0])
    else:
        r = k % 4
        suffix_end = {
            0: np.array([0.0, 1.0]),
            1: np.array([-1.0, 0.0]),
            2: np.array([0.0, -1.0]),
            3: np.array([1.0, 0.0]),
        }[r]
    suffix = [suffix_end]
    for f in reversed(factors):
        suffix.append(suffix[-1] @ f)
    suffix.reverse()  # suffix[q] = row through factors q..end

    delta = float(suffix[0] @ prefix[0])
    p_mat = quarter()
    e_mat = np.array([[0.0, 0.0], [0.0, 1.0]])
    d_theta = np.empty(widths.size)
    d_jump = np.empty(jumps.size)
    for m in range(widths.size):
        q = 2 * m  # index of the rotation factor for piece m
        d_theta[m] = omega_hat * float(suffix[q + 1] @ (p_mat @ prefix[q + 1]))
    for m in range(jumps.size):
        q = 2 * m + 1  # index of the interface factor for jump m+1
        d_jump[m] = float(suffix[q + 1] @ (e_mat @ prefix[q]))
    return delta, d_theta, d_jump


@dataclass(frozen=True)
class DivisorTable:
    """Divisors ``delta_j`` for ``j = 1..j_max`` at a fixed reference period."""

    period: float
    flavor: str
    deltas: np.ndarray
    fingerprint: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "deltas", np.asarray(self.deltas, dtype=float))

    @property
    def j_max(self) -> int:
        return self.deltas.size

    def delta(self, j: int) -> float:
        return float(self.deltas[j - 1])

    def to_csv(self) -> str:
        lines = ["j,delta_j"]
        lines += [f"{j},{d:.17g}" for j, d in enumerate(self.deltas, start=1)]
        return "\n".join(lines) + "\n"


def divisor_table(
    profile: PiecewiseConstantProfile,
    period: float,
    j_max: int,
    flavor: str = "periodic-tile",
) -> DivisorTable:
    """Tabulate ``delta_j`` for ``1 <= j <= j_max`` and check the product bound."""
    deltas = np.array([divisor_pc(profile, period, j, flavor) for j in range(1, j_max + 1)])
    bound = float(np.prod([max(1.0, j) for j in profile.jumps], initial=1.0))
    worst = float(np.max(np.abs(deltas))) if deltas.size else 0.0
    if worst > bound * (1.0 + 1e-12) + 1e-12:
        raise AssertionError(f"divisor bound violated: {worst} > {bound}")
    return DivisorTable(period, flavor, deltas, _fingerprint(profile, period))


# ----------------------------------------------------------------------
# angle representation and base frequencies
# ----------------------------------------------------------------------
def _final_angle(widths, jumps, omega: float) -> tuple[float, float]:
    """Chain output angle and its omega-derivative; scalar hot path."""
    angle, dangle = 0.0, 0.0
    for theta, j in zip(widths, jumps):
        arg = omega * theta + angle
        darg = theta + dangle
        angle = _h(j, arg)
        dangle = _h_dx(j, arg) * darg
    return omega * widths[-1] + angle, widths[-1] + dangle


def gamma_angles(
    profile: PiecewiseConstantProfile, omega: float, with_derivative: bool = False
):
    """Post-interface angles ``gamma_1..gamma_n`` of the chain at frequency ``omega``.

    ``gamma_1 = h(J_1, omega theta_0)`` and
    ``gamma_{m+1} = h(J_{m+1}, omega theta_m + gamma_m)``.  With
    ``with_derivative`` the ``d gamma_m / d omega`` array is returned too.
    """
    widths, jumps = _unpack(profile)
    gammas = np.empty(jumps.size)
    dgammas = np.empty(jumps.size)
    angle, dangle = 0.0, 0.0
    for m in range(jumps.size):
        arg = omega * widths[m] + angle
        darg = widths[m] + dangle
        angle = _h(jumps[m], arg)
        dangle = _h_dx(jumps[m], arg) * darg
        gammas[m] = angle
        dgammas[m] = dangle
    if with_derivative:
        return gammas, dgammas
    return gammas


def final_angle(
    profile: PiecewiseConstantProfile, omega: float, with_derivative: bool = False
):
    """Angle of the full chain output, ``omega theta_n + gamma_n``; monotone in ``omega``."""
    a, da = _final_angle(profile.widths, profile.jumps, omega)
    if with_derivative:
        return a, da
    return a


@dataclass(frozen=True)
class BaseFrequency:
    """The unique frequency at which the k-th divisor vanishes."""

    k: int
    omega: float
    period: float
    residual: float

    def __post_init__(self) -> None:
        if self.omega <= 0.0:
            raise ValueError("base frequency must be positive")


def base_frequency(profile: PiecewiseConstantProfile, k: int) -> BaseFrequency:
    """Solve ``omega theta_n + gamma_n(omega) = k pi / 2`` for ``omega``.

    The left side is strictly increasing with slope at least ``theta_n``
    and deviates from ``omega * sum(theta)`` by at most ``n pi / 2``, which
    both brackets the root and makes bisection safe; the bracket is
    narrowed to width 1e-8 and polished with two Newton steps.
    """
    if k < 1:
        raise ValueError(f"mode index must be >= 1, got {k}")
    widths = tuple(float(t) for t in profile.widths)
    jumps = tuple(float(j) for j in profile.jumps)
    ell = sum(widths)
    n = len(jumps)
    target = k * math.pi / 2.0
    lo = max(1e-12, (target - n * math.pi / 2.0) / ell)
    hi = (target + n * math.pi / 2.0) / ell + 1e-12
    while _final_angle(widths, jumps, lo)[0] > target:  # defensive; unreachable
        lo *= 0.5
    while _final_angle(widths, jumps, hi)[0] < target:
        hi *= 2.0
    while hi - lo > 1e-8:
        mid = 0.5 * (lo + hi)
        if _final_angle(widths, jumps, mid)[0] <= target:
            lo = mid
        else:
            hi = mid
    omega = 0.5 * (lo + hi)
    for _ in range(2):
        a, da = _final_angle(widths, jumps, omega)
        omega -= (a - target) / da
    residual = abs(_final_angle(widths, jumps, omega)[0] - target)
    return BaseFrequency(k, float(omega), float(k * 2.0 * math.pi / omega), float(residual))


# ----------------------------------------------------------------------
# resonance classification
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class NonresonanceReport:
    """Divisor audit of every retained mode at the k-th reference period."""

    k: int
    period: float
    tol: float
    is_nonresonant: bool
    min_divisor: float
    offenders: tuple[tuple[int, float], ...]
    witnesses: tuple[tuple[int, int, float], ...]  # (j, p, |k w_p - j w_k|)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "period": self.period,
            "tol": self.tol,
            "is_nonresonant": self.is_nonresonant,
            "min_divisor": self.min_divisor,
            "offenders": [list(o) for o in self.offenders],
            "witnesses": [list(w) for w in self.witnesses],
        }


def nonresonance_check(
    profile: PiecewiseConstantProfile,
    k: int,
    j_max: int,
    tol: float = 1e-9,
    flavor: str = "periodic-tile",
) -> NonresonanceReport:
    """Flag modes whose divisor vanishes at the k-th reference period.

    For every flagged ``j`` a rational-relation witness is attached: the
    index ``p`` whose base frequency most nearly satisfies
    ``k omega_p = j omega_k``, together with the frequency mismatch.
    """
    if j_max < k:
        raise ValueError("j_max must be at least k")
    base = base_frequency(profile, k)
    widths, jumps = _unpack(profile)
    ell = float(np.sum(widths))
    n = jumps.size
    offenders: list[tuple[int, float]] = []
    min_div = np.inf
    for j in range(1, j_max + 1):
        if j == k:
            continue
        d = divisor_pc(profile, base.period, j, flavor)
        if abs(d) < min_div:
            min_div = abs(d)
        if abs(d) < tol:
            offenders.append((j, d))
    witnesses: list[tuple[int, int, float]] = []
    for j, _ in offenders:
        omega_target = j * base.omega / k
        p_center = 2.0 * ell * omega_target / np.pi
        best: tuple[int, int, float] | None = None
        for p in range(max(1, int(np.floor(p_center)) - n - 1), int(np.ceil(p_center)) + n + 2):
            mismatch = abs(k * base_frequency(profile, p).omega - j * base.omega)
            if best is None or mismatch < best[2]:
                best = (j, p, mismatch)
        if best is not None:
            witnesses.append(best)
    return NonresonanceReport(
        k,
        base.period,
        tol,
        not offenders,
        float(min_div),
        tuple(offenders),
        tuple(witnesses),
    )


@dataclass(frozen=True)
class ScanResult:
    """Aggregate of nonresonance checks over sampled profiles."""

    n_samples: int
    resonant_count: int
    tol: float
    seed: int
    histogram_edges: tuple[float, ...]
    histogram_counts: tuple[int, ...]

    @property
    def resonant_fraction(self) -> float:
        return self.resonant_count / self.n_samples if self.n_samples else 0.0

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "resonant_count": self.resonant_count,
            "resonant_fraction": self.resonant_fraction,
            "tol": self.tol,
            "seed": self.seed,
            "histogram_edges": list(self.histogram_edges),
            "histogram_counts": list(self.histogram_counts),
        }


def resonance_scan(
    n_samples: int,
    seed: int = 0,
    k: int = 1,
    j_max: int = 64,
    tol: float = 1e-9,
    theta_range: tuple[float, float] = (0.5, 1.5),
    jump_range: tuple[float, float] = (0.5, 2.0),
) -> ScanResult:
    """Empirical resonant fraction over uniform single-jump profiles.

    Each sample draws equal widths ``(theta, theta)`` and a factor ``J``
    uniformly, normalizes the total width to 1, and audits mode ``k`` at
    its reference period.  Per-sample seeds are derived from the master
    seed, so samples are independent and order-insensitive.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    children = np.random.SeedSequence(seed).spawn(n_samples)
    resonant = 0
    log_mins = np.empty(n_samples)
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        theta = rng.uniform(*theta_range)
        jump = rng.uniform(*jump_range)
        profile = PiecewiseConstantProfile((theta, theta), (jump,)).normalized()
        report = nonresonance_check(profile, k, j_max, tol)
        if not report.is_nonresonant:
            resonant += 1
        log_mins[i] = np.log10(max(report.min_divisor, 1e-300))
    edges = np.linspace(-16.0, 1.0, 18)
    counts, _ = np.histogram(log_mins, bins=edges)
    return ScanResult(
        n_samples,
        resonant,
        tol,
        seed,
        tuple(float(e) for e in edges),
        tuple(int(c) for c in counts),
    )
