"""Truncated trigonometric series on a fixed time period.

Every time-periodic field in this package is represented as a real series

    f(t) = a[0] + sum_{j=1..N} ( a[j] cos(j w t) + b[j] sin(j w t) ),   w = 2 pi / T.

The class below is a thin value-semantic wrapper around the coefficient
arrays.  It provides the handful of exact mode-wise operations the rest of
the package is built from -- reflection in time, time shifts, parity
projections, scaling of the odd part at an entropy interface -- plus grid
sampling, scattered evaluation and the L2 pairing.  All linear operators
act mode-diagonally and introduce no truncation error on the retained
modes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = ["TrigSeries"]


@dataclass
class TrigSeries:
    """Real trigonometric polynomial of degree ``n_modes`` on ``[0, period)``.

    Parameters
    ----------
    period : float
        Fundamental time period ``T > 0``.
    cos : ndarray, shape (N+1,)
        Cosine coefficients; ``cos[0]`` is the constant term.
    sin : ndarray, shape (N+1,)
        Sine coefficients; ``sin[0]`` is unused and must be zero.

    Notes
    -----
    Instances are treated as immutable values: every operation returns a
    new series and never mutates ``self``.
    """

    period: float
    cos: np.ndarray
    sin: np.ndarray

    def __post_init__(self) -> None:
        self.cos = np.asarray(self.cos, dtype=float)
        self.sin = np.asarray(self.sin, dtype=float)
        if self.period <= 0.0:
            raise ValueError(f"period must be positive, got {self.period}")
        if self.cos.shape != self.sin.shape or self.cos.ndim != 1:
            raise ValueError("cos and sin must be 1-D arrays of equal length")
        if self.cos.shape[0] < 1:
            raise ValueError("need at least the constant mode")
        if self.sin[0] != 0.0:
            raise ValueError("sin[0] must be zero")

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------
    @classmethod
    def zeros(cls, n_modes: int, period: float) -> "TrigSeries":
        """Zero series with modes ``0..n_modes``."""
        return cls(period, np.zeros(n_modes + 1), np.zeros(n_modes + 1))

    @classmethod
    def constant(cls, value: float, n_modes: int, period: float) -> "TrigSeries":
        out = cls.zeros(n_modes, period)
        out.cos[0] = value
        return out

    @classmethod
    def pure_cosine(cls, k: int, n_modes: int, period: float, amplitude: float = 1.0) -> "TrigSeries":
        out = cls.zeros(n_modes, period)
        out.cos[k] = amplitude
        return out

    @classmethod
    def pure_sine(cls, k: int, n_modes: int, period: float, amplitude: float = 1.0) -> "TrigSeries":
        if k < 1:
            raise ValueError("sine modes start at k = 1")
        out = cls.zeros(n_modes, period)
        out.sin[k] = amplitude
        return out

    @classmethod
    def from_values(cls, values: np.ndarray, period: float, n_modes: int | None = None) -> "TrigSeries":
        """Least-squares fit (exact for band-limited data) on a uniform grid.

        ``values[m] = f(m * period / len(values))``.  The default truncation
        keeps every non-aliased mode below the Nyquist index.
        """
        values = np.asarray(values, dtype=float)
        n = values.shape[0]
        spec = np.fft.rfft(values)
        n_avail = (n - 1) // 2
        if n_modes is None:
            n_modes = n_avail
        n_keep = min(n_modes, n_avail)
        cos = np.zeros(n_modes + 1)
        sin = np.zeros(n_modes + 1)
        cos[0] = spec[0].real / n
        cos[1 : n_keep + 1] = 2.0 * spec[1 : n_keep + 1].real / n
        sin[1 : n_keep + 1] = -2.0 * spec[1 : n_keep + 1].imag / n
        return cls(period, cos, sin)

    # ------------------------------------------------------------------
    # basic queries
    # ------------------------------------------------------------------
    @property
    def n_modes(self) -> int:
        return self.cos.shape[0] - 1

    @property
    def omega(self) -> float:
        """Fundamental angular frequency ``2 pi / period``."""
        return 2.0 * np.pi / self.period

    def mode(self, k: int) -> tuple[float, float]:
        """Return the coefficient pair ``(a_k, b_k)``."""
        return float(self.cos[k]), float(self.sin[k])

    def with_mode(self, k: int, a: float, b: float) -> "TrigSeries":
        cos, sin = self.cos.copy(), self.sin.copy()
        cos[k], sin[k] = a, b
        return TrigSeries(self.period, cos, sin)

    def is_even(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.sin) <= tol))

    def is_odd(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.cos) <= tol))

    # ------------------------------------------------------------------
    # mode-diagonal operators
    # ------------------------------------------------------------------
    def reflect(self) -> "TrigSeries":
        """Time reflection ``f(t) -> f(-t)``: negates every sine coefficient."""
        return TrigSeries(self.period, self.cos.copy(), -self.sin)

    def shift(self, theta: float) -> "TrigSeries":
        """Time shift ``f(t) -> f(t - theta)``.

        Acts on the mode-``j`` coefficient pair as the rotation through
        ``j * (2 pi / T) * theta``.
        """
        j = np.arange(self.n_modes + 1)
        phi = j * (self.omega * theta)
        c, s = np.cos(phi), np.sin(phi)
        return TrigSeries(self.period, c * self.cos - s * self.sin, s * self.cos + c * self.sin)

    def project_even(self) -> "TrigSeries":
        return TrigSeries(self.period, self.cos.copy(), np.zeros_like(self.sin))

    def project_odd(self) -> "TrigSeries":
        return TrigSeries(self.period, np.zeros_like(self.cos), self.sin.copy())

    def apply_scalar_jump(self, factor: float) -> "TrigSeries":
        """Keep the even part, scale the odd part: the entropy-interface map."""
        if factor <= 0.0:
            raise ValueError(f"interface factor must be positive, got {factor}")
        return TrigSeries(self.period, self.cos.copy(), factor * self.sin)

    def derivative(self) -> "TrigSeries":
        """Time derivative, exact on the retained modes."""
        j = np.arange(self.n_modes + 1)
        return TrigSeries(self.period, j * self.omega * self.sin, -j * self.omega * self.cos)

    def truncated(self, n_modes: int) -> "TrigSeries":
        """Copy with exactly ``n_modes`` modes (truncating or zero-padding)."""
        cos = np.zeros(n_modes + 1)
        sin = np.zeros(n_modes + 1)
        m = min(n_modes, self.n_modes)
        cos[: m + 1] = self.cos[: m + 1]
        sin[: m + 1] = self.sin[: m + 1]
        return TrigSeries(self.period, cos, sin)

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------
    def values(self, n_samples: int) -> np.ndarray:
        """Sample on the uniform grid ``t_m = m T / n_samples``."""
        if n_samples < 2 * self.n_modes + 2:
            raise ValueError(
                f"grid of {n_samples} aliases a degree-{self.n_modes} series; "
                f"need at least {2 * self.n_modes + 2} samples"
            )
        spec = np.zeros(n_samples // 2 + 1, dtype=complex)
        spec[0] = n_samples * self.cos[0]
        upper = self.n_modes + 1
        spec[1:upper] = 0.5 * n_samples * (self.cos[1:] - 1j * self.sin[1:])
        return np.fft.irfft(spec, n_samples)

    def sample_at(self, t: np.ndarray | float) -> np.ndarray | float:
        """Evaluate at arbitrary times (exact trigonometric evaluation)."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        phases = np.outer(t_arr, np.arange(self.n_modes + 1) * self.omega)
        out = np.cos(phases) @ self.cos + np.sin(phases) @ self.sin
        return out if np.ndim(t) else float(out[0])

    # ------------------------------------------------------------------
    # pairings and norms
    # ------------------------------------------------------------------
    def inner_product(self, other: "TrigSeries") -> float:
        """L2 pairing ``integral_0^T f g dt`` computed from coefficients."""
        if not np.isclose(self.period, other.period, rtol=1e-14, atol=0.0):
            raise ValueError("inner product requires equal periods")
        m = min(self.n_modes, other.n_modes)
        out = self.period * self.cos[0] * other.cos[0]
        out += 0.5 * self.period * float(
            self.cos[1 : m + 1] @ other.cos[1 : m + 1] + self.sin[1 : m + 1] @ other.sin[1 : m + 1]
        )
        return out

    def coeff_norm(self) -> float:
        """Plain Euclidean norm of the coefficient vector (constant included)."""
        return float(np.sqrt(self.cos @ self.cos + self.sin @ self.sin))

    def max_abs(self, n_samples: int | None = None) -> float:
        n = n_samples if n_samples is not None else 4 * (self.n_modes + 1)
        return float(np.max(np.abs(self.values(n))))

    def tail_fraction(self) -> float:
        """Energy fraction carried by the top octave of modes (aliasing guard)."""
        energy = self.cos[1:] ** 2 + self.sin[1:] ** 2
        total = float(np.sum(energy)) + self.cos[0] ** 2
        if total == 0.0:
            return 0.0
        start = max(1, self.n_modes // 2)
        return float(np.sum(energy[start - 1 :])) / total

    # ------------------------------------------------------------------
    # arithmetic
    # ------------------------------------------------------------------
    def _aligned(self, other: "TrigSeries") -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        n = max(self.n_modes, other.n_modes)
        a, b = self.truncated(n), other.truncated(n)
        return a.cos, a.sin, b.cos, b.sin

    def __add__(self, other: "TrigSeries") -> "TrigSeries":
        if not np.isclose(self.period, other.period, rtol=1e-14, atol=0.0):
            raise ValueError("cannot add series with different periods")
        ca, sa, cb, sb = self._aligned(other)
        return TrigSeries(self.period, ca + cb, sa + sb)

    def __sub__(self, other: "TrigSeries") -> "TrigSeries":
        if not np.isclose(self.period, other.period, rtol=1e-14, atol=0.0):
            raise ValueError("cannot subtract series with different periods")
        ca, sa, cb, sb = self._aligned(other)
        return TrigSeries(self.period, ca - cb, sa - sb)

    def __mul__(self, scalar: float) -> "TrigSeries":
        return TrigSeries(self.period, scalar * self.cos, scalar * self.sin)

    __rmul__ = __mul__

    def __neg__(self) -> "TrigSeries":
        return TrigSeries(self.period, -self.cos, -self.sin)

    # ------------------------------------------------------------------
    # serialization
    # ------------------------------------------------------------------
    def to_json(self) -> str:
        return json.dumps(
            {"period": self.period, "cos": self.cos.tolist(), "sin": self.sin.tolist()},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "TrigSeries":
        obj = json.loads(text)
        return cls(float(obj["period"]), np.asarray(obj["cos"]), np.asarray(obj["sin"]))
