"""Stationary entropy profiles on the material interval ``[0, ell]``.

Two representations are supported.  A :class:`PiecewiseConstantProfile`
holds ``n+1`` positive piece widths and the ``n`` positive interface
factors ``J_m`` (one per interior jump); the underlying entropy levels are
recovered through ``J_m = exp(-(s_m - s_{m-1}) / (2 c_p))`` once a gas
fixes ``c_p``.  A :class:`SampledProfile` holds entropy values on a grid
with an interpolation rule.  Both are immutable and serialize to the JSON
shapes::

    {"type": "piecewise", "widths": [...], "jumps": [...]}
    {"type": "sampled", "x": [...], "s": [...], "interp": "linear"}

The module also provides the two structural perturbations used by the
density/genericity experiments (moving a jump, raising a level) together
with exact L1 entropy distances, and the slowness field ``sigma(x)`` with
one-sided limits at jumps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .thermo import GammaLawGas, QuietState

__all__ = [
    "PiecewiseConstantProfile",
    "SampledProfile",
    "SigmaField",
    "sigma_of_x",
    "l1_distance",
    "physical_from_scaled",
    "profile_from_json",
    "profile_from_dict",
]

# Sanity cap on the total variation of log(sigma)-like quantities; a profile
# beyond this is rejected as unusable for the linear theory.
_BV_SANITY = 1.0e6


@dataclass(frozen=True)
class PiecewiseConstantProfile:
    """Piecewise-constant entropy: widths ``theta_0..theta_n``, jumps ``J_1..J_n``.

    ``jumps[m-1]`` is the interface factor between piece ``m-1`` and piece
    ``m``; a factor of 1 means no entropy jump.  ``s_base`` is the entropy
    on the first piece.
    """

    widths: tuple[float, ...]
    jumps: tuple[float, ...] = ()
    s_base: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "widths", tuple(float(w) for w in self.widths))
        object.__setattr__(self, "jumps", tuple(float(j) for j in self.jumps))
        if len(self.widths) < 1:
            raise ValueError("need at least one piece")
        if len(self.jumps) != len(self.widths) - 1:
            raise ValueError(
                f"{len(self.widths)} pieces need {len(self.widths) - 1} jumps, got {len(self.jumps)}"
            )
        if any(w <= 0.0 for w in self.widths):
            raise ValueError("piece widths must be positive")
        if any(j <= 0.0 for j in self.jumps):
            raise ValueError("interface factors must be positive")
        if sum(abs(np.log(j)) for j in self.jumps) >= _BV_SANITY:
            raise ValueError("profile variation exceeds the sanity bound")

    # ------------------------------------------------------------------
    # geometry
    # ------------------------------------------------------------------
    @property
    def n_pieces(self) -> int:
        return len(self.widths)

    @property
    def n_jumps(self) -> int:
        return len(self.jumps)

    @property
    def total_width(self) -> float:
        return float(sum(self.widths))

    @property
    def jump_positions(self) -> tuple[float, ...]:
        return tuple(np.cumsum(self.widths)[:-1])

    def piece_index(self, x: float) -> int:
        """Index of the piece containing ``x`` (right-continuous at jumps)."""
        edges = np.cumsum(self.widths)
        if x < 0.0 or x > edges[-1]:
            raise ValueError(f"x = {x} outside [0, {edges[-1]}]")
        return int(np.searchsorted(edges[:-1], x, side="right"))

    def normalized(self) -> "PiecewiseConstantProfile":
        """Rescale widths so the total material width is 1."""
        ell = self.total_width
        return PiecewiseConstantProfile(
            tuple(w / ell for w in self.widths), self.jumps, self.s_base
        )

    # ------------------------------------------------------------------
    # entropy levels and slowness
    # ------------------------------------------------------------------
    def levels(self, gas: GammaLawGas) -> np.ndarray:
        """Entropy value on each piece: ``s_m = s_{m-1} - 2 c_p log(J_m)``."""
        s = np.empty(self.n_pieces)
        s[0] = self.s_base
        for m, j in enumerate(self.jumps, start=1):
            s[m] = s[m - 1] - 2.0 * gas.c_p * np.log(j)
        return s

    def sigma_pieces(self, quiet: QuietState) -> np.ndarray:
        """Slowness ``sigma`` on each piece."""
        return quiet.sigma(self.levels(quiet.gas))

    def scaled_widths(self, quiet: QuietState) -> np.ndarray:
        """Widths in the non-dimensional material coordinate."""
        return self.sigma_pieces(quiet) * np.asarray(self.widths)

    def entropy_at(self, x, gas: GammaLawGas):
        """Entropy at material coordinate(s) ``x`` (right-continuous)."""
        lev = self.levels(gas)
        edges = np.cumsum(self.widths)
        idx = np.searchsorted(edges[:-1], np.asarray(x, dtype=float), side="right")
        out = lev[idx]
        return out if np.ndim(x) else float(out)

    def bv_entropy(self, gas: GammaLawGas) -> float:
        """Total variation of the entropy: ``2 c_p sum |log J_m|``."""
        return float(2.0 * gas.c_p * sum(abs(np.log(j)) for j in self.jumps))

    # ------------------------------------------------------------------
    # structural perturbations
    # ------------------------------------------------------------------
    def perturb_jump_position(self, m: int, eta: float) -> "PiecewiseConstantProfile":
        """Move interface ``m`` (1-based) by ``eta``: piece ``m`` grows, piece ``m-1`` shrinks.

        The L1 entropy distance to the original is ``2 c_p |log J_m| |eta|``.
        """
        if not 1 <= m <= self.n_jumps:
            raise ValueError(f"jump index {m} out of range 1..{self.n_jumps}")
        new = list(self.widths)
        new[m - 1] -= eta
        new[m] += eta
        if new[m - 1] <= 0.0 or new[m] <= 0.0:
            raise ValueError(f"eta = {eta} collapses a piece")
        return PiecewiseConstantProfile(tuple(new), self.jumps, self.s_base)

    def perturb_level(self, m: int, h: float) -> "PiecewiseConstantProfile":
        """Raise the entropy level of interior piece ``m`` by ``2 c_p h``.

        Implemented on the interface factors as ``J_m -> J_m e^{-h}``,
        ``J_{m+1} -> J_{m+1} e^{h}``; the product of all factors is
        conserved and the L1 distance is ``2 c_p theta_m |h|``.
        """
        if not 1 <= m <= self.n_jumps - 1:
            raise ValueError(f"interior piece index {m} out of range 1..{self.n_jumps - 1}")
        new = list(self.jumps)
        new[m - 1] *= float(np.exp(-h))
        new[m] *= float(np.exp(h))
        return PiecewiseConstantProfile(self.widths, tuple(new), self.s_base)

    # ------------------------------------------------------------------
    # serialization
    # ------------------------------------------------------------------
    def to_json(self) -> str:
        obj: dict = {"type": "piecewise", "widths": list(self.widths), "jumps": list(self.jumps)}
        if self.s_base != 0.0:
            obj["s_base"] = self.s_base
        return json.dumps(obj, sort_keys=True)

    def breakpoints(self, gas: GammaLawGas) -> tuple[np.ndarray, np.ndarray]:
        """Return (edges, levels): entropy is ``levels[i]`` on ``(edges[i], edges[i+1])``."""
        edges = np.concatenate(([0.0], np.cumsum(self.widths)))
        return edges, self.levels(gas)


@dataclass(frozen=True)
class SampledProfile:
    """Entropy sampled on a strictly increasing grid starting at 0.

    ``interp`` is ``"linear"`` (piecewise-linear between nodes) or
    ``"midpoint"`` (piecewise-constant, nearest node).
    """

    x: tuple[float, ...]
    s: tuple[float, ...]
    interp: str = "linear"

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "s", tuple(float(v) for v in self.s))
        xs = np.asarray(self.x)
        if xs.size < 2:
            raise ValueError("need at least two samples")
        if xs[0] != 0.0:
            raise ValueError("grid must start at 0")
        if np.any(np.diff(xs) <= 0.0):
            raise ValueError("grid must be strictly increasing")
        if len(self.s) != xs.size:
            raise ValueError("x and s must have equal length")
        if not np.all(np.isfinite(self.s)):
            raise ValueError("entropy samples must be finite")
        if self.interp not in ("linear", "midpoint"):
            raise ValueError(f"unknown interpolation rule {self.interp!r}")
        if self.bv_entropy() >= _BV_SANITY:
            raise ValueError("profile variation exceeds the sanity bound")

    @property
    def total_width(self) -> float:
        return self.x[-1]

    def level(self, x):
        """Entropy at material coordinate(s) ``x``."""
        xq = np.asarray(x, dtype=float)
        if self.interp == "linear":
            out = np.interp(xq, self.x, self.s)
        else:
            idx = np.clip(
                np.searchsorted((np.asarray(self.x[:-1]) + np.asarray(self.x[1:])) / 2.0, xq),
                0,
                len(self.s) - 1,
            )
            out = np.asarray(self.s)[idx]
        return out if np.ndim(x) else float(out)

    def bv_entropy(self, gas: GammaLawGas | None = None) -> float:
        """Total variation of the entropy over the grid."""
        return float(np.sum(np.abs(np.diff(self.s))))

    def refined(self) -> "SampledProfile":
        """Grid refined 2x by inserting cell midpoints (rule-consistent)."""
        xs = np.asarray(self.x)
        mids = (xs[:-1] + xs[1:]) / 2.0
        new_x = np.sort(np.concatenate((xs, mids)))
        return SampledProfile(tuple(new_x), tuple(self.level(new_x)), self.interp)

    def to_json(self) -> str:
        return json.dumps(
            {"type": "sampled", "x": list(self.x), "s": list(self.s), "interp": self.interp},
            sort_keys=True,
        )


def physical_from_scaled(
    scaled_widths,
    jumps,
    quiet: QuietState,
    s_base: float = 0.0,
) -> PiecewiseConstantProfile:
    """Material-frame profile whose non-dimensional widths are as given.

    Inverse of :meth:`PiecewiseConstantProfile.scaled_widths`: divides each
    requested scaled width by the slowness of its piece (the levels depend
    only on ``jumps`` and ``s_base``, not on the widths).
    """
    trial = PiecewiseConstantProfile(tuple(scaled_widths), tuple(jumps), s_base)
    sigma = trial.sigma_pieces(quiet)
    widths = tuple(float(w) / float(s) for w, s in zip(scaled_widths, sigma))
    return PiecewiseConstantProfile(widths, tuple(jumps), s_base)


def profile_from_json(text: str) -> PiecewiseConstantProfile | SampledProfile:
    """Parse either profile JSON shape."""
    obj = json.loads(text)
    return profile_from_dict(obj)


def profile_from_dict(obj: dict) -> PiecewiseConstantProfile | SampledProfile:
    kind = obj.get("type")
    if kind == "piecewise":
        return PiecewiseConstantProfile(
            tuple(obj["widths"]), tuple(obj.get("jumps", ())), float(obj.get("s_base", 0.0))
        )
    if kind == "sampled":
        return SampledProfile(tuple(obj["x"]), tuple(obj["s"]), obj.get("interp", "linear"))
    raise ValueError(f"unknown profile type {kind!r}")


@dataclass(frozen=True)
class SigmaField:
    """Slowness samples with the jump set made explicit.

    ``sigma_left``/``sigma_right`` are the one-sided limits at each entry
    of ``jump_positions``; away from jumps the field is continuous and the
    sampled values suffice.
    """

    x: np.ndarray
    sigma: np.ndarray
    jump_positions: tuple[float, ...] = ()
    sigma_left: tuple[float, ...] = ()
    sigma_right: tuple[float, ...] = ()

    def tv_log_sigma(self) -> float:
        """Total variation of ``log sigma`` (grid estimate plus exact jumps)."""
        smooth = float(np.sum(np.abs(np.diff(np.log(self.sigma)))))
        jumps = float(
            np.sum(np.abs(np.log(np.asarray(self.sigma_right) / np.asarray(self.sigma_left))))
        ) if self.jump_positions else 0.0
        return smooth + jumps


def sigma_of_x(
    profile: PiecewiseConstantProfile | SampledProfile,
    gas: GammaLawGas,
    p_bar: float,
    n_samples: int = 257,
) -> SigmaField:
    """Evaluate the slowness ``sigma(x) = sqrt(-v_p(p_bar, s(x)))``.

    For piecewise-constant input the jump set is returned explicitly with
    one-sided limits; the sampled values are taken piecewise (never
    averaging across a jump).
    """
    quiet = QuietState(gas, p_bar)
    if isinstance(profile, PiecewiseConstantProfile):
        sig = profile.sigma_pieces(quiet)
        if not np.all(np.isfinite(sig)):
            raise ValueError("non-finite slowness: constitutive data out of range")
        edges = np.concatenate(([0.0], np.cumsum(profile.widths)))
        xs, vals = [], []
        per = max(2, n_samples // profile.n_pieces)
        for m in range(profile.n_pieces):
            xx = np.linspace(edges[m], edges[m + 1], per)
            xs.append(xx)
            vals.append(np.full(per, sig[m]))
        jump_pos = profile.jump_positions
        return SigmaField(
            np.concatenate(xs),
            np.concatenate(vals),
            jump_pos,
            tuple(sig[:-1]),
            tuple(sig[1:]),
        )
    xx = np.linspace(0.0, profile.total_width, n_samples)
    sig = quiet.sigma(profile.level(xx))
    if not np.all(np.isfinite(sig)) or np.any(sig <= 0.0):
        raise ValueError("non-finite slowness: constitutive data out of range")
    return SigmaField(xx, sig)


# ----------------------------------------------------------------------
# exact L1 entropy distance
# ----------------------------------------------------------------------
def _as_breakpoint_form(
    profile: PiecewiseConstantProfile | SampledProfile, gas: GammaLawGas
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Represent entropy as continuous piecewise-linear data on nodes.

    Returns ``(nodes, left_values, right_values)`` where the entropy is
    linear between consecutive nodes with the given one-sided values.
    """
    if isinstance(profile, PiecewiseConstantProfile):
        edges, lev = profile.breakpoints(gas)
        left = np.concatenate((lev[:1], lev))
        right = np.concatenate((lev, lev[-1:]))
        return edges, left[: edges.size], right[: edges.size]
    xs = np.asarray(profile.x)
    ss = np.asarray(profile.s)
    if profile.interp == "linear":
        return xs, ss.copy(), ss.copy()
    mids = (xs[:-1] + xs[1:]) / 2.0
    nodes = np.unique(np.concatenate((xs, mids)))
    vals_left = np.asarray([profile.level(x - 1e-12 * max(1.0, abs(x))) for x in nodes])
    vals_right = np.asarray([profile.level(x + 1e-12 * max(1.0, abs(x))) for x in nodes])
    return nodes, vals_left, vals_right


def l1_distance(
    a: PiecewiseConstantProfile | SampledProfile,
    b: PiecewiseConstantProfile | SampledProfile,
    gas: GammaLawGas,
) -> float:
    """Exact ``integral |s_a(x) - s_b(x)| dx`` over the common domain.

    Both profiles must live on the same interval.  The integrand is
    piecewise linear on the merged node set, so the integral is computed
    in closed form, splitting cells at sign crossings.
    """
    if not np.isclose(a.total_width, b.total_width, rtol=1e-12, atol=0.0):
        raise ValueError("profiles live on different domains")
    na, la, ra = _as_breakpoint_form(a, gas)
    nb, lb, rb = _as_breakpoint_form(b, gas)
    nodes = np.unique(np.concatenate((na, nb)))

    def one_sided(nodes_src, left_src, right_src, x, side):
        i = np.searchsorted(nodes_src, x)
        if i < nodes_src.size and np.isclose(nodes_src[i], x, rtol=0.0, atol=1e-14):
            return left_src[i] if side < 0 else right_src[i]
        lo = i - 1
        t = (x - nodes_src[lo]) / (nodes_src[lo + 1] - nodes_src[lo])
        return (1 - t) * right_src[lo] + t * left_src[lo + 1]

    total = 0.0
    for x0, x1 in zip(nodes[:-1], nodes[1:]):
        d0 = one_sided(na, la, ra, x0, +1) - one_sided(nb, lb, rb, x0, +1)
        d1 = one_sided(na, la, ra, x1, -1) - one_sided(nb, lb, rb, x1, -1)
        h = x1 - x0
        if d0 * d1 >= 0.0:
            total += 0.5 * abs(d0 + d1) * h
        else:
            t_cross = d0 / (d0 - d1)
            total += 0.5 * (abs(d0) * t_cross + abs(d1) * (1.0 - t_cross)) * h
    return float(total)
