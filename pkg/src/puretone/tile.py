"""Space-time tiles: sample a solved tone on a grid, reflect it out to a
full spatial period, check it against the physical equations, and export.

A solved tone lives on the material interval ``[0, ell]``; the physical
standing wave occupies one spatial period ``[0, 4 ell]`` (or ``[0, 2 ell]``
for the acoustic reflection flavor), obtained from the minimal tile by
reflections and half-period time shifts.  All shifts and reflections here
are exact index arithmetic on the grid — the time grid size is required to
be divisible by 4 so that quarter- and half-period shifts are array rolls.

Grid conventions
----------------
Columns are material positions, rows of ``w``/``wstar`` are indexed by
column, and the second axis is the uniform time grid ``t_j = j T / nt`` on
``[0, T)``.  Positions where the entropy jumps carry *two* consecutive
columns with the same ``x``: the velocity-like field ``wstar`` is
discontinuous there, and the left/right copies hold the one-sided limits.
Every column belongs to a block of uniform spacing and constant entropy;
finite differences in :func:`verify` are taken on block interiors only, so
interface and seam columns never enter a stencil center.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .bifurcate import PureToneSolution
from .evolve import chain_sampled
from .profiles import PiecewiseConstantProfile
from .series import TrigSeries
from .thermo import QuietState

__all__ = [
    "Block",
    "MinimalTile",
    "TiledSolution",
    "TileResidualReport",
    "ErgodicityProbe",
    "sample_minimal_tile",
    "assemble",
    "tile_pure_tone",
    "verify",
    "export",
    "parse_csv",
    "ergodicity_probe",
]

_FLAVORS = ("periodic-tile", "acoustic")


@dataclass(frozen=True)
class Block:
    """A run of consecutive grid columns with uniform spacing and one entropy.

    ``start``/``stop`` index columns of the owning grid (half-open).  At an
    interface the duplicated column pair splits so that each copy belongs to
    the block whose one-sided limit it stores.
    """

    start: int
    stop: int
    dx: float
    sigma: float
    entropy: float

    @property
    def n_columns(self) -> int:
        return self.stop - self.start


@dataclass(frozen=True)
class MinimalTile:
    """Sampled solution on the material interval ``[0, ell]`` x ``[0, T)``.

    ``w`` holds the even (pressure-like) and ``wstar`` the odd
    (velocity-like) part of the scaled state at each column; both are
    ``(n_columns, nt)`` arrays.  Columns come in per-piece runs of uniform
    physical spacing, with interface positions duplicated (left limit first).
    """

    x: np.ndarray
    t: np.ndarray
    w: np.ndarray
    wstar: np.ndarray
    period: float
    ell: float
    blocks: tuple[Block, ...]
    profile: PiecewiseConstantProfile
    quiet: QuietState
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        nt = self.t.size
        if nt % 4 != 0:
            raise ValueError(f"time grid size must be divisible by 4, got {nt}")
        if self.w.shape != (self.x.size, nt) or self.wstar.shape != self.w.shape:
            raise ValueError("grid shapes are inconsistent")

    @property
    def n_columns(self) -> int:
        return self.x.size

    @property
    def nt(self) -> int:
        return self.t.size


@dataclass(frozen=True)
class TiledSolution:
    """One full spatial period of the standing wave on a space-time grid.

    ``length`` is ``4 ell`` (periodic-tile flavor) or ``2 ell`` (acoustic);
    ``x`` runs from 0 to ``length`` inclusive, with seam columns shared
    between adjacent panels (the stored value is the left panel's) and
    interface images duplicated exactly as in the minimal tile.
    ``seam_gaps`` records, per seam, the largest mismatch between the two
    panel formulas before merging — for a solved tone these vanish to
    solver tolerance.  ``w`` is even and ``wstar`` odd in time at every
    column, by construction.
    """

    x: np.ndarray
    t: np.ndarray
    w: np.ndarray
    wstar: np.ndarray
    period: float
    length: float
    ell: float
    flavor: str
    nx_minimal: int
    blocks: tuple[Block, ...]
    seam_positions: tuple[float, ...]
    seam_gaps: dict
    profile: PiecewiseConstantProfile
    quiet: QuietState
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.flavor not in _FLAVORS:
            raise ValueError(f"unknown flavor {self.flavor!r}")
        nt = self.t.size
        if nt % 4 != 0:
            raise ValueError(f"time grid size must be divisible by 4, got {nt}")
        if self.w.shape != (self.x.size, nt) or self.wstar.shape != self.w.shape:
            raise ValueError("grid shapes are inconsistent")
        if np.any(np.diff(self.x) < -1e-12 * max(1.0, self.length)):
            raise ValueError("x grid must be nondecreasing")
        # Time-parity invariant: w even, wstar odd on the grid.
        j_flip = (-np.arange(nt)) % nt
        scale = 1.0 + float(np.max(np.abs(self.w)))
        even_violation = float(np.max(np.abs(self.w - self.w[:, j_flip])))
        odd_violation = float(np.max(np.abs(self.wstar + self.wstar[:, j_flip])))
        if max(even_violation, odd_violation) > 1e-9 * scale:
            raise ValueError(
                "tile violates time parity: w must be even and wstar odd in t"
            )

    @property
    def nt(self) -> int:
        return self.t.size

    @property
    def n_columns(self) -> int:
        return self.x.size

    def column_entropy(self) -> np.ndarray:
        """Entropy level at each column (blocks overlap only at seams,
        where both sides agree)."""
        s = np.empty(self.x.size)
        for b in self.blocks:
            s[b.start : b.stop] = b.entropy
        return s

    def column_sigma(self) -> np.ndarray:
        """Quiet-state slowness at each column."""
        sig = np.empty(self.x.size)
        for b in self.blocks:
            sig[b.start : b.stop] = b.sigma
        return sig

    def restrict(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Restrict back to the material interval ``[0, ell]``.

        Returns views ``(x, w, wstar)`` of the first panel, which equal the
        minimal tile's arrays exactly — tiling followed by restriction is
        the identity.
        """
        n = self.nx_minimal
        return self.x[:n], self.w[:n], self.wstar[:n]


# ----------------------------------------------------------------------
# sampling
# ----------------------------------------------------------------------
def sample_minimal_tile(
    solution: PureToneSolution | TrigSeries,
    profile: PiecewiseConstantProfile,
    quiet: QuietState,
    nx_per_piece: int = 25,
    nt: int | None = None,
    cfl: float = 0.5,
    n_samples: int | None = None,
) -> MinimalTile:
    """March initial data through the profile and sample it on a grid.

    ``profile`` is the physical profile (material widths); the march runs
    in the scaled frame, so station offsets inside piece ``m`` are the
    physical offsets times that piece's slowness.  ``nx_per_piece`` columns
    are placed uniformly (in physical position) on every piece, both
    endpoints included — interface positions therefore appear twice, as the
    left and right one-sided limits.  ``nt`` defaults to the smallest
    multiple of 4 that resolves the data's modes, with a floor of 64.
    """
    if isinstance(solution, PureToneSolution):
        y0 = solution.y0
        meta = {
            "k": solution.k,
            "alpha": solution.alpha,
            "z": solution.z,
            "residual_norm": solution.residual_norm,
        }
    else:
        y0 = solution
        meta = {}
    if nx_per_piece < 2:
        raise ValueError("need at least two columns per piece")
    if nt is None:
        nt = max(64, 4 * (y0.n_modes + 1))
    if nt % 4 != 0:
        raise ValueError(f"nt must be divisible by 4, got {nt}")
    if nt < 2 * y0.n_modes + 2:
        raise ValueError(f"nt = {nt} cannot resolve {y0.n_modes} modes")

    sigma = profile.sigma_pieces(quiet)
    levels = profile.levels(quiet.gas)
    scaled = PiecewiseConstantProfile(
        tuple(float(s * w) for s, w in zip(sigma, profile.widths)),
        profile.jumps,
        profile.s_base,
    )
    stations = [
        float(sigma[m]) * np.linspace(0.0, w, nx_per_piece)
        for m, w in enumerate(profile.widths)
    ]
    snaps = chain_sampled(
        scaled, y0, quiet.gas.nu, stations, cfl=cfl, n_samples=n_samples
    )

    x_cols: list[np.ndarray] = []
    blocks: list[Block] = []
    start = 0.0
    for m, width in enumerate(profile.widths):
        x_cols.append(start + np.linspace(0.0, width, nx_per_piece))
        blocks.append(
            Block(
                start=m * nx_per_piece,
                stop=(m + 1) * nx_per_piece,
                dx=width / (nx_per_piece - 1),
                sigma=float(sigma[m]),
                entropy=float(levels[m]),
            )
        )
        start += width
    x = np.concatenate(x_cols)

    w_grid = np.empty((x.size, nt))
    ws_grid = np.empty((x.size, nt))
    for m, piece_snaps in enumerate(snaps):
        for i, series in enumerate(piece_snaps):
            row = m * nx_per_piece + i
            w_grid[row] = series.project_even().values(nt)
            ws_grid[row] = series.project_odd().values(nt)

    t = np.arange(nt) * (y0.period / nt)
    return MinimalTile(
        x=x,
        t=t,
        w=w_grid,
        wstar=ws_grid,
        period=y0.period,
        ell=float(start),
        blocks=tuple(blocks),
        profile=profile,
        quiet=quiet,
        meta=meta,
    )


# ----------------------------------------------------------------------
# assembly
# ----------------------------------------------------------------------
def _reflected_blocks(blocks: tuple[Block, ...], n_cols: int) -> list[Block]:
    """Blocks of the column-reversed grid, in increasing-start order."""
    out = [
        Block(n_cols - b.stop, n_cols - b.start, b.dx, b.sigma, b.entropy)
        for b in blocks
    ]
    out.sort(key=lambda b: b.start)
    return out


def assemble(solution: MinimalTile, flavor: str = "periodic-tile") -> TiledSolution:
    """Extend a minimal tile to one full spatial period.

    The periodic-tile flavor lays down four panels::

        [0, ell]      (w, wstar)(x, t)
        [ell, 2 ell]  w(2 ell - x, t + T/2),  -wstar(2 ell - x, t + T/2)
        [2 ell, 3 ell]  w(x - 2 ell, t + T/2),  +wstar(x - 2 ell, t + T/2)
        [3 ell, 4 ell]  w(4 ell - x, t),  -wstar(4 ell - x, t)

    and the acoustic flavor two (a single spatial reflection, no time
    shift).  The half-period time shift is an exact roll by ``nt / 2``;
    reflections reverse column order.  Seam columns are shared, keeping the
    left panel's values, and the largest left/right mismatch per seam is
    recorded in ``seam_gaps`` before merging.
    """
    if flavor not in _FLAVORS:
        raise ValueError(f"unknown flavor {flavor!r}")
    mt = solution
    nt = mt.nt
    half = nt // 2
    ell = mt.ell
    n = mt.n_columns

    def flip(a: np.ndarray) -> np.ndarray:
        return a[::-1, :]

    def shift_half(a: np.ndarray) -> np.ndarray:
        return np.roll(a, -half, axis=1)

    w0, ws0 = mt.w, mt.wstar
    if flavor == "periodic-tile":
        panels = [
            (mt.x, w0, ws0, False),
            (2.0 * ell - mt.x[::-1], shift_half(flip(w0)), -shift_half(flip(ws0)), True),
            (2.0 * ell + mt.x, shift_half(w0), shift_half(ws0), False),
            (4.0 * ell - mt.x[::-1], flip(w0), -flip(ws0), True),
        ]
        seam_positions = (ell, 2.0 * ell, 3.0 * ell)
    else:
        panels = [
            (mt.x, w0, ws0, False),
            (2.0 * ell - mt.x[::-1], flip(w0), -flip(ws0), True),
        ]
        seam_positions = (ell,)

    seam_gaps: dict[str, float] = {}
    for q in range(1, len(panels)):
        left_w, left_ws = panels[q - 1][1][-1], panels[q - 1][2][-1]
        right_w, right_ws = panels[q][1][0], panels[q][2][0]
        seam_gaps[f"x={seam_positions[q - 1]:.12g}"] = float(
            max(np.max(np.abs(left_w - right_w)), np.max(np.abs(left_ws - right_ws)))
        )
    wrap_w = float(np.max(np.abs(panels[-1][1][-1] - panels[0][1][0])))
    wrap_ws = float(np.max(np.abs(panels[-1][2][-1] - panels[0][2][0])))
    seam_gaps["wrap"] = max(wrap_w, wrap_ws)

    x_full = np.concatenate([panels[0][0]] + [p[0][1:] for p in panels[1:]])
    w_full = np.concatenate([panels[0][1]] + [p[1][1:] for p in panels[1:]])
    ws_full = np.concatenate([panels[0][2]] + [p[2][1:] for p in panels[1:]])

    blocks: list[Block] = []
    for q, (_, _, _, reflected) in enumerate(panels):
        panel_blocks = (
            _reflected_blocks(mt.blocks, n) if reflected else list(mt.blocks)
        )
        off = q * (n - 1)
        blocks.extend(
            Block(off + b.start, off + b.stop, b.dx, b.sigma, b.entropy)
            for b in panel_blocks
        )

    return TiledSolution(
        x=x_full,
        t=mt.t.copy(),
        w=w_full,
        wstar=ws_full,
        period=mt.period,
        length=float(len(panels)) * ell,
        ell=ell,
        flavor=flavor,
        nx_minimal=n,
        blocks=tuple(blocks),
        seam_positions=seam_positions,
        seam_gaps=seam_gaps,
        profile=mt.profile,
        quiet=mt.quiet,
        meta=dict(mt.meta),
    )


def tile_pure_tone(
    solution: PureToneSolution | TrigSeries,
    profile: PiecewiseConstantProfile,
    quiet: QuietState,
    flavor: str = "periodic-tile",
    nx_per_piece: int = 25,
    nt: int | None = None,
    cfl: float = 0.5,
    n_samples: int | None = None,
) -> TiledSolution:
    """Sample and assemble in one call."""
    minimal = sample_minimal_tile(
        solution, profile, quiet, nx_per_piece=nx_per_piece, nt=nt, cfl=cfl,
        n_samples=n_samples,
    )
    return assemble(minimal, flavor)


# ----------------------------------------------------------------------
# verification against the physical system
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class TileResidualReport:
    """Centered-difference residuals of the physical balance laws.

    ``volume`` refers to ``d/dt v(p, s) - du/dx`` and ``momentum`` to
    ``du/dt + dp/dx``, evaluated on block interiors only (interface and
    seam columns are never stencil centers).  L2 values are root mean
    squares over the included points.
    """

    max_volume: float
    l2_volume: float
    max_momentum: float
    l2_momentum: float
    n_interior: int
    seam_gaps: dict
    dt: float
    min_dx: float

    def to_dict(self) -> dict:
        return {
            "max_volume": self.max_volume,
            "l2_volume": self.l2_volume,
            "max_momentum": self.max_momentum,
            "l2_momentum": self.l2_momentum,
            "n_interior": self.n_interior,
            "seam_gaps": dict(self.seam_gaps),
            "dt": self.dt,
            "min_dx": self.min_dx,
        }


def verify(tiled: TiledSolution) -> TileResidualReport:
    """Check a tile against the physical equations it claims to solve.

    Converts each block back to pressure and velocity with the exact
    inverse scaling, then forms second-order centered differences —
    periodic in time, one-sided never (block interiors only) — of the
    volume and momentum balances.  For a solved tone both residuals shrink
    at second order under grid refinement; the seam gaps are copied from
    assembly.
    """
    dt = tiled.period / tiled.nt
    max_vol = 0.0
    max_mom = 0.0
    sum_sq_vol = 0.0
    sum_sq_mom = 0.0
    n_pts = 0
    min_dx = math.inf
    for b in tiled.blocks:
        if b.n_columns < 3:
            continue
        min_dx = min(min_dx, b.dx)
        w = tiled.w[b.start : b.stop]
        ws = tiled.wstar[b.start : b.stop]
        p, u = tiled.quiet.nondim_inverse(w, ws, b.entropy)
        v = tiled.quiet.gas.specific_volume(p, b.entropy)
        v_t = (np.roll(v, -1, axis=1) - np.roll(v, 1, axis=1)) / (2.0 * dt)
        u_t = (np.roll(u, -1, axis=1) - np.roll(u, 1, axis=1)) / (2.0 * dt)
        u_x = (u[2:] - u[:-2]) / (2.0 * b.dx)
        p_x = (p[2:] - p[:-2]) / (2.0 * b.dx)
        r_vol = v_t[1:-1] - u_x
        r_mom = u_t[1:-1] + p_x
        max_vol = max(max_vol, float(np.max(np.abs(r_vol))))
        max_mom = max(max_mom, float(np.max(np.abs(r_mom))))
        sum_sq_vol += float(np.sum(r_vol**2))
        sum_sq_mom += float(np.sum(r_mom**2))
        n_pts += r_vol.size
    if n_pts == 0:
        raise ValueError("tile has no block interiors to difference on")
    return TileResidualReport(
        max_volume=max_vol,
        l2_volume=math.sqrt(sum_sq_vol / n_pts),
        max_momentum=max_mom,
        l2_momentum=math.sqrt(sum_sq_mom / n_pts),
        n_interior=n_pts,
        seam_gaps=dict(tiled.seam_gaps),
        dt=dt,
        min_dx=min_dx,
    )


# ----------------------------------------------------------------------
# export
# ----------------------------------------------------------------------
def export(tiled: TiledSolution, fmt: str = "csv") -> str:
    """Serialize a tile deterministically.

    ``csv`` emits a ``x,t,w,wstar`` header and one row per grid point in
    row-major order (position outer, time inner), every value at 17
    significant digits so parsing recovers the doubles exactly.  ``json``
    emits the grids with full metadata, sorted keys, no timestamps.
    Identical tiles produce identical bytes.
    """
    if fmt == "csv":
        lines = ["x,t,w,wstar"]
        x, t = tiled.x, tiled.t
        w, ws = tiled.w, tiled.wstar
        for i in range(x.size):
            xi = x[i]
            for j in range(t.size):
                lines.append(f"{xi:.17g},{t[j]:.17g},{w[i, j]:.17g},{ws[i, j]:.17g}")
        return "\n".join(lines) + "\n"
    if fmt == "json":
        payload = {
            "period": tiled.period,
            "length": tiled.length,
            "ell": tiled.ell,
            "flavor": tiled.flavor,
            "nx_minimal": tiled.nx_minimal,
            "x": tiled.x.tolist(),
            "t": tiled.t.tolist(),
            "w": tiled.w.tolist(),
            "wstar": tiled.wstar.tolist(),
            "blocks": [
                {
                    "start": b.start,
                    "stop": b.stop,
                    "dx": b.dx,
                    "sigma": b.sigma,
                    "entropy": b.entropy,
                }
                for b in tiled.blocks
            ],
            "seam_gaps": dict(tiled.seam_gaps),
            "meta": dict(tiled.meta),
        }
        return json.dumps(payload, sort_keys=True, indent=1) + "\n"
    raise ValueError(f"unknown export format {fmt!r}")


def parse_csv(text: str) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Read back an exported CSV into ``(x, t, w, wstar)`` grids.

    The inverse of :func:`export` with ``fmt="csv"`` up to exact float
    round-trip (17 significant digits preserve doubles).
    """
    rows = text.strip().split("\n")
    if rows[0] != "x,t,w,wstar":
        raise ValueError("missing x,t,w,wstar header")
    data = np.array([[float(f) for f in r.split(",")] for r in rows[1:]])
    if data.shape[1] != 4:
        raise ValueError("expected four columns")
    x_col = data[:, 0]
    nt = int(np.argmax(x_col != x_col[0])) if np.any(x_col != x_col[0]) else x_col.size
    if nt == 0 or data.shape[0] % nt != 0:
        raise ValueError("row count is not a multiple of the time grid size")
    nx = data.shape[0] // nt
    x = data[::nt, 0].copy()
    t = data[:nt, 1].copy()
    w = data[:, 2].reshape(nx, nt)
    wstar = data[:, 3].reshape(nx, nt)
    return x, t, w, wstar


# ----------------------------------------------------------------------
# characteristic ergodicity probe (qualitative; reported, not asserted)
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class ErgodicityProbe:
    """Return phases of a forward characteristic traced through the tile.

    ``phases[k]`` is the time (mod one period) at which the characteristic
    launched at ``t_start`` finishes its ``k``-th traversal of the spatial
    period.  For the quiet state the drift per traversal is exactly the
    travel time mod T; through a genuine tone the phases typically wander
    without closing — this is diagnostic output, not a checked invariant.
    """

    t_start: float
    phases: tuple[float, ...]
    drifts: tuple[float, ...]
    mean_drift: float
    closes: bool

    def to_dict(self) -> dict:
        return {
            "t_start": self.t_start,
            "phases": list(self.phases),
            "drifts": list(self.drifts),
            "mean_drift": self.mean_drift,
            "closes": self.closes,
        }


def ergodicity_probe(
    tiled: TiledSolution, n_traversals: int = 6, t_start: float = 0.0
) -> ErgodicityProbe:
    """Trace a forward characteristic through the tiled wave field.

    Integrates ``dt/dx = sigma_piece * (1 + w(x, t))**(-nu)`` column to
    column with Heun's rule, time-interpolating ``w`` periodically, and
    records the phase after each traversal of the full spatial period.
    """
    if n_traversals < 1:
        raise ValueError("need at least one traversal")
    nu = tiled.quiet.gas.nu
    period = tiled.period
    nt = tiled.nt
    dt_grid = period / nt
    sigma = tiled.column_sigma()
    x = tiled.x

    def w_at(row: int, tq: float) -> float:
        pos = (tq / dt_grid) % nt
        j0 = int(pos)
        frac = pos - j0
        j1 = (j0 + 1) % nt
        return (1.0 - frac) * tiled.w[row, j0] + frac * tiled.w[row, j1]

    def speed(row: int, tq: float) -> float:
        return sigma[row] * (1.0 + w_at(row, tq)) ** (-nu)

    t_cur = float(t_start)
    phases: list[float] = []
    for _ in range(n_traversals):
        for i in range(x.size - 1):
            dx = x[i + 1] - x[i]
            if dx == 0.0:
                continue
            f0 = speed(i, t_cur)
            f1 = speed(i + 1, t_cur + dx * f0)
            t_cur += 0.5 * dx * (f0 + f1)
        phases.append(t_cur % period)
    drifts = [
        float((phases[k] - (phases[k - 1] if k else t_start % period) + 0.5 * period)
              % period - 0.5 * period)
        for k in range(len(phases))
    ]
    start_phase = t_start % period
    closes = any(
        min(abs(p - start_phase), period - abs(p - start_phase)) < dt_grid
        for p in phases
    )
    return ErgodicityProbe(
        t_start=float(t_start),
        phases=tuple(phases),
        drifts=tuple(drifts),
        mean_drift=float(np.mean(drifts)) if drifts else 0.0,
        closes=closes,
    )
