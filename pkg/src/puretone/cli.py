"""Command-line orchestration: JSON-configured runs with deterministic reports.

A run is described by a :class:`RunConfig` — loaded from a JSON file, a
named recipe, or built in code — and executed by :func:`run`, which
returns a JSON-ready report embedding the full configuration, its hash,
and package versions (never timestamps): identical configurations produce
byte-identical reports.

Exit codes
----------
0  success
2  configuration problem (malformed JSON reports line and column)
3  resonant profile
4  wave steepening detected
5  iteration failed to converge
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import platform
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .bifurcate import ContinuationResult, build_decomposition, continuation
from .divisors import base_frequency, divisor_table, nonresonance_check, resonance_scan
from .errors import (
    BlowUpError,
    ConfigError,
    ConvergenceError,
    PuretoneError,
    ResonanceError,
)
from .evolve import march_periodic
from .profiles import PiecewiseConstantProfile, physical_from_scaled
from .series import TrigSeries
from .thermo import GammaLawGas, QuietState
from .tile import ergodicity_probe, export, tile_pure_tone, verify

__all__ = ["RunConfig", "run", "recipe", "main", "COMMANDS", "RECIPES"]

COMMANDS = (
    "divisors",
    "freq",
    "resonance",
    "scan",
    "solve",
    "tile",
    "verify",
    "march",
)
RECIPES = ("square-wave-k1", "isentropic-contrast", "three-jump-acoustic-k2")

_MAX_SEED = 2**64 - 1


# ----------------------------------------------------------------------
# configuration
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class RunConfig:
    """Complete, validated description of one command-line run.

    ``profile`` uses the JSON profile shape with either ``widths``
    (material frame) or ``scaled_widths`` (non-dimensional frame, converted
    through the quiet state); ``gas`` holds ``gamma``, ``c_v`` and
    ``p_bar``.  ``alpha`` is an amplitude schedule (a single amplitude is a
    one-element schedule).  All tolerances must be positive.
    """

    command: str
    profile: dict | None = None
    gas: dict | None = None
    k: int = 1
    k_max: int = 8
    j_max: int = 64
    flavor: str = "periodic-tile"
    alpha: tuple[float, ...] = (1e-3,)
    n_modes: int = 16
    n_samples: int | None = None
    nx_per_piece: int = 25
    nt: int | None = None
    period: float | None = None
    resonance_tol: float = 1e-9
    aux_tol: float = 1e-12
    f_tol: float = 1e-13
    n_periods: int = 20
    scan_samples: int = 1000
    theta_range: tuple[float, float] = (0.5, 1.5)
    jump_range: tuple[float, float] = (0.5, 2.0)
    seed: int = 0
    out_dir: str | None = None
    threads: int = 1

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(
                f"unknown command {self.command!r}; expected one of {', '.join(COMMANDS)}"
            )
        if self.flavor not in ("periodic-tile", "acoustic"):
            raise ConfigError(f"unknown flavor {self.flavor!r}")
        object.__setattr__(self, "alpha", _as_schedule(self.alpha))
        object.__setattr__(self, "theta_range", _as_pair(self.theta_range, "theta_range"))
        object.__setattr__(self, "jump_range", _as_pair(self.jump_range, "jump_range"))
        for name in ("k", "k_max", "j_max", "n_modes", "n_periods", "scan_samples", "threads"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if self.nx_per_piece < 2:
            raise ConfigError("nx_per_piece must be at least 2")
        for name in ("resonance_tol", "aux_tol", "f_tol"):
            value = getattr(self, name)
            if not value > 0.0:
                raise ConfigError(f"{name} must be positive, got {value!r}")
        if self.period is not None and not self.period > 0.0:
            raise ConfigError(f"period must be positive, got {self.period!r}")
        if self.nt is not None and (self.nt < 8 or self.nt % 4 != 0):
            raise ConfigError(f"nt must be a multiple of 4 and at least 8, got {self.nt}")
        if self.n_samples is not None and self.n_samples < 8:
            raise ConfigError(f"n_samples must be at least 8, got {self.n_samples}")
        if not isinstance(self.seed, int) or not 0 <= self.seed <= _MAX_SEED:
            raise ConfigError(f"seed must be an integer in [0, 2^64), got {self.seed!r}")

    @classmethod
    def from_dict(cls, obj: dict) -> "RunConfig":
        if not isinstance(obj, dict):
            raise ConfigError("configuration must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(obj) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        if "command" not in obj:
            raise ConfigError("configuration must name a command")
        return cls(**obj)

    def to_dict(self) -> dict:
        out: dict = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out


def _as_schedule(alpha) -> tuple[float, ...]:
    if isinstance(alpha, (int, float)):
        alpha = [alpha]
    try:
        schedule = tuple(float(a) for a in alpha)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"alpha must be a number or list of numbers: {err}") from err
    if not schedule:
        raise ConfigError("alpha schedule must not be empty")
    return schedule


def _as_pair(value, name: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in value)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{name} must be a pair of numbers: {err}") from err
    if not lo < hi:
        raise ConfigError(f"{name} must satisfy lo < hi, got ({lo}, {hi})")
    return lo, hi


def _quiet(config: RunConfig) -> QuietState:
    gas_spec = dict(config.gas or {})
    try:
        gas = GammaLawGas(
            float(gas_spec.pop("gamma", 1.4)), float(gas_spec.pop("c_v", 1.0))
        )
        quiet = QuietState(gas, float(gas_spec.pop("p_bar", 1.0)))
    except ValueError as err:
        raise ConfigError(f"bad gas specification: {err}") from err
    if gas_spec:
        raise ConfigError(f"unknown gas keys: {', '.join(sorted(gas_spec))}")
    return quiet


def _profiles(
    config: RunConfig,
) -> tuple[PiecewiseConstantProfile, PiecewiseConstantProfile, QuietState]:
    """Physical and scaled profiles plus the quiet state, from the config."""
    quiet = _quiet(config)
    spec = config.profile
    if spec is None:
        raise ConfigError(f"command {config.command!r} requires a profile")
    if not isinstance(spec, dict):
        raise ConfigError("profile must be a JSON object")
    if spec.get("type", "piecewise") != "piecewise":
        raise ConfigError("the command line supports piecewise profiles only")
    jumps = tuple(float(j) for j in spec.get("jumps", ()))
    s_base = float(spec.get("s_base", 0.0))
    try:
        if "widths" in spec and "scaled_widths" in spec:
            raise ConfigError("give widths or scaled_widths, not both")
        if "widths" in spec:
            physical = PiecewiseConstantProfile(
                tuple(float(w) for w in spec["widths"]), jumps, s_base
            )
        elif "scaled_widths" in spec:
            physical = physical_from_scaled(
                tuple(float(w) for w in spec["scaled_widths"]), jumps, quiet, s_base
            )
        else:
            raise ConfigError("profile needs widths or scaled_widths")
    except ValueError as err:
        raise ConfigError(f"bad profile: {err}") from err
    scaled = PiecewiseConstantProfile(
        tuple(float(w) for w in physical.scaled_widths(quiet)), jumps, s_base
    )
    return physical, scaled, quiet


# ----------------------------------------------------------------------
# recipes
# ----------------------------------------------------------------------
def recipe(name: str) -> RunConfig:
    """A named, ready-to-run configuration.

    ``square-wave-k1``
        Two equal scaled widths of 1 with the interface factor ``cot^2(1)``
        that places mode 1 exactly in the kernel; solves the amplitude
        schedule ``(1e-3, 5e-4)``.
    ``isentropic-contrast``
        No entropy variation at all: every mode is resonant, and a march of
        amplitude 0.1 steepens within a few profile lengths — the contrast
        motivating the jumps.
    ``three-jump-acoustic-k2``
        A generic four-piece profile solved in the acoustic reflection
        flavor at mode 2.
    """
    if name == "square-wave-k1":
        return RunConfig(
            command="solve",
            gas={"gamma": 2.0, "c_v": 1.0, "p_bar": 1.0},
            profile={
                "type": "piecewise",
                "scaled_widths": [1.0, 1.0],
                "jumps": [1.0 / math.tan(1.0) ** 2],
            },
            k=1,
            flavor="periodic-tile",
            alpha=(1e-3, 5e-4),
            n_modes=16,
        )
    if name == "isentropic-contrast":
        return RunConfig(
            command="march",
            gas={"gamma": 1.4, "c_v": 1.0, "p_bar": 1.0},
            profile={"type": "piecewise", "scaled_widths": [1.0, 1.0], "jumps": [1.0]},
            k=1,
            alpha=(0.1,),
            n_modes=16,
            n_periods=20,
        )
    if name == "three-jump-acoustic-k2":
        return RunConfig(
            command="solve",
            gas={"gamma": 1.4, "c_v": 1.0, "p_bar": 1.0},
            profile={
                "type": "piecewise",
                "scaled_widths": [0.7, 0.9, 1.1, 0.8],
                "jumps": [1.3, 0.8, 1.25],
            },
            k=2,
            flavor="acoustic",
            alpha=(1e-3, 5e-4),
            n_modes=16,
        )
    raise ConfigError(f"unknown recipe {name!r}; expected one of {', '.join(RECIPES)}")


# ----------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------
def _cmd_divisors(config: RunConfig) -> dict:
    _, scaled, _ = _profiles(config)
    period = config.period
    if period is None:
        period = base_frequency(scaled, config.k).period
    table = divisor_table(scaled, period, config.j_max, config.flavor)
    return {
        "period": table.period,
        "flavor": table.flavor,
        "fingerprint": table.fingerprint,
        "deltas": [
            {"j": j, "delta": float(d)} for j, d in enumerate(table.deltas, start=1)
        ],
    }


def _cmd_freq(config: RunConfig) -> dict:
    _, scaled, _ = _profiles(config)
    rows = []
    for k in range(1, config.k_max + 1):
        base = base_frequency(scaled, k)
        rows.append(
            {
                "k": k,
                "omega": base.omega,
                "period": base.period,
                "residual": base.residual,
            }
        )
    return {"total_scaled_width": scaled.total_width, "table": rows}


def _cmd_resonance(config: RunConfig) -> dict:
    _, scaled, _ = _profiles(config)
    report = nonresonance_check(
        scaled, config.k, config.j_max, config.resonance_tol, config.flavor
    )
    result = report.to_dict()
    if not report.is_nonresonant:
        modes = [j for j, _ in report.offenders]
        err = ResonanceError(
            f"profile is resonant at the mode-{config.k} reference period: "
            f"divisors of modes {modes} fall below {config.resonance_tol:.1e}"
        )
        err.report = result  # the audit still reaches stdout before exit 3
        raise err
    return result


def _cmd_scan(config: RunConfig) -> dict:
    result = resonance_scan(
        config.scan_samples,
        seed=config.seed,
        k=config.k,
        j_max=config.j_max,
        tol=config.resonance_tol,
        theta_range=config.theta_range,
        jump_range=config.jump_range,
    )
    return result.to_dict()


def _solve_schedule(config: RunConfig) -> tuple[ContinuationResult, dict]:
    _, scaled, quiet = _profiles(config)
    dec = build_decomposition(
        scaled,
        config.k,
        config.n_modes,
        quiet.gas.nu,
        config.flavor,
        config.resonance_tol,
    )
    result = continuation(
        dec, config.alpha, aux_tol=config.aux_tol, f_tol=config.f_tol
    )
    rows = [
        {
            "alpha": s.alpha,
            "z": s.z,
            "period": s.period,
            "residual_norm": s.residual_norm,
            "deviation_norm": s.deviation_norm,
            "n_function_evaluations": s.n_function_evaluations,
            "cosines": [float(c) for c in s.y0.cos],
        }
        for s in result.solutions
    ]
    summary = {
        "k": config.k,
        "flavor": config.flavor,
        "period": dec.period,
        "solutions": rows,
        "failed_alpha": result.failed_alpha,
        "failure_reason": result.failure_reason,
    }
    return result, summary


def _cmd_solve(config: RunConfig) -> dict:
    result, summary = _solve_schedule(config)
    if result.failed_alpha is not None:
        err = ConvergenceError(
            f"continuation failed at alpha = {result.failed_alpha:g}: "
            f"{result.failure_reason}"
        )
        err.report = summary  # surfaced by main() before exiting
        raise err
    return summary


def _cmd_tile(config: RunConfig, with_export: bool = True) -> dict:
    physical, _, quiet = _profiles(config)
    result, summary = _solve_schedule(config)
    if not result.solutions:
        err = ConvergenceError(
            f"continuation failed at alpha = {result.failed_alpha:g}: "
            f"{result.failure_reason}"
        )
        err.report = summary
        raise err
    solution = result.solutions[-1]
    tiled = tile_pure_tone(
        solution,
        physical,
        quiet,
        flavor=config.flavor,
        nx_per_piece=config.nx_per_piece,
        nt=config.nt,
        n_samples=config.n_samples,
    )
    report = verify(tiled)
    probe = ergodicity_probe(tiled)
    out = {
        "solve": summary,
        "alpha": solution.alpha,
        "length": tiled.length,
        "ell": tiled.ell,
        "n_columns": tiled.n_columns,
        "nt": tiled.nt,
        "verify": report.to_dict(),
        "ergodicity": probe.to_dict(),
        "files": [],
    }
    if with_export and config.out_dir is not None:
        directory = Path(config.out_dir)
        directory.mkdir(parents=True, exist_ok=True)
        for fmt in ("csv", "json"):
            path = directory / f"tile.{fmt}"
            path.write_text(export(tiled, fmt))
            out["files"].append(path.name)
    return out


def _cmd_verify(config: RunConfig) -> dict:
    return _cmd_tile(config, with_export=False)


def _cmd_march(config: RunConfig) -> dict:
    _, scaled, quiet = _profiles(config)
    base = base_frequency(scaled, config.k)
    y0 = TrigSeries.pure_cosine(
        config.k, config.n_modes, base.period, config.alpha[0]
    )
    report = march_periodic(
        scaled,
        y0,
        quiet.gas.nu,
        config.n_periods,
        include_wrap=True,
        n_samples=config.n_samples,
    )
    out = {
        "k": config.k,
        "alpha": config.alpha[0],
        "period": base.period,
        "requested_distance": report.requested_distance,
        "distance": report.distance,
        "completed": report.completed,
        "max_slope_ratio": report.max_slope_ratio,
    }
    if report.blew_up:
        err = BlowUpError(
            f"wave steepening detected at x = {report.distance:.6g} "
            f"of {report.requested_distance:.6g}",
            distance=report.distance,
        )
        err.report = out
        raise err
    return out


_DISPATCH = {
    "divisors": _cmd_divisors,
    "freq": _cmd_freq,
    "resonance": _cmd_resonance,
    "scan": _cmd_scan,
    "solve": _cmd_solve,
    "tile": _cmd_tile,
    "verify": _cmd_verify,
    "march": _cmd_march,
}


# ----------------------------------------------------------------------
# reports
# ----------------------------------------------------------------------
def _config_hash(config_dict: dict) -> str:
    canonical = json.dumps(config_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _report(config: RunConfig, result: dict) -> dict:
    config_dict = config.to_dict()
    return {
        "command": config.command,
        "config": config_dict,
        "config_hash": _config_hash(config_dict),
        "versions": {
            "puretone": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "result": result,
    }


def run(config: RunConfig) -> dict:
    """Execute one configured command and return its JSON-ready report.

    Domain failures raise the package exceptions (resonance, blow-up,
    convergence); whatever partial report exists is attached to the
    exception as ``report``.
    """
    command = _DISPATCH[config.command]
    try:
        result = command(config)
    except PuretoneError as err:
        partial = getattr(err, "report", None)
        if partial is not None:
            err.report = _report(config, partial)
        raise
    except ValueError as err:
        raise ConfigError(str(err)) from err
    except ArithmeticError as err:
        raise ConvergenceError(str(err)) from err
    return _report(config, result)


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------
def _env_default(flag_value, name: str):
    if flag_value is not None:
        return flag_value
    return os.environ.get(f"PURETONE_{name}")


def _load_config(args: argparse.Namespace) -> RunConfig:
    config_path = _env_default(args.config, "CONFIG")
    recipe_name = _env_default(args.recipe, "RECIPE")
    if (config_path is None) == (recipe_name is None):
        raise ConfigError("provide exactly one of --config or --recipe")
    if config_path is not None:
        try:
            text = Path(config_path).read_text()
        except OSError as err:
            raise ConfigError(f"cannot read config file: {err}") from err
        config = RunConfig.from_dict(json.loads(text))
    else:
        config = recipe(recipe_name)

    overrides: dict = {}
    seed = _env_default(args.seed, "SEED")
    if seed is not None:
        try:
            overrides["seed"] = int(seed)
        except ValueError as err:
            raise ConfigError(f"seed must be an integer: {err}") from err
    out_dir = _env_default(args.out, "OUT")
    if out_dir is not None:
        overrides["out_dir"] = str(out_dir)
    threads = _env_default(args.threads, "THREADS")
    if threads is not None:
        try:
            overrides["threads"] = int(threads)
        except ValueError as err:
            raise ConfigError(f"threads must be an integer: {err}") from err
    return replace(config, **overrides) if overrides else config


def _emit(report: dict, out_dir: str | None) -> None:
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    sys.stdout.write(text)
    if out_dir is not None:
        directory = Path(out_dir)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "report.json").write_text(text)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="puretone",
        description="Construct and validate periodic pure-tone waves on entropy profiles.",
    )
    parser.add_argument("--config", help="path to a JSON run configuration")
    parser.add_argument(
        "--recipe", help=f"named configuration: one of {', '.join(RECIPES)}"
    )
    parser.add_argument("--out", help="directory for the report and exported grids")
    parser.add_argument("--seed", type=int, help="override the configured seed")
    parser.add_argument("--threads", type=int, help="override the configured thread count")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    config: RunConfig | None = None
    try:
        config = _load_config(args)
        report = run(config)
    except json.JSONDecodeError as err:
        print(
            f"config parse error at line {err.lineno}, column {err.colno}: {err.msg}",
            file=sys.stderr,
        )
        return 2
    except PuretoneError as err:
        partial = getattr(err, "report", None)
        if partial is not None:
            _emit(partial, config.out_dir if config is not None else None)
        print(f"error: {err}", file=sys.stderr)
        return err.exit_code
    _emit(report, config.out_dir)
    return 0


if __name__ == "__main__":
    sys.exit(main())
