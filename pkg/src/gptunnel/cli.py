"""Command-line harness.

Subcommands:

    run             one measurement from a TOML/JSON config file
    profiles        transmitted |psi|^2 profiles at t=440 for g0 in
                    {-16, 0, 200} next to the free reference
    spectra         transmitted momentum spectra of the same three runs
    strength-sweep  tunneling time vs interaction strength g0
    width-sweep     tunneling time vs barrier width L for g0 in {0, 5, -2}
    selftest        built-in verification suites

Every command that writes files also writes manifest.json (even on
failure, with the error recorded); every CSV header carries the manifest's
config hash.  All runs are deterministic: there is no randomness anywhere,
and sweep outputs are byte-identical for any --jobs value.

Exit codes: 0 success, 1 configuration error, 2 numerical failure
(non-finite amplitudes or boundary contamination), 3 measurement failure
(packet never emerged / no transmission).
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import config_hash, config_to_dict, load_config_file
from .csvio import (
    RESULT_COLUMNS,
    result_row,
    write_csv,
    write_field_bin,
    write_manifest,
    write_profile_csv,
    write_snapshots_csv,
)
from .errors import ConfigError, IntegrationError, NotEmergedError
from .experiments import (
    DEFAULT_STRENGTH_G0S,
    DEFAULT_WIDTHS,
    WIDTH_SWEEP_G0S,
    interpolate_sign_change,
    run_sweep,
    run_transmission_profiles,
    strength_sweep_items,
    width_sweep_items,
)
from .observables import l2_distance, momentum_spectrum, region_moments
from .propagator import propagate
from .selftest import run_selftest
from .timing import measure_detailed

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_NOT_EMERGED = 3


class OutputWriter:
    """Collects output files and writes the run manifest."""

    def __init__(self, out_dir: str | Path, command: str, resolved) -> None:
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.resolved = resolved
        self.hash = (
            config_hash({"command": command, "config": resolved})
            if resolved is not None
            else None
        )
        self.outputs: list[str] = []
        self.extra: dict = {}
        self._t0 = time.monotonic()

    def meta(self, **kw) -> dict:
        base = {
            "tool": f"gptunnel {__version__}",
            "command": self.command,
            "config_hash": self.hash,
        }
        base.update(kw)
        return base

    def path(self, name: str) -> Path:
        self.outputs.append(name)
        return self.out_dir / name

    def finish(self, status: str = "ok", error: str | None = None) -> None:
        payload = {
            "command": self.command,
            "tool_version": __version__,
            "config_hash": self.hash,
            "resolved_config": self.resolved,
            "duration_seconds": time.monotonic() - self._t0,
            "outputs": sorted(self.outputs),
            "status": status,
            "error": error,
        }
        payload.update(self.extra)
        write_manifest(self.out_dir / "manifest.json", payload)


def _classify(exc: Exception) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, IntegrationError):
        return EXIT_NUMERICAL
    if isinstance(exc, NotEmergedError):
        return EXIT_NOT_EMERGED
    raise exc


def _fail(writer: OutputWriter | None, exc: Exception) -> int:
    code = _classify(exc)
    if writer is not None:
        writer.finish(status="error", error=f"{type(exc).__name__}: {exc}")
    print(f"gptunnel: error: {exc}", file=sys.stderr)
    return code


def _convergence_probe(config) -> dict:
    """Cheap dt-halving delta over a short horizon, recorded per run."""
    horizon = min(config.t_max, 10.0)
    coarse, _ = propagate(config, t_end=horizon)
    fine, _ = propagate(replace(config, dt=0.5 * config.dt), t_end=horizon)
    return {
        "dt": config.dt,
        "horizon": horizon,
        "dt_halving_l2_delta": l2_distance(coarse, fine),
    }


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def cmd_run(args) -> int:
    writer = None
    try:
        config = load_config_file(args.config)
        if args.dt is not None:
            config = replace(config, dt=args.dt)
        writer = OutputWriter(args.out, "run", config_to_dict(config))
        writer.extra["convergence_selftest"] = _convergence_probe(config)
        outcome = measure_detailed(config)
        write_snapshots_csv(writer.path("snapshots.csv"), outcome.log, writer.meta())
        spectrum = momentum_spectrum(
            outcome.state, config.spectrum_cut, floor=config.tolerances.region_floor
        )
        write_profile_csv(
            writer.path("spectrum.csv"),
            "k",
            "density",
            spectrum.k,
            spectrum.density,
            writer.meta(normalization="raw", t=outcome.result.t_T),
        )
        write_csv(
            writer.path("result.csv"),
            RESULT_COLUMNS,
            [result_row(config, outcome.result)],
            writer.meta(),
        )
        if args.dump_fields:
            write_field_bin(writer.path("field_final.bin"), outcome.state)
        writer.finish()
        print(
            f"measured delta_t = {outcome.result.delta_t:.6g} at t_T = "
            f"{outcome.result.t_T:.6g} (converged={outcome.result.converged})"
        )
        return EXIT_OK
    except (ConfigError, IntegrationError, NotEmergedError) as exc:
        return _fail(writer, exc)


# ---------------------------------------------------------------------------
# profiles / spectra
# ---------------------------------------------------------------------------

def _profile_resolved(args) -> dict:
    from .experiments import PROFILE_G0S, transmission_profile_config

    dt = args.dt if args.dt is not None else 0.015625
    return {
        "dt": dt,
        "cases": [
            config_to_dict(transmission_profile_config(g0, dt=dt)) for g0 in PROFILE_G0S
        ],
    }


def cmd_profiles(args) -> int:
    writer = OutputWriter(args.out, "profiles", _profile_resolved(args))
    try:
        dt = args.dt if args.dt is not None else 0.015625
        cases = run_transmission_profiles(dt=dt)
        centroids: dict[str, float] = {}
        for case in cases:
            grid = case.state.grid
            rho = case.state.density()
            mass, centroid, _ = region_moments(grid, rho, 0.0)
            centroids[case.label] = centroid
            peak = float(np.max(np.where(grid.x > 0.0, rho, 0.0)))
            rows = zip(
                grid.x,
                rho,
                rho / peak if peak > 0 else rho,
                rho / mass if mass > 0 else rho,
            )
            write_csv(
                writer.path(f"profile_{case.label}.csv"),
                ["x", "density", "density_unit_peak", "density_unit_area"],
                rows,
                writer.meta(case=case.label, t=case.state.time),
            )
            if args.dump_fields:
                write_field_bin(writer.path(f"field_{case.label}.bin"), case.state)
        ordered = (
            centroids["g200"] > centroids["g0"] > centroids["free"] > centroids["g-16"]
        )
        write_csv(
            writer.path("profiles_summary.csv"),
            ["case", "centroid", "gap_to_free"],
            [
                [label, c, c - centroids["free"]]
                for label, c in centroids.items()
            ],
            writer.meta(centroid_ordering_g200_g0_free_gm16="true" if ordered else "false"),
        )
        writer.finish()
        return EXIT_OK
    except (ConfigError, IntegrationError, NotEmergedError) as exc:
        return _fail(writer, exc)


def cmd_spectra(args) -> int:
    writer = OutputWriter(args.out, "spectra", _profile_resolved(args))
    try:
        dt = args.dt if args.dt is not None else 0.015625
        cases = run_transmission_profiles(dt=dt)
        for case in cases:
            if case.g0 is None:
                continue
            cut = 6.0  # barrier exit L/2
            for normalized, suffix in ((False, ""), (True, "_unit_area")):
                spectrum = momentum_spectrum(case.state, cut, normalized=normalized)
                write_profile_csv(
                    writer.path(f"spectrum_{case.label}{suffix}.csv"),
                    "k",
                    "density",
                    spectrum.k,
                    spectrum.density,
                    writer.meta(
                        case=case.label,
                        normalization="unit-area" if normalized else "raw",
                        window_cut=cut,
                        t=case.state.time,
                    ),
                )
        writer.finish()
        return EXIT_OK
    except (ConfigError, IntegrationError, NotEmergedError) as exc:
        return _fail(writer, exc)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def _sweep_rows(points) -> list:
    return [result_row(p.config, p.result, p.status) for p in points]


def cmd_strength_sweep(args) -> int:
    g0s = tuple(args.g0_list) if args.g0_list else DEFAULT_STRENGTH_G0S
    dt = args.dt if args.dt is not None else 0.015625
    items = strength_sweep_items(g0s, dt=dt)
    writer = OutputWriter(
        args.out,
        "strength-sweep",
        {"dt": dt, "points": [config_to_dict(c) for _, c in items]},
    )
    try:
        points = run_sweep(items, args.jobs)
        write_csv(
            writer.path("strength_sweep.csv"),
            RESULT_COLUMNS,
            _sweep_rows(points),
            writer.meta(),
        )
        good = [(p.params["g0"], p.result.delta_t) for p in points if p.result]
        deltas = [d for _, d in good]
        monotone = all(b < a for a, b in zip(deltas, deltas[1:]))
        crossing = interpolate_sign_change([g for g, _ in good], deltas)
        write_csv(
            writer.path("strength_sweep_summary.csv"),
            ["monotone_decreasing", "sign_change_g0", "delta_t_at_max_g0"],
            [[monotone, "" if crossing is None else crossing, deltas[-1] if deltas else ""]],
            writer.meta(points_ok=len(good), points_total=len(points)),
        )
        writer.finish()
        return EXIT_OK
    except (ConfigError, IntegrationError, NotEmergedError) as exc:
        return _fail(writer, exc)


def cmd_width_sweep(args) -> int:
    widths = tuple(args.L_list) if args.L_list else DEFAULT_WIDTHS
    g0s = tuple(args.g0_list) if args.g0_list else WIDTH_SWEEP_G0S
    dt = args.dt if args.dt is not None else 0.015625
    items = width_sweep_items(widths, g0s, dt=dt)
    writer = OutputWriter(
        args.out,
        "width-sweep",
        {"dt": dt, "points": [config_to_dict(c) for _, c in items]},
    )
    try:
        points = run_sweep(items, args.jobs)
        write_csv(
            writer.path("width_sweep.csv"),
            RESULT_COLUMNS,
            _sweep_rows(points),
            writer.meta(),
        )
        summary_rows = []
        for g0 in g0s:
            series = [
                (p.params["L"], p.result.delta_t)
                for p in points
                if p.result and p.params["g0"] == g0
            ]
            if len(series) >= 2:
                slope = float(
                    np.polyfit([L for L, _ in series], [d for _, d in series], 1)[0]
                )
                summary_rows.append(
                    [g0, slope, "negative" if slope < 0 else "positive", len(series)]
                )
            else:
                summary_rows.append([g0, float("nan"), "undetermined", len(series)])
        write_csv(
            writer.path("width_sweep_summary.csv"),
            ["g0", "slope", "slope_sign", "points_ok"],
            summary_rows,
            writer.meta(),
        )
        writer.finish()
        return EXIT_OK
    except (ConfigError, IntegrationError, NotEmergedError) as exc:
        return _fail(writer, exc)


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------

def cmd_selftest(args) -> int:
    results = run_selftest()
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else 1


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats: {exc}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gptunnel",
        description="Barrier-gated nonlinear wave-packet tunneling simulations "
        "and time-of-flight tunneling-time measurements.",
    )
    parser.add_argument("--version", action="version", version=f"gptunnel {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    def common(p, jobs=False, dump=False):
        p.add_argument("--out", default="out", help="output directory (default: ./out)")
        p.add_argument("--dt", type=float, default=None, help="override the time step")
        p.add_argument(
            "--seedless",
            action="store_true",
            help="accepted for interface stability; every run is already "
            "deterministic and uses no randomness",
        )
        if jobs:
            p.add_argument(
                "--jobs",
                type=int,
                default=None,
                help="sweep worker processes (default: GP_TUNNEL_JOBS or all cores); "
                "outputs are byte-identical for any value",
            )
        if dump:
            p.add_argument(
                "--dump-fields",
                action="store_true",
                help="also write raw binary field dumps for exact replay",
            )

    p = sub.add_parser("run", help="one measurement from a config file")
    p.add_argument("--config", required=True, help="TOML or JSON run file")
    common(p, dump=True)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser(
        "profiles", help="transmitted density profiles at t=440 vs the free reference"
    )
    common(p, dump=True)
    p.set_defaults(fn=cmd_profiles)

    p = sub.add_parser("spectra", help="transmitted momentum spectra of the profile runs")
    common(p)
    p.set_defaults(fn=cmd_spectra)

    p = sub.add_parser("strength-sweep", help="tunneling time vs interaction strength")
    p.add_argument("--g0-list", type=_float_list, default=None, help="comma-separated g0 values")
    common(p, jobs=True)
    p.set_defaults(fn=cmd_strength_sweep)

    p = sub.add_parser("width-sweep", help="tunneling time vs barrier width")
    p.add_argument("--L-list", dest="L_list", type=_float_list, default=None,
                   help="comma-separated barrier widths")
    p.add_argument("--g0-list", type=_float_list, default=None,
                   help="comma-separated g0 values (default 0,5,-2)")
    common(p, jobs=True)
    p.set_defaults(fn=cmd_width_sweep)

    p = sub.add_parser("selftest", help="run the built-in verification suites")
    p.set_defaults(fn=cmd_selftest)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
