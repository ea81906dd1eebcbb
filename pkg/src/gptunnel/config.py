"""Config-file loading and canonical serialization.

Run files are TOML (or JSON with the same structure): nested sections
mirroring SimConfig, every key optional except the physics you mean to
set.  ``config_to_dict``/``config_from_dict`` round-trip exactly, and the
canonical JSON encoding of that dict is what gets hashed into every
output file header.

Schema (defaults in parentheses):

    [grid]          x_min (-1024.0), dx (0.125), n (16384)
    [packet]        x0 (200.0), dx0 (50.0), k0 (1.2)
    [barrier]       v0 (1.0), shape ("rectangular"|"supergaussian"),
                    L (12.0), order (20, supergaussian only)
    [nonlinearity]  g0 (0.0)
    [run]           dt (0.015625), t_max (440.0), snapshot_every (50),
                    store_fields (false)
    [cuts]          centroid (0.0), spectrum (L/2 when omitted)
    [emergence]     plateau_window (20.0), plateau_rtol (1e-4),
                    plateau_floor (1e-9), clearance_widths (2.0),
                    transmission_floor (1e-15)
    [absorber]      enabled (false), width (50.0), strength (1.0)
    [tolerances]    packet_barrier_overlap (1e-6), packet_boundary_tail
                    (1e-12), boundary_guard_density (1e-8),
                    boundary_guard_points (10), region_floor (1e-15)
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .model import (
    AbsorberSpec,
    EmergenceSpec,
    Grid,
    NonlinearitySpec,
    PacketSpec,
    PotentialSpec,
    Rectangular,
    SimConfig,
    SuperGaussian,
    Tolerances,
)

_SECTIONS = {
    "grid",
    "packet",
    "barrier",
    "nonlinearity",
    "run",
    "cuts",
    "emergence",
    "absorber",
    "tolerances",
}


def _section(data: dict, name: str, known: set[str]) -> dict:
    sec = data.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"section [{name}] must be a table, got {type(sec).__name__}")
    unknown = set(sec) - known
    if unknown:
        raise ConfigError(f"unknown keys in [{name}]: {', '.join(sorted(unknown))}")
    return sec


def config_from_dict(data: dict[str, Any]) -> SimConfig:
    """Build a validated SimConfig from a nested dict (the file structure)."""
    unknown = set(data) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown config sections: {', '.join(sorted(unknown))}")

    g = _section(data, "grid", {"x_min", "dx", "n"})
    grid = Grid(
        x_min=float(g.get("x_min", -1024.0)),
        dx=float(g.get("dx", 0.125)),
        n=int(g.get("n", 16384)),
    )

    p = _section(data, "packet", {"x0", "dx0", "k0"})
    packet = PacketSpec(
        x0=float(p.get("x0", 200.0)),
        dx0=float(p.get("dx0", 50.0)),
        k0=float(p.get("k0", 1.2)),
    )

    b = _section(data, "barrier", {"v0", "shape", "L", "order"})
    shape_name = str(b.get("shape", "rectangular")).lower()
    L = float(b.get("L", 12.0))
    if shape_name == "rectangular":
        if "order" in b:
            raise ConfigError("barrier.order applies only to the supergaussian shape")
        shape = Rectangular(L=L)
    elif shape_name == "supergaussian":
        shape = SuperGaussian(L=L, order=int(b.get("order", 20)))
    else:
        raise ConfigError(
            f"barrier.shape must be 'rectangular' or 'supergaussian', got {shape_name!r}"
        )
    potential = PotentialSpec(v0=float(b.get("v0", 1.0)), shape=shape)

    nl = _section(data, "nonlinearity", {"g0"})
    nonlinearity = NonlinearitySpec(g0=float(nl.get("g0", 0.0)), profile=shape)

    r = _section(data, "run", {"dt", "t_max", "snapshot_every", "store_fields"})
    cuts = _section(data, "cuts", {"centroid", "spectrum"})
    e = _section(
        data,
        "emergence",
        {
            "plateau_window",
            "plateau_rtol",
            "plateau_floor",
            "clearance_widths",
            "transmission_floor",
        },
    )
    emergence = EmergenceSpec(
        plateau_window=float(e.get("plateau_window", 20.0)),
        plateau_rtol=float(e.get("plateau_rtol", 1e-4)),
        plateau_floor=float(e.get("plateau_floor", 1e-9)),
        clearance_widths=float(e.get("clearance_widths", 2.0)),
        transmission_floor=float(e.get("transmission_floor", 1e-15)),
    )

    a = _section(data, "absorber", {"enabled", "width", "strength"})
    absorber = None
    if bool(a.get("enabled", False)):
        absorber = AbsorberSpec(
            width=float(a.get("width", 50.0)),
            strength=float(a.get("strength", 1.0)),
        )

    t = _section(
        data,
        "tolerances",
        {
            "packet_barrier_overlap",
            "packet_boundary_tail",
            "boundary_guard_density",
            "boundary_guard_points",
            "region_floor",
        },
    )
    defaults = Tolerances()
    tolerances = Tolerances(
        packet_barrier_overlap=float(
            t.get("packet_barrier_overlap", defaults.packet_barrier_overlap)
        ),
        packet_boundary_tail=float(
            t.get("packet_boundary_tail", defaults.packet_boundary_tail)
        ),
        boundary_guard_density=float(
            t.get("boundary_guard_density", defaults.boundary_guard_density)
        ),
        boundary_guard_points=int(
            t.get("boundary_guard_points", defaults.boundary_guard_points)
        ),
        region_floor=float(t.get("region_floor", defaults.region_floor)),
    )

    spectrum_cut = cuts.get("spectrum")
    return SimConfig(
        grid=grid,
        packet=packet,
        potential=potential,
        nonlinearity=nonlinearity,
        dt=float(r.get("dt", 0.015625)),
        t_max=float(r.get("t_max", 440.0)),
        snapshot_every=int(r.get("snapshot_every", 50)),
        x_cut_centroid=float(cuts.get("centroid", 0.0)),
        x_cut_spectrum=None if spectrum_cut is None else float(spectrum_cut),
        emergence=emergence,
        absorber=absorber,
        store_fields=bool(r.get("store_fields", False)),
        tolerances=tolerances,
    )


def config_to_dict(config: SimConfig) -> dict[str, Any]:
    """Fully resolved nested dict; feeding it back reproduces the config."""
    shape = config.potential.shape
    barrier: dict[str, Any] = {"v0": config.potential.v0, "L": shape.L}
    if isinstance(shape, SuperGaussian):
        barrier["shape"] = "supergaussian"
        barrier["order"] = shape.order
    else:
        barrier["shape"] = "rectangular"
    out: dict[str, Any] = {
        "grid": {"x_min": config.grid.x_min, "dx": config.grid.dx, "n": config.grid.n},
        "packet": {
            "x0": config.packet.x0,
            "dx0": config.packet.dx0,
            "k0": config.packet.k0,
        },
        "barrier": barrier,
        "nonlinearity": {"g0": config.nonlinearity.g0},
        "run": {
            "dt": config.dt,
            "t_max": config.t_max,
            "snapshot_every": config.snapshot_every,
            "store_fields": config.store_fields,
        },
        "cuts": {"centroid": config.x_cut_centroid, "spectrum": config.spectrum_cut},
        "emergence": {
            "plateau_window": config.emergence.plateau_window,
            "plateau_rtol": config.emergence.plateau_rtol,
            "plateau_floor": config.emergence.plateau_floor,
            "clearance_widths": config.emergence.clearance_widths,
            "transmission_floor": config.emergence.transmission_floor,
        },
        "absorber": {
            "enabled": config.absorber is not None,
            "width": config.absorber.width if config.absorber else 50.0,
            "strength": config.absorber.strength if config.absorber else 1.0,
        },
        "tolerances": {
            "packet_barrier_overlap": config.tolerances.packet_barrier_overlap,
            "packet_boundary_tail": config.tolerances.packet_boundary_tail,
            "boundary_guard_density": config.tolerances.boundary_guard_density,
            "boundary_guard_points": config.tolerances.boundary_guard_points,
            "region_floor": config.tolerances.region_floor,
        },
    }
    return out


def load_config_file(path: str | Path) -> SimConfig:
    """Read a TOML (or JSON) run file into a validated SimConfig."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(raw.decode("utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    else:
        try:
            data = tomllib.loads(raw.decode("utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config root must be a table, got {type(data).__name__}")
    return config_from_dict(data)


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def config_hash(payload: dict[str, Any]) -> str:
    """sha256 of the canonical JSON encoding; stable across processes."""
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()
