"""Deterministic output files: CSV tables, binary field dumps, manifests.

Every CSV starts with '#'-prefixed metadata lines carrying at least the
generating config hash, then a header row, then data rows.  Floats are
rendered in scientific notation with 12 significant digits, newlines are
always LF, and row order is fixed by the caller, so identical inputs
produce byte-identical files regardless of sweep parallelism.

Binary field dump layout (little endian):

    uint64  n        number of samples
    float64 dx       grid spacing
    float64 x_min    left edge
    float64 t        state time
    n x (float64 re, float64 im)   amplitudes in grid order
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .model import Grid, WaveFunction

FLOAT_FMT = "{:.11e}"

_HEADER = struct.Struct("<Qddd")


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return FLOAT_FMT.format(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (np.floating,)):
        return FLOAT_FMT.format(float(value))
    return str(value)


def write_csv(
    path: str | Path,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    meta: dict[str, Any] | None = None,
) -> Path:
    path = Path(path)
    lines: list[str] = []
    for key, value in (meta or {}).items():
        lines.append(f"# {key}: {value}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def write_profile_csv(
    path: str | Path,
    axis_name: str,
    value_name: str,
    axis: np.ndarray,
    values: np.ndarray,
    meta: dict[str, Any] | None = None,
) -> Path:
    """Two-column CSV used for spectra and effective-potential profiles."""
    rows = zip((float(a) for a in axis), (float(v) for v in values))
    return write_csv(path, [axis_name, value_name], rows, meta)


def write_snapshots_csv(
    path: str | Path,
    log,
    meta: dict[str, Any] | None = None,
) -> Path:
    rows = zip(log.times, log.norms, log.centroids, log.transmitted_fractions)
    return write_csv(path, ["t", "norm", "centroid", "transmitted_fraction"], rows, meta)


RESULT_COLUMNS = [
    "g0",
    "L",
    "k0",
    "v0",
    "t_T",
    "x_T",
    "k_bar",
    "delta_t",
    "transmitted_fraction",
    "converged",
    "status",
]


def result_row(config, result, status: str = "ok") -> list[Any]:
    """One sweep/result row; a failed point carries nans and its status."""
    nan = float("nan")
    return [
        config.nonlinearity.g0,
        config.barrier_length,
        config.packet.k0,
        config.potential.v0,
        result.t_T if result else nan,
        result.x_T if result else nan,
        result.k_bar if result else nan,
        result.delta_t if result else nan,
        result.transmitted_fraction if result else nan,
        result.converged if result else False,
        status,
    ]


def write_field_bin(path: str | Path, state: WaveFunction) -> Path:
    path = Path(path)
    header = _HEADER.pack(state.grid.n, state.grid.dx, state.grid.x_min, state.time)
    data = np.ascontiguousarray(state.amplitudes, dtype="<c16").tobytes()
    path.write_bytes(header + data)
    return path


def read_field_bin(path: str | Path) -> WaveFunction:
    raw = Path(path).read_bytes()
    n, dx, x_min, t = _HEADER.unpack_from(raw)
    amp = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size, count=n)
    grid = Grid(x_min=x_min, dx=dx, n=int(n))
    return WaveFunction(grid=grid, amplitudes=amp.astype(np.complex128), time=t)


def write_manifest(path: str | Path, payload: dict[str, Any]) -> Path:
    path = Path(path)
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n",
        encoding="utf-8",
        newline="\n",
    )
    return path
