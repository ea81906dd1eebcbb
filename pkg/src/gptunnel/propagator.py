"""Time integration of the 1D condensate equation

    i dpsi/dt = -1/2 d^2psi/dx^2 + V(x) psi + g(x) |psi|^2 psi

by second-order Strang splitting on a periodic spectral grid: half a
kinetic step in Fourier space, a full potential-plus-nonlinear phase in
position space (with |psi|^2 taken after the first half step), then the
second kinetic half step.  Every substep is a unit-modulus multiplication,
so the discrete norm is conserved to round-off unless an absorber mask is
applied.

The driver loop fuses adjacent kinetic half steps between snapshots
(K_half P K_half applied n times collapses to K_half P (K_full P)^(n-1)
K_half), halving the FFT count without changing the scheme.

A propagation owns its working array exclusively; independent
propagations may run concurrently.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.fft import fft, ifft

from .errors import BoundaryContaminationError, ConfigError, IntegrationError
from .model import (
    AbsorberSpec,
    Grid,
    NonlinearitySpec,
    PacketSpec,
    PotentialSpec,
    Rectangular,
    SimConfig,
    WaveFunction,
    gaussian_packet,
)
from .observables import region_moments


@dataclass(frozen=True, eq=False)
class StepPlan:
    """Precomputed per-step arrays for a fixed (grid, barrier, dt).

    ``support`` indexes the grid points where V or g is nonzero; the
    position-space phase is applied only there.  ``absorber_mask`` is None
    or an array in [0, 1] equal to 1 on the interior.
    """

    grid: Grid
    dt: float
    kinetic_half: np.ndarray  # exp(-i k^2 dt/4) on the FFT-ordered k lattice
    kinetic_full: np.ndarray  # exp(-i k^2 dt/2)
    potential: np.ndarray  # V(x) = v0 f(x)
    nonlinearity: np.ndarray  # g(x) = g0 f(x)
    support: slice | np.ndarray | None
    absorber_mask: np.ndarray | None = None


def absorber_mask(grid: Grid, spec: AbsorberSpec, dt: float) -> np.ndarray:
    """Per-step damping mask exp(-dt*gamma(x)) with a cosine-squared ramp.

    gamma rises smoothly from 0 at distance ``spec.width`` from either
    edge to ``spec.strength`` at the edge itself.
    """
    d = np.minimum(grid.x - grid.x_min, grid.x_max - grid.x)
    ramp = np.clip(1.0 - d / spec.width, 0.0, 1.0)
    gamma = spec.strength * np.sin(0.5 * math.pi * ramp) ** 2
    return np.exp(-dt * gamma)


def make_step_plan(
    grid: Grid,
    potential: PotentialSpec,
    nonlinearity: NonlinearitySpec,
    dt: float,
    absorber: AbsorberSpec | None = None,
) -> StepPlan:
    if not dt > 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    # Stroboscopic aliasing guard: modes with k^2 dt/2 = 2 pi m are frozen
    # by the kinetic phase and get pumped coherently by any sharp potential
    # edge.  Keeping the first resonance sqrt(4 pi/dt) beyond the momentum
    # grid avoids a spurious fast halo.
    k_max = math.pi / grid.dx
    k_resonant = math.sqrt(4.0 * math.pi / dt)
    if k_resonant <= k_max and isinstance(potential.shape, Rectangular) and (
        potential.v0 != 0.0 or nonlinearity.g0 != 0.0
    ):
        warnings.warn(
            f"dt={dt:g} puts the first kinetic-phase resonance at k={k_resonant:.2f}, "
            f"inside the momentum grid (k_max={k_max:.2f}); a sharp barrier will pump "
            f"a spurious high-k halo. Use dt < {4.0 * math.pi / k_max**2:.4g}.",
            stacklevel=2,
        )
    k2 = grid.k**2
    kin_half = np.exp(-0.25j * dt * k2)
    kin_full = np.exp(-0.5j * dt * k2)
    v = potential.sample(grid.x)
    g = nonlinearity.sample(grid.x)
    idx = np.flatnonzero((v != 0.0) | (g != 0.0))
    support: slice | np.ndarray | None
    if idx.size == 0:
        support = None
    elif idx[-1] - idx[0] + 1 == idx.size:
        support = slice(int(idx[0]), int(idx[-1]) + 1)
    else:
        support = idx
    mask = absorber_mask(grid, absorber, dt) if absorber is not None else None
    for arr in (kin_half, kin_full, v, g):
        arr.setflags(write=False)
    if mask is not None:
        mask.setflags(write=False)
    return StepPlan(
        grid=grid,
        dt=dt,
        kinetic_half=kin_half,
        kinetic_full=kin_full,
        potential=v,
        nonlinearity=g,
        support=support,
        absorber_mask=mask,
    )


def plan_for(config: SimConfig, dt: float | None = None) -> StepPlan:
    return make_step_plan(
        config.grid,
        config.potential,
        config.nonlinearity,
        config.dt if dt is None else dt,
        config.absorber,
    )


def _apply_position_phase(psi: np.ndarray, plan: StepPlan) -> None:
    sup = plan.support
    if sup is None:
        return
    u = psi[sup]
    rho = u.real**2 + u.imag**2
    u = u * np.exp(-1j * plan.dt * (plan.potential[sup] + plan.nonlinearity[sup] * rho))
    psi[sup] = u


def split_step(state: WaveFunction, plan: StepPlan) -> WaveFunction:
    """Advance one Strang step; returns a new WaveFunction at time + dt.

    Raises IntegrationError if the result contains non-finite amplitudes.
    """
    if state.grid != plan.grid:
        raise ConfigError("state and plan were built on different grids")
    psi = ifft(fft(state.amplitudes) * plan.kinetic_half, overwrite_x=True)
    _apply_position_phase(psi, plan)
    psi = ifft(fft(psi, overwrite_x=True) * plan.kinetic_half, overwrite_x=True)
    if plan.absorber_mask is not None:
        psi *= plan.absorber_mask
    if not np.all(np.isfinite(psi.view(np.float64))):
        raise IntegrationError(
            f"non-finite amplitudes after the step ending at t={state.time + plan.dt:.6g}"
        )
    return WaveFunction(grid=state.grid, amplitudes=psi, time=state.time + plan.dt)


@dataclass
class SnapshotLog:
    """Reduced observables recorded every ``snapshot_every`` steps.

    ``transmitted_fraction`` is the mass beyond the spectrum cut divided
    by the total norm; ``transmitted_centroid``/``width`` are moments of
    the density beyond the centroid cut and are nan while that region
    holds no mass.  Full fields are kept only when requested.
    """

    times: list[float] = field(default_factory=list)
    norms: list[float] = field(default_factory=list)
    centroids: list[float] = field(default_factory=list)
    transmitted_fractions: list[float] = field(default_factory=list)
    transmitted_centroids: list[float] = field(default_factory=list)
    transmitted_widths: list[float] = field(default_factory=list)
    fields: list[WaveFunction] | None = None

    def __len__(self) -> int:
        return len(self.times)


def _record(
    log: SnapshotLog,
    grid: Grid,
    psi: np.ndarray,
    t: float,
    config: SimConfig,
) -> None:
    rho = psi.real**2 + psi.imag**2
    total = float(np.sum(rho) * grid.dx)
    centroid = float(np.sum(grid.x * rho) * grid.dx / total) if total > 0 else math.nan
    trans_mass, _, _ = region_moments(grid, rho, config.spectrum_cut)
    frac = trans_mass / total if total > 0 else math.nan
    region_mass, tc, tw = region_moments(grid, rho, config.x_cut_centroid)
    if total <= 0 or region_mass / total < config.emergence.transmission_floor:
        tc = math.nan
        tw = math.nan
    log.times.append(t)
    log.norms.append(total)
    log.centroids.append(centroid)
    log.transmitted_fractions.append(frac)
    log.transmitted_centroids.append(tc)
    log.transmitted_widths.append(tw)


def _check_health(
    grid: Grid,
    psi: np.ndarray,
    step: int,
    t: float,
    config: SimConfig,
) -> None:
    if not np.all(np.isfinite(psi.view(np.float64))):
        raise IntegrationError(f"non-finite amplitudes at step {step} (t={t:.6g})")
    if config.absorber is None:
        m = config.tolerances.boundary_guard_points
        rho_edges = max(
            float(np.max(psi[:m].real ** 2 + psi[:m].imag ** 2)),
            float(np.max(psi[-m:].real ** 2 + psi[-m:].imag ** 2)),
        )
        if rho_edges > config.tolerances.boundary_guard_density:
            raise BoundaryContaminationError(
                f"density {rho_edges:.3e} within {m} points of the domain edge at "
                f"step {step} (t={t:.6g}) exceeds the guard "
                f"{config.tolerances.boundary_guard_density:.3e}; enlarge the grid "
                f"or enable the absorber"
            )


StopRule = Callable[[SnapshotLog, SimConfig], bool]
Observer = Callable[[WaveFunction, SnapshotLog], None]


def propagate(
    config: SimConfig,
    observers: Sequence[Observer] = (),
    *,
    initial_state: WaveFunction | None = None,
    stop_rule: StopRule | None = None,
    t_end: float | None = None,
) -> tuple[WaveFunction, SnapshotLog]:
    """Integrate from the configured packet (or ``initial_state``) in time.

    Stops at ``t_end`` (default config.t_max) or as soon as ``stop_rule``
    returns True at a snapshot.  Observers are invoked sequentially at
    every snapshot with the materialized state and the log so far.

    Raises IntegrationError on non-finite amplitudes and
    BoundaryContaminationError when density reaches the domain edge with
    no absorber enabled.
    """
    grid = config.grid
    plan = plan_for(config)
    if initial_state is None:
        start = gaussian_packet(
            grid, config.packet, boundary_tail_tol=config.tolerances.packet_boundary_tail
        )
    else:
        if initial_state.grid != grid:
            raise ConfigError("initial state lives on a different grid")
        start = initial_state

    t0 = start.time
    stop_t = config.t_max if t_end is None else t_end
    n_steps = int(round((stop_t - t0) / config.dt))
    if n_steps < 0:
        raise ConfigError(f"t_end {stop_t} precedes the initial state time {t0}")

    log = SnapshotLog(fields=[] if config.store_fields else None)
    psi = np.array(start.amplitudes, dtype=np.complex128)
    _check_health(grid, psi, 0, t0, config)
    _record(log, grid, psi, t0, config)
    if log.fields is not None:
        log.fields.append(start)
    for obs in observers:
        obs(start, log)
    if stop_rule is not None and stop_rule(log, config):
        return start, log

    use_fused = plan.absorber_mask is None
    step = 0
    t = t0
    while step < n_steps:
        block = min(config.snapshot_every, n_steps - step)
        if use_fused:
            psi = ifft(fft(psi, overwrite_x=True) * plan.kinetic_half, overwrite_x=True)
            for j in range(block):
                _apply_position_phase(psi, plan)
                if j < block - 1:
                    psi = ifft(fft(psi, overwrite_x=True) * plan.kinetic_full, overwrite_x=True)
            psi = ifft(fft(psi, overwrite_x=True) * plan.kinetic_half, overwrite_x=True)
        else:
            for _ in range(block):
                psi = ifft(fft(psi, overwrite_x=True) * plan.kinetic_half, overwrite_x=True)
                _apply_position_phase(psi, plan)
                psi = ifft(fft(psi, overwrite_x=True) * plan.kinetic_half, overwrite_x=True)
                psi *= plan.absorber_mask
        step += block
        t = t0 + step * config.dt
        _check_health(grid, psi, step, t, config)
        _record(log, grid, psi, t, config)
        state = None
        if log.fields is not None or observers:
            state = WaveFunction(grid=grid, amplitudes=psi, time=t)
        if log.fields is not None:
            log.fields.append(state)
        for obs in observers:
            obs(state, log)
        if stop_rule is not None and stop_rule(log, config):
            break

    final = WaveFunction(grid=grid, amplitudes=psi, time=t)
    return final, log


def free_reference(grid: Grid, spec: PacketSpec, t: float) -> WaveFunction:
    """Closed-form free evolution of the Gaussian launch packet.

    Center moves ballistically to -x0 + k0*t while the complex width
    follows sigma(t)^2 = dx0^2 (1 + i t/dx0^2); the norm stays 1.  At
    t = 0 this reproduces :func:`gaussian_packet` exactly.
    """
    if t < 0:
        raise ConfigError(f"free reference requires t >= 0, got {t}")
    xi = grid.x + spec.x0
    denom = 1.0 + 1j * t / spec.dx0**2
    amp = (
        (math.sqrt(math.pi) * spec.dx0) ** -0.5
        / np.sqrt(denom)
        * np.exp(
            -((xi - spec.k0 * t) ** 2) / (2.0 * spec.dx0**2 * denom)
            + 1j * (spec.k0 * xi - 0.5 * spec.k0**2 * t)
        )
    )
    return WaveFunction(grid=grid, amplitudes=amp, time=t)


def dispersed_width(dx0: float, t: float) -> float:
    """Free-Gaussian half width dx0 * sqrt(1 + t^2/dx0^4)."""
    return dx0 * math.sqrt(1.0 + (t / dx0**2) ** 2)
