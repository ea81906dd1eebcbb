"""Measurement operations: region norms and centroids, windowed momentum
spectra, mean transmitted momentum, the effective potential, and the
plane-wave transmission oracle for the linear rectangular barrier.

All functions are pure and safe to call concurrently.

Spectra use the continuum convention psi_hat(k) = (2*pi)**(-1/2) *
integral psi(x) exp(-i*k*x) dx, discretized on the grid, so that
sum |psi_hat|^2 dk equals sum |psi|^2 dx (Parseval).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import fft

from .errors import NoTransmittedPacketError
from .model import (
    DEFAULT_TOLERANCES,
    Grid,
    NonlinearitySpec,
    PotentialSpec,
    WaveFunction,
)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Momentum-space density on the ascending k lattice.

    ``density`` is |psi_hat(k)|^2 per mode; when ``normalized`` it has been
    rescaled to unit integral sum(density)*dk = 1.
    """

    k: np.ndarray
    density: np.ndarray
    normalized: bool

    @property
    def dk(self) -> float:
        return float(self.k[1] - self.k[0])

    def mass(self) -> float:
        return float(np.sum(self.density) * self.dk)


def region_moments(grid: Grid, density: np.ndarray, x_cut: float) -> tuple[float, float, float]:
    """(mass, centroid, width) of a density restricted to x > x_cut.

    Centroid and width are nan when the region mass is zero.
    """
    sel = grid.x > x_cut
    rho = density[sel]
    mass = float(np.sum(rho) * grid.dx)
    if mass <= 0.0:
        return mass, math.nan, math.nan
    x = grid.x[sel]
    centroid = float(np.sum(x * rho) * grid.dx / mass)
    var = float(np.sum((x - centroid) ** 2 * rho) * grid.dx / mass)
    return mass, centroid, math.sqrt(max(var, 0.0))


def l2_distance(a: WaveFunction, b: WaveFunction) -> float:
    """Discrete L2 distance sqrt(sum |a - b|^2 dx) between two states."""
    if a.grid != b.grid:
        raise ValueError("states live on different grids")
    diff = a.amplitudes - b.amplitudes
    return math.sqrt(float(np.sum(diff.real**2 + diff.imag**2)) * a.grid.dx)


def region_norm(state: WaveFunction, x_cut: float) -> float:
    """Probability mass sum_{x_i > x_cut} |psi_i|^2 dx."""
    mass, _, _ = region_moments(state.grid, state.density(), x_cut)
    return mass


def region_centroid(
    state: WaveFunction,
    x_cut: float = 0.0,
    *,
    floor: float = DEFAULT_TOLERANCES.region_floor,
) -> float:
    """Expected position of the density restricted to x > x_cut.

    Raises NoTransmittedPacketError when the region mass is below ``floor``
    (total reflection, or measurement taken too early).
    """
    mass, centroid, _ = region_moments(state.grid, state.density(), x_cut)
    if mass <= floor:
        raise NoTransmittedPacketError(
            f"no transmitted packet: mass {mass:.3e} beyond x={x_cut} is below "
            f"the floor {floor:.3e}"
        )
    return centroid


def momentum_spectrum(
    state: WaveFunction,
    x_cut: float,
    *,
    normalized: bool = False,
    floor: float = DEFAULT_TOLERANCES.region_floor,
    tukey_alpha: float | None = None,
) -> Spectrum:
    """Momentum density of the state sharp-windowed to x > x_cut.

    The window is a hard cut by default; ``tukey_alpha`` applies a Tukey
    taper over the windowed region instead (for leakage studies only).
    """
    grid = state.grid
    mass = region_norm(state, x_cut)
    if mass <= floor:
        raise NoTransmittedPacketError(
            f"no transmitted packet: mass {mass:.3e} beyond x={x_cut} is below "
            f"the floor {floor:.3e}"
        )
    sel = grid.x > x_cut
    windowed = np.where(sel, state.amplitudes, 0.0 + 0.0j)
    if tukey_alpha is not None:
        from scipy.signal.windows import tukey

        idx = np.flatnonzero(sel)
        windowed[idx] = windowed[idx] * tukey(idx.size, alpha=tukey_alpha)
    transform = fft(windowed)
    density = (transform.real**2 + transform.imag**2) * grid.dx**2 / (2.0 * math.pi)
    k = np.fft.fftshift(grid.k)
    density = np.fft.fftshift(density)
    if normalized:
        density = density / (np.sum(density) * grid.dk)
    density.setflags(write=False)
    return Spectrum(k=k, density=density, normalized=normalized)


def mean_transmitted_momentum(spectrum: Spectrum) -> float:
    """First moment of the spectral density, self-normalizing.

    Invariant under rescaling the density by any positive constant.
    """
    total = float(np.sum(spectrum.density))
    if total <= 0.0:
        raise NoTransmittedPacketError("zero-mass spectrum has no mean momentum")
    return float(np.sum(spectrum.k * spectrum.density) / total)


def effective_potential(
    state: WaveFunction,
    potential: PotentialSpec,
    nonlin: NonlinearitySpec,
) -> np.ndarray:
    """Diagnostic V_eff(x) = v0*f(x) + g(x)*|psi(x)|^2 on the grid.

    This is exactly the position-space factor the stepper applies; it is
    produced for inspection only and never fed back into the dynamics.
    """
    x = state.grid.x
    return potential.sample(x) + nonlin.sample(x) * state.density()


def plane_wave_transmission(k, v0: float, L: float):
    """Transmission amplitude t(k) of a rectangular barrier (E = k^2/2).

    Handles both the tunneling branch E < v0 and the over-barrier branch
    E > v0 through a complex decay constant, and crosses E = v0 smoothly
    via the series limit of sinh(kappa*L)/kappa.  Scalar in, scalar out;
    arrays of k are evaluated elementwise.
    """
    k_arr = np.asarray(k, dtype=float)
    if np.any(k_arr <= 0):
        raise ValueError("plane_wave_transmission requires k > 0")
    if not v0 > 0 or not L > 0:
        raise ValueError("plane_wave_transmission requires v0 > 0 and L > 0")
    kappa_sq = 2.0 * v0 - k_arr**2 + 0.0j
    kappa = np.sqrt(kappa_sq)
    z = kappa * L
    small = np.abs(z) < 1e-4
    with np.errstate(over="ignore", invalid="ignore"):
        sinhc = np.where(small, 1.0 + z**2 / 6.0, np.sinh(np.where(small, 1.0, z)) / np.where(small, 1.0, z))
        denom = (
            np.cosh(z)
            + 0.5j * (kappa / k_arr) * np.sinh(z)
            - 0.5j * k_arr * L * sinhc
        )
        amp = np.exp(-1j * k_arr * L) / denom
    amp = np.where(np.isfinite(amp), amp, 0.0 + 0.0j)
    if np.ndim(k) == 0:
        return complex(amp)
    return amp
