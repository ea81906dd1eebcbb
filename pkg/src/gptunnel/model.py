"""Core model: grids, wave functions, barrier profiles, packets, and units.

Everything here is dimensionless. Position is measured in units of the
transverse ground-state length a_perp, time in units of 1/omega_perp,
energy in units of hbar*omega_perp, and the wave function in units of
a_perp**(-1/2).  Conversion back to SI values goes through
:func:`to_physical` and a :class:`PhysicalScale`.

All values are immutable after construction and safe to share between
threads or processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigError

HBAR = 1.054571817e-34  # J s
ATOMIC_MASS_KG = 1.66053906660e-27
RB87_MASS_KG = 86.909180527 * ATOMIC_MASS_KG


@dataclass(frozen=True)
class Tolerances:
    """Numerical guard thresholds, collected in one overridable place.

    packet_barrier_overlap
        Upper bound on exp(-((x0 - L/2)/dx0)**2), the launch packet's
        density overlap with the barrier entrance.  The default admits the
        standard launch distance x0 = 200 at dx0 = 50 (overlap ~ 3e-7);
        deep-barrier sweeps use larger x0 so their overlap is far smaller.
    packet_boundary_tail
        Upper bound on the packet envelope at either grid edge.
    boundary_guard_density
        Density threshold near the domain edges that aborts a run when no
        absorber is enabled (periodic wraparound guard).
    boundary_guard_points
        Number of grid points at each edge inspected by the guard.
    region_floor
        Minimum region-restricted norm for "a transmitted packet exists".
        Deep tunneling in the studied regimes produces fractions down to
        ~1e-13 while accumulated round-off stays below ~1e-25, so the
        floor sits between those scales.
    """

    packet_barrier_overlap: float = 1e-6
    packet_boundary_tail: float = 1e-12
    boundary_guard_density: float = 1e-8
    boundary_guard_points: int = 10
    region_floor: float = 1e-15


DEFAULT_TOLERANCES = Tolerances()


def _is_power_of_two(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic spatial lattice and its conjugate momentum lattice.

    Samples are x_i = x_min + i*dx for 0 <= i < n.  The momentum lattice
    is in FFT ordering with spacing 2*pi/(n*dx) and covers
    [-pi/dx, pi/dx).
    """

    x_min: float
    dx: float
    n: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or not _is_power_of_two(self.n):
            raise ConfigError(f"grid.n must be a power of two >= 2, got {self.n}")
        if not self.dx > 0:
            raise ConfigError(f"grid.dx must be positive, got {self.dx}")

    @property
    def length(self) -> float:
        return self.n * self.dx

    @property
    def x_max(self) -> float:
        """Exclusive right edge of the periodic domain."""
        return self.x_min + self.length

    @property
    def dk(self) -> float:
        return 2.0 * math.pi / self.length

    @cached_property
    def x(self) -> np.ndarray:
        x = self.x_min + self.dx * np.arange(self.n)
        x.setflags(write=False)
        return x

    @cached_property
    def k(self) -> np.ndarray:
        """Momentum lattice in FFT ordering."""
        k = 2.0 * math.pi * np.fft.fftfreq(self.n, d=self.dx)
        k.setflags(write=False)
        return k


def make_grid(x_min: float, dx: float, n: int) -> Grid:
    """Build a periodic grid; rejects non-power-of-two n and dx <= 0."""
    return Grid(x_min=float(x_min), dx=float(dx), n=int(n))


DEFAULT_GRID = make_grid(-1024.0, 0.125, 16384)


# ---------------------------------------------------------------------------
# Barrier profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Rectangular:
    """Indicator profile: 1 on the open interval (-L/2, L/2), else 0."""

    L: float

    def __post_init__(self) -> None:
        if not self.L > 0:
            raise ConfigError(f"barrier length must be positive, got {self.L}")


@dataclass(frozen=True)
class SuperGaussian:
    """Flat-topped profile exp(-(2x/L)**(2*order)); order 20 is nearly square."""

    L: float
    order: int = 20

    def __post_init__(self) -> None:
        if not self.L > 0:
            raise ConfigError(f"barrier length must be positive, got {self.L}")
        if not isinstance(self.order, int) or self.order < 1:
            raise ConfigError(f"super-Gaussian order must be an integer >= 1, got {self.order}")


Shape = Rectangular | SuperGaussian


def profile_eval(shape: Shape, x):
    """Evaluate a barrier profile, elementwise, in [0, 1].

    Accepts scalars or arrays and returns the matching kind.
    """
    arr = np.asarray(x, dtype=float)
    if isinstance(shape, Rectangular):
        half = 0.5 * shape.L
        out = np.where((arr > -half) & (arr < half), 1.0, 0.0)
    elif isinstance(shape, SuperGaussian):
        u = np.square(2.0 * arr / shape.L)
        with np.errstate(over="ignore"):
            out = np.exp(-(u ** shape.order))
    else:
        raise TypeError(f"unknown profile shape {type(shape).__name__}")
    if np.ndim(x) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class PotentialSpec:
    """Barrier V(x) = v0 * f(x) with f one of the supported profiles."""

    v0: float
    shape: Shape

    def sample(self, x) -> np.ndarray:
        return self.v0 * profile_eval(self.shape, x)


@dataclass(frozen=True)
class NonlinearitySpec:
    """Gated interaction g(x) = g0 * f(x), sharing the barrier profile.

    Positive g0 is repulsive, negative attractive.  With a rectangular
    profile the interaction vanishes identically outside the barrier.
    """

    g0: float
    profile: Shape

    def sample(self, x) -> np.ndarray:
        return self.g0 * profile_eval(self.profile, x)


# ---------------------------------------------------------------------------
# Wave functions and packets
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Complex field sampled on a grid at a fixed time.

    The amplitude array is copied on construction and frozen, so instances
    may be shared freely.
    """

    grid: Grid
    amplitudes: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        amp = np.array(self.amplitudes, dtype=np.complex128, copy=True)
        if amp.shape != (self.grid.n,):
            raise ConfigError(
                f"amplitude array has length {amp.shape}, grid has n={self.grid.n}"
            )
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    def density(self) -> np.ndarray:
        a = self.amplitudes
        return a.real**2 + a.imag**2

    def norm(self) -> float:
        """Discrete norm sum(|psi|^2) * dx."""
        return float(np.sum(self.density()) * self.grid.dx)


@dataclass(frozen=True)
class PacketSpec:
    """Gaussian launch packet, centered at -x0 and moving with momentum k0.

    x0 is the launch distance (positive; the packet sits left of the
    barrier), dx0 the initial half width, k0 the center momentum.
    """

    x0: float
    dx0: float
    k0: float

    def __post_init__(self) -> None:
        if not self.x0 > 0:
            raise ConfigError(f"packet.x0 must be positive, got {self.x0}")
        if not self.dx0 > 0:
            raise ConfigError(f"packet.dx0 must be positive, got {self.dx0}")
        if not math.isfinite(self.k0):
            raise ConfigError(f"packet.k0 must be finite, got {self.k0}")

    def barrier_overlap(self, L: float) -> float:
        """Density overlap factor exp(-((x0 - L/2)/dx0)**2) at the barrier entrance."""
        return math.exp(-(((self.x0 - 0.5 * L) / self.dx0) ** 2))


def gaussian_packet(
    grid: Grid,
    spec: PacketSpec,
    *,
    boundary_tail_tol: float = DEFAULT_TOLERANCES.packet_boundary_tail,
) -> WaveFunction:
    """Construct the normalized Gaussian packet at t = 0.

    psi(x) = (sqrt(pi)*dx0)**(-1/2) * exp(-(x+x0)^2/(2*dx0^2) + i*k0*(x+x0))

    Raises ConfigError when the envelope at either grid edge exceeds
    ``boundary_tail_tol`` (the packet would leak off the periodic domain).
    """
    xi_left = grid.x_min + spec.x0
    xi_right = grid.x_min + (grid.n - 1) * grid.dx + spec.x0
    tail = max(
        math.exp(-(xi_left**2) / (2.0 * spec.dx0**2)),
        math.exp(-(xi_right**2) / (2.0 * spec.dx0**2)),
    )
    if tail > boundary_tail_tol:
        raise ConfigError(
            f"packet envelope at the grid edge is {tail:.3e}, above the "
            f"boundary tail tolerance {boundary_tail_tol:.3e}; enlarge the grid "
            f"or move the packet"
        )
    xi = grid.x + spec.x0
    amp = (math.sqrt(math.pi) * spec.dx0) ** -0.5 * np.exp(
        -(xi**2) / (2.0 * spec.dx0**2) + 1j * spec.k0 * xi
    )
    return WaveFunction(grid=grid, amplitudes=amp, time=0.0)


# ---------------------------------------------------------------------------
# Simulation configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AbsorberSpec:
    """Cosine-ramp absorbing layer at both domain edges.

    The mask is 1 on the interior and decays smoothly over ``width``
    units at each edge; ``strength`` scales the per-unit-time damping
    rate at the very edge.
    """

    width: float = 50.0
    strength: float = 1.0

    def __post_init__(self) -> None:
        if not self.width > 0:
            raise ConfigError(f"absorber.width must be positive, got {self.width}")
        if not self.strength > 0:
            raise ConfigError(f"absorber.strength must be positive, got {self.strength}")


@dataclass(frozen=True)
class EmergenceSpec:
    """Parameters of the transmitted-packet emergence criterion.

    Emergence at time t requires all of:
      * transmitted fraction T(t) >= transmission_floor,
      * plateau: |T(t) - T(t - plateau_window)| / max(T(t), plateau_floor)
        < plateau_rtol,
      * clearance: transmitted centroid > L/2 + clearance_widths * width.

    plateau_floor guards the denominator; for deep-tunneling sweeps with
    T ~ 1e-13 it should be lowered (the presets do) so the plateau test
    stays a genuine relative test.
    """

    plateau_window: float = 20.0
    plateau_rtol: float = 1e-4
    plateau_floor: float = 1e-9
    clearance_widths: float = 2.0
    transmission_floor: float = 1e-15


@dataclass(frozen=True)
class SimConfig:
    """Full description of one propagation / measurement run."""

    grid: Grid
    packet: PacketSpec
    potential: PotentialSpec
    nonlinearity: NonlinearitySpec
    dt: float = 0.015625
    t_max: float = 440.0
    snapshot_every: int = 50
    x_cut_centroid: float = 0.0
    x_cut_spectrum: float | None = None  # None selects the barrier exit L/2
    emergence: EmergenceSpec = field(default_factory=EmergenceSpec)
    absorber: AbsorberSpec | None = None
    store_fields: bool = False
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ConfigError(f"run.dt must be positive, got {self.dt}")
        if not self.t_max > 0:
            raise ConfigError(f"run.t_max must be positive, got {self.t_max}")
        if not isinstance(self.snapshot_every, int) or self.snapshot_every < 1:
            raise ConfigError(
                f"run.snapshot_every must be a positive integer, got {self.snapshot_every}"
            )
        if self.potential.shape != self.nonlinearity.profile:
            raise ConfigError(
                "barrier and nonlinearity must share one profile; got "
                f"{self.potential.shape} vs {self.nonlinearity.profile}"
            )
        cut_s = self.spectrum_cut
        if not 0.0 <= self.x_cut_centroid <= cut_s:
            raise ConfigError(
                f"cuts must satisfy 0 <= centroid ({self.x_cut_centroid}) "
                f"<= spectrum ({cut_s})"
            )
        if not (self.grid.x_min < cut_s < self.grid.x_max):
            raise ConfigError(f"cuts.spectrum {cut_s} lies outside the grid domain")
        overlap = self.packet.barrier_overlap(self.barrier_length)
        if overlap > self.tolerances.packet_barrier_overlap:
            raise ConfigError(
                f"packet overlaps the barrier: exp(-((x0-L/2)/dx0)^2) = {overlap:.3e} "
                f"exceeds tolerance {self.tolerances.packet_barrier_overlap:.3e}"
            )
        if self.absorber is None:
            pk = self.packet
            left = -pk.x0 - 10.0 * pk.dx0
            right = -pk.x0 + max(pk.k0, 0.0) * self.t_max + 10.0 * pk.dx0
            if left < self.grid.x_min or right > self.grid.x_max:
                raise ConfigError(
                    f"grid domain [{self.grid.x_min}, {self.grid.x_max}) does not "
                    f"contain the ballistic envelope [{left:.1f}, {right:.1f}]; "
                    f"enlarge the grid or enable the absorber"
                )

    @property
    def barrier_length(self) -> float:
        return self.potential.shape.L

    @property
    def spectrum_cut(self) -> float:
        """Window cut for transmitted spectra; defaults to the barrier exit."""
        if self.x_cut_spectrum is not None:
            return self.x_cut_spectrum
        return 0.5 * self.barrier_length


# ---------------------------------------------------------------------------
# Physical units
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhysicalScale:
    """Bridge between dimensionless simulation values and SI units.

    The dimensionless equation is invariant under
    {x, t, psi, V0} -> {x*eta, t*eta^2, psi/eta, V0/eta^2}, so one
    simulation describes a family of physical systems indexed by eta.
    Our convention: simulation values live in the eta-scaled frame, and
    restoring SI units therefore applies

        length:  x_SI = x * eta * a_perp
        time:    t_SI = t * eta^2 / omega_perp
        energy:  E_SI = E * hbar * omega_perp / eta^2

    with a_perp = sqrt(hbar / (m * omega_perp)).  For rubidium-87 in a
    2*pi*100 Hz transverse trap, a_perp is about 1 micron, so with
    eta = 10 a simulated half width of 50 corresponds to 500 microns.
    """

    omega_perp: float  # rad/s
    mass: float  # kg
    eta: float = 1.0

    def __post_init__(self) -> None:
        if not self.omega_perp > 0:
            raise ConfigError(f"omega_perp must be positive, got {self.omega_perp}")
        if not self.mass > 0:
            raise ConfigError(f"mass must be positive, got {self.mass}")
        if not self.eta > 0:
            raise ConfigError(f"eta must be positive, got {self.eta}")

    @property
    def a_perp(self) -> float:
        """Transverse ground-state length sqrt(hbar/(m*omega_perp)) in meters."""
        return math.sqrt(HBAR / (self.mass * self.omega_perp))


def rb87_scale(omega_perp: float = 2.0 * math.pi * 100.0, eta: float = 10.0) -> PhysicalScale:
    """Reference scale: Rb-87 in a 2*pi*100 Hz transverse trap."""
    return PhysicalScale(omega_perp=omega_perp, mass=RB87_MASS_KG, eta=eta)


def to_physical(value: float, kind: str, scale: PhysicalScale) -> float:
    """Convert a dimensionless value to SI units (meters, seconds, joules).

    ``kind`` selects the conversion: "length", "time", or "energy".
    """
    if kind == "length":
        return value * scale.eta * scale.a_perp
    if kind == "time":
        return value * scale.eta**2 / scale.omega_perp
    if kind == "energy":
        return value * HBAR * scale.omega_perp / scale.eta**2
    raise ConfigError(f"unknown unit kind {kind!r}; expected length, time, or energy")
