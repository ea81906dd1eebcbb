"""gptunnel: 1D condensate wave packets tunneling through barrier-gated
nonlinear potentials, with time-of-flight tunneling-time measurement.

The dynamics is the dimensionless cubic Schrodinger equation
i dpsi/dt = -1/2 psi_xx + V(x) psi + g(x)|psi|^2 psi with V(x) = v0 f(x)
and the interaction gated to the barrier, g(x) = g0 f(x).  Integration is
second-order split-operator spectral stepping; an independent
Crank-Nicolson integrator exists for cross-checks.
"""

from .config import (
    config_from_dict,
    config_hash,
    config_to_dict,
    load_config_file,
)
from .crank_nicolson import crank_nicolson_step, reference_integrator
from .errors import (
    BoundaryContaminationError,
    ConfigError,
    ConvergenceError,
    IntegrationError,
    NoTransmissionError,
    NoTransmittedPacketError,
    NotEmergedError,
)
from .model import (
    DEFAULT_GRID,
    AbsorberSpec,
    EmergenceSpec,
    Grid,
    NonlinearitySpec,
    PacketSpec,
    PhysicalScale,
    PotentialSpec,
    Rectangular,
    SimConfig,
    SuperGaussian,
    Tolerances,
    WaveFunction,
    gaussian_packet,
    make_grid,
    profile_eval,
    rb87_scale,
    to_physical,
)
from .observables import (
    Spectrum,
    effective_potential,
    l2_distance,
    mean_transmitted_momentum,
    momentum_spectrum,
    plane_wave_transmission,
    region_centroid,
    region_norm,
)
from .propagator import (
    SnapshotLog,
    StepPlan,
    dispersed_width,
    free_reference,
    make_step_plan,
    propagate,
    split_step,
)
from .timing import (
    TunnelingResult,
    detect_emergence,
    measure,
    measure_at,
    measure_detailed,
    tunneling_time,
)

__version__ = "0.1.0"

__all__ = [
    "AbsorberSpec",
    "BoundaryContaminationError",
    "ConfigError",
    "ConvergenceError",
    "DEFAULT_GRID",
    "EmergenceSpec",
    "Grid",
    "IntegrationError",
    "NoTransmissionError",
    "NoTransmittedPacketError",
    "NonlinearitySpec",
    "NotEmergedError",
    "PacketSpec",
    "PhysicalScale",
    "PotentialSpec",
    "Rectangular",
    "SimConfig",
    "SnapshotLog",
    "Spectrum",
    "StepPlan",
    "SuperGaussian",
    "Tolerances",
    "TunnelingResult",
    "WaveFunction",
    "config_from_dict",
    "config_hash",
    "config_to_dict",
    "crank_nicolson_step",
    "detect_emergence",
    "dispersed_width",
    "effective_potential",
    "free_reference",
    "gaussian_packet",
    "l2_distance",
    "load_config_file",
    "make_grid",
    "make_step_plan",
    "mean_transmitted_momentum",
    "measure",
    "measure_at",
    "measure_detailed",
    "momentum_spectrum",
    "plane_wave_transmission",
    "profile_eval",
    "propagate",
    "rb87_scale",
    "reference_integrator",
    "region_centroid",
    "region_norm",
    "split_step",
    "to_physical",
    "tunneling_time",
]
