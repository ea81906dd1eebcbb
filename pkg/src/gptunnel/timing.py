"""Emergence detection and the time-of-flight tunneling time.

The tunneling time subtracts both free-flight legs from the total
arrival delay:

    delta_t = t_T - (x0 - L/2)/k0 - (x_T - L/2)/k_bar

where t_T is the measurement time, x_T the transmitted centroid (region
x > 0 by default), and k_bar the mean momentum of the transmitted
spectrum (windowed beyond the barrier exit).  For a free packet this
collapses to L/k0, the time to coast across the barrier region; genuine
tunneling can make it smaller or negative.

t_T itself is set by an emergence criterion (transmitted-fraction
plateau plus centroid clearance, see EmergenceSpec).  The construction
makes delta_t insensitive to the exact t_T: after emergence the centroid
grows at rate k_bar, so the explicit and implicit time dependence cancel
to first order.  Each measurement is re-evaluated 50 time units later
and flagged ``converged`` when the two agree within 1%.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import NoTransmissionError, NotEmergedError
from .model import SimConfig, WaveFunction
from .observables import (
    mean_transmitted_momentum,
    momentum_spectrum,
    region_centroid,
    region_norm,
)
from .propagator import SnapshotLog, propagate

RECHECK_AFTER = 50.0


@dataclass(frozen=True)
class TunnelingResult:
    """One tunneling-time measurement.

    ``delta_t_recheck`` is the value recomputed at t_T + 50; ``converged``
    records whether it agrees with ``delta_t`` within 1%.
    """

    t_T: float
    x_T: float
    k_bar: float
    delta_t: float
    transmitted_fraction: float
    converged: bool
    delta_t_recheck: float | None = None


def tunneling_time(
    t_T: float, x0: float, L: float, k0: float, x_T: float, k_bar: float
) -> float:
    """Time-of-flight tunneling time; may be negative."""
    if not k0 > 0:
        raise ValueError(f"initial momentum must be positive, got k0={k0}")
    if not k_bar > 0:
        raise ValueError(f"transmitted momentum must be positive, got k_bar={k_bar}")
    return t_T - (x0 - 0.5 * L) / k0 - (x_T - 0.5 * L) / k_bar


def _emerged_at(log: SnapshotLog, i: int, config: SimConfig) -> bool:
    spec = config.emergence
    t = log.times[i]
    frac = log.transmitted_fractions[i]
    if not frac >= spec.transmission_floor:
        return False
    j = bisect_right(log.times, t - spec.plateau_window) - 1
    if j < 0:
        return False
    plateau = abs(frac - log.transmitted_fractions[j]) / max(frac, spec.plateau_floor)
    if not plateau < spec.plateau_rtol:
        return False
    centroid = log.transmitted_centroids[i]
    width = log.transmitted_widths[i]
    if math.isnan(centroid) or math.isnan(width):
        return False
    return centroid > 0.5 * config.barrier_length + spec.clearance_widths * width


def detect_emergence(log: SnapshotLog, config: SimConfig) -> float:
    """Smallest snapshot time satisfying the emergence criterion.

    Raises NoTransmissionError when the transmitted fraction never rose
    above the floor, and NotEmergedError when it did but no plateau
    formed before the log ends (extend t_max).
    """
    for i in range(len(log)):
        if _emerged_at(log, i, config):
            return log.times[i]
    peak = max(log.transmitted_fractions, default=0.0)
    if peak < config.emergence.transmission_floor:
        raise NoTransmissionError(
            f"no transmission: transmitted fraction peaked at {peak:.3e}, below "
            f"the floor {config.emergence.transmission_floor:.3e}"
        )
    raise NotEmergedError(
        f"transmitted packet not emerged by t={log.times[-1]:.6g} "
        f"(fraction {log.transmitted_fractions[-1]:.3e}); raise t_max"
    )


def emergence_stop_rule(log: SnapshotLog, config: SimConfig) -> bool:
    """Stop rule for propagate(): fires at the first emerged snapshot."""
    return len(log) > 0 and _emerged_at(log, len(log) - 1, config)


def _evaluate(config: SimConfig, state: WaveFunction) -> tuple[float, float, float, float]:
    """(x_T, k_bar, transmitted fraction, delta_t) at the state's time."""
    floor = config.tolerances.region_floor
    x_T = region_centroid(state, config.x_cut_centroid, floor=floor)
    spectrum = momentum_spectrum(state, config.spectrum_cut, floor=floor)
    k_bar = mean_transmitted_momentum(spectrum)
    fraction = region_norm(state, config.spectrum_cut) / state.norm()
    delta_t = tunneling_time(
        state.time,
        config.packet.x0,
        config.barrier_length,
        config.packet.k0,
        x_T,
        k_bar,
    )
    return x_T, k_bar, fraction, delta_t


@dataclass
class MeasureOutcome:
    """Measurement plus the artifacts the harness serializes."""

    result: TunnelingResult
    log: SnapshotLog
    state: WaveFunction  # state at t_T
    state_recheck: WaveFunction | None  # state at t_T + RECHECK_AFTER


def measure_detailed(
    config: SimConfig,
    *,
    initial_state: WaveFunction | None = None,
    recheck_after: float | None = RECHECK_AFTER,
) -> MeasureOutcome:
    """Run to emergence and evaluate the full timing pipeline."""
    state, log = propagate(
        config, initial_state=initial_state, stop_rule=emergence_stop_rule
    )
    if not _emerged_at(log, len(log) - 1, config):
        detect_emergence(log, config)  # raises the precise error
    return _finish(config, state, log, recheck_after)


def measure_at(
    config: SimConfig,
    t_measure: float,
    *,
    initial_state: WaveFunction | None = None,
    recheck_after: float | None = None,
) -> MeasureOutcome:
    """Evaluate the timing pipeline at a fixed time instead of detecting
    emergence; used for scaled-run comparisons and fixed-time experiments."""
    state, log = propagate(config, initial_state=initial_state, t_end=t_measure)
    return _finish(config, state, log, recheck_after)


def _finish(
    config: SimConfig,
    state: WaveFunction,
    log: SnapshotLog,
    recheck_after: float | None,
) -> MeasureOutcome:
    t_T = state.time
    x_T, k_bar, fraction, delta_t = _evaluate(config, state)
    state2 = None
    recheck = None
    converged = False
    if recheck_after is not None:
        state2, _ = propagate(config, initial_state=state, t_end=t_T + recheck_after)
        _, _, _, recheck = _evaluate(config, state2)
        converged = abs(recheck - delta_t) < 0.01 * abs(delta_t)
    result = TunnelingResult(
        t_T=t_T,
        x_T=x_T,
        k_bar=k_bar,
        delta_t=delta_t,
        transmitted_fraction=fraction,
        converged=converged,
        delta_t_recheck=recheck,
    )
    return MeasureOutcome(result=result, log=log, state=state, state_recheck=state2)


def measure(config: SimConfig) -> TunnelingResult:
    """Measure the tunneling time of the configured run.

    Propagates with the emergence stop rule, evaluates the transmitted
    centroid (x > x_cut_centroid), the mean transmitted momentum
    (spectrum windowed beyond the barrier exit), the transmitted
    fraction, and the time-of-flight formula; then re-evaluates at
    t_T + 50 to set the ``converged`` flag.
    """
    return measure_detailed(config).result
