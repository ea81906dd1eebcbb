"""Built-in verification suites behind the ``selftest`` CLI command.

Each suite returns a pass/fail plus a one-line numeric detail; all are
deterministic and sized to finish in well under a minute together.  The
acceptance test suite under tests/ runs the same checks at full scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .crank_nicolson import reference_integrator
from .experiments import (
    convergence_study_config,
    cross_scheme_config,
    eta_scaled_config,
    eta_scaled_initial_state,
    scaling_base_config,
    transmission_profile_config,
)
from .model import PotentialSpec
from .observables import l2_distance, plane_wave_transmission
from .propagator import dispersed_width, free_reference, propagate
from .timing import measure_at, measure_detailed


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str


def convergence_order(dts, errors) -> float:
    """Log-log slope of error vs step size, by least squares."""
    slope, _ = np.polyfit(np.log(np.asarray(dts)), np.log(np.asarray(errors)), 1)
    return float(slope)


def check_norm_conservation(*, t_max: float = 440.0) -> SuiteResult:
    config = replace(transmission_profile_config(0.0), t_max=t_max)
    _, log = propagate(config)
    drift = max(abs(n - 1.0) for n in log.norms)
    return SuiteResult(
        "norm-conservation", drift < 1e-8, f"max |norm-1| = {drift:.3e} (< 1e-8)"
    )


def check_free_gaussian(*, t: float = 100.0) -> SuiteResult:
    base = transmission_profile_config(0.0)
    config = replace(
        base, potential=PotentialSpec(v0=0.0, shape=base.potential.shape), t_max=t
    )
    state, _ = propagate(config)
    exact = free_reference(config.grid, config.packet, t)
    err = l2_distance(state, exact)
    grid = config.grid
    rho = state.density()
    centroid = float(np.sum(grid.x * rho) * grid.dx / (np.sum(rho) * grid.dx))
    expected_centroid = -config.packet.x0 + config.packet.k0 * t
    width = math.sqrt(
        float(np.sum((grid.x - centroid) ** 2 * rho) * grid.dx / (np.sum(rho) * grid.dx))
    )
    expected_width = dispersed_width(config.packet.dx0, t) / math.sqrt(2.0)
    ok = (
        err < 1e-6
        and abs(centroid - expected_centroid) < grid.dx
        and abs(width - expected_width) / expected_width < 1e-3
    )
    return SuiteResult(
        "free-gaussian-oracle",
        ok,
        f"L2 = {err:.3e} (< 1e-6), centroid err = {abs(centroid - expected_centroid):.3e}"
        f" (< {grid.dx}), width rel err = {abs(width - expected_width) / expected_width:.3e}",
    )


def check_convergence_order(
    dts: tuple[float, ...] = (0.04, 0.02, 0.01, 0.005), *, reference_dt: float = 0.000625
) -> SuiteResult:
    reference, _ = propagate(convergence_study_config(reference_dt))
    errors = []
    for dt in dts:
        state, _ = propagate(convergence_study_config(dt))
        errors.append(l2_distance(state, reference))
    slope = convergence_order(dts, errors)
    return SuiteResult(
        "dt-convergence-order",
        abs(slope - 2.0) <= 0.1,
        f"slope = {slope:.3f} (2.0 +- 0.1); errors = "
        + ", ".join(f"{e:.2e}" for e in errors),
    )


def check_scaling_invariance(eta: float = 2.0) -> SuiteResult:
    base_config = scaling_base_config()
    base = measure_detailed(base_config, recheck_after=None)
    scaled_config = eta_scaled_config(base_config, eta)
    initial = eta_scaled_initial_state(scaled_config, eta)
    scaled = measure_at(
        scaled_config, base.result.t_T * eta**2, initial_state=initial
    )
    dfrac = abs(
        scaled.result.transmitted_fraction - base.result.transmitted_fraction
    )
    dt_rel = abs(scaled.result.delta_t / eta**2 - base.result.delta_t) / abs(
        base.result.delta_t
    )
    ok = dfrac < 1e-6 and dt_rel < 5e-3
    return SuiteResult(
        "scaling-invariance",
        ok,
        f"|T' - T| = {dfrac:.3e} (< 1e-6), |dt'/eta^2 - dt|/|dt| = {dt_rel:.3e} (< 5e-3)",
    )


def check_cross_scheme(*, t_max: float = 25.0, dt: float = 0.002) -> SuiteResult:
    config = replace(cross_scheme_config(dt=dt), t_max=t_max)
    split_state, _ = propagate(config)
    cn_state = reference_integrator(config)
    err = l2_distance(split_state, cn_state)
    return SuiteResult(
        "cross-scheme-agreement", err < 1e-4, f"L2 = {err:.3e} (< 1e-4)"
    )


def check_plane_wave_filter() -> SuiteResult:
    """Closed-form barrier transmission against an independent evaluation,
    plus the filter's upward pull on the transmitted mean momentum."""
    k0, v0, L = 0.6, 1.0, 6.0
    t_amp = plane_wave_transmission(k0, v0, L)
    # independent branch formula
    energy = 0.5 * k0**2
    kappa = math.sqrt(2.0 * (v0 - energy))
    expected = 1.0 / (
        1.0 + v0**2 * math.sinh(kappa * L) ** 2 / (4.0 * energy * (v0 - energy))
    )
    rel = abs(abs(t_amp) ** 2 - expected) / expected
    # E = v0 limit and continuity across it
    k_match = math.sqrt(2.0 * v0)
    limit = 1.0 / (1.0 + L**2 * v0 / 2.0)
    at_limit = abs(plane_wave_transmission(k_match, v0, L)) ** 2
    below = abs(plane_wave_transmission(math.sqrt(2.0 * (v0 - 1e-6)), v0, L)) ** 2
    above = abs(plane_wave_transmission(math.sqrt(2.0 * (v0 + 1e-6)), v0, L)) ** 2
    continuity = abs(below - above) / at_limit
    # filtering: transmission-weighted mean momentum of a Gaussian spectrum
    dx0 = 50.0
    k = np.linspace(k0 - 8 / (math.sqrt(2) * dx0), k0 + 8 / (math.sqrt(2) * dx0), 4001)
    weight = np.abs(plane_wave_transmission(k, v0, L)) ** 2 * np.exp(
        -(dx0**2) * (k - k0) ** 2
    )
    k_bar = float(np.sum(k * weight) / np.sum(weight))
    ok = (
        rel < 1e-10
        and abs(at_limit - limit) / limit < 1e-6
        and continuity < 1e-4
        and k_bar > k0
    )
    return SuiteResult(
        "plane-wave-filter",
        ok,
        f"|t|^2 rel err = {rel:.2e}, E=V0 continuity = {continuity:.2e}, "
        f"filtered k_bar = {k_bar:.5f} (> {k0})",
    )


ALL_SUITES = (
    check_norm_conservation,
    check_free_gaussian,
    check_convergence_order,
    check_scaling_invariance,
    check_cross_scheme,
    check_plane_wave_filter,
)


def run_selftest(suites=ALL_SUITES) -> list[SuiteResult]:
    return [suite() for suite in suites]
