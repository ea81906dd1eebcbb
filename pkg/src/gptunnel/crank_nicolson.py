"""Semi-implicit Crank-Nicolson finite-difference integrator.

Independent oracle for cross-checking the spectral split-step scheme: a
three-point Laplacian with homogeneous Dirichlet ends (the packets used
for cross-checks vanish at the boundary to round-off, where the periodic
spectral run and this scheme agree), trapezoidal time stepping, and the
cubic term handled by a fixed-point iteration on the midpoint density
(|psi^n|^2 + |psi^{n+1}|^2)/2.

The scheme is second order in dt but only second order in dx, so
cross-scheme comparisons need a fine spatial grid; it exists for tests
and the self-test command, not for production runs.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConvergenceError
from .model import SimConfig, WaveFunction, gaussian_packet


def _apply_hamiltonian(psi: np.ndarray, dx: float, v_eff: np.ndarray) -> np.ndarray:
    lap = np.empty_like(psi)
    lap[1:-1] = psi[2:] - 2.0 * psi[1:-1] + psi[:-2]
    lap[0] = psi[1] - 2.0 * psi[0]
    lap[-1] = psi[-2] - 2.0 * psi[-1]
    lap /= dx * dx
    return -0.5 * lap + v_eff * psi


def crank_nicolson_step(
    psi: np.ndarray,
    dx: float,
    dt: float,
    v: np.ndarray,
    g: np.ndarray,
    *,
    fixed_point_tol: float = 1e-10,
    max_iterations: int = 50,
) -> np.ndarray:
    """One trapezoidal step with fixed-point iteration on the density."""
    n = psi.size
    off = -0.25j * dt / (dx * dx)
    ab = np.zeros((3, n), dtype=np.complex128)
    ab[0, 1:] = off
    ab[2, :-1] = off

    if not np.any(g):
        rhs = psi - 0.5j * dt * _apply_hamiltonian(psi, dx, v)
        ab[1, :] = 1.0 + 0.5j * dt * (1.0 / (dx * dx) + v)
        return solve_banded((1, 1), ab, rhs)

    rho_old = psi.real**2 + psi.imag**2
    psi_new = psi
    for _ in range(max_iterations):
        rho_mid = 0.5 * (rho_old + psi_new.real**2 + psi_new.imag**2)
        v_eff = v + g * rho_mid
        rhs = psi - 0.5j * dt * _apply_hamiltonian(psi, dx, v_eff)
        ab[1, :] = 1.0 + 0.5j * dt * (1.0 / (dx * dx) + v_eff)
        candidate = solve_banded((1, 1), ab, rhs)
        delta = float(np.max(np.abs(candidate - psi_new)))
        psi_new = candidate
        if delta < fixed_point_tol:
            return psi_new
    raise ConvergenceError(
        f"fixed-point iteration did not reach {fixed_point_tol:.1e} within "
        f"{max_iterations} iterations (last delta {delta:.3e})"
    )


def reference_integrator(
    config: SimConfig,
    *,
    initial_state: WaveFunction | None = None,
    t_end: float | None = None,
    fixed_point_tol: float = 1e-10,
    max_iterations: int = 50,
) -> WaveFunction:
    """Integrate the configured problem to t_end (default t_max).

    Intended for small/fine test grids only; cost per step is one banded
    solve per fixed-point iteration.
    """
    grid = config.grid
    if initial_state is None:
        state = gaussian_packet(
            grid, config.packet, boundary_tail_tol=config.tolerances.packet_boundary_tail
        )
    else:
        state = initial_state
    v = config.potential.sample(grid.x)
    g = config.nonlinearity.sample(grid.x)
    stop_t = config.t_max if t_end is None else t_end
    n_steps = int(round((stop_t - state.time) / config.dt))
    psi = np.array(state.amplitudes, dtype=np.complex128)
    for _ in range(n_steps):
        psi = crank_nicolson_step(
            psi,
            grid.dx,
            config.dt,
            v,
            g,
            fixed_point_tol=fixed_point_tol,
            max_iterations=max_iterations,
        )
    return WaveFunction(grid=grid, amplitudes=psi, time=state.time + n_steps * config.dt)
