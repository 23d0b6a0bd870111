import logging
import time

import numpy as np
import scipy.linalg
from tqdm import tqdm

from ._typing import HydroState, HydroTrajectory, StepControl
from .._typing import KineticError, StepRejectedError
from ..grid import SpatialGrid
from ..transport import TransportTable, flux_matrices

logger = logging.getLogger(__name__)


def _cell_coefficients(s: HydroState, table: TransportTable, strict: bool = True) -> dict:
    H, H_prime, H1_prime, clamped = table.lookup(s.rho, s.T)
    if np.any(clamped):
        message = f"state at t={s.time:.6g} leaves the transport table " \
                  f"(rho in {table.rho_range}, T in {table.T_range}): {int(np.sum(clamped))} cells"
        if strict:
            raise KineticError(message)
        logger.warning(message)
    T = s.T
    return {"rr": H, "rt": H_prime, "er": T * (H_prime + 1.5 * H), "et": T * (H1_prime + 1.5 * H_prime)}


def _face_mean(values: np.ndarray, grid: SpatialGrid, axis: int) -> np.ndarray:
    """
    arithmetic mean on the face between cell i and i+1
    """
    return 0.5 * (values + grid.shift(values, 1, axis))


def face_fluxes(s: HydroState, table: TransportTable, grid: SpatialGrid, strict: bool = True) -> (list, list):
    """
    (rho, e) fluxes on the upper face of every cell, one array per axis
    """
    coef = _cell_coefficients(s, table, strict)
    flux_rho, flux_e = [], []
    for axis in grid.axes:
        rho_face = _face_mean(s.rho, grid, axis)
        T_face = _face_mean(s.T, grid, axis)
        x_rho = (grid.shift(s.rho, 1, axis) - s.rho) / (grid.dx * rho_face)
        x_T = (grid.shift(s.T, 1, axis) - s.T) / (grid.dx * T_face)
        face = {k: _face_mean(v, grid, axis) for k, v in coef.items()}
        flux_rho.append(face["rr"] * x_rho + face["rt"] * x_T)
        flux_e.append(face["er"] * x_rho + face["et"] * x_T)
    return flux_rho, flux_e


def _divergence(fluxes: list, grid: SpatialGrid) -> np.ndarray:
    return sum((f - grid.shift(f, -1, axis)) / grid.dx for axis, f in zip(grid.axes, fluxes))


def hydro_step(s: HydroState, dt: float, table: TransportTable, grid: SpatialGrid, strict: bool = True) -> HydroState:
    """
    One explicit conservative finite volume step of

        dt rho = div(H grad(rho)/rho + H' grad(T)/T)
        dt e   = div(T(H' + 3/2 H) grad(rho)/rho + T(H'1 + 3/2 H') grad(T)/T),  e = 3/2 rho T

    Face coefficients are arithmetic means of the neighbouring cells, the divergence is a flux
    difference, so total mass and energy telescope.

    :param s: state
    :param dt: time step, at most stability_bound
    :param table: transport table covering the state
    :param grid: spatial grid
    :param strict: raise when the state leaves the table, warn and clamp otherwise
    :return: new state
    """
    if dt <= 0:
        raise KineticError(f"time step must be positive, got {dt}")
    if s.rho.shape != grid.shape:
        raise KineticError(f"state shape {s.rho.shape} does not match grid shape {grid.shape}")
    flux_rho, flux_e = face_fluxes(s, table, grid, strict)
    rho = s.rho + dt * _divergence(flux_rho, grid)
    e = s.e + dt * _divergence(flux_e, grid)
    new_time = s.time + dt
    if np.any(rho <= 0) or np.any(e <= 0) or not np.all(np.isfinite(rho)) or not np.all(np.isfinite(e)):
        raise StepRejectedError(f"non-positive density or temperature after step dt={dt:.3e}", new_time)
    return HydroState.from_conserved(rho, e, new_time)


def stability_bound(s: HydroState, table: TransportTable, grid: SpatialGrid) -> float:
    """
    dx^2 / (2 dim lambda_max), lambda_max the largest eigenvalue over cells of the (rho, e) parabolic matrix
    """
    coef = _cell_coefficients(s, table, strict=False)
    rho, e = s.rho, s.e
    a11 = (coef["rr"] - coef["rt"]) / rho
    a12 = coef["rt"] / e
    a21 = (coef["er"] - coef["et"]) / rho
    a22 = coef["et"] / e
    trace = a11 + a22
    det = a11 * a22 - a12 * a21
    disc = np.sqrt(np.maximum(trace ** 2 / 4 - det, 0.0))
    lam = np.max(trace / 2 + disc)
    if lam <= 0:
        raise KineticError("diffusion matrix has no positive eigenvalue, the system is not parabolic")
    return grid.dx ** 2 / (2 * grid.dim * lam)


def regularity_norms(s: HydroState, grid: SpatialGrid) -> tuple[float, float]:
    """
    (|grad rho|_2 + |grad T|_2, the same plus second differences)
    """
    first = grid.l2_norm(grid.gradient(s.rho)) + grid.l2_norm(grid.gradient(s.T))
    second = grid.l2_norm(grid.second_derivatives(s.rho)) + grid.l2_norm(grid.second_derivatives(s.T))
    return first, first + second


def hydro_solve(s0: HydroState,
                t_end: float,
                table: TransportTable,
                grid: SpatialGrid,
                dt_control: StepControl | None = None,
                strict: bool = True) -> HydroTrajectory:
    """
    Integrate the diffusion system to t_end with step rejection and conservation monitoring.

    :param s0: positive initial state
    :param t_end: final time
    :param table: transport table covering the run
    :param grid: spatial grid
    :param dt_control: step control, defaults when None
    :param strict: raise when the state leaves the table
    :return: trajectory sampled at dt_control.sample_times and t_end
    """
    dt_control = StepControl() if dt_control is None else dt_control
    s0.validate()
    if t_end < 0:
        raise KineticError(f"t_end must be nonnegative, got {t_end}")
    t0 = time.time()
    samples = sorted({float(t) for t in dt_control.sample_times if s0.time < t < t_end} | {float(t_end)})
    mass0, energy0 = s0.totals(grid)
    trajectory = HydroTrajectory(states=[s0])
    first, full = regularity_norms(s0, grid)
    trajectory.gradient_times.append(s0.time)
    trajectory.gradient_norms.append(first)
    trajectory.sobolev_bound = full

    s = s0
    sample_index = 0
    with tqdm(total=t_end - s0.time, desc="hydro", ncols=150, disable=t_end <= s0.time) as pbar:
        while sample_index < len(samples) and s.time < t_end:
            target = samples[sample_index]
            dt = min(dt_control.cfl * stability_bound(s, table, grid), target - s.time)
            for attempt in range(dt_control.max_halvings + 1):
                try:
                    new_state = hydro_step(s, dt, table, grid, strict)
                    break
                except StepRejectedError as e:
                    trajectory.rejected += 1
                    if attempt == dt_control.max_halvings:
                        raise StepRejectedError(f"step rejected after {attempt} halvings", e.time)
                    logger.warning(f"{e.message}, halving dt")
                    dt /= 2
            if target - new_state.time <= 1e-12 * max(1.0, target):
                new_state.time = target
                sample_index += 1
                trajectory.states.append(new_state)
            elif dt_control.snapshot_every and (trajectory.steps + 1) % dt_control.snapshot_every == 0:
                trajectory.states.append(new_state)
            pbar.update(new_state.time - s.time)
            s = new_state
            trajectory.steps += 1
            first, full = regularity_norms(s, grid)
            trajectory.gradient_times.append(s.time)
            trajectory.gradient_norms.append(first)
            trajectory.sobolev_bound = max(trajectory.sobolev_bound, full)
    mass, energy = s.totals(grid)
    trajectory.mass_drift = abs(mass - mass0) / abs(mass0)
    trajectory.energy_drift = abs(energy - energy0) / abs(energy0)
    logger.info(f"hydro run to t={t_end} finished in {trajectory.steps} steps ({trajectory.rejected} rejected), "
                f"mass drift {trajectory.mass_drift:.2e}, energy drift {trajectory.energy_drift:.2e}, "
                f"execute time {time.time() - t0:.2f}s")
    return trajectory


def linear_mode_oracle(rho0: float,
                       T0: float,
                       amplitudes: np.ndarray,
                       wavenumber: float,
                       t: float,
                       table: TransportTable,
                       grid: SpatialGrid) -> np.ndarray:
    """
    Exact evolution of one Fourier mode of the semi-discrete system linearized at a uniform state.

    (delta rho, delta e) of a mode exp(i k x) evolves as exp(-k_d^2 A t) with A the (rho, e) parabolic
    matrix at (rho0, T0) and k_d = 2 sin(k dx / 2) / dx the wavenumber seen by the three point stencil.

    :return: (delta rho, delta e) at time t
    """
    H, H_prime, H1_prime, clamped = table.lookup(rho0, T0)
    if np.any(clamped):
        raise KineticError(f"background ({rho0}, {T0}) is outside the transport table")
    _, parabolic = flux_matrices(float(H), float(H_prime), float(H1_prime), rho0, T0)
    k_d = 2 * np.sin(wavenumber * grid.dx / 2) / grid.dx
    return scipy.linalg.expm(-k_d ** 2 * parabolic * t) @ np.asarray(amplitudes, dtype=float)
