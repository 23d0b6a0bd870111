import logging
import math
import time
from dataclasses import dataclass

import numpy as np
from tqdm import tqdm

from ._typing import KineticParam, KineticTrajectory, StepDiagnostics
from .relaxation import CollisionSolver
from .streaming import free_streaming, max_speed
from .._typing import KineticError, Splitting, CollisionModel, Invariants
from ..collision import CollisionTables, conserve_project
from ..grid import VelocityGrid, SpatialGrid, DistributionField, maxwellian_values, macro_from_distribution
from ..hydro import HydroState, HydroTrajectory, hilbert_F1
from ..linops import OperatorFamily

logger = logging.getLogger(__name__)

MU_CUTOFF = 1e-30
POSITIVITY_FLOOR = 1e-3
CLIP_TOL = 1e-6


@dataclass
class KineticContext:
    """
    everything a kinetic step needs besides the field itself

    :param g: velocity grid
    :param grid: spatial grid
    :param tables: collision tables of g
    :param alpha: scatterer density
    :param param: scheme parameters
    :param collision: implicit collision solver
    :param family: operator family, used by the linearized model and the initial data
    """
    g: VelocityGrid
    grid: SpatialGrid
    tables: CollisionTables
    alpha: float
    param: KineticParam
    collision: CollisionSolver
    family: OperatorFamily | None = None

    @classmethod
    def build(cls,
              g: VelocityGrid,
              grid: SpatialGrid,
              tables: CollisionTables,
              alpha: float,
              param: KineticParam,
              reference: tuple[float, float] = (1.0, 1.0),
              T_range: tuple[float, float] | None = None,
              family: OperatorFamily | None = None) -> "KineticContext":
        """
        :param reference: (rho, T) of the penalizer, the mean state of the run
        :param T_range: temperature envelope of the operator family, reference T when None
        :param family: reuse an existing family
        """
        if family is None and param.collision_model == CollisionModel.LINEARIZED:
            T_min, T_max = (reference[1], reference[1]) if T_range is None else T_range
            family = OperatorFamily.around(g, tables, alpha, T_min, T_max, param.n_temperatures)
        collision = CollisionSolver(g, tables, alpha, param, reference, family)
        return cls(g, grid, tables, alpha, param, collision, family)

    def nominal_dt(self, epsilon: float) -> float:
        """
        transport CFL: dt / epsilon * v_max * dim <= cfl * dx
        """
        return self.param.cfl * epsilon * self.grid.dx / (max_speed(self.g, self.grid) * self.grid.dim)


def kinetic_step(F: DistributionField, dt: float, ctx: KineticContext) -> (DistributionField, StepDiagnostics):
    """
    One split step of dt F + v.grad(F) / epsilon = (q_b(F, F) + alpha q_d(F)) / epsilon^2.

    Lie: transport dt then collision dt. Strang: transport dt/2, collision dt, transport dt/2.
    """
    epsilon = F.epsilon
    if epsilon <= 0:
        raise KineticError(f"epsilon must be positive, got {epsilon}")
    if dt <= 0:
        raise KineticError(f"time step must be positive, got {dt}")
    grid, g, param = ctx.grid, ctx.g, ctx.param
    if F.spatial_shape != grid.shape:
        raise KineticError(f"field shape {F.spatial_shape} does not match grid shape {grid.shape}")
    values = F.values
    match param.splitting:
        case Splitting.LIE:
            values = free_streaming(values, dt, epsilon, param.transport, g, grid)
        case Splitting.STRANG:
            values = free_streaming(values, dt / 2, epsilon, param.transport, g, grid)
        case _:
            raise KineticError(f"unknown splitting {param.splitting}")
    collided, diagnostics = ctx.collision.solve(values.reshape(-1, g.size), dt, epsilon)
    values = collided.reshape(values.shape)
    if param.splitting == Splitting.STRANG:
        values = free_streaming(values, dt / 2, epsilon, param.transport, g, grid)
    return F.replace(values, F.time + dt), diagnostics


def error_functional(F: DistributionField, s: HydroState, g: VelocityGrid, grid: SpatialGrid) -> float:
    """
    |mu^(-1/2) (F - mu)|_2 over space and velocity, mu the local Maxwellian of s.
    Nodes with mu below 1e-30 contribute nothing.
    """
    if F.spatial_shape != s.rho.shape:
        raise KineticError("field and hydro state live on different spatial grids")
    mu = maxwellian_values(s.rho, None, s.T, g, warn=False)
    keep = mu >= MU_CUTOFF
    ratio = np.where(keep, (F.values - mu) ** 2 / np.where(keep, mu, 1.0), 0.0)
    return float(np.sqrt(np.sum(ratio @ g.weights) * grid.cell_volume))


def well_prepared_initial(s0: HydroState,
                          epsilon: float,
                          g: VelocityGrid,
                          grid: SpatialGrid,
                          family: OperatorFamily | None = None,
                          invariants: Invariants = Invariants.MASS_ENERGY,
                          method: str = "cg",
                          f1: DistributionField | None = None) -> (DistributionField, float):
    """
    mu(s0) + epsilon F_1(s0), kept positive.

    Nodes falling below 1e-3 mu are lifted to that floor and the cell mass and energy restored;
    the lifted mass fraction must stay below 1e-6.

    :param f1: precomputed first order correction of s0, reused across epsilons
    :return: field, and the threshold epsilon* = min mu / |F_1| over F_1 < 0 below which no lifting happens
    """
    if epsilon < 0:
        raise KineticError(f"epsilon must be nonnegative, got {epsilon}")
    s0.validate()
    mu = maxwellian_values(s0.rho, None, s0.T, g)
    if epsilon == 0:
        return DistributionField(mu, 0.0, s0.time), math.inf
    if f1 is None:
        if family is None:
            raise KineticError("well prepared data with epsilon > 0 needs an operator family")
        f1 = hilbert_F1(s0, family, g, grid, method=method)
    f1 = f1.values
    negative = f1 < 0
    threshold = float(np.min(mu[negative] / -f1[negative])) if np.any(negative) else math.inf
    values = mu + epsilon * f1
    floor = POSITIVITY_FLOOR * mu
    low = values < floor
    if np.any(low):
        lifted = np.where(low, floor - values, 0.0) @ g.weights
        fraction = float(np.max(lifted / (mu @ g.weights)))
        if fraction > CLIP_TOL:
            raise KineticError(f"epsilon={epsilon} too large for positivity: lifted mass fraction {fraction:.3e}, "
                               f"threshold epsilon*={threshold:.4g}")
        fixed = np.maximum(values, floor)
        values = values + conserve_project(fixed - values, invariants, g, mu_ref=mu)
        logger.info(f"well prepared data at epsilon={epsilon}: lifted mass fraction {fraction:.3e}")
    logger.info(f"positivity threshold epsilon*={threshold:.4g}")
    return DistributionField(values, float(epsilon), s0.time), threshold


def kinetic_solve(F0: DistributionField,
                  epsilon: float,
                  t_end: float,
                  ctx: KineticContext,
                  hydro: HydroTrajectory | None = None,
                  sample_times=(),
                  dt: float | None = None) -> KineticTrajectory:
    """
    Integrate to t_end, sampling the field, its macro fields and, with a hydro trajectory sampled at the
    same times, the error functional.

    :param F0: positive initial field
    :param epsilon: Knudsen number
    :param t_end: final macroscopic time
    :param ctx: kinetic context
    :param hydro: hydro trajectory to compare against
    :param sample_times: times hit exactly, t_end always included
    :param dt: time step, the transport CFL step when None
    :return: trajectory
    """
    if epsilon <= 0:
        raise KineticError(f"epsilon must be positive, got {epsilon}")
    g, grid = ctx.g, ctx.grid
    t0 = time.time()
    dt_nominal = ctx.nominal_dt(epsilon) if dt is None else dt
    F = DistributionField(F0.values, float(epsilon), F0.time)
    if np.any(F.values < 0):
        raise KineticError("initial field has negative values")
    mass0, energy0 = F.totals(g, grid)
    samples = sorted({float(t) for t in sample_times if F.time < t < t_end} | {float(t_end)})
    boundaries = [F.time] + samples
    counts = [max(1, math.ceil((b - a) / dt_nominal - 1e-9)) for a, b in zip(boundaries[:-1], boundaries[1:])]
    trajectory = KineticTrajectory(dt=dt_nominal)

    def record(field: DistributionField):
        trajectory.snapshots.append(field)
        trajectory.macro.append(macro_from_distribution(field.values, g))
        if hydro is not None:
            trajectory.errors.append(error_functional(field, hydro.at(field.time), g, grid))

    record(F)
    with tqdm(total=sum(counts), desc=f"kinetic eps={epsilon:g}", ncols=150) as pbar:
        for start, stop, count in zip(boundaries[:-1], boundaries[1:], counts):
            step = (stop - start) / count
            for _ in range(count):
                F, diagnostics = kinetic_step(F, step, ctx)
                trajectory.steps += 1
                trajectory.max_iterations = max(trajectory.max_iterations, diagnostics.iterations)
                trajectory.clamped_mass_fraction = max(trajectory.clamped_mass_fraction,
                                                       diagnostics.clamped_mass_fraction)
                pbar.update()
            F.time = stop
            record(F)
    mass, energy = F.totals(g, grid)
    trajectory.mass_drift = abs(mass - mass0) / mass0
    trajectory.energy_drift = abs(energy - energy0) / energy0
    trajectory.wall_time = time.time() - t0
    span = t_end - F0.time
    rate = trajectory.steps / span if span > 0 else 0.0
    logger.info(f"kinetic run eps={epsilon} finished: {trajectory.steps} steps ({rate:.1f} per unit time), "
                f"max iterations {trajectory.max_iterations}, mass drift {trajectory.mass_drift:.2e}, "
                f"energy drift {trajectory.energy_drift:.2e}, execute time {trajectory.wall_time:.2f}s")
    return trajectory
