import logging
import time

import numpy as np
from tqdm import tqdm

from ._typing import HydroState
from .._typing import KineticError
from ..grid import VelocityGrid, SpatialGrid, DistributionField, maxwellian_values
from ..linops import OperatorFamily, build_null_basis, pseudo_inverse

logger = logging.getLogger(__name__)


def hilbert_F1(s: HydroState,
               family: OperatorFamily,
               g: VelocityGrid,
               grid: SpatialGrid,
               method: str = "cg") -> DistributionField:
    """
    First order Hilbert correction F_1 = -L^-1[v.grad(mu)] with rho_1 = T_1 = 0.

    grad(mu) = mu [grad(rho)/rho + (|v|^2/2T - 3/2) grad(T)/T] with centered differences of the cell
    parameters. Per cell the 2 dim right-hand sides v_a sqrt(mu) and v_a (|v|^2/2T - 3/2) sqrt(mu)
    are solved in the symmetrized representation and combined with the gradients.

    :param s: hydro state
    :param family: operators on g
    :param g: velocity grid
    :param grid: spatial grid
    :param method: pseudo inverse method
    :return: F_1, shape (*grid.shape, N)
    """
    if s.rho.shape != grid.shape:
        raise KineticError(f"state shape {s.rho.shape} does not match grid shape {grid.shape}")
    if family.g.grid_hash != g.grid_hash:
        raise KineticError("operator family lives on another grid")
    s.validate()
    t0 = time.time()
    grad_rho = grid.gradient(s.rho)
    grad_T = grid.gradient(s.T)
    values = np.zeros(grid.shape + (g.size,))
    velocity = g.nodes[:, :grid.dim].T
    solved = 0
    for index in tqdm(list(np.ndindex(*grid.shape)), desc="hilbert F1", ncols=150):
        x_rho = grad_rho[(slice(None),) + index] / s.rho[index]
        x_T = grad_T[(slice(None),) + index] / s.T[index]
        if not (np.any(x_rho) or np.any(x_T)):
            continue
        rho, T = float(s.rho[index]), float(s.T[index])
        L = family.operator(rho, T)
        basis = build_null_basis(L, g)
        r = velocity * L.sqrt_mu
        b = r * (g.speed_sq / (2 * T) - 1.5)
        solutions = pseudo_inverse(L, np.concatenate([r, b]), basis, method=method)
        f = x_rho @ solutions[:grid.dim] + x_T @ solutions[grid.dim:]
        values[index] = -L.sqrt_mu * f
        solved += 1
    logger.info(f"hilbert F1 on {solved} cells finished, execute time {time.time() - t0:.2f}s")
    return DistributionField(values, epsilon=0.0, time=s.time)


def compatibility_defect(s: HydroState, g: VelocityGrid, grid: SpatialGrid) -> float:
    """
    largest |P r| / |r| over cells for the right-hand side r = v.grad(mu) / sqrt(mu) of F_1
    """
    grad_rho = grid.gradient(s.rho)
    grad_T = grid.gradient(s.T)
    sqrt_mu = np.sqrt(maxwellian_values(s.rho, None, s.T, g, warn=False))
    velocity = g.nodes[:, :grid.dim].T
    w = g.weights
    worst = 0.0
    for index in np.ndindex(*grid.shape):
        T = s.T[index]
        x_rho = grad_rho[(slice(None),) + index] / s.rho[index]
        x_T = grad_T[(slice(None),) + index] / T
        rhs = sqrt_mu[index] * (x_rho @ velocity + (g.speed_sq / (2 * T) - 1.5) * (x_T @ velocity))
        norm = np.sqrt(np.sum(w * rhs ** 2))
        if norm == 0:
            continue
        modes = np.array([sqrt_mu[index], (g.speed_sq - 3 * T) * sqrt_mu[index]])
        modes = modes / np.sqrt(np.sum(w * modes ** 2, axis=1))[:, None]
        worst = max(worst, float(np.linalg.norm((modes * w) @ rhs) / norm))
    return worst
