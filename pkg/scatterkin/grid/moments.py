import logging
from typing import Callable

import numpy as np

from ._typing import VelocityGrid, MacroFields, MomentWeight
from .._typing import KineticError

logger = logging.getLogger(__name__)

TRUNCATION_SIGMAS = 6


def maxwellian_values(rho, u, T, g: VelocityGrid, warn: bool = True) -> np.ndarray:
    """
    rho (2 pi T)^(-3/2) exp(-|v-u|^2 / 2T) on the nodes, vectorized over leading cell axes.

    :param rho: density, shape (...)
    :param u: bulk velocity, shape (..., 3) or None
    :param T: temperature, shape (...)
    :param g: velocity grid
    :param warn: log a warning when v_max < 6 sqrt(T)
    :return: values, shape (..., N)
    """
    rho = np.asarray(rho, dtype=float)
    T = np.asarray(T, dtype=float)
    if np.any(rho <= 0) or np.any(T <= 0):
        raise KineticError("maxwellian needs positive rho and T")
    if warn and g.v_max < TRUNCATION_SIGMAS * np.sqrt(np.max(T)):
        logger.warning(f"v_max={g.v_max} is below {TRUNCATION_SIGMAS} sqrt(T_max)={TRUNCATION_SIGMAS * np.sqrt(np.max(T)):.4g}, "
                       f"tail truncation is not negligible")
    u = np.zeros(rho.shape + (3,)) if u is None else np.asarray(u, dtype=float)
    diff = g.nodes - u[..., None, :]
    exponent = -np.sum(diff ** 2, axis=-1) / (2 * T[..., None])
    return rho[..., None] * (2 * np.pi * T[..., None]) ** -1.5 * np.exp(exponent)


def maxwellian(m: MacroFields, g: VelocityGrid, cell=None) -> np.ndarray:
    """
    local Maxwellian of the macro fields, of one cell when cell is given
    """
    if cell is not None:
        m = m.cell(cell)
    return maxwellian_values(m.rho, m.u, m.T, g)


def weight_values(weight: MomentWeight | Callable, g: VelocityGrid) -> np.ndarray:
    """
    phi(v) at the nodes
    """
    if callable(weight) and not isinstance(weight, MomentWeight):
        return np.asarray(weight(g.nodes), dtype=float)
    v = g.nodes
    match weight:
        case MomentWeight.MASS:
            return np.ones(g.size)
        case MomentWeight.MOMENTUM_X | MomentWeight.MOMENTUM_Y | MomentWeight.MOMENTUM_Z:
            return v[:, weight.value - MomentWeight.MOMENTUM_X.value].copy()
        case MomentWeight.ENERGY:
            return g.speed_sq
        case MomentWeight.HEAT_FLUX_X | MomentWeight.HEAT_FLUX_Y | MomentWeight.HEAT_FLUX_Z:
            return g.speed_sq * v[:, weight.value - MomentWeight.HEAT_FLUX_X.value]
        case _:
            raise KineticError(f"unknown moment weight {weight}")


def moment(f: np.ndarray, weight: MomentWeight | Callable, g: VelocityGrid) -> float | np.ndarray:
    """
    sum_j w_j phi(v_j) f(v_j), over the last axis of f
    """
    return np.asarray(f) @ (g.weights * weight_values(weight, g))


def macro_from_distribution(F: np.ndarray, g: VelocityGrid) -> MacroFields:
    """
    Invert the moment map cell by cell.

    :param F: distribution values, shape (..., N)
    :param g: velocity grid
    :return: rho, u, T with the leading shape of F
    :rtype: MacroFields
    """
    F = np.asarray(F)
    if not np.all(np.isfinite(F)):
        raise KineticError("distribution contains non-finite values")
    rho = F @ g.weights
    if np.any(rho <= 0):
        raise KineticError(f"non-positive cell mass, min = {np.min(rho):.6g}")
    momentum = (F * g.weights) @ g.nodes
    u = momentum / rho[..., None]
    # <|v-u|^2> = <|v|^2> - |u|^2 rho
    second = F @ (g.weights * g.speed_sq)
    T = (second - rho * np.sum(u ** 2, axis=-1)) / (3 * rho)
    if np.any(T <= 0):
        raise KineticError(f"non-positive temperature, min = {np.min(T):.6g}")
    return MacroFields(rho, u, T)
