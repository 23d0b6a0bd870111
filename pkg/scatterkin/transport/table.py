import logging
import time

import numpy as np
from tqdm import tqdm

from ._typing import TransportTable
from .coefficients import compute_coefficients, scaled_coefficients
from .._typing import KineticError
from ..collision import CollisionTables, build_tables
from ..grid import VelocityGrid
from ..linops import assemble_L, scale_operator, OperatorFamily

logger = logging.getLogger(__name__)


def _nodes(value_range: tuple[float, float], resolution: int, name: str) -> np.ndarray:
    lo, hi = float(value_range[0]), float(value_range[1])
    if lo <= 0 or hi < lo:
        raise KineticError(f"{name} range must be positive and ordered, got {value_range}")
    if hi - lo < 1e-12 * hi:
        return np.array([lo])
    if resolution < 2:
        raise KineticError(f"{name} resolution must be at least 2, got {resolution}")
    return np.linspace(lo, hi, resolution)


def tabulate(rho_range: tuple[float, float],
             T_range: tuple[float, float],
             alpha: float,
             resolution: int | tuple,
             g: VelocityGrid,
             tables: CollisionTables | None = None,
             scaling: bool = True,
             cache_dir: str | None = None) -> TransportTable:
    """
    Transport coefficients over a (rho, T) rectangle.

    With scaling (default) one reference operator at (1, 1) is assembled on g and the table is filled from
    H(rho, T, alpha) = sqrt(T) H(1, 1, alpha / rho), one set of solves per density node. Otherwise every
    point is computed on the fixed grid g, with the Boltzmann matrices assembled once per temperature node.

    :param rho_range: (min, max) density, equal ends give a single node
    :param T_range: (min, max) temperature
    :param alpha: scatterer density
    :param resolution: nodes per axis, int or (n_rho, n_T)
    :param g: velocity grid
    :param tables: collision tables of g, built when None
    :param scaling: use the scaling law
    :param cache_dir: table cache directory
    :return: table
    """
    if alpha <= 0:
        raise KineticError(f"alpha must be positive, got {alpha}")
    n_rho, n_T = (resolution, resolution) if isinstance(resolution, int) else resolution
    rho_nodes = _nodes(rho_range, n_rho, "rho")
    T_nodes = _nodes(T_range, n_T, "T")
    tables = build_tables(g, cache_dir=cache_dir) if tables is None else tables
    t0 = time.time()
    points = [[None] * len(T_nodes) for _ in rho_nodes]
    with tqdm(total=len(rho_nodes) * len(T_nodes), desc="transport table", ncols=150) as pbar:
        if scaling:
            reference = assemble_L(1.0, 1.0, alpha, g, tables)
            for i, rho in enumerate(rho_nodes):
                local_alpha = alpha / rho
                L, _ = scale_operator(reference, g, 1.0, 1.0, local_alpha)
                base = compute_coefficients(1.0, 1.0, local_alpha, L, g)
                for j, T in enumerate(T_nodes):
                    points[i][j] = scaled_coefficients(base, rho, T)
                    pbar.update()
        else:
            family = OperatorFamily(g, tables, alpha, T_nodes, exact=False)
            for j, T in enumerate(T_nodes):
                for i, rho in enumerate(rho_nodes):
                    L = family.operator(rho, T)
                    points[i][j] = compute_coefficients(rho, T, alpha, L, g)
                    pbar.update()
    table = TransportTable(rho_nodes=rho_nodes, T_nodes=T_nodes, alpha=float(alpha), points=points)
    bad = [(c.rho, c.T) for row in points for c in row if not c.well_posed]
    if bad:
        raise KineticError(f"diffusion system is not well posed at (rho, T) = {bad}")
    logger.info(f"transport table {len(rho_nodes)}x{len(T_nodes)} finished, execute time {time.time() - t0:.2f}s")
    return table
