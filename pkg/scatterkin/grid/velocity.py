import logging

import numpy as np
import orjson
from scipy.integrate import lebedev_rule

from ._typing import VelocityGrid
from .._typing import AngularRule, KineticError

logger = logging.getLogger(__name__)

FOUR_PI = 4 * np.pi


def lebedev_nodes(order: int) -> (np.ndarray, np.ndarray):
    """
    Lebedev rule from scipy, weights normalized to the sphere area.

    :param order: exactness degree, eg: 7 for 26 nodes
    :return: nodes (M, 3), weights (M,)
    """
    try:
        x, w = lebedev_rule(order)
    except ValueError as e:
        raise KineticError(f"lebedev rule of order {order} is not available: {e}")
    nodes = np.asarray(x, dtype=float).T
    nodes /= np.linalg.norm(nodes, axis=1)[:, None]
    w = np.asarray(w, dtype=float)
    return nodes, w * (FOUR_PI / np.sum(w))


def product_gauss_nodes(order: int) -> (np.ndarray, np.ndarray):
    """
    Gauss-Legendre in cos(theta) times a uniform phi rule, exact up to the given degree.
    The phi count is even, so the node set is closed under w -> -w.
    """
    n_theta = order // 2 + 1
    n_phi = 2 * ((order + 2) // 2)
    cos_t, w_t = np.polynomial.legendre.leggauss(n_theta)
    phi = 2 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    cos_t, phi = np.meshgrid(cos_t, phi, indexing="ij")
    sin_t = np.sqrt(1 - cos_t ** 2)
    nodes = np.stack([sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t], axis=-1).reshape(-1, 3)
    weights = np.repeat(w_t, n_phi) * (2 * np.pi / n_phi)
    return nodes, weights


def merge_antipodes(nodes: np.ndarray, weights: np.ndarray) -> (np.ndarray, np.ndarray):
    """
    Collapse w and -w into one direction carrying the summed weight.
    Both collision kernels are even in w, so this halves the table sizes.
    """
    canonical = nodes.copy()
    for i in range(canonical.shape[0]):
        nonzero = np.flatnonzero(np.abs(canonical[i]) > 1e-12)
        if canonical[i, nonzero[0]] < 0:
            canonical[i] = -canonical[i]
    keys = np.round(canonical, 9)
    unique, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    merged_weights = np.bincount(inverse.ravel(), weights=weights, minlength=unique.shape[0])
    return canonical[first], merged_weights


def build_velocity_grid(n_per_axis: int,
                        v_max: float,
                        angular_rule: AngularRule = AngularRule.LEBEDEV,
                        angular_order: int = 7) -> VelocityGrid:
    """
    Build the uniform midpoint lattice and the angular quadrature.

    :param n_per_axis: nodes per axis, even and at least 8
    :type n_per_axis: int
    :param v_max: truncation half width
    :type v_max: float
    :param angular_rule: rule on the sphere
    :type angular_rule: AngularRule
    :param angular_order: exactness degree of the angular rule, at least 5
    :type angular_order: int
    :return: velocity grid
    :rtype: VelocityGrid
    """
    if n_per_axis < 8 or n_per_axis % 2 != 0:
        raise KineticError(f"n_per_axis must be even and >= 8, got {n_per_axis}")
    if v_max <= 0:
        raise KineticError(f"v_max must be positive, got {v_max}")
    if angular_order < 5:
        raise KineticError(f"angular order must be >= 5, got {angular_order}")
    match angular_rule:
        case AngularRule.LEBEDEV:
            angular_nodes, angular_weights = lebedev_nodes(angular_order)
        case AngularRule.PRODUCT_GAUSS:
            angular_nodes, angular_weights = product_gauss_nodes(angular_order)
        case _:
            raise KineticError(f"unknown angular rule {angular_rule}")

    h = 2 * v_max / n_per_axis
    axis = np.arange(n_per_axis)
    indices = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    nodes = (indices - (n_per_axis - 1) / 2) * h
    weights = np.full(nodes.shape[0], h ** 3)
    directions, direction_weights = merge_antipodes(angular_nodes, angular_weights)
    grid = VelocityGrid(n_per_axis=n_per_axis,
                        v_max=float(v_max),
                        angular_rule=angular_rule,
                        angular_order=angular_order,
                        nodes=nodes,
                        weights=weights,
                        indices=indices,
                        angular_nodes=angular_nodes,
                        angular_weights=angular_weights,
                        directions=directions,
                        direction_weights=direction_weights)
    logger.debug(f"built {grid}, {directions.shape[0]} merged directions")
    return grid


def load_grid_json(path: str) -> VelocityGrid:
    """
    rebuild a pinned grid and check it against the stored nodes
    """
    with open(path, "rb") as infile:
        data = orjson.loads(infile.read())
    grid = build_velocity_grid(data["n_per_axis"],
                               data["v_max"],
                               AngularRule[data["angular_rule"]],
                               data["angular_order"])
    if grid.grid_hash != data["grid_hash"] or not np.allclose(grid.nodes, np.array(data["nodes"]), atol=1e-12):
        raise KineticError(f"pinned grid in {path} does not match the rebuilt grid")
    return grid


def interpolation_stencil(g: VelocityGrid, points: np.ndarray) -> (np.ndarray, np.ndarray, np.ndarray):
    """
    Trilinear stencils of off-lattice points given in lattice index coordinates.

    Weights are convex. A point sitting on a lattice plane puts zero weight on the upper neighbour.

    :param g: velocity grid
    :param points: index coordinates, shape (M, 3)
    :return: inside mask (M,), flat node indices (M, 8), weights (M, 8)
    """
    n = g.n_per_axis
    base = np.floor(points)
    t = points - base
    on_upper = t > 1 - 1e-12
    base[on_upper] += 1
    t[on_upper] = 0.0
    t[t < 1e-12] = 0.0
    base = base.astype(np.int64)
    upper = base + (t > 0)
    inside = np.all(base >= 0, axis=1) & np.all(upper <= n - 1, axis=1)
    corners = np.array([[a, b, c] for a in (0, 1) for b in (0, 1) for c in (0, 1)])
    idx = np.clip(base[:, None, :] + corners[None, :, :], 0, n - 1)
    wts = np.prod(np.where(corners[None, :, :] == 1, t[:, None, :], 1 - t[:, None, :]), axis=2)
    return inside, g.flat_index(idx).astype(np.int32), wts
