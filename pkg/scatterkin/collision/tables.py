import logging
import os
import time

import numpy as np
from tqdm import tqdm

from ._typing import CollisionTable, ScatterTable, CollisionTables, TABLE_VERSION
from .._typing import StencilMode, KineticError
from ..grid import VelocityGrid, interpolation_stencil

logger = logging.getLogger(__name__)

PAIR_CHUNK = 2_000_000
LATTICE_TOL = 1e-9
SHELL_TOL = 1e-3


def _lattice_factor(abs_s: np.ndarray, compatible: np.ndarray) -> float:
    """
    total kernel mass of a direction over its lattice compatible kernel mass
    """
    kept = np.sum(abs_s[compatible])
    if kept <= 0:
        return 0.0
    return float(np.sum(abs_s) / kept)


def build_collision_table(g: VelocityGrid, mode: StencilMode = StencilMode.LATTICE) -> CollisionTable:
    """
    Enumerate all unordered node pairs and merged directions.

    Collisions whose post-collision stencils leave the grid are dropped (truncated).
    In lattice mode only collisions with both images on the lattice are kept and
    each direction is reweighted, which keeps detailed balance exact.

    :param g: velocity grid
    :param mode: stencil mode
    :return: collision table
    """
    t0 = time.time()
    n_nodes = g.size
    h = g.spacing
    idx = g.indices.astype(np.int64)
    first, second = np.triu_indices(n_nodes, k=1)
    rel = (idx[first] - idx[second]).astype(np.float64)

    # directions reweighted in lattice mode
    factors = np.ones(g.directions.shape[0])
    if mode == StencilMode.LATTICE:
        for d, omega in enumerate(g.directions):
            abs_s_total, abs_s_kept = 0.0, 0.0
            for start in range(0, first.shape[0], PAIR_CHUNK):
                s = rel[start:start + PAIR_CHUNK] @ omega
                disp = s[:, None] * omega[None, :]
                compatible = np.all(np.abs(disp - np.rint(disp)) < LATTICE_TOL, axis=1)
                abs_s = np.abs(s)
                abs_s_total += np.sum(abs_s)
                abs_s_kept += np.sum(abs_s[compatible])
            factors[d] = abs_s_total / abs_s_kept if abs_s_kept > 0 else 0.0

    parts = {"pair_v": [], "pair_w": [], "post_v": [], "post_w": [],
             "post_v_weights": [], "post_w_weights": [], "kernel": []}
    stats = {"pairs": float(first.shape[0]), "kept": 0.0, "truncated": 0.0, "off_lattice": 0.0}
    for d, omega in enumerate(tqdm(g.directions, desc="collision table", ncols=150)):
        if factors[d] == 0:
            logger.warning(f"direction {omega} has no lattice compatible collisions, skipped")
            continue
        weight = g.direction_weights[d] * factors[d]
        for start in range(0, first.shape[0], PAIR_CHUNK):
            i = first[start:start + PAIR_CHUNK]
            k = second[start:start + PAIR_CHUNK]
            s = rel[start:start + PAIR_CHUNK] @ omega
            active = np.abs(s) > 1e-12
            disp = s[:, None] * omega[None, :]
            if mode == StencilMode.LATTICE:
                rounded = np.rint(disp)
                compatible = np.all(np.abs(disp - rounded) < LATTICE_TOL, axis=1) & active
                target_v = idx[i] - rounded.astype(np.int64)
                target_w = idx[k] + rounded.astype(np.int64)
                inside = np.all((target_v >= 0) & (target_v < g.n_per_axis)
                                & (target_w >= 0) & (target_w < g.n_per_axis), axis=1)
                keep = compatible & inside
                stats["off_lattice"] += float(np.sum(active & ~compatible))
                stats["truncated"] += float(np.sum(compatible & ~inside))
                parts["post_v"].append(g.flat_index(target_v[keep]).astype(np.int32))
                parts["post_w"].append(g.flat_index(target_w[keep]).astype(np.int32))
            else:
                inside_v, stencil_v, weights_v = interpolation_stencil(g, idx[i] - disp)
                inside_w, stencil_w, weights_w = interpolation_stencil(g, idx[k] + disp)
                keep = active & inside_v & inside_w
                stats["truncated"] += float(np.sum(active & ~(inside_v & inside_w)))
                parts["post_v"].append(stencil_v[keep])
                parts["post_w"].append(stencil_w[keep])
                parts["post_v_weights"].append(weights_v[keep])
                parts["post_w_weights"].append(weights_w[keep])
            parts["pair_v"].append(i[keep].astype(np.int32))
            parts["pair_w"].append(k[keep].astype(np.int32))
            parts["kernel"].append(weight * h ** 3 * h * np.abs(s[keep]))
            stats["kept"] += float(np.sum(keep))

    lattice = mode == StencilMode.LATTICE
    table = CollisionTable(grid_hash=g.grid_hash,
                           mode=mode,
                           pair_v=np.concatenate(parts["pair_v"]),
                           pair_w=np.concatenate(parts["pair_w"]),
                           post_v=np.concatenate(parts["post_v"]),
                           post_w=np.concatenate(parts["post_w"]),
                           post_v_weights=None if lattice else np.concatenate(parts["post_v_weights"]),
                           post_w_weights=None if lattice else np.concatenate(parts["post_w_weights"]),
                           kernel=np.concatenate(parts["kernel"]),
                           stats=stats)
    logger.info(f"collision table built: {table.size} collisions, {table.nbytes / 2 ** 20:.1f} MB, "
                f"execute time {time.time() - t0:.2f}s")
    return table


def build_scatter_table(g: VelocityGrid, mode: StencilMode = StencilMode.LATTICE) -> ScatterTable:
    """
    Reflections of every node across every merged direction.

    Images outside the box are truncated. In trilinear mode, stencils whose
    interpolated |v|^2 misses the energy shell by more than 1e-3 relative are flagged.
    """
    idx = g.indices.astype(np.float64)
    centered = g.centered_indices
    nodes = np.arange(g.size)
    sources, targets, target_weights, kernels = [], [], [], []
    stats = {"kept": 0.0, "truncated": 0.0, "off_lattice": 0.0, "shell_flagged": 0.0}
    for d, omega in enumerate(g.directions):
        s = centered @ omega
        active = np.abs(s) > 1e-12
        disp = -2 * s[:, None] * omega[None, :]
        abs_s = np.abs(s)
        if mode == StencilMode.LATTICE:
            rounded = np.rint(disp)
            compatible = np.all(np.abs(disp - rounded) < LATTICE_TOL, axis=1) & active
            factor = _lattice_factor(abs_s[active], compatible[active])
            if factor == 0:
                continue
            target = (idx + rounded).astype(np.int64)
            inside = np.all((target >= 0) & (target < g.n_per_axis), axis=1)
            keep = compatible & inside
            stats["off_lattice"] += float(np.sum(active & ~compatible))
            stats["truncated"] += float(np.sum(compatible & ~inside))
            targets.append(g.flat_index(target[keep]).astype(np.int32))
        else:
            factor = 1.0
            inside, stencil, weights = interpolation_stencil(g, idx + disp)
            keep = active & inside
            stats["truncated"] += float(np.sum(active & ~inside))
            shell = np.sum(weights * g.speed_sq[stencil], axis=1)
            speed_sq = g.speed_sq
            shell_error = np.abs(shell - speed_sq) / np.maximum(speed_sq, 1e-300)
            stats["shell_flagged"] += float(np.sum(keep & (shell_error > SHELL_TOL)))
            targets.append(stencil[keep])
            target_weights.append(weights[keep])
        sources.append(nodes[keep].astype(np.int32))
        kernels.append(g.direction_weights[d] * factor * g.spacing * abs_s[keep])
        stats["kept"] += float(np.sum(keep))
    if stats["shell_flagged"] > 0:
        logger.warning(f"{int(stats['shell_flagged'])} reflection stencils miss the energy shell by more than "
                       f"{SHELL_TOL} relative")
    return ScatterTable(grid_hash=g.grid_hash,
                        mode=mode,
                        size_of_grid=g.size,
                        source=np.concatenate(sources),
                        target=np.concatenate(targets),
                        target_weights=None if mode == StencilMode.LATTICE else np.concatenate(target_weights),
                        kernel=np.concatenate(kernels),
                        stats=stats)


def _stats_from(data) -> dict:
    return {str(k): float(v) for k, v in zip(data["stats_keys"], data["stats_values"])}


def load_collision_table(path: str, g: VelocityGrid) -> CollisionTable:
    with np.load(path) as data:
        if int(data["version"]) != TABLE_VERSION or str(data["grid_hash"]) != g.grid_hash:
            raise KineticError(f"collision table {path} was built for another grid or version")
        weights = "post_v_weights" in data.files
        return CollisionTable(grid_hash=str(data["grid_hash"]),
                              mode=StencilMode[str(data["mode"])],
                              pair_v=data["pair_v"],
                              pair_w=data["pair_w"],
                              post_v=data["post_v"],
                              post_w=data["post_w"],
                              post_v_weights=data["post_v_weights"] if weights else None,
                              post_w_weights=data["post_w_weights"] if weights else None,
                              kernel=data["kernel"],
                              stats=_stats_from(data))


def load_scatter_table(path: str, g: VelocityGrid) -> ScatterTable:
    with np.load(path) as data:
        if int(data["version"]) != TABLE_VERSION or str(data["grid_hash"]) != g.grid_hash:
            raise KineticError(f"scatter table {path} was built for another grid or version")
        return ScatterTable(grid_hash=str(data["grid_hash"]),
                            mode=StencilMode[str(data["mode"])],
                            size_of_grid=int(data["size_of_grid"]),
                            source=data["source"],
                            target=data["target"],
                            target_weights=data["target_weights"] if "target_weights" in data.files else None,
                            kernel=data["kernel"],
                            stats=_stats_from(data))


def build_tables(g: VelocityGrid,
                 mode: StencilMode = StencilMode.LATTICE,
                 cache_dir: str | None = None) -> CollisionTables:
    """
    Collision and scatter tables of a grid, read from the cache directory when present.

    :param g: velocity grid
    :param mode: stencil mode
    :param cache_dir: folder of cached tables, None disables caching
    :return: both tables
    """
    if cache_dir is None:
        return CollisionTables(build_collision_table(g, mode), build_scatter_table(g, mode))
    if not os.path.exists(cache_dir):
        os.makedirs(cache_dir)
    stem = os.path.join(cache_dir, f"tables-{g.grid_hash}-{mode.name.lower()}-v{TABLE_VERSION}")
    binary_path, scatter_path = stem + ".binary.npz", stem + ".scatter.npz"
    if os.path.exists(binary_path) and os.path.exists(scatter_path):
        logger.info(f"table cache hit: {stem}")
        return CollisionTables(load_collision_table(binary_path, g), load_scatter_table(scatter_path, g))
    logger.info(f"table cache miss: {stem}")
    tables = CollisionTables(build_collision_table(g, mode), build_scatter_table(g, mode))
    tables.binary.save(binary_path)
    tables.scatter.save(scatter_path)
    return tables
