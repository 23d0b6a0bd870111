from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse

from .._typing import StencilMode

TABLE_VERSION = 3


def gather(values: np.ndarray, idx: np.ndarray, wts: np.ndarray | None) -> np.ndarray:
    """
    values at stencil targets, along the last axis of values
    """
    if wts is None:
        return values[..., idx]
    return np.sum(values[..., idx] * wts, axis=-1)


@dataclass(frozen=True, eq=False)
class CollisionTable:
    """
    Binary hard sphere collisions on a velocity grid.

    Every entry is an unordered node pair (v, w) with one merged direction.
    Post-collision velocities v' = v - [(v-w).w]w, w' = w + [(v-w).w]w are given as
    stencils; in lattice mode the stencil is a single node and weights are None.

    :param grid_hash: hash of the velocity grid the table was built on
    :type grid_hash: str
    :param mode: stencil mode
    :type mode: StencilMode
    :param pair_v: index of v
    :type pair_v: np.ndarray
    :param pair_w: index of w
    :type pair_w: np.ndarray
    :param post_v: stencil nodes of v', shape (M,) or (M, 8)
    :type post_v: np.ndarray
    :param post_w: stencil nodes of w'
    :type post_w: np.ndarray
    :param post_v_weights: stencil weights of v', None in lattice mode
    :type post_v_weights: np.ndarray
    :param post_w_weights: stencil weights of w', None in lattice mode
    :type post_w_weights: np.ndarray
    :param kernel: angular weight * h^3 * |(v-w).w| * direction factor
    :type kernel: np.ndarray
    :param stats: counts of kept, truncated and off-lattice collisions
    :type stats: dict
    """
    grid_hash: str
    mode: StencilMode
    pair_v: np.ndarray = field(repr=False)
    pair_w: np.ndarray = field(repr=False)
    post_v: np.ndarray = field(repr=False)
    post_w: np.ndarray = field(repr=False)
    post_v_weights: np.ndarray | None = field(repr=False)
    post_w_weights: np.ndarray | None = field(repr=False)
    kernel: np.ndarray = field(repr=False)
    stats: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.kernel.shape[0]

    @property
    def nbytes(self) -> int:
        arrays = [self.pair_v, self.pair_w, self.post_v, self.post_w, self.kernel,
                  self.post_v_weights, self.post_w_weights]
        return sum(a.nbytes for a in arrays if a is not None)

    def chunks(self, chunk_size: int):
        """
        yield (slice) over the collision list
        """
        for start in range(0, self.size, chunk_size):
            yield slice(start, min(start + chunk_size, self.size))

    def save(self, path: str):
        payload = {"version": TABLE_VERSION, "grid_hash": self.grid_hash, "mode": self.mode.name,
                   "pair_v": self.pair_v, "pair_w": self.pair_w, "post_v": self.post_v, "post_w": self.post_w,
                   "kernel": self.kernel, "stats_keys": np.array(list(self.stats.keys())),
                   "stats_values": np.array(list(self.stats.values()), dtype=float)}
        if self.post_v_weights is not None:
            payload["post_v_weights"] = self.post_v_weights
            payload["post_w_weights"] = self.post_w_weights
        np.savez(path, **payload)


@dataclass(frozen=True, eq=False)
class ScatterTable:
    """
    Specular reflections v -> v - 2(v.w)w off the fixed scatterers.

    :param grid_hash: hash of the velocity grid
    :type grid_hash: str
    :param mode: stencil mode
    :type mode: StencilMode
    :param source: node index of v
    :type source: np.ndarray
    :param target: stencil nodes of the reflected velocity
    :type target: np.ndarray
    :param target_weights: stencil weights, None in lattice mode
    :type target_weights: np.ndarray
    :param kernel: angular weight * |v.w| * direction factor
    :type kernel: np.ndarray
    :param stats: counts, including energy shell flagged stencils
    :type stats: dict
    """
    grid_hash: str
    mode: StencilMode
    size_of_grid: int
    source: np.ndarray = field(repr=False)
    target: np.ndarray = field(repr=False)
    target_weights: np.ndarray | None = field(repr=False)
    kernel: np.ndarray = field(repr=False)
    stats: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.kernel.shape[0]

    def matrix(self) -> sparse.csr_matrix:
        """
        sparse matrix M with q_d(F) = M F
        """
        n = self.size_of_grid
        if self.target_weights is None:
            rows, cols, vals = self.source, self.target, self.kernel
        else:
            width = self.target.shape[1]
            rows = np.repeat(self.source, width)
            cols = self.target.ravel()
            vals = (self.kernel[:, None] * self.target_weights).ravel()
        gain = sparse.coo_matrix((vals, (rows, cols)), shape=(n, n))
        loss = sparse.coo_matrix((-self.kernel, (self.source, self.source)), shape=(n, n))
        return (gain + loss).tocsr()

    def save(self, path: str):
        payload = {"version": TABLE_VERSION, "grid_hash": self.grid_hash, "mode": self.mode.name,
                   "size_of_grid": self.size_of_grid, "source": self.source, "target": self.target,
                   "kernel": self.kernel, "stats_keys": np.array(list(self.stats.keys())),
                   "stats_values": np.array(list(self.stats.values()), dtype=float)}
        if self.target_weights is not None:
            payload["target_weights"] = self.target_weights
        np.savez(path, **payload)


@dataclass(frozen=True, eq=False)
class CollisionTables:
    """
    both tables of one grid, what most operations take as `tables`
    """
    binary: CollisionTable
    scatter: ScatterTable

    @property
    def grid_hash(self) -> str:
        return self.binary.grid_hash
