import dataclasses
import hashlib
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import orjson

from .._typing import AngularRule, KineticError


class MomentWeight(Enum):
    """
    polynomial weight phi(v) of a velocity moment
    """
    MASS = 0
    MOMENTUM_X = 1
    MOMENTUM_Y = 2
    MOMENTUM_Z = 3
    ENERGY = 4
    HEAT_FLUX_X = 5
    HEAT_FLUX_Y = 6
    HEAT_FLUX_Z = 7

    def __str__(self):
        return self.name


@dataclass(frozen=True, eq=False)
class VelocityGrid:
    """
    Truncated uniform velocity lattice on [-v_max, v_max]^3 with midpoint weights.

    Nodes are stored in C order of their integer indices, flat index = (ix * n + iy) * n + iz.

    :param n_per_axis: nodes per axis, even
    :type n_per_axis: int
    :param v_max: truncation half width
    :type v_max: float
    :param angular_rule: quadrature rule on the sphere
    :type angular_rule: AngularRule
    :param angular_order: exactness degree of the angular rule
    :type angular_order: int
    :param nodes: node velocities, shape (N, 3)
    :type nodes: np.ndarray
    :param weights: quadrature weights h^3, shape (N,)
    :type weights: np.ndarray
    :param indices: integer lattice indices, shape (N, 3)
    :type indices: np.ndarray
    :param angular_nodes: unit vectors of the angular rule, shape (M, 3)
    :type angular_nodes: np.ndarray
    :param angular_weights: weights of the angular rule, sum to 4 pi
    :type angular_weights: np.ndarray
    :param directions: angular nodes with antipodes merged, shape (K, 3)
    :type directions: np.ndarray
    :param direction_weights: summed weights of merged directions
    :type direction_weights: np.ndarray
    """
    n_per_axis: int
    v_max: float
    angular_rule: AngularRule
    angular_order: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)
    angular_nodes: np.ndarray = field(repr=False)
    angular_weights: np.ndarray = field(repr=False)
    directions: np.ndarray = field(repr=False)
    direction_weights: np.ndarray = field(repr=False)

    # region property
    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def spacing(self) -> float:
        """
        lattice spacing h
        """
        return 2 * self.v_max / self.n_per_axis

    @property
    def speed_sq(self) -> np.ndarray:
        return np.sum(self.nodes ** 2, axis=1)

    @property
    def centered_indices(self) -> np.ndarray:
        """
        lattice coordinates relative to the origin, half integers
        """
        return self.indices - (self.n_per_axis - 1) / 2

    @property
    def grid_hash(self) -> str:
        key = orjson.dumps({"n": self.n_per_axis,
                            "v_max": repr(float(self.v_max)),
                            "rule": self.angular_rule.name,
                            "order": self.angular_order}, option=orjson.OPT_SORT_KEYS)
        return hashlib.sha256(key).hexdigest()[:16]

    # endregion

    def flat_index(self, idx: np.ndarray) -> np.ndarray:
        """
        flat node index from integer lattice indices of shape (..., 3)
        """
        n = self.n_per_axis
        return (idx[..., 0] * n + idx[..., 1]) * n + idx[..., 2]

    def scaled(self, factor: float) -> "VelocityGrid":
        """
        Same lattice with every velocity multiplied by factor, used for v = sqrt(T) xi rescaling.
        """
        if factor <= 0:
            raise KineticError("scale factor must be positive")
        return dataclasses.replace(self,
                                   v_max=self.v_max * factor,
                                   nodes=self.nodes * factor,
                                   weights=self.weights * factor ** 3)

    def to_dict(self) -> dict:
        return {"n_per_axis": self.n_per_axis,
                "v_max": self.v_max,
                "angular_rule": self.angular_rule.name,
                "angular_order": self.angular_order,
                "grid_hash": self.grid_hash,
                "nodes": self.nodes,
                "weights": self.weights,
                "angular_nodes": self.angular_nodes,
                "angular_weights": self.angular_weights}

    def save_json(self, path: str):
        with open(path, "wb") as outfile:
            outfile.write(orjson.dumps(self.to_dict(),
                                       option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY))

    def __str__(self):
        return f"VelocityGrid(n={self.n_per_axis}, v_max={self.v_max}, rule={self.angular_rule}, " \
               f"order={self.angular_order}, hash={self.grid_hash})"


@dataclass(frozen=True)
class SpatialGrid:
    """
    Periodic cell grid on the unit torus.

    :param dim: spatial dimension, 1, 2 or 3
    :type dim: int
    :param n_cells: cells per axis
    :type n_cells: int
    :param length: torus side length
    :type length: float
    """
    dim: int = 1
    n_cells: int = 64
    length: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise KineticError(f"spatial dimension must be 1, 2 or 3, got {self.dim}")
        if self.n_cells < 1:
            raise KineticError("need at least one cell per axis")

    # region property
    @property
    def shape(self) -> tuple:
        return (self.n_cells,) * self.dim

    @property
    def total_cells(self) -> int:
        return self.n_cells ** self.dim

    @property
    def dx(self) -> float:
        return self.length / self.n_cells

    @property
    def cell_volume(self) -> float:
        return self.dx ** self.dim

    @property
    def axes(self) -> tuple:
        return tuple(range(self.dim))

    # endregion

    def centers(self) -> np.ndarray:
        """
        cell centers, shape (dim, *shape)
        """
        x = (np.arange(self.n_cells) + 0.5) * self.dx
        return np.array(np.meshgrid(*([x] * self.dim), indexing="ij"))

    def wrap(self, index: int) -> int:
        return index % self.n_cells

    def shift(self, values: np.ndarray, offset: int, axis: int) -> np.ndarray:
        """
        periodic neighbour access: result[i] = values[i + offset] along a spatial axis
        """
        return np.roll(values, -offset, axis=axis)

    def gradient(self, values: np.ndarray) -> np.ndarray:
        """
        centered difference gradient of a cell field, shape (dim, *shape)
        """
        return np.array([(self.shift(values, 1, a) - self.shift(values, -1, a)) / (2 * self.dx)
                         for a in self.axes])

    def second_derivatives(self, values: np.ndarray) -> np.ndarray:
        return np.array([(self.shift(values, 1, a) - 2 * values + self.shift(values, -1, a)) / self.dx ** 2
                         for a in self.axes])

    def wavenumbers(self) -> np.ndarray:
        """
        angular wavenumbers of the discrete Fourier modes, shape (dim, *shape)
        """
        k = 2 * np.pi * np.fft.fftfreq(self.n_cells, d=self.dx)
        return np.array(np.meshgrid(*([k] * self.dim), indexing="ij"))

    def integrate(self, values: np.ndarray) -> float | np.ndarray:
        """
        sum over cells times cell volume, leading axes are the spatial ones
        """
        return np.sum(values, axis=self.axes) * self.cell_volume

    def l2_norm(self, values: np.ndarray) -> float:
        return float(np.sqrt(np.sum(values ** 2) * self.cell_volume))


@dataclass
class MacroFields:
    """
    hydrodynamic fields, every array has the same leading (cell) shape

    :param rho: density
    :type rho: np.ndarray
    :param u: bulk velocity, trailing axis of length 3
    :type u: np.ndarray
    :param T: temperature
    :type T: np.ndarray
    """
    rho: np.ndarray
    u: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        self.T = np.asarray(self.T, dtype=float)
        self.u = np.zeros(self.rho.shape + (3,)) if self.u is None else np.asarray(self.u, dtype=float)
        if self.u.shape != self.rho.shape + (3,) or self.T.shape != self.rho.shape:
            raise KineticError(f"inconsistent macro field shapes {self.rho.shape}, {self.u.shape}, {self.T.shape}")

    def validate(self):
        if not (np.all(np.isfinite(self.rho)) and np.all(np.isfinite(self.T)) and np.all(np.isfinite(self.u))):
            raise KineticError("macro fields are not finite")
        if np.any(self.rho <= 0):
            raise KineticError(f"non-positive density, min rho = {np.min(self.rho):.6g}")
        if np.any(self.T <= 0):
            raise KineticError(f"non-positive temperature, min T = {np.min(self.T):.6g}")
        return self

    @property
    def energy(self) -> np.ndarray:
        """
        total energy density 1/2 int |v|^2 F = 3/2 rho T + 1/2 rho |u|^2
        """
        return 1.5 * self.rho * self.T + 0.5 * self.rho * np.sum(self.u ** 2, axis=-1)

    def cell(self, index) -> "MacroFields":
        return MacroFields(self.rho[index], self.u[index], self.T[index])


@dataclass
class DistributionField:
    """
    Phase space density F(cell, node) at one macroscopic time.

    :param values: shape (*spatial shape, N)
    :type values: np.ndarray
    :param epsilon: Knudsen number of the run, 0 for a hydrodynamic construct
    :type epsilon: float
    :param time: macroscopic time
    :type time: float
    """
    values: np.ndarray
    epsilon: float = 0.0
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise KineticError(f"distribution field at t={self.time} is not finite")

    @property
    def spatial_shape(self) -> tuple:
        return self.values.shape[:-1]

    def totals(self, g: VelocityGrid, grid: SpatialGrid) -> tuple[float, float]:
        """
        total mass and total energy int int (1, |v|^2/2) F
        """
        mass = float(np.sum(self.values @ g.weights) * grid.cell_volume)
        energy = float(np.sum(self.values @ (0.5 * g.weights * g.speed_sq)) * grid.cell_volume)
        return mass, energy

    def replace(self, values: np.ndarray, time: float | None = None) -> "DistributionField":
        return DistributionField(values, self.epsilon, self.time if time is None else time)
