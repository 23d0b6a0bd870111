from dataclasses import dataclass, field
from typing import List

import numpy as np
import orjson
import pandas as pd

from .._typing import TransportScheme, Splitting, CollisionModel, Invariants, KineticError
from ..grid import DistributionField, MacroFields, VelocityGrid, SpatialGrid


@dataclass
class KineticParam:
    """
    numerical scheme of the kinetic solver

    :param transport: free streaming discretization
    :type transport: TransportScheme
    :param splitting: transport / collision splitting
    :type splitting: Splitting
    :param theta: collision implicitness, 1 backward euler, 0.5 trapezoidal
    :type theta: float
    :param collision_model: nonlinear or linearized collision operator
    :type collision_model: CollisionModel
    :param cfl: dt = cfl * epsilon * dx / v_max
    :type cfl: float
    :param tol: penalized iteration tolerance relative to max |F|
    :type tol: float
    :param max_iter: penalized iteration cap
    :type max_iter: int
    :param invariants: moments restored after every collision solve
    :type invariants: Invariants
    :param clamp_tol: largest acceptable clamped mass fraction
    :type clamp_tol: float
    :param n_temperatures: temperature ladder of the operator family
    :type n_temperatures: int
    """
    transport: TransportScheme = TransportScheme.UPWIND
    splitting: Splitting = Splitting.LIE
    theta: float = 1.0
    collision_model: CollisionModel = CollisionModel.NONLINEAR
    cfl: float = 0.9
    tol: float = 1e-9
    max_iter: int = 100
    invariants: Invariants = Invariants.MASS_ENERGY
    clamp_tol: float = 1e-6
    n_temperatures: int = 5

    def __post_init__(self):
        if not 0.5 <= self.theta <= 1.0:
            raise KineticError(f"theta must lie in [0.5, 1], got {self.theta}")
        if self.cfl <= 0:
            raise KineticError(f"cfl must be positive, got {self.cfl}")

    def to_dict(self) -> dict:
        return {"transport": self.transport.name,
                "splitting": self.splitting.name,
                "theta": self.theta,
                "collision_model": self.collision_model.name,
                "cfl": self.cfl,
                "tol": self.tol,
                "max_iter": self.max_iter,
                "invariants": self.invariants.name}


@dataclass
class StepDiagnostics:
    iterations: int = 0
    residual: float = 0.0
    clamped_mass_fraction: float = 0.0


@dataclass
class KineticTrajectory:
    """
    Snapshots and macro field series of one kinetic run.

    :param snapshots: distribution fields at the sample times
    :param macro: macro fields at the sample times
    :param errors: error functional against the hydro solution at the sample times, empty without hydro
    :param steps: time steps taken
    :param dt: nominal time step
    :param max_iterations: largest penalized iteration count of any step
    :param clamped_mass_fraction: largest clamped mass fraction of any step
    :param mass_drift: relative total mass change
    :param energy_drift: relative total energy change
    :param wall_time: seconds
    """
    snapshots: List[DistributionField] = field(default_factory=list)
    macro: List[MacroFields] = field(default_factory=list)
    errors: List[float] = field(default_factory=list)
    steps: int = 0
    dt: float = 0.0
    max_iterations: int = 0
    clamped_mass_fraction: float = 0.0
    mass_drift: float = 0.0
    energy_drift: float = 0.0
    wall_time: float = 0.0

    @property
    def final(self) -> DistributionField:
        return self.snapshots[-1]

    @property
    def times(self) -> List[float]:
        return [s.time for s in self.snapshots]

    def macro_dataframe(self) -> pd.DataFrame:
        frames = []
        for snapshot, m in zip(self.snapshots, self.macro):
            frame = pd.DataFrame({"time": snapshot.time,
                                  "cell": np.arange(m.rho.size),
                                  "rho": m.rho.ravel(),
                                  "u_x": m.u[..., 0].ravel(),
                                  "u_y": m.u[..., 1].ravel(),
                                  "u_z": m.u[..., 2].ravel(),
                                  "T": m.T.ravel()})
            frames.append(frame)
        return pd.concat(frames, ignore_index=True)

    def save_macro_csv(self, path: str):
        self.macro_dataframe().to_csv(path, index=False)


def save_snapshot(path: str, F: DistributionField, g: VelocityGrid, grid: SpatialGrid, metadata: dict | None = None):
    """
    npz payload with a json header holding both grids, epsilon, time and the caller's metadata
    """
    header = {"velocity_grid": {k: v for k, v in g.to_dict().items() if k in ("n_per_axis", "v_max", "angular_rule",
                                                                           "angular_order", "grid_hash")},
              "spatial_grid": {"dim": grid.dim, "n_cells": grid.n_cells, "length": grid.length},
              "epsilon": F.epsilon,
              "time": F.time}
    header.update(metadata or {})
    np.savez_compressed(path, header=np.frombuffer(orjson.dumps(header), dtype=np.uint8), values=F.values)


def load_snapshot(path: str) -> (DistributionField, dict):
    with np.load(path) as payload:
        header = orjson.loads(payload["header"].tobytes())
        values = payload["values"]
    return DistributionField(values, header["epsilon"], header["time"]), header
