from dataclasses import dataclass, field
from typing import List

import numpy as np
import pandas as pd

from .._typing import KineticError
from ..grid import SpatialGrid


@dataclass
class HydroState:
    """
    Density and temperature on the spatial grid.

    :param rho: density per cell
    :type rho: np.ndarray
    :param T: temperature per cell
    :type T: np.ndarray
    :param time: macroscopic time
    :type time: float
    """
    rho: np.ndarray
    T: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        self.T = np.asarray(self.T, dtype=float)
        if self.rho.shape != self.T.shape:
            raise KineticError(f"rho and T shapes differ: {self.rho.shape} vs {self.T.shape}")

    @property
    def e(self) -> np.ndarray:
        """
        internal energy density 3/2 rho T
        """
        return 1.5 * self.rho * self.T

    def validate(self):
        if not (np.all(np.isfinite(self.rho)) and np.all(np.isfinite(self.T))):
            raise KineticError(f"hydro state at t={self.time} is not finite")
        if np.any(self.rho <= 0) or np.any(self.T <= 0):
            raise KineticError(f"hydro state at t={self.time} is not positive, "
                               f"min rho = {np.min(self.rho):.6g}, min T = {np.min(self.T):.6g}")
        return self

    def totals(self, grid: SpatialGrid) -> tuple[float, float]:
        """
        total mass and total internal energy
        """
        return float(grid.integrate(self.rho)), float(grid.integrate(self.e))

    def envelope(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return (float(np.min(self.rho)), float(np.max(self.rho))), (float(np.min(self.T)), float(np.max(self.T)))

    @staticmethod
    def from_conserved(rho: np.ndarray, e: np.ndarray, time: float) -> "HydroState":
        return HydroState(rho, 2 * e / (3 * rho), time)


@dataclass
class StepControl:
    """
    time step control of hydro_solve

    :param cfl: fraction of the explicit stability bound
    :type cfl: float
    :param max_halvings: retries with halved dt after a rejected step
    :type max_halvings: int
    :param sample_times: times the trajectory must hit exactly, t_end always included
    :type sample_times: list
    :param snapshot_every: also keep every n-th step, 0 for none
    :type snapshot_every: int
    """
    cfl: float = 0.9
    max_halvings: int = 10
    sample_times: List[float] = field(default_factory=list)
    snapshot_every: int = 0


@dataclass
class HydroTrajectory:
    """
    sampled states of a hydro run with conservation and regularity diagnostics

    :param states: sampled states, first is the initial state
    :param gradient_times: time of every step
    :param gradient_norms: |grad rho|_2 + |grad T|_2 after every step
    :param sobolev_bound: max over time of the summed norms of first and second differences of rho and T
    :param mass_drift: relative total mass change over the run
    :param energy_drift: relative total energy change over the run
    :param steps: accepted steps
    :param rejected: rejected steps
    """
    states: List[HydroState] = field(default_factory=list)
    gradient_times: List[float] = field(default_factory=list)
    gradient_norms: List[float] = field(default_factory=list)
    sobolev_bound: float = 0.0
    mass_drift: float = 0.0
    energy_drift: float = 0.0
    steps: int = 0
    rejected: int = 0

    @property
    def final(self) -> HydroState:
        return self.states[-1]

    def at(self, t: float, tol: float = 1e-12) -> HydroState:
        for state in self.states:
            if abs(state.time - t) <= tol * max(1.0, abs(t)):
                return state
        raise KineticError(f"no sampled state at t={t}")

    def to_dataframe(self) -> pd.DataFrame:
        frames = []
        for state in self.states:
            frames.append(pd.DataFrame({"time": state.time,
                                        "cell": np.arange(state.rho.size),
                                        "rho": state.rho.ravel(),
                                        "T": state.T.ravel(),
                                        "e": state.e.ravel()}))
        return pd.concat(frames, ignore_index=True)

    def save_csv(self, path: str):
        self.to_dataframe().to_csv(path, index=False)
