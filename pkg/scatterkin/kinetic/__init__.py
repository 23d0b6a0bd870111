from ._typing import KineticParam, KineticTrajectory, StepDiagnostics, save_snapshot, load_snapshot
from .streaming import upwind_transport, spectral_transport, free_streaming, max_speed
from .relaxation import Penalizer, CollisionSolver, clamp_positive
from .solver import KineticContext, kinetic_step, kinetic_solve, error_functional, well_prepared_initial
from ..grid import DistributionField
