from ._typing import HydroState, HydroTrajectory, StepControl
from .solver import hydro_step, hydro_solve, stability_bound, linear_mode_oracle, face_fluxes, regularity_norms
from .hilbert import hilbert_F1, compatibility_defect
