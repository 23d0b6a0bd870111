__version__ = "0.1.0"

from ._typing import KineticError, ConvergenceError, StepRejectedError, ConfigError, AngularRule, StencilMode, \
    Invariants, TransportScheme, Splitting, CollisionModel, CheckGroup, CheckResult
from .grid import VelocityGrid, SpatialGrid, MacroFields, DistributionField, build_velocity_grid, maxwellian, \
    maxwellian_values, moment, macro_from_distribution
from .collision import build_tables, q_b, q_d, conserve_project
from .linops import LinearizedOperator, assemble_L, build_null_basis, pseudo_inverse, spectral_gap, OperatorFamily
from .transport import TransportCoefficients, TransportTable, compute_coefficients, tabulate
from .hydro import HydroState, hydro_solve, hydro_step
from .kinetic import KineticParam, KineticContext, kinetic_step, kinetic_solve, well_prepared_initial, \
    error_functional
from .config import RunParam, convert_config
from .core import Harness, SuiteEvaluator, ConvergenceReport, fit_convergence_order
