from ._typing import LinearizedOperator, NullBasis
from .assemble import boltzmann_matrix, scatter_matrix, symmetrize, assemble_L, scale_operator, OperatorFamily
from .nullspace import build_null_basis, project_null, cancellation_check
from .solver import ProjectedConjugateGradient, pseudo_inverse
from .spectrum import spectral_gap, eigenvalues, kernel_dimension, collision_frequency_bounds, export_spectrum
