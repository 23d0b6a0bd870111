from ._typing import TransportCoefficients, TransportTable, TABLE_COLUMNS, SIGN_CONVENTION
from .coefficients import compute_coefficients, scaled_coefficients, flux_matrices, onsager_matrix, \
    displayed_onsager, fluxes_gradient_form, fluxes_onsager_form, thermodynamic_forces
from .table import tabulate
