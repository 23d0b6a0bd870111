import logging

import numpy as np
import scipy.linalg

from ._typing import KineticParam, StepDiagnostics
from .._typing import KineticError, ConvergenceError, CollisionModel, Invariants
from ..collision import CollisionTables, q_b, q_d, conserve_project
from ..grid import VelocityGrid, MacroFields, maxwellian_values, macro_from_distribution
from ..linops import OperatorFamily, boltzmann_matrix, scatter_matrix, symmetrize

logger = logging.getLogger(__name__)


def clamp_positive(values: np.ndarray, invariants: Invariants, g: VelocityGrid) -> tuple[np.ndarray, float]:
    """
    Zero the negative nodes, then restore the selected moments with a correction proportional to the
    clamped field, so clamped nodes stay at zero and the others keep their sign while the relative
    correction is below one.

    :param values: shape (cells, N)
    :return: nonnegative field and the largest clamped mass fraction over cells
    """
    negative = values < 0
    if not np.any(negative):
        return values, 0.0
    mass = values @ g.weights
    fraction = float(np.max((np.where(negative, -values, 0.0) @ g.weights) / mass))
    clipped = np.maximum(values, 0.0)
    fixed = values + conserve_project(clipped - values, invariants, g, mu_ref=clipped)
    if np.any(fixed < 0):
        logger.warning(f"moment restoration left negative values, min {np.min(fixed):.3e}, clamped again")
        fixed = np.maximum(fixed, 0.0)
    return fixed, fraction


class Penalizer:
    """
    Linearized collision operator at a reference state, diagonalized once.

    In the F representation P = mu^(1/2) V diag(lam) V^T mu^(-1/2), so (I + c P)^-1 costs two
    products with V for any c >= 0.

    :param matrix_f: F representation of the reference operator
    :param mu: reference Maxwellian
    """

    def __init__(self, matrix_f: np.ndarray, mu: np.ndarray):
        self.matrix_f = matrix_f
        self.sqrt_mu = np.sqrt(mu)
        symmetric, self.symmetry_defect = symmetrize(matrix_f, self.sqrt_mu)
        try:
            self.eigenvalues, self.eigenvectors = scipy.linalg.eigh(symmetric)
        except scipy.linalg.LinAlgError as e:
            raise KineticError(f"penalizer diagonalization failed: {e}")

    def apply(self, values: np.ndarray) -> np.ndarray:
        """
        P F over the last axis
        """
        return values @ self.matrix_f.T

    def resolve(self, values: np.ndarray, c: float) -> np.ndarray:
        """
        (I + c P)^-1 F over the last axis
        """
        coef = (values / self.sqrt_mu) @ self.eigenvectors
        coef /= 1 + c * self.eigenvalues
        return (coef @ self.eigenvectors.T) * self.sqrt_mu


class CollisionSolver:
    """
    Implicit collision step F = F* + tau (1 - theta) R(F*) + tau theta R(F), tau = dt / epsilon^2.

    The penalized fixed point iteration
        F_(k+1) = (I + tau theta P)^-1 [F* + tau (1 - theta) R(F*) + tau theta (R(F_k) + P F_k)]
    converges fast when P is close to -dR/dF, which holds near local equilibrium.

    :param g: velocity grid
    :param tables: collision tables of g
    :param alpha: scatterer density
    :param param: scheme parameters
    :param reference: (rho, T) of the penalizer
    :param family: operator family, required for the linearized model
    """

    def __init__(self,
                 g: VelocityGrid,
                 tables: CollisionTables,
                 alpha: float,
                 param: KineticParam,
                 reference: tuple[float, float],
                 family: OperatorFamily | None = None):
        self.logger = logging.getLogger(__name__)
        if alpha <= 0:
            raise KineticError(f"alpha must be positive, got {alpha}")
        if param.collision_model == CollisionModel.LINEARIZED and family is None:
            raise KineticError("linearized collision model needs an operator family")
        self.g = g
        self.tables = tables
        self.alpha = float(alpha)
        self.param = param
        self.family = family
        rho_ref, T_ref = reference
        mu_ref = maxwellian_values(rho_ref, None, T_ref, g, warn=False)
        if family is not None:
            matrix_f = family.f_matrix(rho_ref, T_ref)
        else:
            boltzmann, _ = boltzmann_matrix(mu_ref, tables.binary, g.size)
            scatter, _ = scatter_matrix(tables.scatter)
            matrix_f = boltzmann + self.alpha * scatter
        self.penalizer = Penalizer(matrix_f, mu_ref)
        self.mu_ref = mu_ref

    def _nonlinear(self, values: np.ndarray) -> np.ndarray:
        return q_b(values, values, self.tables.binary, self.g) + self.alpha * q_d(values, self.tables.scatter, self.g)

    def _linearized(self, values: np.ndarray, targets: np.ndarray, macro: MacroFields) -> np.ndarray:
        """
        -L_c (F - M_c) per cell
        """
        return -self.family.apply(values - targets, macro.rho, macro.T)

    def solve(self, values: np.ndarray, dt: float, epsilon: float) -> (np.ndarray, StepDiagnostics):
        """
        :param values: post transport field, shape (cells, N)
        :return: post collision field and diagnostics
        """
        param = self.param
        tau = dt / epsilon ** 2
        theta = param.theta
        macro = macro_from_distribution(values, self.g)
        # relaxation target keeps mass and energy with zero bulk velocity
        target_T = macro.T + np.sum(macro.u ** 2, axis=-1) / 3
        target_macro = MacroFields(macro.rho, None, target_T)
        targets = maxwellian_values(target_macro.rho, None, target_T, self.g, warn=False)
        match param.collision_model:
            case CollisionModel.NONLINEAR:
                rate = self._nonlinear
            case CollisionModel.LINEARIZED:
                rate = lambda f: self._linearized(f, targets, target_macro)
            case _:
                raise KineticError(f"unknown collision model {param.collision_model}")

        explicit = values + tau * (1 - theta) * rate(values) if theta < 1 else values
        scale = max(float(np.max(np.abs(values))), 1e-300)
        current = values
        diagnostics = StepDiagnostics()
        for iteration in range(1, param.max_iter + 1):
            forcing = rate(current) + self.penalizer.apply(current)
            updated = self.penalizer.resolve(explicit + tau * theta * forcing, tau * theta)
            change = float(np.max(np.abs(updated - current))) / scale
            current = updated
            diagnostics.iterations, diagnostics.residual = iteration, change
            if change <= param.tol:
                break
        else:
            raise ConvergenceError("penalized collision iteration did not converge", param.max_iter,
                                   diagnostics.residual)
        increment = conserve_project(current - values, param.invariants, self.g, mu_ref=targets)
        result = values + increment
        return self._clamp(result, diagnostics)

    def _clamp(self, values: np.ndarray, diagnostics: StepDiagnostics):
        fixed, diagnostics.clamped_mass_fraction = clamp_positive(values, self.param.invariants, self.g)
        if diagnostics.clamped_mass_fraction == 0.0:
            return fixed, diagnostics
        if diagnostics.clamped_mass_fraction > self.param.clamp_tol:
            self.logger.warning(f"clamped mass fraction {diagnostics.clamped_mass_fraction:.3e} "
                                f"exceeds {self.param.clamp_tol:.1e}")
        else:
            self.logger.debug(f"clamped mass fraction {diagnostics.clamped_mass_fraction:.3e}")
        return fixed, diagnostics
