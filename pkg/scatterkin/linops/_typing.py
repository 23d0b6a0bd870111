from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class NullBasis:
    """
    Orthonormal collision invariants of L in the weighted inner product (f, g) = sum w f g.

    :param psi_m: mass mode
    :type psi_m: np.ndarray
    :param psi_e: energy mode
    :type psi_e: np.ndarray
    :param psi_momentum: momentum modes, shape (3, N), null for the Boltzmann part only
    :type psi_momentum: np.ndarray
    :param weights: quadrature weights of the inner product
    :type weights: np.ndarray
    """
    psi_m: np.ndarray = field(repr=False)
    psi_e: np.ndarray = field(repr=False)
    psi_momentum: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    rho: float = 1.0
    T: float = 1.0

    @property
    def modes(self) -> np.ndarray:
        """
        rows psi_m, psi_e
        """
        return np.array([self.psi_m, self.psi_e])

    def inner(self, f: np.ndarray, g: np.ndarray) -> np.ndarray:
        return np.sum(self.weights * f * g, axis=-1)

    def norm(self, f: np.ndarray) -> np.ndarray:
        return np.sqrt(self.inner(f, f))

    def projector_matrix(self) -> np.ndarray:
        """
        dense matrix of P acting on node values
        """
        modes = self.modes
        return modes.T @ (modes * self.weights)


@dataclass(frozen=True, eq=False)
class LinearizedOperator:
    """
    Symmetrized linearized operator f -> mu^(-1/2) L(sqrt(mu) f) at fixed (rho, T, alpha).

    :param matrix: symmetric matrix of L = L_B + L_d
    :type matrix: np.ndarray
    :param matrix_b: Boltzmann part
    :type matrix_b: np.ndarray
    :param matrix_d: scatterer part, alpha included
    :type matrix_d: np.ndarray
    :param nu_b: Boltzmann collision frequency, diagonal loss part of L_B
    :type nu_b: np.ndarray
    :param nu_d: scatterer collision frequency, alpha included
    :type nu_d: np.ndarray
    :param sqrt_mu: square root of the Maxwellian it is linearized around
    :type sqrt_mu: np.ndarray
    :param weights: velocity quadrature weights
    :type weights: np.ndarray
    :param rho: density
    :param T: temperature
    :param alpha: scatterer density
    :param symmetry_defect: max |A - A^T| / max |A| before symmetrization
    :param grid_hash: grid the matrix lives on
    """
    matrix: np.ndarray = field(repr=False)
    matrix_b: np.ndarray = field(repr=False)
    matrix_d: np.ndarray = field(repr=False)
    nu_b: np.ndarray = field(repr=False)
    nu_d: np.ndarray = field(repr=False)
    sqrt_mu: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    rho: float
    T: float
    alpha: float
    symmetry_defect: float
    grid_hash: str

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def nu(self) -> np.ndarray:
        """
        collision frequency nu = nu_B + alpha nu_d
        """
        return self.nu_b + self.nu_d

    def apply(self, f: np.ndarray) -> np.ndarray:
        """
        L f over the last axis
        """
        return f @ self.matrix

    def quadratic_form(self, f: np.ndarray, g: np.ndarray | None = None) -> float:
        g = f if g is None else g
        return float(np.sum(self.weights * f * self.apply(g)))

    def __str__(self):
        return f"LinearizedOperator(rho={self.rho:.6g}, T={self.T:.6g}, alpha={self.alpha:.6g}, " \
               f"N={self.size}, defect={self.symmetry_defect:.2e})"
