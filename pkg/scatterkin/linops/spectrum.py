import logging

import numpy as np
import orjson
import scipy.linalg

from ._typing import LinearizedOperator, NullBasis
from .._typing import KineticError
from ..grid import VelocityGrid

logger = logging.getLogger(__name__)

KERNEL_THRESHOLD = 1e-6


def spectral_gap(L: LinearizedOperator, basis: NullBasis) -> tuple[float, float]:
    """
    Smallest lambda with (f, Lf) >= lambda |(I-P)f|_nu^2, and lambda_d = (psi_x, L psi_x).

    The generalized problem Q^T L Q y = lambda Q^T diag(nu) Q y is solved on an orthonormal
    basis Q of the complement of span{psi_m, psi_e}, taken from a full QR of the null modes.

    :return: (lambda, lambda_d)
    """
    root_w = np.sqrt(basis.weights)
    modes = (basis.modes * root_w).T
    q, _ = scipy.linalg.qr(modes, mode="full")
    complement = q[:, modes.shape[1]:]
    # flat coordinates: f = y / sqrt(w), uniform weights keep L symmetric
    restricted = complement.T @ L.matrix @ complement
    weight = (complement * L.nu[:, None]).T @ complement
    try:
        smallest = scipy.linalg.eigh(restricted, weight, eigvals_only=True, subset_by_index=[0, 0])
    except (scipy.linalg.LinAlgError, ValueError) as e:
        raise KineticError(f"eigensolver failed on the restricted operator: {e}")
    psi_x = basis.psi_momentum[0]
    lambda_d = float(np.sum(basis.weights * psi_x * L.apply(psi_x)))
    return float(smallest[0]), lambda_d


def eigenvalues(L: LinearizedOperator, part: str = "full") -> np.ndarray:
    """
    ascending eigenvalues of L, of its Boltzmann part (part="b") or scatterer part (part="d")
    """
    match part:
        case "full":
            matrix = L.matrix
        case "b":
            matrix = L.matrix_b
        case "d":
            matrix = L.matrix_d
        case _:
            raise KineticError(f"unknown operator part {part}, allowed: full, b, d")
    try:
        return scipy.linalg.eigvalsh(matrix)
    except scipy.linalg.LinAlgError as e:
        raise KineticError(f"eigensolver failed: {e}")


def kernel_dimension(L: LinearizedOperator, threshold: float = KERNEL_THRESHOLD, part: str = "full") -> int:
    """
    number of eigenvalues with magnitude below threshold
    """
    return int(np.sum(np.abs(eigenvalues(L, part)) < threshold))


def collision_frequency_bounds(L: LinearizedOperator, g: VelocityGrid) -> tuple[float, float]:
    """
    fitted nu_0, nu_1 with nu_0 <v> <= nu <= nu_1 <v>, <v> = sqrt(1 + |v|^2)
    """
    ratio = L.nu / np.sqrt(1 + g.speed_sq)
    return float(np.min(ratio)), float(np.max(ratio))


def export_spectrum(L: LinearizedOperator, path: str):
    """
    eigenvalue list keyed by grid hash and (rho, T, alpha), for regression pinning
    """
    values = eigenvalues(L)
    payload = {"grid_hash": L.grid_hash,
               "rho": L.rho,
               "T": L.T,
               "alpha": L.alpha,
               "symmetry_defect": L.symmetry_defect,
               "kernel_dimension": int(np.sum(np.abs(values) < KERNEL_THRESHOLD)),
               "eigenvalues": values}
    with open(path, "wb") as outfile:
        outfile.write(orjson.dumps(payload, option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY))
    logger.info(f"spectrum of {L} written to {path}")
