import logging

import numpy as np

from ._typing import TransportCoefficients
from .._typing import KineticError
from ..grid import VelocityGrid
from ..linops import LinearizedOperator, NullBasis, build_null_basis, pseudo_inverse

logger = logging.getLogger(__name__)

RECIPROCITY_TOL = 1e-4


def _isotropic(tensor: np.ndarray) -> tuple[float, float]:
    """
    mean diagonal, and the larger of off-diagonal size and diagonal spread relative to it
    """
    diagonal = np.diag(tensor)
    mean = float(np.mean(diagonal))
    off = tensor - np.diag(diagonal)
    scale = max(abs(mean), 1e-300)
    return mean, float(max(np.max(np.abs(off)), np.max(diagonal) - np.min(diagonal)) / scale)


def flux_matrices(H: float, H_prime: float, H1_prime: float, rho: float, T: float) -> (np.ndarray, np.ndarray):
    """
    :return: diffusion matrix D for (grad rho/rho, grad T/T) and parabolic matrix D C for (grad rho, grad e)
    """
    diffusion = np.array([[H, H_prime],
                          [T * (H_prime + 1.5 * H), T * (H1_prime + 1.5 * H_prime)]])
    e = 1.5 * rho * T
    change = np.array([[1 / rho, 0.0],
                       [-1 / rho, 1 / e]])
    return diffusion, diffusion @ change


def onsager_matrix(H: float, H_prime_a: float, H_prime_b: float, H1_prime: float, T: float) -> np.ndarray:
    """
    coefficients of the forces (grad log z, -grad 1/T) in the (rho, e) fluxes
    """
    H_prime = 0.5 * (H_prime_a + H_prime_b)
    return np.array([[H, T * (H_prime_b + 1.5 * H)],
                     [T * (H_prime_a + 1.5 * H), T ** 2 * (H1_prime + 3 * H_prime + 2.25 * H)]])


def displayed_onsager(H: float, H_prime: float, H1_prime: float, T: float) -> np.ndarray:
    """
    the closed forms H = -L_rr, T(H' + 3/2 H) = -L_re, T^2(H'1 - 9/4 H) = L_ee as usually written
    """
    cross = -T * (H_prime + 1.5 * H)
    return np.array([[-H, cross], [cross, T ** 2 * (H1_prime - 2.25 * H)]])


def compute_coefficients(rho: float,
                         T: float,
                         alpha: float,
                         L: LinearizedOperator,
                         g: VelocityGrid,
                         basis: NullBasis | None = None,
                         method: str = "cg") -> TransportCoefficients:
    """
    H, H', H'1 from six pseudo-inverse solves in the symmetrized representation.

    With r_i = v_i sqrt(mu) and b_i = v_i (|v|^2/2T - 3/2) sqrt(mu):
    H_ij = (r_i, L^-1 r_j), H'_ij = (b_i, L^-1 r_j), H'1_ij = (b_i, L^-1 b_j).

    :param rho: density
    :param T: temperature
    :param alpha: scatterer density
    :param L: operator assembled at (rho, T, alpha) on g
    :param g: velocity grid
    :param basis: null basis of L, built when None
    :param method: pseudo inverse method
    :return: coefficients
    """
    if alpha <= 0:
        raise KineticError(f"alpha must be positive, got {alpha}")
    if abs(L.rho - rho) > 1e-12 * rho or abs(L.T - T) > 1e-12 * T or abs(L.alpha - alpha) > 1e-12 * alpha:
        raise KineticError(f"operator was assembled at ({L.rho}, {L.T}, {L.alpha}), not ({rho}, {T}, {alpha})")
    basis = build_null_basis(L, g) if basis is None else basis
    v = g.nodes
    r = v.T * L.sqrt_mu
    b = r * (g.speed_sq / (2 * T) - 1.5)
    solutions = pseudo_inverse(L, np.concatenate([r, b]), basis, method=method)
    x_r, x_b = solutions[:3], solutions[3:]
    w = g.weights
    h = (r * w) @ x_r.T
    h_prime_a = (b * w) @ x_r.T
    h_prime_b = (r * w) @ x_b.T
    h1_prime = (b * w) @ x_b.T

    H, aniso_h = _isotropic(h)
    H_a, aniso_a = _isotropic(h_prime_a)
    H_b, aniso_b = _isotropic(h_prime_b)
    H1, aniso_1 = _isotropic(h1_prime)
    H_prime = 0.5 * (H_a + H_b)

    onsager = onsager_matrix(H, H_a, H_b, H1, T)
    reciprocity = float(abs(onsager[0, 1] - onsager[1, 0]) / np.max(np.abs(onsager)))
    if reciprocity > RECIPROCITY_TOL:
        raise KineticError(f"Onsager reciprocity defect {reciprocity:.3e} at rho={rho}, T={T}, alpha={alpha}")
    displayed = displayed_onsager(H, H_prime, H1, T)
    displayed_defect = float(np.max(np.abs(displayed - onsager)) / np.max(np.abs(onsager)))
    diffusion, parabolic = flux_matrices(H, H_prime, H1, rho, T)
    coefficients = TransportCoefficients(rho=float(rho), T=float(T), alpha=float(alpha),
                                         H=H, H_prime=H_prime, H1_prime=H1,
                                         H_prime_a=H_a, H_prime_b=H_b,
                                         onsager=onsager,
                                         diffusion_matrix=diffusion,
                                         parabolic_matrix=parabolic,
                                         tensors={"H": h, "H_prime_a": h_prime_a,
                                                  "H_prime_b": h_prime_b, "H1_prime": h1_prime},
                                         anisotropy_defect=max(aniso_h, aniso_a, aniso_b, aniso_1),
                                         reciprocity_defect=reciprocity,
                                         displayed_relation_defect=displayed_defect)
    logger.debug(f"coefficients at rho={rho}, T={T}, alpha={alpha}: H={H:.6g}, H'={H_prime:.6g}, H'1={H1:.6g}")
    return coefficients


def scaled_coefficients(reference: TransportCoefficients, rho: float, T: float) -> TransportCoefficients:
    """
    Coefficients at (rho, T, alpha) from a reference computed at (1, 1, alpha / rho).

    The scaling law of the linearized operator gives H(rho, T, alpha) = sqrt(T) H(1, 1, alpha / rho),
    the same factor holding for H' and H'1.
    """
    if abs(reference.rho - 1) > 1e-14 or abs(reference.T - 1) > 1e-14:
        raise KineticError("reference coefficients must be computed at rho = T = 1")
    factor = np.sqrt(T)
    H, H_a, H_b = factor * reference.H, factor * reference.H_prime_a, factor * reference.H_prime_b
    H1 = factor * reference.H1_prime
    H_prime = 0.5 * (H_a + H_b)
    onsager = onsager_matrix(H, H_a, H_b, H1, T)
    diffusion, parabolic = flux_matrices(H, H_prime, H1, rho, T)
    displayed = displayed_onsager(H, H_prime, H1, T)
    return TransportCoefficients(rho=float(rho), T=float(T), alpha=reference.alpha * rho,
                                 H=H, H_prime=H_prime, H1_prime=H1, H_prime_a=H_a, H_prime_b=H_b,
                                 onsager=onsager,
                                 diffusion_matrix=diffusion,
                                 parabolic_matrix=parabolic,
                                 tensors={k: factor * v for k, v in reference.tensors.items()},
                                 anisotropy_defect=reference.anisotropy_defect,
                                 reciprocity_defect=float(abs(onsager[0, 1] - onsager[1, 0]) / np.max(np.abs(onsager))),
                                 displayed_relation_defect=float(np.max(np.abs(displayed - onsager))
                                                                 / np.max(np.abs(onsager))))


def _as_vectors(*fields):
    return [np.asarray(f, dtype=float) for f in fields]


def fluxes_gradient_form(H, H_prime, H1_prime, rho, T, grad_rho, grad_T) -> (np.ndarray, np.ndarray):
    """
    Phi_rho = H grad(rho)/rho + H' grad(T)/T,
    Phi_e = T(H' + 3/2 H) grad(rho)/rho + T(H'1 + 3/2 H') grad(T)/T,
    with dt rho = div Phi_rho and dt e = div Phi_e. Gradients carry a leading axis over directions.
    """
    H, H_prime, H1_prime, rho, T, grad_rho, grad_T = _as_vectors(H, H_prime, H1_prime, rho, T, grad_rho, grad_T)
    x_rho, x_T = grad_rho / rho, grad_T / T
    flux_rho = H * x_rho + H_prime * x_T
    flux_e = T * (H_prime + 1.5 * H) * x_rho + T * (H1_prime + 1.5 * H_prime) * x_T
    return flux_rho, flux_e


def thermodynamic_forces(rho, T, grad_rho, grad_T) -> (np.ndarray, np.ndarray):
    """
    (grad log z, -grad 1/T) with the fugacity log z = log(rho / T^(3/2))
    """
    rho, T, grad_rho, grad_T = _as_vectors(rho, T, grad_rho, grad_T)
    return grad_rho / rho - 1.5 * grad_T / T, grad_T / T ** 2


def fluxes_onsager_form(onsager: np.ndarray, rho, T, grad_rho, grad_T) -> (np.ndarray, np.ndarray):
    """
    fluxes from the Onsager matrix (scalar (2, 2) or per point (..., 2, 2)) and the thermodynamic forces
    """
    force_z, force_T = thermodynamic_forces(rho, T, grad_rho, grad_T)
    onsager = np.asarray(onsager, dtype=float)
    l_rr, l_re, l_er, l_ee = onsager[..., 0, 0], onsager[..., 0, 1], onsager[..., 1, 0], onsager[..., 1, 1]
    return l_rr * force_z + l_re * force_T, l_er * force_z + l_ee * force_T
