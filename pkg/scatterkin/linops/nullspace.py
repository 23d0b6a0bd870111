import numpy as np
import scipy.linalg

from ._typing import NullBasis, LinearizedOperator
from .._typing import KineticError
from ..grid import VelocityGrid, MacroFields


def build_null_basis(L: LinearizedOperator, g: VelocityGrid) -> NullBasis:
    """
    Collision invariants of L sampled on the grid and re-orthonormalized in the discrete inner product.

    psi_m ~ sqrt(mu), psi_e ~ (|v|^2 - 3T) sqrt(mu), psi_i ~ v_i sqrt(mu). Orthonormalization is a QR
    of the sqrt(w) scaled columns, signs fixed so every mode keeps the orientation of its analytic form.
    """
    if L.grid_hash != g.grid_hash:
        raise KineticError("operator lives on another grid")
    rho, T = L.rho, L.T
    sqrt_mu = L.sqrt_mu
    analytic = np.array([sqrt_mu / np.sqrt(rho),
                         (g.speed_sq - 3 * T) * sqrt_mu / np.sqrt(6 * rho * T ** 2)])
    root_w = np.sqrt(g.weights)
    q, _ = scipy.linalg.qr((analytic * root_w).T, mode="economic")
    modes = q.T / root_w
    signs = np.sign(np.sum(g.weights * modes * analytic, axis=1))
    modes = modes * signs[:, None]

    momentum = g.nodes.T * sqrt_mu / np.sqrt(rho * T)
    momentum = momentum / np.sqrt(np.sum(g.weights * momentum ** 2, axis=1))[:, None]
    return NullBasis(psi_m=modes[0], psi_e=modes[1], psi_momentum=momentum,
                     weights=g.weights, rho=rho, T=T)


def project_null(f: np.ndarray, basis: NullBasis) -> (np.ndarray, np.ndarray):
    """
    :return: (Pf, (I-P)f), batched over leading axes
    """
    f = np.asarray(f, dtype=float)
    modes = basis.modes
    coef = (f * basis.weights) @ modes.T
    pf = coef @ modes
    return pf, f - pf


def cancellation_check(m: MacroFields,
                       grad_rho: np.ndarray,
                       grad_T: np.ndarray,
                       f: np.ndarray,
                       g: VelocityGrid) -> float:
    """
    discrete int f^2 v.grad(log mu) at one point, with grad log mu = grad(rho)/rho + (|v|^2/2T - 3/2) grad(T)/T

    :param m: macro fields of a single point
    :param grad_rho: gradient of rho, length 3 (missing axes are zero)
    :param grad_T: gradient of T
    :param f: values on the nodes
    :param g: velocity grid
    """
    rho, T = float(m.rho), float(m.T)
    grad_rho = np.pad(np.asarray(grad_rho, dtype=float), (0, 3 - len(grad_rho)))
    grad_T = np.pad(np.asarray(grad_T, dtype=float), (0, 3 - len(grad_T)))
    drift = g.nodes @ grad_rho / rho + (g.speed_sq / (2 * T) - 1.5) * (g.nodes @ grad_T) / T
    return float(np.sum(g.weights * f ** 2 * drift))
