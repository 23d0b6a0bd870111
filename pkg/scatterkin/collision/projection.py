import numpy as np
import scipy.linalg

from .._typing import Invariants
from ..grid import VelocityGrid, maxwellian_values


def invariant_basis(invariants: Invariants, g: VelocityGrid) -> np.ndarray:
    """
    collision invariants phi_a(v) on the nodes, shape (A, N)
    """
    rows = [np.ones(g.size)]
    if invariants == Invariants.MASS_MOMENTUM_ENERGY:
        rows += [g.nodes[:, 0], g.nodes[:, 1], g.nodes[:, 2]]
    rows.append(g.speed_sq)
    return np.array(rows)


def conserve_project(Q: np.ndarray,
                     invariants: Invariants,
                     g: VelocityGrid,
                     mu_ref: np.ndarray | None = None) -> np.ndarray:
    """
    Closest field, in the L2 norm weighted by 1/mu_ref, whose selected moments vanish.

    The correction is mu_ref * sum_a lambda_a phi_a with lambda solving the Gram system
    G_ab = sum w phi_a phi_b mu_ref.

    :param Q: values, shape (N,) or (..., N)
    :param invariants: moments to remove
    :param g: velocity grid
    :param mu_ref: weight Maxwellian, global (1, 0, 1) when None, or one per leading index of Q
    :return: projected values
    """
    Q = np.asarray(Q, dtype=float)
    if mu_ref is None:
        mu_ref = maxwellian_values(1.0, None, 1.0, g, warn=False)
    phi = invariant_basis(invariants, g)
    weighted = phi * g.weights
    defects = Q @ weighted.T
    mu_ref = np.asarray(mu_ref, dtype=float)
    if mu_ref.ndim == 1:
        gram = (weighted * mu_ref) @ phi.T
        coef = scipy.linalg.solve(gram, defects.reshape(-1, phi.shape[0]).T, assume_a="pos").T
        correction = (coef @ phi).reshape(Q.shape) * mu_ref
    else:
        gram = np.einsum("an,...n,bn->...ab", weighted, mu_ref, phi)
        coef = np.linalg.solve(gram, defects[..., None])[..., 0]
        correction = (coef @ phi) * mu_ref
    return Q - correction
