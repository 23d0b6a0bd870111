import logging

import numpy as np
import scipy.linalg

from ._typing import LinearizedOperator, NullBasis
from .nullspace import project_null
from .._typing import KineticError, ConvergenceError

logger = logging.getLogger(__name__)

SOLVABILITY_TOL = 1e-8


class ProjectedConjugateGradient:
    """
    Conjugate gradient for L x = b on the orthogonal complement of the null space.

    Works on a block of right-hand sides at once, every row an independent system; each iterate
    is projected back onto the complement so rounding cannot drift into the kernel.

    :param L: symmetric positive semidefinite operator
    :param basis: orthonormal null basis of L
    """

    def __init__(self, L: LinearizedOperator, basis: NullBasis):
        self.L = L
        self.basis = basis
        self.weights = basis.weights

    def multiply(self, x: np.ndarray) -> np.ndarray:
        return x @ self.L.matrix

    def dot(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.sum(self.weights * x * y, axis=-1)

    def norm(self, x: np.ndarray) -> np.ndarray:
        return np.sqrt(self.dot(x, x))

    def project(self, x: np.ndarray) -> np.ndarray:
        return project_null(x, self.basis)[1]

    def solve(self, b: np.ndarray, max_it: int, tol: float) -> (np.ndarray, int, np.ndarray):
        """
        :param b: right-hand sides, shape (m, N)
        :return: solutions, iterations, relative residuals
        """
        x = np.zeros_like(b)
        r = self.project(b)
        p = r.copy()
        rr = self.dot(r, r)
        b_norm = self.norm(b)
        scale = np.where(b_norm > 0, b_norm, 1.0)
        it = 0
        for it in range(1, max_it + 1):
            active = np.sqrt(rr) > tol * scale
            if not np.any(active):
                it -= 1
                break
            Ap = self.project(self.multiply(p))
            pAp = self.dot(p, Ap)
            step = np.where(active, rr / np.where(pAp > 0, pAp, 1.0), 0.0)
            x = self.project(x + step[:, None] * p)
            r = self.project(r - step[:, None] * Ap)
            rr_new = self.dot(r, r)
            beta = np.where(active, rr_new / np.where(rr > 0, rr, 1.0), 0.0)
            p = r + beta[:, None] * p
            rr = rr_new
        residual = self.norm(self.project(b - self.multiply(x))) / scale
        if np.any(np.sqrt(rr) > tol * scale):
            raise ConvergenceError("projected conjugate gradient did not converge", it, float(np.max(residual)))
        return x, it, residual


def pseudo_inverse(L: LinearizedOperator,
                   rhs: np.ndarray,
                   basis: NullBasis,
                   tol: float = 1e-10,
                   max_iter: int | None = None,
                   method: str = "cg") -> np.ndarray:
    """
    Solve L f = rhs with P f = 0.

    :param L: operator
    :param rhs: right-hand side, shape (N,) or (m, N), orthogonal to the null space
    :param basis: null basis of L
    :param tol: relative residual
    :param max_iter: iteration cap, 10 N when None
    :param method: cg, or direct for a dense factorization of L + P
    :return: solution with the shape of rhs
    """
    rhs = np.asarray(rhs, dtype=float)
    block = np.atleast_2d(rhs)
    if not np.all(np.isfinite(block)):
        raise KineticError("pseudo_inverse received non-finite right-hand side")
    pf, _ = project_null(block, basis)
    norms = np.sqrt(np.sum(basis.weights * block ** 2, axis=-1))
    null_part = np.sqrt(np.sum(basis.weights * pf ** 2, axis=-1))
    if np.any(null_part > SOLVABILITY_TOL * np.maximum(norms, 1e-300)):
        raise KineticError(f"right-hand side is not orthogonal to the null space, "
                           f"|P rhs| / |rhs| = {np.max(null_part / np.maximum(norms, 1e-300)):.3e}")
    match method:
        case "cg":
            max_iter = 10 * L.size if max_iter is None else max_iter
            solver = ProjectedConjugateGradient(L, basis)
            solution, iterations, residual = solver.solve(block, max_iter, tol)
            logger.debug(f"projected cg finished in {iterations} iterations, residual {np.max(residual):.2e}")
        case "direct":
            scale = float(np.mean(np.abs(np.diag(L.matrix))))
            # (L + cP) x = b keeps x in the complement when b is
            shifted = L.matrix + scale * basis.projector_matrix()
            solution = scipy.linalg.solve(shifted, (block - pf).T).T
            solution = project_null(solution, basis)[1]
        case _:
            raise KineticError(f"unknown pseudo inverse method {method}, allowed: cg, direct")
    return solution.reshape(rhs.shape)
