import logging
import time

import numpy as np
from tqdm import tqdm

from ._typing import LinearizedOperator
from .._typing import KineticError
from ..collision import CollisionTable, ScatterTable, CollisionTables, gather
from ..grid import VelocityGrid, maxwellian_values

logger = logging.getLogger(__name__)

ASSEMBLY_CHUNK = 1_000_000
SYMMETRY_TOL = 1e-6


def boltzmann_matrix(mu: np.ndarray, table: CollisionTable, n_nodes: int) -> (np.ndarray, np.ndarray):
    """
    F representation of F -> -2 q_b(mu, F) and its loss frequency.

    :return: dense matrix (N, N), nu_B (N,)
    """
    flat = np.zeros(n_nodes * n_nodes)
    nu = np.zeros(n_nodes)
    for part in table.chunks(ASSEMBLY_CHUNK):
        i, k = table.pair_v[part].astype(np.int64), table.pair_w[part].astype(np.int64)
        c = table.kernel[part]
        post_v, post_w = table.post_v[part], table.post_w[part]
        wv = None if table.post_v_weights is None else table.post_v_weights[part]
        ww = None if table.post_w_weights is None else table.post_w_weights[part]
        mu_post_v = gather(mu, post_v, wv)
        mu_post_w = gather(mu, post_w, ww)
        # -c [mu(v')F(w') + mu(w')F(v') - mu(v)F(w) - mu(w)F(v)] lands on rows v and w
        loss_entries = [(k, c * mu[i]), (i, c * mu[k])]
        if wv is None:
            gain_entries = [(post_w, -c * mu_post_v), (post_v, -c * mu_post_w)]
        else:
            gain_entries = [(post_w, -(c * mu_post_v)[:, None] * ww), (post_v, -(c * mu_post_w)[:, None] * wv)]
        for rows in (i, k):
            for cols, vals in loss_entries:
                flat += np.bincount(rows * n_nodes + cols, weights=vals, minlength=n_nodes * n_nodes)
            for cols, vals in gain_entries:
                if cols.ndim == 2:
                    target = (rows[:, None] * n_nodes + cols).ravel()
                    vals = vals.ravel()
                else:
                    target = rows * n_nodes + cols
                flat += np.bincount(target, weights=vals, minlength=n_nodes * n_nodes)
        nu += np.bincount(i, weights=c * mu[k], minlength=n_nodes)
        nu += np.bincount(k, weights=c * mu[i], minlength=n_nodes)
    return flat.reshape(n_nodes, n_nodes), nu


def scatter_matrix(table: ScatterTable) -> (np.ndarray, np.ndarray):
    """
    F representation of F -> -q_d(F) and its loss frequency, alpha not included
    """
    loss = np.bincount(table.source, weights=table.kernel, minlength=table.size_of_grid)
    return -table.matrix().toarray(), loss


def symmetrize(matrix_f: np.ndarray, sqrt_mu: np.ndarray) -> (np.ndarray, float):
    """
    conjugate D^-1 A D with D = diag(sqrt(mu)), then average with the transpose

    :return: symmetric matrix, relative defect before averaging
    """
    conjugated = matrix_f * sqrt_mu[None, :] / sqrt_mu[:, None]
    scale = np.max(np.abs(conjugated))
    defect = float(np.max(np.abs(conjugated - conjugated.T)) / scale) if scale > 0 else 0.0
    return 0.5 * (conjugated + conjugated.T), defect


def _check_defect(defect: float, rho: float, T: float, strict: bool):
    if defect > SYMMETRY_TOL:
        message = f"symmetry defect {defect:.3e} at rho={rho:.6g}, T={T:.6g} indicates quadrature inconsistency"
        if strict:
            raise KineticError(message)
        logger.warning(message)


def assemble_L(rho: float,
               T: float,
               alpha: float,
               g: VelocityGrid,
               tables: CollisionTables,
               strict: bool = False) -> LinearizedOperator:
    """
    Assemble L = L_B + L_d around M_{rho,0,T} column by column from the collision tables.

    :param rho: density
    :param T: temperature
    :param alpha: scatterer density, > 0
    :param g: velocity grid
    :param tables: tables built on g
    :param strict: raise instead of warn when the symmetry defect exceeds 1e-6
    :return: linearized operator
    """
    if rho <= 0 or T <= 0:
        raise KineticError(f"assemble_L needs positive rho and T, got rho={rho}, T={T}")
    if alpha <= 0:
        raise KineticError(f"alpha must be positive, got {alpha}")
    if tables.grid_hash != g.grid_hash:
        raise KineticError("tables were built on another grid")
    t0 = time.time()
    mu = maxwellian_values(rho, None, T, g)
    sqrt_mu = np.sqrt(mu)
    matrix_b_f, nu_b = boltzmann_matrix(mu, tables.binary, g.size)
    matrix_d_f, nu_d = scatter_matrix(tables.scatter)
    matrix_b, defect_b = symmetrize(matrix_b_f, sqrt_mu)
    matrix_d, defect_d = symmetrize(matrix_d_f, sqrt_mu)
    defect = max(defect_b, defect_d)
    _check_defect(defect, rho, T, strict)
    operator = LinearizedOperator(matrix=matrix_b + alpha * matrix_d,
                                  matrix_b=matrix_b,
                                  matrix_d=alpha * matrix_d,
                                  nu_b=nu_b,
                                  nu_d=alpha * nu_d,
                                  sqrt_mu=sqrt_mu,
                                  weights=g.weights,
                                  rho=float(rho),
                                  T=float(T),
                                  alpha=float(alpha),
                                  symmetry_defect=defect,
                                  grid_hash=g.grid_hash)
    logger.debug(f"assembled {operator}, execute time {time.time() - t0:.2f}s")
    return operator


def scale_operator(reference: LinearizedOperator,
                   g_reference: VelocityGrid,
                   rho: float,
                   T: float,
                   alpha: float) -> (LinearizedOperator, VelocityGrid):
    """
    Operator at (rho, T, alpha) on the sqrt(T) rescaled grid, from a reference at rho = T = 1.

    Both kernels are homogeneous of degree one in the relative speed, so
    L(rho, T, alpha) = sqrt(T) [rho L_B,ref + (alpha / alpha_ref) L_d,ref].

    :return: scaled operator and the grid it lives on
    """
    if abs(reference.rho - 1) > 1e-14 or abs(reference.T - 1) > 1e-14:
        raise KineticError("reference operator must be assembled at rho = T = 1")
    if reference.grid_hash != g_reference.grid_hash:
        raise KineticError("reference operator lives on another grid")
    if rho <= 0 or T <= 0 or alpha <= 0:
        raise KineticError(f"scale_operator needs positive rho, T and alpha, got {rho}, {T}, {alpha}")
    factor = np.sqrt(T)
    g = g_reference.scaled(factor)
    ratio = alpha / reference.alpha
    matrix_b = rho * factor * reference.matrix_b
    matrix_d = ratio * factor * reference.matrix_d
    operator = LinearizedOperator(matrix=matrix_b + matrix_d,
                                  matrix_b=matrix_b,
                                  matrix_d=matrix_d,
                                  nu_b=rho * factor * reference.nu_b,
                                  nu_d=ratio * factor * reference.nu_d,
                                  sqrt_mu=np.sqrt(maxwellian_values(rho, None, T, g, warn=False)),
                                  weights=g.weights,
                                  rho=float(rho),
                                  T=float(T),
                                  alpha=float(alpha),
                                  symmetry_defect=reference.symmetry_defect,
                                  grid_hash=g.grid_hash)
    return operator, g


class OperatorFamily:
    """
    Linearized operators on one fixed velocity grid for spatially varying (rho, T).

    The F representation of L_B is linear in the Maxwellian, hence exactly linear in rho;
    its temperature dependence is tabulated on a ladder of temperatures at unit density and
    interpolated linearly. With exact=True every request is assembled directly instead.

    :param g: velocity grid
    :param tables: collision tables of g
    :param alpha: scatterer density
    :param temperatures: increasing temperature ladder
    :param exact: assemble per request instead of interpolating
    """

    def __init__(self,
                 g: VelocityGrid,
                 tables: CollisionTables,
                 alpha: float,
                 temperatures: np.ndarray,
                 exact: bool = False):
        self.logger = logging.getLogger(__name__)
        if alpha <= 0:
            raise KineticError(f"alpha must be positive, got {alpha}")
        if tables.grid_hash != g.grid_hash:
            raise KineticError("tables were built on another grid")
        self.g = g
        self.tables = tables
        self.alpha = float(alpha)
        self.exact = exact
        self.temperatures = np.unique(np.asarray(temperatures, dtype=float))
        if np.any(self.temperatures <= 0):
            raise KineticError("temperature ladder must be positive")
        self.scatter_f, self.scatter_nu = scatter_matrix(tables.scatter)
        self._boltzmann_f = []
        self._boltzmann_nu = []
        if not exact:
            t0 = time.time()
            for T in tqdm(self.temperatures, desc="operator family", ncols=150, disable=len(self.temperatures) < 3):
                matrix, nu = boltzmann_matrix(maxwellian_values(1.0, None, T, g), tables.binary, g.size)
                self._boltzmann_f.append(matrix)
                self._boltzmann_nu.append(nu)
            self.logger.info(f"operator family with {len(self.temperatures)} temperatures finished, "
                             f"execute time {time.time() - t0:.2f}s")

    @classmethod
    def around(cls, g: VelocityGrid, tables: CollisionTables, alpha: float, T_min: float, T_max: float,
               n_temperatures: int = 5, exact: bool = False) -> "OperatorFamily":
        """
        family with an evenly spaced ladder over [T_min, T_max]
        """
        if T_max - T_min < 1e-12:
            temperatures = np.array([T_min])
        else:
            temperatures = np.linspace(T_min, T_max, max(n_temperatures, 2))
        return cls(g, tables, alpha, temperatures, exact)

    def covers(self, T_min: float, T_max: float) -> bool:
        return self.exact or (T_min >= self.temperatures[0] - 1e-12 and T_max <= self.temperatures[-1] + 1e-12)

    def _boltzmann_at(self, T: float) -> (np.ndarray, np.ndarray):
        ladder = self.temperatures
        if self.exact or not (ladder[0] - 1e-12 <= T <= ladder[-1] + 1e-12):
            if not self.exact:
                self.logger.warning(f"T={T:.6g} outside the family range [{ladder[0]:.6g}, {ladder[-1]:.6g}], "
                                    f"assembling directly")
            return boltzmann_matrix(maxwellian_values(1.0, None, T, self.g), self.tables.binary, self.g.size)
        if len(ladder) == 1:
            return self._boltzmann_f[0], self._boltzmann_nu[0]
        upper = int(np.clip(np.searchsorted(ladder, T), 1, len(ladder) - 1))
        t = (T - ladder[upper - 1]) / (ladder[upper] - ladder[upper - 1])
        t = float(np.clip(t, 0.0, 1.0))
        matrix = (1 - t) * self._boltzmann_f[upper - 1] + t * self._boltzmann_f[upper]
        nu = (1 - t) * self._boltzmann_nu[upper - 1] + t * self._boltzmann_nu[upper]
        return matrix, nu

    def f_matrix(self, rho: float, T: float) -> np.ndarray:
        """
        F representation of the linearized collision operator at (rho, T), rho B(T) + alpha D
        """
        boltzmann, _ = self._boltzmann_at(T)
        return rho * boltzmann + self.alpha * self.scatter_f

    def operator(self, rho: float, T: float, strict: bool = False) -> LinearizedOperator:
        """
        symmetrized operator at (rho, T)
        """
        if rho <= 0 or T <= 0:
            raise KineticError(f"operator needs positive rho and T, got rho={rho}, T={T}")
        boltzmann, nu_b = self._boltzmann_at(T)
        sqrt_mu = np.sqrt(maxwellian_values(rho, None, T, self.g, warn=False))
        matrix_b, defect_b = symmetrize(rho * boltzmann, sqrt_mu)
        matrix_d, defect_d = symmetrize(self.alpha * self.scatter_f, sqrt_mu)
        defect = max(defect_b, defect_d)
        if self.exact:
            _check_defect(defect, rho, T, strict)
        else:
            # interpolation in T breaks exact symmetry between ladder nodes
            self.logger.debug(f"interpolated operator at T={T:.6g}, symmetry defect {defect:.3e}")
        return LinearizedOperator(matrix=matrix_b + matrix_d,
                                  matrix_b=matrix_b,
                                  matrix_d=matrix_d,
                                  nu_b=rho * nu_b,
                                  nu_d=self.alpha * self.scatter_nu,
                                  sqrt_mu=sqrt_mu,
                                  weights=self.g.weights,
                                  rho=float(rho),
                                  T=float(T),
                                  alpha=self.alpha,
                                  symmetry_defect=defect,
                                  grid_hash=self.g.grid_hash)

    def apply(self, values: np.ndarray, rho: np.ndarray, T: np.ndarray) -> np.ndarray:
        """
        F representation of the cell operators applied cell by cell, rho_c B(T_c) F_c + alpha D F_c

        :param values: shape (cells, N)
        :param rho: density per cell
        :param T: temperature per cell
        """
        rho = np.asarray(rho, dtype=float)
        T = np.asarray(T, dtype=float)
        out = self.alpha * values @ self.scatter_f.T
        ladder = self.temperatures
        inside = np.all(T >= ladder[0] - 1e-12) and np.all(T <= ladder[-1] + 1e-12)
        if self.exact or len(ladder) == 1 or not inside:
            for c in range(values.shape[0]):
                boltzmann, _ = self._boltzmann_at(float(T[c]))
                out[c] += rho[c] * (values[c] @ boltzmann.T)
            return out
        upper = np.clip(np.searchsorted(ladder, T), 1, len(ladder) - 1)
        t = np.clip((T - ladder[upper - 1]) / (ladder[upper] - ladder[upper - 1]), 0.0, 1.0)
        for k, boltzmann in enumerate(self._boltzmann_f):
            share = np.where(upper == k, t, 0.0) + np.where(upper - 1 == k, 1 - t, 0.0)
            cells = share > 0
            if np.any(cells):
                out[cells] += (share[cells] * rho[cells])[:, None] * (values[cells] @ boltzmann.T)
        return out
