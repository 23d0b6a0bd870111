from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ..utils import get_formatted_from_dict

SIGN_CONVENTION = "L = -mu^(-1/2) [2 Q_B(mu, sqrt(mu) f) + alpha Q_d(sqrt(mu) f)] >= 0, H = (v mu^(1/2), L^-1 v mu^(1/2)) > 0"


@dataclass
class TransportCoefficients:
    """
    Transport coefficients at one (rho, T, alpha).

    Tensors are indexed (i, j) over velocity components, scalars are their isotropic parts.
    h_prime_a is (b_i, L^-1 r_j) and h_prime_b is (r_i, L^-1 b_j) with r = v sqrt(mu) and
    b = v (|v|^2/2T - 3/2) sqrt(mu); they coincide when L is self-adjoint.

    :param H: isotropic part of H_ij
    :type H: float
    :param H_prime: isotropic part of H'_ij, mean of both cross computations
    :type H_prime: float
    :param H1_prime: isotropic part of H'_1,ij
    :type H1_prime: float
    :param onsager: [[L_rr, L_re], [L_er, L_ee]] for the forces (grad log z, -grad 1/T)
    :type onsager: np.ndarray
    :param diffusion_matrix: coefficients of (grad rho / rho, grad T / T) in the (rho, e) fluxes
    :type diffusion_matrix: np.ndarray
    :param parabolic_matrix: coefficients of (grad rho, grad e) in the (rho, e) fluxes
    :type parabolic_matrix: np.ndarray
    """
    rho: float
    T: float
    alpha: float
    H: float
    H_prime: float
    H1_prime: float
    H_prime_a: float
    H_prime_b: float
    onsager: np.ndarray = field(repr=False)
    diffusion_matrix: np.ndarray = field(repr=False)
    parabolic_matrix: np.ndarray = field(repr=False)
    tensors: dict = field(repr=False, default_factory=dict)
    anisotropy_defect: float = 0.0
    reciprocity_defect: float = 0.0
    displayed_relation_defect: float = 0.0

    @property
    def onsager_symmetric(self) -> np.ndarray:
        return 0.5 * (self.onsager + self.onsager.T)

    @property
    def parabolic_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.parabolic_matrix)

    @property
    def well_posed(self) -> bool:
        eig = self.parabolic_eigenvalues
        return bool(np.all(eig.real > 0) and np.all(np.abs(eig.imag) <= 1e-12 * np.max(np.abs(eig))))

    def to_dict(self) -> dict:
        return {"rho": self.rho,
                "T": self.T,
                "alpha": self.alpha,
                "H": self.H,
                "H_prime": self.H_prime,
                "H1_prime": self.H1_prime,
                "L_rho_rho": self.onsager[0, 0],
                "L_rho_e": self.onsager[0, 1],
                "L_e_rho": self.onsager[1, 0],
                "L_e_e": self.onsager[1, 1],
                "anisotropy_defect": self.anisotropy_defect,
                "reciprocity_defect": self.reciprocity_defect,
                "displayed_relation_defect": self.displayed_relation_defect}

    def get_output_str(self) -> str:
        return get_formatted_from_dict({"H": f"{self.H:.8g}",
                                        "H'": f"{self.H_prime:.8g}",
                                        "H'1": f"{self.H1_prime:.8g}",
                                        "reciprocity": f"{self.reciprocity_defect:.2e}"})


TABLE_COLUMNS = ["rho", "T", "alpha", "H", "H_prime", "H1_prime", "L_rho_rho", "L_rho_e", "L_e_e",
                 "anisotropy_defect", "reciprocity_defect"]


@dataclass(frozen=True, eq=False)
class TransportTable:
    """
    Coefficients on a rectilinear (rho, T) grid with bilinear interpolation.

    :param rho_nodes: increasing density nodes, length >= 1
    :type rho_nodes: np.ndarray
    :param T_nodes: increasing temperature nodes, length >= 1
    :type T_nodes: np.ndarray
    :param alpha: scatterer density
    :type alpha: float
    :param points: coefficients, points[i][j] at (rho_nodes[i], T_nodes[j])
    :type points: list
    """
    rho_nodes: np.ndarray
    T_nodes: np.ndarray
    alpha: float
    points: list = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_values", np.array([[[c.H, c.H_prime, c.H1_prime] for c in row]
                                                      for row in self.points]))

    @property
    def rho_range(self) -> tuple[float, float]:
        return float(self.rho_nodes[0]), float(self.rho_nodes[-1])

    @property
    def T_range(self) -> tuple[float, float]:
        return float(self.T_nodes[0]), float(self.T_nodes[-1])

    @staticmethod
    def _locate(nodes: np.ndarray, x: np.ndarray) -> (np.ndarray, np.ndarray, np.ndarray, np.ndarray):
        clamped = (x < nodes[0]) | (x > nodes[-1])
        x = np.clip(x, nodes[0], nodes[-1])
        if len(nodes) == 1:
            zeros = np.zeros(x.shape, dtype=int)
            return zeros, zeros, np.zeros(x.shape), clamped
        upper = np.clip(np.searchsorted(nodes, x), 1, len(nodes) - 1)
        lower = upper - 1
        t = (x - nodes[lower]) / (nodes[upper] - nodes[lower])
        return lower, upper, t, clamped

    def lookup(self, rho, T) -> (np.ndarray, np.ndarray, np.ndarray, np.ndarray):
        """
        bilinear interpolation, out of range queries are clamped to the table edge and flagged

        :return: H, H', H'1, clamped mask, each with the broadcast shape of rho and T
        """
        rho, T = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(T, dtype=float))
        i0, i1, s, clamped_rho = self._locate(self.rho_nodes, rho)
        j0, j1, t, clamped_T = self._locate(self.T_nodes, T)
        v = self._values
        s, t = s[..., None], t[..., None]
        result = (1 - s) * (1 - t) * v[i0, j0] + s * (1 - t) * v[i1, j0] + (1 - s) * t * v[i0, j1] + s * t * v[i1, j1]
        return result[..., 0], result[..., 1], result[..., 2], clamped_rho | clamped_T

    def covers(self, rho_range: tuple[float, float], T_range: tuple[float, float], growth: float = 0.1) -> bool:
        """
        False when the envelope leaves the table by more than growth times its extent
        """
        def inside(nodes, lo, hi):
            extent = max(nodes[-1] - nodes[0], abs(nodes[0]) * 1e-12)
            return lo >= nodes[0] - growth * extent and hi <= nodes[-1] + growth * extent

        return inside(self.rho_nodes, *rho_range) and inside(self.T_nodes, *T_range)

    def to_dataframe(self) -> pd.DataFrame:
        rows = [c.to_dict() for row in self.points for c in row]
        return pd.DataFrame(rows)[TABLE_COLUMNS]

    def save_csv(self, path: str):
        self.to_dataframe().to_csv(path, index=False)
