import numpy as np

from ._typing import CollisionTable, ScatterTable, gather
from .._typing import KineticError
from ..grid import VelocityGrid

COLLISION_CHUNK = 4_000_000
LOG_FLOOR = 1e-300


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise KineticError("collision operator received non-finite values")


def _q_b_single(F: np.ndarray, H: np.ndarray, table: CollisionTable, n_nodes: int) -> np.ndarray:
    out = np.zeros(n_nodes)
    for part in table.chunks(COLLISION_CHUNK):
        i, k = table.pair_v[part], table.pair_w[part]
        post_v, post_w = table.post_v[part], table.post_w[part]
        wv = None if table.post_v_weights is None else table.post_v_weights[part]
        ww = None if table.post_w_weights is None else table.post_w_weights[part]
        gain = gather(F, post_v, wv) * gather(H, post_w, ww) + gather(F, post_w, ww) * gather(H, post_v, wv)
        loss = F[i] * H[k] + F[k] * H[i]
        delta = 0.5 * table.kernel[part] * (gain - loss)
        out += np.bincount(i, weights=delta, minlength=n_nodes)
        out += np.bincount(k, weights=delta, minlength=n_nodes)
    return out


def q_b(F: np.ndarray, H: np.ndarray, table: CollisionTable, g: VelocityGrid) -> np.ndarray:
    """
    Symmetrized hard sphere operator
    1/2 int dw int dw B [F(v')H(w') + F(w')H(v') - F(v)H(w) - F(w)H(v)].

    A pair entry (v, w) contributes the same bracket to v and to w, so each
    unordered pair is stored once.

    :param F: values on the nodes, shape (N,) or (cells, N)
    :param H: same shape as F
    :param table: collision table of g
    :param g: velocity grid
    :return: values with the shape of F
    """
    F = np.asarray(F, dtype=float)
    H = np.asarray(H, dtype=float)
    _check_finite(F, H)
    if table.grid_hash != g.grid_hash:
        raise KineticError("collision table was built on another grid")
    if F.ndim == 1:
        return _q_b_single(F, H, table, g.size)
    flat_F, flat_H = F.reshape(-1, g.size), H.reshape(-1, g.size)
    out = np.array([_q_b_single(a, b, table, g.size) for a, b in zip(flat_F, flat_H)])
    return out.reshape(F.shape)


def q_d(F: np.ndarray, table: ScatterTable, g: VelocityGrid) -> np.ndarray:
    """
    Scatterer operator int dw [F(v - 2(v.w)w) - F(v)] |v.w|, linear in F.
    """
    F = np.asarray(F, dtype=float)
    _check_finite(F)
    if table.grid_hash != g.grid_hash:
        raise KineticError("scatter table was built on another grid")
    flat = F.reshape(-1, g.size)
    delta = table.kernel * (gather(flat, table.target, table.target_weights) - flat[:, table.source])
    out = np.zeros_like(flat)
    for row in range(flat.shape[0]):
        out[row] = np.bincount(table.source, weights=delta[row], minlength=g.size)
    return out.reshape(F.shape)


def _log_positive(F: np.ndarray) -> np.ndarray:
    if np.any(F <= 0):
        raise KineticError("entropy dissipation needs a strictly positive distribution")
    return np.log(np.maximum(F, LOG_FLOOR))


def entropy_dissipation_b(F: np.ndarray, table: CollisionTable, g: VelocityGrid) -> float:
    """
    int Q_B(F,F) log F, never positive for the discrete operator
    """
    F = np.asarray(F, dtype=float)
    log_f = _log_positive(F)
    return float(np.sum(g.weights * q_b(F, F, table, g) * log_f))


def entropy_dissipation_d(F: np.ndarray, table: ScatterTable, g: VelocityGrid) -> float:
    """
    int Q_d(F) log F
    """
    F = np.asarray(F, dtype=float)
    log_f = _log_positive(F)
    return float(np.sum(g.weights * q_d(F, table, g) * log_f))


def entropy(F: np.ndarray, g: VelocityGrid) -> float | np.ndarray:
    """
    int F log F, floor applied only inside the log
    """
    F = np.asarray(F, dtype=float)
    return (F * np.log(np.maximum(F, LOG_FLOOR))) @ g.weights
