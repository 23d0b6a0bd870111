from functools import lru_cache

import numpy as np

from scatterkin import build_velocity_grid, build_tables, assemble_L, build_null_basis


@lru_cache(maxsize=None)
def small_grid(n_per_axis=8, v_max=5.5):
    g = build_velocity_grid(n_per_axis, v_max)
    return g, build_tables(g)


@lru_cache(maxsize=None)
def small_operator(alpha=1.0, rho=1.0, T=1.0):
    g, tables = small_grid()
    L = assemble_L(rho, T, alpha, g, tables)
    return L, build_null_basis(L, g)


def weighted_norm(f, g):
    return float(np.sqrt(np.sum(g.weights * f ** 2)))
