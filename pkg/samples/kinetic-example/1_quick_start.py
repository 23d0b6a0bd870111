import logging

import numpy as np
import pandas as pd

from scatterkin import build_velocity_grid, build_tables, assemble_L, build_null_basis, compute_coefficients, \
    spectral_gap

pd.options.display.max_columns = None
pd.set_option('display.width', 5000)

"""
This demo computes the diffusion coefficients of a hard sphere gas among fixed scatterers,
and shows how they blow up as the scatterer density alpha goes to zero.
"""

if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')

    # A velocity grid: 12 nodes per axis on [-6.5, 6.5]^3, with a 26 node lebedev rule for collision directions.
    g = build_velocity_grid(12, 6.5)
    # Collision tables depend on the grid only. With a cache directory they are built once and reloaded afterwards.
    tables = build_tables(g, cache_dir="cache")

    rows = []
    for alpha in [2.0, 1.0, 0.5, 0.25, 0.1]:
        L = assemble_L(1.0, 1.0, alpha, g, tables)  # linearized operator at rho = T = 1
        basis = build_null_basis(L, g)  # mass and energy modes
        gap, lambda_d = spectral_gap(L, basis)
        c = compute_coefficients(1.0, 1.0, alpha, L, g, basis)
        rows.append([alpha, gap, lambda_d, c.H, c.H_prime, c.H1_prime, alpha * c.H, c.well_posed])

    frame = pd.DataFrame(rows, columns=["alpha", "gap", "lambda_d", "H", "H'", "H'1", "alpha * H", "well posed"])
    print(frame)
    # alpha * H levels off for small alpha: the diffusion coefficient grows like 1 / alpha
    print(f"H(0.1) / H(1) = {frame['H'].iloc[-1] / frame['H'].iloc[1]:.3f}")
    print(f"max |alpha H - mean| = {np.ptp(frame['alpha * H'].iloc[2:]):.4g}")
