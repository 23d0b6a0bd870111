import numpy as np

from scatterkin import RunParam, Harness
from scatterkin.config import GridParam, SpatialParam, InitialStateParam

"""
One kinetic run at a fixed epsilon next to the diffusion limit it should approach.
"""

if __name__ == "__main__":
    param = RunParam(alpha=1.0,
                     grid=GridParam(n_per_axis=10, v_max=6.0),
                     spatial=SpatialParam(dim=1, n_cells=32),
                     initial=InitialStateParam(rho_modes=[[1, 0.05]], T_modes=[[1, 0.02]]),
                     epsilon=0.05,
                     t_end=0.02,
                     output_dir="./result")
    harness = Harness(param)
    trajectory = harness.run_kinetic()  # runs the hydro solve too

    hydro_final = harness.hydro.final
    kinetic_final = trajectory.macro[-1]
    print(f"max |rho_kinetic - rho_hydro| = {np.max(np.abs(kinetic_final.rho - hydro_final.rho)):.3e}")
    print(f"max |T_kinetic - T_hydro| = {np.max(np.abs(kinetic_final.T - hydro_final.T)):.3e}")
    print(f"error functional at t_end = {trajectory.errors[-1]:.4g}")
    harness.output()
    harness.save_result()
