import toml

from scatterkin import Harness, convert_config
from scatterkin.utils import dict_to_object

"""
Run the epsilon convergence study of samples/config/convergence.toml from python instead of the runner,
then look at the result rows.
"""

if __name__ == "__main__":
    param = convert_config(dict_to_object(toml.load("../config/convergence.toml")))
    param.convergence.dt_refinement = True  # rerun every epsilon with dt / 2 to see the time step error
    param.output_dir = "./result"

    harness = Harness(param)
    report = harness.run_convergence()
    harness.output()  # print tables to console
    files = harness.save_result()  # csv, plot data and json metadata

    frame = report.to_dataframe()
    print(frame[["epsilon", "error", "steps", "positivity_threshold"]])
    print(f"error ~ {report.fitted_constant:.4g} * epsilon ^ {report.fitted_order:.4g}")
