import os
import sys

import toml

from ._typing import ConfigError, KineticError
from .config import convert_config
from .core import Harness
from .utils import dict_to_object

COMMANDS = ["coefficients", "hydro", "kinetic", "converge", "sweep", "suite"]
USAGE = f"usage: 'python -m scatterkin.runner <command> config.toml', command is one of {', '.join(COMMANDS)}"


def main(argv) -> int:
    """
    :return: exit code, 0 success, 1 failed checks or incomplete runs, 2 invalid configuration
    """
    if len(argv) != 2 or argv[0] not in COMMANDS:
        print(USAGE)
        return 2
    command, config_path = argv
    if not os.path.exists(config_path):
        print(f"config file {config_path} not found")
        return 2
    try:
        param = convert_config(dict_to_object(toml.load(config_path)))
    except (ConfigError, toml.TomlDecodeError) as e:
        print(f"invalid config: {e}")
        return 2
    harness = Harness(param)
    try:
        match command:
            case "coefficients":
                harness.run_coefficients()
            case "hydro":
                harness.run_hydro()
            case "kinetic":
                harness.run_kinetic()
            case "converge":
                harness.run_convergence()
            case "sweep":
                harness.run_amplitude_sweep()
            case "suite":
                harness.run_suite()
    except KineticError as e:
        harness.logger.error(e.message)
        return 1
    harness.output()
    harness.save_result()
    if harness.failed:
        return 1
    if command in ("converge", "sweep") and not all(r.order_accepted for r in harness.reports):
        return 1
    return 0


if __name__ == '__main__':
    exit(main(sys.argv[1:]))
