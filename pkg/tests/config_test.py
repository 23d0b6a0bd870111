import os
import unittest

import toml

from scatterkin import convert_config, ConfigError
from scatterkin._typing import TransportScheme, Splitting, CollisionModel, AngularRule, CheckGroup
from scatterkin.utils import dict_to_object, get_enum_by_name, config_hash

SAMPLE = """
alpha = 0.5
t_end = 0.1
epsilon = 0.02

[grid]
n_per_axis = 16
v_max = 7.0
angular_rule = "product_gauss"

[spatial]
n_cells = 32

[initial]
rho_modes = [[1.0, 0.1], [2.0, 0.05]]
T_modes = [[1.0, 0.05]]

[kinetic]
transport = "spectral"
splitting = "Strang"
theta = 0.5

[convergence]
epsilons = [0.1, 0.05]

[convergence.kinetic]
collision_model = "nonlinear"

[suite]
groups = ["grid", "COLLISION"]
"""


def load(text):
    return dict_to_object(toml.loads(text))


class ConfigTest(unittest.TestCase):
    def test_defaults(self):
        param = convert_config(load(""))
        self.assertEqual(param.alpha, 1.0)
        self.assertEqual(param.grid.n_per_axis, 12)
        self.assertEqual(param.convergence.kinetic.collision_model, CollisionModel.LINEARIZED)
        self.assertEqual(param.suite.groups, [CheckGroup.ALL])

    def test_sample(self):
        param = convert_config(load(SAMPLE))
        self.assertEqual(param.alpha, 0.5)
        self.assertEqual(param.grid.angular_rule, AngularRule.PRODUCT_GAUSS)
        self.assertEqual(param.spatial.grid().n_cells, 32)
        self.assertEqual(param.kinetic.transport, TransportScheme.SPECTRAL)
        self.assertEqual(param.kinetic.splitting, Splitting.STRANG)
        self.assertEqual(param.kinetic.theta, 0.5)
        self.assertEqual(param.convergence.kinetic.collision_model, CollisionModel.NONLINEAR)
        self.assertEqual(param.convergence.epsilons, [0.1, 0.05])
        self.assertEqual(param.suite.groups, [CheckGroup.GRID, CheckGroup.COLLISION])
        rho_amp, T_amp = param.initial.max_relative_amplitude()
        self.assertAlmostEqual(rho_amp, 0.15)
        self.assertAlmostEqual(T_amp, 0.05)

    def test_hash(self):
        a, b = load(SAMPLE), load(SAMPLE)
        self.assertEqual(config_hash(a), config_hash(b))
        self.assertEqual(convert_config(a).config_hash, config_hash(b))
        self.assertNotEqual(config_hash(load("alpha = 0.4")), config_hash(load("alpha = 0.5")))

    def test_invalid(self):
        for text in ["alpha = 0.0",
                     "alpha = -1.0",
                     "[grid]\nn_per_axis = 9",
                     "[grid]\nn_per_axis = 6",
                     "[grid]\nangular_order = 3",
                     "[spatial]\ndim = 4",
                     "[initial]\nrho_modes = [[1.0, 1.2]]",
                     "[kinetic]\ntheta = 0.2",
                     "[kinetic]\ntransport = \"semi_lagrangian\"",
                     "[convergence]\nepsilons = []",
                     "[convergence]\npseudo_inverse = \"lu\"",
                     "[suite]\ngroups = [\"everything\"]"]:
            with self.assertRaises(ConfigError, msg=text):
                convert_config(load(text))

    def test_sample_configs(self):
        folder = os.path.join(os.path.dirname(__file__), "..", "samples", "config")
        names = sorted(name for name in os.listdir(folder) if name.endswith(".toml"))
        self.assertEqual(names, ["convergence.toml", "hydro.toml", "suite.toml", "sweep.toml"])
        params = {name: convert_config(dict_to_object(toml.load(os.path.join(folder, name)))) for name in names}
        self.assertEqual(params["convergence.toml"].initial.rho_modes, [[1.0, 0.1]])
        self.assertEqual(params["convergence.toml"].convergence.kinetic.collision_model, CollisionModel.LINEARIZED)
        self.assertEqual(len(params["hydro.toml"].hydro.sample_times), 5)
        self.assertEqual(params["suite.toml"].suite.groups, [CheckGroup.ALL, CheckGroup.EXTENDED])
        self.assertEqual(params["sweep.toml"].convergence.amplitudes, [0.25, 0.5, 1.0])

    def test_fractional_wavenumber(self):
        with self.assertRaises(ConfigError):
            convert_config(load("[initial]\nrho_modes = [[1.5, 0.1]]"))

    def test_enum_by_name(self):
        self.assertEqual(get_enum_by_name(TransportScheme, "upwind"), TransportScheme.UPWIND)
        self.assertEqual(get_enum_by_name(TransportScheme, "Upwind"), TransportScheme.UPWIND)
        with self.assertRaises(ConfigError):
            get_enum_by_name(TransportScheme, "weno")
