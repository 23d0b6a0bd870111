import os
import tempfile
import unittest

import numpy as np

from scatterkin import build_velocity_grid, maxwellian_values, macro_from_distribution, moment, KineticError, \
    AngularRule, SpatialGrid, DistributionField
from scatterkin.grid import MomentWeight, load_grid_json, interpolation_stencil


class VelocityGridTest(unittest.TestCase):
    def test_node_layout(self):
        g = build_velocity_grid(8, 4.0)
        self.assertEqual(g.size, 512)
        self.assertAlmostEqual(g.spacing, 1.0)
        # midpoint lattice, symmetric around the origin
        self.assertAlmostEqual(np.max(g.nodes), 3.5)
        self.assertAlmostEqual(np.min(g.nodes), -3.5)
        self.assertTrue(np.allclose(np.sum(g.nodes, axis=0), 0))
        self.assertAlmostEqual(np.sum(g.weights), 8.0 ** 3)

    def test_flat_index(self):
        g = build_velocity_grid(8, 4.0)
        self.assertTrue(np.array_equal(g.flat_index(g.indices), np.arange(g.size)))

    def test_invalid_size(self):
        with self.assertRaises(KineticError):
            build_velocity_grid(7, 4.0)
        with self.assertRaises(KineticError):
            build_velocity_grid(6, 4.0)
        with self.assertRaises(KineticError):
            build_velocity_grid(8, -1.0)

    def test_angular_rules(self):
        for rule in (AngularRule.LEBEDEV, AngularRule.PRODUCT_GAUSS):
            g = build_velocity_grid(8, 4.0, rule, 7)
            self.assertAlmostEqual(np.sum(g.angular_weights), 4 * np.pi)
            self.assertAlmostEqual(np.sum(g.direction_weights), 4 * np.pi)
            # x^2 is integrated exactly on the sphere
            self.assertAlmostEqual(np.sum(g.angular_weights * g.angular_nodes[:, 0] ** 2), 4 * np.pi / 3)

    def test_hash_and_pinning(self):
        g = build_velocity_grid(8, 4.0)
        self.assertEqual(g.grid_hash, build_velocity_grid(8, 4.0).grid_hash)
        self.assertNotEqual(g.grid_hash, build_velocity_grid(10, 4.0).grid_hash)
        with tempfile.TemporaryDirectory() as folder:
            path = os.path.join(folder, "grid.json")
            g.save_json(path)
            self.assertEqual(load_grid_json(path).grid_hash, g.grid_hash)

    def test_scaled(self):
        g = build_velocity_grid(8, 4.0)
        s = g.scaled(2.0)
        self.assertAlmostEqual(s.v_max, 8.0)
        self.assertTrue(np.allclose(s.nodes, 2 * g.nodes))
        self.assertAlmostEqual(np.sum(s.weights), 8 * np.sum(g.weights))

    def test_interpolation_stencil(self):
        g = build_velocity_grid(8, 4.0)
        inside, idx, wts = interpolation_stencil(g, np.array([[1.5, 2.0, 3.25], [7.5, 0, 0]]))
        self.assertTrue(inside[0])
        self.assertFalse(inside[1])
        self.assertAlmostEqual(np.sum(wts[0]), 1.0)
        point = np.sum(wts[0][:, None] * g.indices[idx[0]], axis=0)
        self.assertTrue(np.allclose(point, [1.5, 2.0, 3.25]))


class MomentTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.g = build_velocity_grid(24, 8.0)

    def test_maxwellian_moments(self):
        rho, u, T = 1.3, np.array([0.2, -0.1, 0.05]), 0.8
        mu = maxwellian_values(rho, u, T, self.g)
        m = macro_from_distribution(mu, self.g)
        self.assertAlmostEqual(float(m.rho), rho, delta=1e-8)
        self.assertTrue(np.allclose(m.u, u, atol=1e-8))
        self.assertAlmostEqual(float(m.T), T, delta=1e-8)
        energy = moment(mu, MomentWeight.ENERGY, self.g) / 2
        self.assertAlmostEqual(energy, 1.5 * rho * T + 0.5 * rho * np.sum(u ** 2), delta=1e-8)

    def test_cell_batch(self):
        rho = np.array([1.0, 2.0])
        T = np.array([0.5, 1.5])
        mu = maxwellian_values(rho, None, T, self.g)
        self.assertEqual(mu.shape, (2, self.g.size))
        m = macro_from_distribution(mu, self.g)
        self.assertTrue(np.allclose(m.rho, rho, atol=1e-8))
        self.assertTrue(np.allclose(m.T, T, atol=1e-8))

    def test_truncation_warning(self):
        g = build_velocity_grid(8, 4.0)
        with self.assertLogs("scatterkin.grid.moments", level="WARNING"):
            maxwellian_values(1.0, None, 1.0, g)

    def test_invalid_maxwellian(self):
        with self.assertRaises(KineticError):
            maxwellian_values(-1.0, None, 1.0, self.g)
        with self.assertRaises(KineticError):
            maxwellian_values(1.0, None, 0.0, self.g)


class SpatialGridTest(unittest.TestCase):
    def test_layout(self):
        grid = SpatialGrid(2, 16, 2.0)
        self.assertEqual(grid.shape, (16, 16))
        self.assertAlmostEqual(grid.dx, 0.125)
        self.assertAlmostEqual(grid.cell_volume, 0.125 ** 2)
        self.assertEqual(grid.centers().shape, (2, 16, 16))

    def test_gradient_of_mode(self):
        grid = SpatialGrid(1, 64)
        x = grid.centers()[0]
        values = np.sin(2 * np.pi * x)
        expected = np.sin(2 * np.pi * grid.dx) / grid.dx * np.cos(2 * np.pi * x)
        self.assertTrue(np.allclose(grid.gradient(values)[0], expected))

    def test_invalid(self):
        with self.assertRaises(KineticError):
            SpatialGrid(4, 8)
        with self.assertRaises(KineticError):
            SpatialGrid(1, 0)

    def test_distribution_field(self):
        g = build_velocity_grid(8, 5.5)
        grid = SpatialGrid(1, 4)
        mu = maxwellian_values(np.ones(4), None, np.ones(4), g, warn=False)
        F = DistributionField(mu, 0.1)
        self.assertEqual(F.spatial_shape, (4,))
        mass, energy = F.totals(g, grid)
        self.assertAlmostEqual(mass, 1.0, delta=1e-3)
        self.assertAlmostEqual(energy, 1.5, delta=1e-2)
        with self.assertRaises(KineticError):
            DistributionField(np.full((4, g.size), np.nan))
