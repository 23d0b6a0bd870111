import math
import os
import tempfile
import time
import unittest

import numpy as np

from scatterkin import SpatialGrid, KineticError, OperatorFamily, HydroState, maxwellian_values, \
    macro_from_distribution, DistributionField
from scatterkin.collision import entropy
from scatterkin._typing import TransportScheme, Splitting, CollisionModel, Invariants
from scatterkin.kinetic import KineticParam, KineticContext, kinetic_step, kinetic_solve, error_functional, \
    well_prepared_initial, upwind_transport, spectral_transport, save_snapshot, load_snapshot, CollisionSolver, \
    clamp_positive
from tests.common import small_grid


def uniform_field(grid, g, rho=1.0, T=1.0, u=None):
    rho = np.full(grid.shape, rho)
    T = np.full(grid.shape, T)
    u = None if u is None else np.broadcast_to(np.asarray(u, dtype=float), grid.shape + (3,))
    return DistributionField(maxwellian_values(rho, u, T, g, warn=False), 1.0, 0.0)


class KineticParamTest(unittest.TestCase):
    def test_theta_range(self):
        KineticParam(theta=0.5)
        with self.assertRaises(KineticError):
            KineticParam(theta=0.3)
        with self.assertRaises(KineticError):
            KineticParam(theta=1.2)

    def test_cfl_positive(self):
        with self.assertRaises(KineticError):
            KineticParam(cfl=0)

    def test_to_dict(self):
        d = KineticParam(transport=TransportScheme.SPECTRAL).to_dict()
        self.assertEqual(d["transport"], "SPECTRAL")
        self.assertEqual(d["theta"], 1.0)


class StreamingTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.g, cls.tables = small_grid()
        cls.grid = SpatialGrid(1, 16)

    def test_upwind_cfl(self):
        F = uniform_field(self.grid, self.g)
        with self.assertRaises(KineticError):
            upwind_transport(F.values, 1.0, 0.01, self.g, self.grid)

    def test_uniform_field_unchanged(self):
        F = uniform_field(self.grid, self.g)
        dt = 0.5 * self.grid.dx / self.g.v_max
        self.assertLess(np.max(np.abs(upwind_transport(F.values, dt, 1.0, self.g, self.grid) - F.values)), 1e-14)
        self.assertLess(np.max(np.abs(spectral_transport(F.values, 0.3, 1.0, self.g, self.grid) - F.values)), 1e-12)

    def test_mass_per_velocity(self):
        x = self.grid.centers()[0]
        rho = 1 + 0.2 * np.cos(2 * np.pi * x)
        values = maxwellian_values(rho, None, np.ones_like(rho), self.g, warn=False)
        dt = 0.5 * self.grid.dx / self.g.v_max
        for moved in (upwind_transport(values, dt, 1.0, self.g, self.grid),
                      spectral_transport(values, dt, 1.0, self.g, self.grid)):
            self.assertLess(np.max(np.abs(moved.sum(axis=0) - values.sum(axis=0))), 1e-12)
            self.assertFalse(np.allclose(moved, values))


class KineticStepTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.g, cls.tables = small_grid()
        cls.grid = SpatialGrid(1, 4)

    def test_equilibrium_fixed_point(self):
        F = uniform_field(self.grid, self.g, 1.0, 1.0)
        for splitting in (Splitting.LIE, Splitting.STRANG):
            param = KineticParam(transport=TransportScheme.SPECTRAL, splitting=splitting)
            ctx = KineticContext.build(self.g, self.grid, self.tables, 1.0, param)
            new, diagnostics = kinetic_step(F, 0.01, ctx)
            print(f"{splitting}: {diagnostics.iterations} iterations")
            self.assertLess(np.max(np.abs(new.values - F.values)) / np.max(F.values), 1e-10)
            self.assertAlmostEqual(new.time, 0.01)
            self.assertEqual(diagnostics.clamped_mass_fraction, 0.0)

    def test_step_validation(self):
        param = KineticParam(transport=TransportScheme.SPECTRAL)
        ctx = KineticContext.build(self.g, self.grid, self.tables, 1.0, param)
        F = uniform_field(self.grid, self.g)
        with self.assertRaises(KineticError):
            kinetic_step(F, -0.1, ctx)
        with self.assertRaises(KineticError):
            kinetic_step(DistributionField(F.values, 0.0), 0.1, ctx)
        with self.assertRaises(KineticError):
            kinetic_step(uniform_field(SpatialGrid(1, 8), self.g), 0.1, ctx)

    def test_linearized_needs_family(self):
        param = KineticParam(collision_model=CollisionModel.LINEARIZED)
        with self.assertRaises(KineticError):
            CollisionSolver(self.g, self.tables, 1.0, param, (1.0, 1.0), family=None)


class ClampTest(unittest.TestCase):
    def test_restores_moments_without_negatives(self):
        g, _ = small_grid()
        mu = maxwellian_values(np.array([1.0, 1.2]), None, np.array([1.0, 0.9]), g, warn=False)
        values = mu.copy()
        tail = np.argsort(mu[0])[:40]
        values[0, tail] = -1e-8
        for invariants in (Invariants.MASS_ENERGY, Invariants.MASS_MOMENTUM_ENERGY):
            fixed, fraction = clamp_positive(values, invariants, g)
            self.assertGreater(fraction, 0.0)
            self.assertTrue(np.all(fixed >= 0))
            self.assertTrue(np.all(fixed[0, tail] == 0))
            self.assertTrue(np.array_equal(fixed[1], values[1]))
            before, after = values @ g.weights, fixed @ g.weights
            self.assertLess(np.max(np.abs(after - before)), 1e-13)
            before, after = values @ (g.weights * g.speed_sq), fixed @ (g.weights * g.speed_sq)
            self.assertLess(np.max(np.abs(after - before)), 1e-12)

    def test_nonnegative_unchanged(self):
        g, _ = small_grid()
        mu = maxwellian_values(1.0, None, 1.0, g, warn=False)[None, :]
        fixed, fraction = clamp_positive(mu, Invariants.MASS_ENERGY, g)
        self.assertEqual(fraction, 0.0)
        self.assertIs(fixed, mu)


class KineticSolveTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.g, cls.tables = small_grid()

    def test_homogeneous_momentum_decay(self):
        grid = SpatialGrid(1, 1)
        param = KineticParam(transport=TransportScheme.SPECTRAL)
        ctx = KineticContext.build(self.g, grid, self.tables, 1.0, param)
        F0 = uniform_field(grid, self.g, 1.0, 1.0, u=(0.3, 0.0, 0.0))
        t0 = time.time()
        trajectory = kinetic_solve(F0, 1.0, 1.0, ctx, sample_times=[0.25, 0.5, 0.75], dt=0.05)
        print(f"homogeneous run: {trajectory.steps} steps, {time.time() - t0:.2f}s")
        speeds = [abs(float(m.u[0, 0])) for m in trajectory.macro]
        print(speeds)
        self.assertEqual(len(speeds), 5)
        for before, after in zip(speeds[:-1], speeds[1:]):
            self.assertLess(after, before)
        self.assertLess(trajectory.mass_drift, 1e-10)
        self.assertLess(trajectory.energy_drift, 1e-10)
        self.assertEqual(trajectory.times, [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_linearized_conservation(self):
        grid = SpatialGrid(1, 8)
        x = grid.centers()[0]
        rho = 1 + 0.05 * np.cos(2 * np.pi * x)
        F0 = DistributionField(maxwellian_values(rho, None, np.ones_like(rho), self.g, warn=False), 0.1, 0.0)
        param = KineticParam(collision_model=CollisionModel.LINEARIZED, n_temperatures=3)
        ctx = KineticContext.build(self.g, grid, self.tables, 1.0, param, T_range=(0.95, 1.05))
        self.assertIsNotNone(ctx.family)
        trajectory = kinetic_solve(F0, 0.1, 0.01, ctx)
        self.assertGreater(trajectory.steps, 0)
        self.assertEqual(len(trajectory.snapshots), 2)
        self.assertLess(trajectory.mass_drift, 1e-10)
        self.assertLess(trajectory.energy_drift, 1e-10)
        self.assertTrue(np.all(trajectory.final.values >= 0))
        frame = trajectory.macro_dataframe()
        self.assertEqual(len(frame), 2 * grid.total_cells)
        self.assertIn("T", frame.columns)

    def test_negative_initial_field(self):
        grid = SpatialGrid(1, 1)
        ctx = KineticContext.build(self.g, grid, self.tables, 1.0, KineticParam(transport=TransportScheme.SPECTRAL))
        F0 = uniform_field(grid, self.g)
        F0.values[0, 0] = -1e-3
        with self.assertRaises(KineticError):
            kinetic_solve(F0, 1.0, 0.1, ctx)


class HomogeneousRelaxationTest(unittest.TestCase):
    def test_entropy_and_equilibrium(self):
        g, tables = small_grid()
        point = SpatialGrid(1, 1)
        ctx = KineticContext.build(g, point, tables, 1.0, KineticParam(transport=TransportScheme.SPECTRAL, tol=1e-12))
        F = DistributionField(maxwellian_values(1.0, np.array([[0.3, 0.0, 0.0]]), np.array([1.0]), g, warn=False), 1.0)
        F0 = F
        initial = macro_from_distribution(F.values, g)
        entropies = [float(entropy(F.values[0], g))]
        for _ in range(25):
            F, _ = kinetic_step(F, 0.5, ctx)
            entropies.append(float(entropy(F.values[0], g)))
        print(f"entropy {entropies[0]:.8f} -> {entropies[-1]:.8f}")
        for before, after in zip(entropies[:-1], entropies[1:]):
            self.assertLessEqual(after, before + 1e-8)
        self.assertLess(entropies[-1], entropies[0])

        final = macro_from_distribution(F.values, g)
        self.assertLess(float(np.linalg.norm(final.u[0])), 1e-3)
        self.assertAlmostEqual(float(final.rho[0]), float(initial.rho[0]), delta=1e-10)
        self.assertAlmostEqual(float(final.energy[0]), float(initial.energy[0]), delta=1e-10)
        # scatterer friction turns the bulk kinetic energy into heat
        T_rest = float(initial.T[0] + np.sum(initial.u[0] ** 2) / 3)
        self.assertAlmostEqual(float(final.T[0]), T_rest, delta=1e-4)
        rest = maxwellian_values(initial.rho, None, np.array([T_rest]), g, warn=False)
        start = np.max(np.abs(F0.values - rest))
        end = np.max(np.abs(F.values - rest))
        print(f"distance to the rest maxwellian {start:.3e} -> {end:.3e}")
        self.assertLess(end, 2e-2 * start)


class InitialDataTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.g, cls.tables = small_grid()
        cls.grid = SpatialGrid(1, 16)
        cls.family = OperatorFamily.around(cls.g, cls.tables, 1.0, 0.9, 1.1, 3)
        x = cls.grid.centers()[0]
        cls.s0 = HydroState(1 + 0.1 * np.cos(2 * np.pi * x), 1 + 0.05 * np.sin(2 * np.pi * x))

    def test_equilibrium_at_zero_epsilon(self):
        F, threshold = well_prepared_initial(self.s0, 0.0, self.g, self.grid)
        self.assertEqual(threshold, math.inf)
        self.assertEqual(F.epsilon, 0.0)
        self.assertEqual(error_functional(F, self.s0, self.g, self.grid), 0.0)

    def test_moments_preserved(self):
        F, threshold = well_prepared_initial(self.s0, 0.005, self.g, self.grid, family=self.family)
        print(f"positivity threshold {threshold:.4g}")
        self.assertGreater(threshold, 0.0)
        mu = maxwellian_values(self.s0.rho, None, self.s0.T, self.g, warn=False)
        fields, reference = macro_from_distribution(F.values, self.g), macro_from_distribution(mu, self.g)
        self.assertLess(np.max(np.abs(fields.rho - reference.rho)), 1e-10)
        self.assertLess(np.max(np.abs(fields.energy - reference.energy)), 1e-10)
        self.assertGreater(error_functional(F, self.s0, self.g, self.grid), 0.0)
        self.assertTrue(np.all(F.values > 0))

    def test_family_required(self):
        with self.assertRaises(KineticError):
            well_prepared_initial(self.s0, 0.01, self.g, self.grid)
        with self.assertRaises(KineticError):
            well_prepared_initial(self.s0, -0.01, self.g, self.grid, family=self.family)

    def test_epsilon_too_large(self):
        with self.assertRaises(KineticError):
            well_prepared_initial(self.s0, 50.0, self.g, self.grid, family=self.family)


class SnapshotTest(unittest.TestCase):
    def test_save_and_load(self):
        g, _ = small_grid()
        grid = SpatialGrid(1, 4)
        F = uniform_field(grid, g)
        F = DistributionField(F.values, 0.05, 0.3)
        with tempfile.TemporaryDirectory() as folder:
            path = os.path.join(folder, "snapshot.npz")
            save_snapshot(path, F, g, grid, {"alpha": 1.0})
            loaded, header = load_snapshot(path)
        self.assertTrue(np.array_equal(loaded.values, F.values))
        self.assertEqual(loaded.epsilon, 0.05)
        self.assertEqual(loaded.time, 0.3)
        self.assertEqual(header["alpha"], 1.0)
        self.assertEqual(header["spatial_grid"]["n_cells"], 4)
        self.assertEqual(header["velocity_grid"]["grid_hash"], g.grid_hash)
