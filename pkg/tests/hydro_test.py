import os
import tempfile
import time
import unittest

import numpy as np
import pandas as pd

from scatterkin import tabulate, HydroState, hydro_step, hydro_solve, SpatialGrid, KineticError, OperatorFamily, \
    maxwellian_values
from scatterkin.grid import MomentWeight, moment
from scatterkin.hydro import StepControl, stability_bound, linear_mode_oracle, hilbert_F1, compatibility_defect, \
    regularity_norms
from tests.common import small_grid


def mode_state(grid, rho_amplitude, T_amplitude=0.0):
    x = grid.centers()[0]
    return HydroState(1 + rho_amplitude * np.cos(2 * np.pi * x), 1 + T_amplitude * np.sin(2 * np.pi * x))


class HydroStepTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.g, cls.tables = small_grid()
        cls.table = tabulate((0.85, 1.15), (0.9, 1.1), 1.0, 3, cls.g, cls.tables)
        cls.grid = SpatialGrid(1, 16)

    def test_uniform_fixed_point(self):
        s = HydroState(np.full(self.grid.shape, 1.1), np.full(self.grid.shape, 0.95))
        new = hydro_step(s, stability_bound(s, self.table, self.grid), self.table, self.grid)
        self.assertTrue(np.array_equal(new.rho, s.rho))
        self.assertLess(np.max(np.abs(new.T - s.T)), 1e-14)

    def test_step_conservation(self):
        s = mode_state(self.grid, 0.1, 0.05)
        new = hydro_step(s, stability_bound(s, self.table, self.grid), self.table, self.grid)
        mass0, energy0 = s.totals(self.grid)
        mass1, energy1 = new.totals(self.grid)
        self.assertLess(abs(mass1 - mass0) / mass0, 1e-12)
        self.assertLess(abs(energy1 - energy0) / energy0, 1e-12)
        self.assertFalse(np.array_equal(new.rho, s.rho))

    def test_diffusion_smooths(self):
        s = mode_state(self.grid, 0.1)
        new = hydro_step(s, stability_bound(s, self.table, self.grid), self.table, self.grid)
        self.assertLess(np.max(new.rho) - np.min(new.rho), np.max(s.rho) - np.min(s.rho))

    def test_leaves_table(self):
        s = mode_state(self.grid, 0.5)
        with self.assertRaises(KineticError):
            hydro_step(s, 1e-4, self.table, self.grid)
        with self.assertLogs("scatterkin.hydro.solver", level="WARNING"):
            hydro_step(s, 1e-6, self.table, self.grid, strict=False)

    def test_invalid(self):
        s = mode_state(self.grid, 0.1)
        with self.assertRaises(KineticError):
            hydro_step(s, 0.0, self.table, self.grid)
        with self.assertRaises(KineticError):
            hydro_step(s, 1e-4, self.table, SpatialGrid(1, 8))
        with self.assertRaises(KineticError):
            HydroState(np.ones(4), np.ones(5))
        with self.assertRaises(KineticError):
            HydroState(np.ones(4), -np.ones(4)).validate()


class HydroSolveTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.g, cls.tables = small_grid()
        cls.table = tabulate((0.85, 1.15), (0.9, 1.1), 1.0, 3, cls.g, cls.tables)
        cls.grid = SpatialGrid(1, 16)

    def test_sample_times(self):
        s = mode_state(self.grid, 0.1, 0.05)
        trajectory = hydro_solve(s, 0.02, self.table, self.grid, StepControl(sample_times=[0.005, 0.01]))
        self.assertEqual([st.time for st in trajectory.states], [0.0, 0.005, 0.01, 0.02])
        self.assertAlmostEqual(trajectory.at(0.01).time, 0.01)
        self.assertLess(trajectory.mass_drift, 1e-11)
        self.assertLess(trajectory.energy_drift, 1e-11)
        self.assertEqual(len(trajectory.gradient_norms), trajectory.steps + 1)
        with self.assertRaises(KineticError):
            trajectory.at(0.003)

    def test_equilibration(self):
        s = mode_state(self.grid, 0.05)
        c = self.table.points[1][1]
        slowest = float(np.min(c.parabolic_eigenvalues.real))
        k_d = 2 * np.sin(np.pi * self.grid.dx) / self.grid.dx
        t_end = np.log(1e3) / (k_d ** 2 * slowest)
        t1 = time.time()
        trajectory = hydro_solve(s, t_end, self.table, self.grid)
        print(f"equilibration to t={t_end} in {trajectory.steps} steps, time : {time.time() - t1}s")
        final = trajectory.final
        self.assertLess(np.max(np.abs(final.rho - np.mean(final.rho))), 1e-3)
        self.assertLess(np.max(np.abs(final.T - np.mean(final.T))), 1e-3)
        norms = np.array(trajectory.gradient_norms)
        self.assertLess(norms[-1], 1e-2 * norms[0])
        mass0, energy0 = s.totals(self.grid)
        self.assertAlmostEqual(np.mean(final.rho), mass0, delta=1e-12)
        self.assertAlmostEqual(1.5 * np.mean(final.rho * final.T), energy0, delta=1e-12)

    def test_linear_mode(self):
        amplitude = 1e-3
        s = mode_state(self.grid, amplitude)
        c = self.table.points[1][1]
        k_d = 2 * np.sin(np.pi * self.grid.dx) / self.grid.dx
        t_end = 0.5 / (k_d ** 2 * float(np.max(c.parabolic_eigenvalues.real)))
        trajectory = hydro_solve(s, t_end, self.table, self.grid, StepControl(cfl=0.05))
        x = self.grid.centers()[0]
        measured = 2 * np.mean((trajectory.final.rho - 1) * np.cos(2 * np.pi * x))
        predicted = linear_mode_oracle(1.0, 1.0, [amplitude, 1.5 * amplitude], 2 * np.pi, t_end, self.table,
                                       self.grid)
        self.assertLess(abs(measured - predicted[0]) / abs(predicted[0]), 1e-2)

    def test_second_order_refinement(self):
        amplitude = 1e-4
        c = self.table.points[1][1]
        t_end = 0.5 / ((2 * np.pi) ** 2 * float(np.max(c.parabolic_eigenvalues.real)))
        # the fine grid wavenumber is the continuum one to 1e-8
        exact = linear_mode_oracle(1.0, 1.0, [amplitude, 1.5 * amplitude], 2 * np.pi, t_end, self.table,
                                   SpatialGrid(1, 1 << 14))[0]
        errors = []
        for n_cells in (16, 32, 64):
            grid = SpatialGrid(1, n_cells)
            trajectory = hydro_solve(mode_state(grid, amplitude), t_end, self.table, grid, StepControl(cfl=0.05))
            x = grid.centers()[0]
            measured = 2 * np.mean((trajectory.final.rho - 1) * np.cos(2 * np.pi * x))
            errors.append(abs(measured - exact) / abs(exact))
        orders = [np.log2(a / b) for a, b in zip(errors[:-1], errors[1:])]
        print(f"errors {errors}, observed orders {orders}")
        for order in orders:
            self.assertGreater(order, 1.7)
            self.assertLess(order, 2.3)

    def test_oracle_outside_table(self):
        with self.assertRaises(KineticError):
            linear_mode_oracle(2.0, 1.0, [1e-3, 0.0], 2 * np.pi, 0.01, self.table, self.grid)

    def test_regularity(self):
        first, full = regularity_norms(mode_state(self.grid, 0.1), self.grid)
        self.assertGreater(first, 0)
        self.assertGreater(full, first)
        first, full = regularity_norms(HydroState(np.ones(16), np.ones(16)), self.grid)
        self.assertEqual(full, 0)

    def test_save_csv(self):
        trajectory = hydro_solve(mode_state(self.grid, 0.1), 0.002, self.table, self.grid)
        with tempfile.TemporaryDirectory() as folder:
            path = os.path.join(folder, "hydro.csv")
            trajectory.save_csv(path)
            frame = pd.read_csv(path)
            self.assertEqual(list(frame.columns), ["time", "cell", "rho", "T", "e"])
            self.assertEqual(len(frame.index), 2 * 16)


class HilbertCorrectionTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.g, cls.tables = small_grid()
        cls.grid = SpatialGrid(1, 8)
        cls.state = mode_state(cls.grid, 0.1, 0.05)
        cls.family = OperatorFamily.around(cls.g, cls.tables, 1.0, 0.95, 1.05, 3)
        cls.f1 = hilbert_F1(cls.state, cls.family, cls.g, cls.grid)

    def test_no_mass_or_energy(self):
        values = self.f1.values
        mu = maxwellian_values(self.state.rho, None, self.state.T, self.g, warn=False)
        scale = np.max(np.abs(values) @ self.g.weights)
        self.assertLess(np.max(np.abs(moment(values, MomentWeight.MASS, self.g))), 1e-10 * scale)
        self.assertLess(np.max(np.abs(moment(values, MomentWeight.ENERGY, self.g))), 1e-9 * scale)
        self.assertEqual(values.shape, mu.shape)

    def test_carries_flux(self):
        flux = moment(self.f1.values, MomentWeight.MOMENTUM_X, self.g)
        self.assertGreater(np.max(np.abs(flux)), 0)
        # the flux runs down the density gradient
        grad_rho = self.grid.gradient(self.state.rho)[0]
        strongest = int(np.argmax(np.abs(grad_rho)))
        self.assertLess(flux[strongest] * grad_rho[strongest], 0)

    def test_solves_linear_problem(self):
        cell = 2
        rho, T = float(self.state.rho[cell]), float(self.state.T[cell])
        op = self.family.operator(rho, T)
        grad_rho = self.grid.gradient(self.state.rho)[0][cell]
        grad_T = self.grid.gradient(self.state.T)[0][cell]
        v = self.g.nodes[:, 0]
        rhs = v * op.sqrt_mu * (grad_rho / rho + (self.g.speed_sq / (2 * T) - 1.5) * grad_T / T)
        f = -self.f1.values[cell] / op.sqrt_mu
        self.assertLess(np.max(np.abs(op.apply(f) - rhs)), 1e-8 * np.max(np.abs(rhs)))

    def test_compatibility(self):
        self.assertLess(compatibility_defect(self.state, self.g, self.grid), 1e-12)

    def test_uniform_state(self):
        uniform = HydroState(np.ones(self.grid.shape), np.ones(self.grid.shape))
        f1 = hilbert_F1(uniform, self.family, self.g, self.grid)
        self.assertTrue(np.all(f1.values == 0))
