import os
import tempfile
import time
import unittest

import numpy as np
import orjson

from scatterkin import assemble_L, build_null_basis, pseudo_inverse, spectral_gap, KineticError, ConvergenceError, \
    MacroFields, OperatorFamily, maxwellian_values, q_b, build_tables
from scatterkin.linops import scale_operator, project_null, cancellation_check, eigenvalues, kernel_dimension, \
    collision_frequency_bounds, export_spectrum, ProjectedConjugateGradient
from tests.common import small_grid, small_operator, weighted_norm


class LinearizedOperatorTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        t1 = time.time()
        cls.g, cls.tables = small_grid()
        cls.L, cls.basis = small_operator()
        print(f"operator {cls.L}, time : {time.time() - t1}s")
        cls.rng = np.random.default_rng(2024)

    def test_symmetric(self):
        self.assertTrue(np.array_equal(self.L.matrix, self.L.matrix.T))
        f, h = self.rng.standard_normal((2, self.g.size))
        self.assertAlmostEqual(self.L.quadratic_form(f, h), self.L.quadratic_form(h, f),
                               delta=1e-10 * weighted_norm(f, self.g) * weighted_norm(h, self.g))
        self.assertLess(self.L.symmetry_defect, 1e-6)

    def test_matches_collision_operator(self):
        # L f = -mu^(-1/2) [2 q_b(mu, sqrt(mu) f) + alpha q_d(sqrt(mu) f)]
        f = self.rng.standard_normal(self.g.size)
        mu = self.L.sqrt_mu ** 2
        F = self.L.sqrt_mu * f
        expected = -(2 * q_b(mu, F, self.tables.binary, self.g)
                     + self.L.alpha * (self.tables.scatter.matrix() @ F)) / self.L.sqrt_mu
        self.assertTrue(np.allclose(self.L.apply(f), expected, atol=1e-10 * np.max(np.abs(expected))))

    def test_null_space(self):
        for psi in (self.basis.psi_m, self.basis.psi_e):
            self.assertLess(weighted_norm(self.L.apply(psi), self.g), 1e-10)
        for psi in self.basis.psi_momentum:
            self.assertLess(weighted_norm(psi @ self.L.matrix_b, self.g), 1e-10)
            self.assertGreater(self.L.quadratic_form(psi), 0)

    def test_orthonormal_basis(self):
        modes = self.basis.modes
        gram = (modes * self.g.weights) @ modes.T
        self.assertTrue(np.allclose(gram, np.eye(2), atol=1e-12))
        P = self.basis.projector_matrix()
        f = self.rng.standard_normal(self.g.size)
        pf, rest = project_null(f, self.basis)
        self.assertTrue(np.allclose(f @ P.T, pf))
        self.assertTrue(np.allclose(pf + rest, f))

    def test_nonnegative(self):
        spectrum = eigenvalues(self.L)
        self.assertGreater(spectrum[0], -1e-8 * spectrum[-1])
        self.assertGreaterEqual(kernel_dimension(self.L), 2)

    def test_spectral_gap(self):
        gap, lambda_d = spectral_gap(self.L, self.basis)
        print(f"gap {gap}, lambda_d {lambda_d}")
        self.assertGreater(gap, 0)
        self.assertGreater(lambda_d, 0)

    def test_lambda_d_linear_in_alpha(self):
        _, reference = spectral_gap(self.L, self.basis)
        for alpha in (0.1, 0.5, 2.0):
            scaled, _ = scale_operator(self.L, self.g, 1.0, 1.0, alpha)
            _, lambda_d = spectral_gap(scaled, self.basis)
            self.assertAlmostEqual(lambda_d / alpha, reference, delta=1e-8 * abs(reference))

    def test_scaling_law(self):
        T = 1.4
        g_scaled = self.g.scaled(np.sqrt(T))
        direct = assemble_L(1.3, T, 0.8, g_scaled, build_tables(g_scaled))
        predicted, g_predicted = scale_operator(self.L, self.g, 1.3, T, 0.8)
        self.assertEqual(g_predicted.grid_hash, g_scaled.grid_hash)
        scale = np.max(np.abs(direct.matrix))
        self.assertLess(np.max(np.abs(direct.matrix - predicted.matrix)) / scale, 1e-10)

    def test_collision_frequency(self):
        nu_0, nu_1 = collision_frequency_bounds(self.L, self.g)
        self.assertGreater(nu_0, 0)
        self.assertGreaterEqual(nu_1, nu_0)

    def test_cancellation(self):
        point = MacroFields(1.0, None, 1.0)
        grad_rho, grad_T = np.array([0.3]), np.array([-0.2])
        for psi in (self.basis.psi_m, self.basis.psi_e, self.basis.psi_momentum[1]):
            self.assertLess(abs(cancellation_check(point, grad_rho, grad_T, psi, self.g)), 1e-12)
        mixed = self.basis.psi_m + 0.1 * self.basis.psi_momentum[0]
        self.assertGreater(abs(cancellation_check(point, grad_rho, grad_T, mixed, self.g)), 1e-6)

    def test_invalid(self):
        with self.assertRaises(KineticError):
            assemble_L(1.0, 1.0, 0.0, self.g, self.tables)
        with self.assertRaises(KineticError):
            assemble_L(-1.0, 1.0, 1.0, self.g, self.tables)
        with self.assertRaises(KineticError):
            scale_operator(self.L, self.g, 1.0, 1.0, -1.0)

    def test_export_spectrum(self):
        with tempfile.TemporaryDirectory() as folder:
            path = os.path.join(folder, "spectrum.json")
            export_spectrum(self.L, path)
            with open(path, "rb") as infile:
                data = orjson.loads(infile.read())
            self.assertEqual(data["grid_hash"], self.g.grid_hash)


class PseudoInverseTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.g, cls.tables = small_grid()
        cls.L, cls.basis = small_operator()
        cls.rng = np.random.default_rng(99)

    def test_round_trip(self):
        target = project_null(self.rng.standard_normal((2, self.g.size)), self.basis)[1]
        rhs = self.L.apply(target)
        for method, tol in (("direct", 1e-8), ("cg", 1e-5)):
            x = pseudo_inverse(self.L, rhs, self.basis, method=method)
            self.assertEqual(x.shape, rhs.shape)
            for a, b in zip(x, target):
                self.assertLess(weighted_norm(a - b, self.g) / weighted_norm(b, self.g), tol)
            self.assertTrue(np.allclose(project_null(x, self.basis)[0], 0, atol=1e-10))

    def test_methods_agree(self):
        rhs = self.g.nodes[:, 0] * self.L.sqrt_mu
        cg = pseudo_inverse(self.L, rhs, self.basis)
        direct = pseudo_inverse(self.L, rhs, self.basis, method="direct")
        self.assertLess(weighted_norm(cg - direct, self.g) / weighted_norm(direct, self.g), 1e-5)

    def test_not_solvable(self):
        with self.assertRaises(KineticError):
            pseudo_inverse(self.L, self.L.sqrt_mu, self.basis)

    def test_unknown_method(self):
        rhs = self.g.nodes[:, 0] * self.L.sqrt_mu
        with self.assertRaises(KineticError):
            pseudo_inverse(self.L, rhs, self.basis, method="lu")

    def test_iteration_cap(self):
        rhs = self.g.nodes[:, 0] * self.L.sqrt_mu
        with self.assertRaises(ConvergenceError) as context:
            pseudo_inverse(self.L, rhs, self.basis, max_iter=1)
        self.assertEqual(context.exception.iterations, 1)

    def test_projected_cg_block(self):
        solver = ProjectedConjugateGradient(self.L, self.basis)
        rhs = np.array([self.g.nodes[:, 0] * self.L.sqrt_mu, np.zeros(self.g.size)])
        x, iterations, residual = solver.solve(rhs, 10 * self.g.size, 1e-10)
        self.assertTrue(np.all(x[1] == 0))
        self.assertLess(residual[0], 1e-8)


class OperatorFamilyTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.g, cls.tables = small_grid()
        cls.family = OperatorFamily.around(cls.g, cls.tables, 1.0, 0.9, 1.1, 3)

    def test_ladder_nodes_exact(self):
        op = self.family.operator(1.2, 1.0)
        direct = assemble_L(1.2, 1.0, 1.0, self.g, self.tables)
        self.assertTrue(np.allclose(op.matrix, direct.matrix, atol=1e-12 * np.max(np.abs(direct.matrix))))
        self.assertTrue(self.family.covers(0.95, 1.05))
        self.assertFalse(self.family.covers(0.5, 1.05))

    def test_apply_matches_operator(self):
        rng = np.random.default_rng(1)
        values = rng.standard_normal((2, self.g.size))
        rho, T = np.array([1.0, 1.1]), np.array([0.9, 1.1])
        out = self.family.apply(values, rho, T)
        for c in range(2):
            expected = values[c] @ self.family.f_matrix(rho[c], T[c]).T
            self.assertTrue(np.allclose(out[c], expected))

    def test_outside_ladder(self):
        with self.assertLogs("scatterkin.linops.assemble", level="WARNING"):
            op = self.family.operator(1.0, 1.5)
        self.assertAlmostEqual(op.T, 1.5)

    def test_invalid_state(self):
        with self.assertRaises(KineticError):
            self.family.operator(0.0, 1.0)
