import logging
import time
from functools import cached_property
from typing import List

import numpy as np

from .._typing import CheckGroup, CheckResult, KineticError, Invariants, TransportScheme, Splitting, \
    CollisionModel
from ..collision import build_tables, q_b, q_d, conserve_project, entropy_dissipation_b, entropy_dissipation_d, \
    entropy
from ..config import RunParam
from ..grid import build_velocity_grid, SpatialGrid, MomentWeight, MacroFields, DistributionField, moment, \
    maxwellian_values, macro_from_distribution
from ..hydro import HydroState, StepControl, hydro_step, hydro_solve, stability_bound, linear_mode_oracle
from ..kinetic import KineticParam, KineticContext, kinetic_step, kinetic_solve, well_prepared_initial
from ..linops import assemble_L, scale_operator, build_null_basis, project_null, pseudo_inverse, spectral_gap, \
    kernel_dimension, eigenvalues, cancellation_check, OperatorFamily
from ..transport import compute_coefficients, scaled_coefficients, tabulate, fluxes_gradient_form, \
    fluxes_onsager_form, onsager_matrix

ALPHA_LADDER = [1.0, 0.5, 0.25, 0.1]


def _result(name: str, group: CheckGroup, measured: float, tolerance: float, detail: str = "",
            at_least: bool = False) -> CheckResult:
    measured = float(measured)
    passed = measured >= tolerance if at_least else measured <= tolerance
    return CheckResult(name, group, bool(passed and np.isfinite(measured)), measured, float(tolerance), detail)


class SuiteEvaluator:
    """
    Property checks of every module on small grids, grouped by CheckGroup.

    Fixtures (grids, tables, operators, the transport table) are built lazily and shared between groups.
    """

    def __init__(self, param: RunParam):
        self.param = param
        self.alpha = param.alpha
        self.logger = logging.getLogger(__name__)
        self.rng = np.random.default_rng(param.seed)
        self._result: List[CheckResult] = []

    # region fixtures
    @cached_property
    def g(self):
        return build_velocity_grid(self.param.suite.n_per_axis, self.param.suite.v_max)

    @cached_property
    def tables(self):
        return build_tables(self.g, cache_dir=self.param.cache_dir or None)

    @cached_property
    def operator(self):
        return assemble_L(1.0, 1.0, self.alpha, self.g, self.tables)

    @cached_property
    def basis(self):
        return build_null_basis(self.operator, self.g)

    @cached_property
    def coefficients(self):
        return compute_coefficients(1.0, 1.0, self.alpha, self.operator, self.g, self.basis)

    @cached_property
    def table(self):
        return tabulate((0.5, 2.0), (0.5, 2.0), self.alpha, 7, self.g, self.tables)

    # endregion

    def run(self, enables: List[CheckGroup]) -> List[CheckResult]:
        if CheckGroup.ALL in enables:
            enables = [x for x in CheckGroup if x.value > 0 and (x != CheckGroup.EXTENDED or x in enables)]
        results = []
        for request in enables:
            t0 = time.time()
            match request:
                case CheckGroup.GRID:
                    group_results = self.check_grid()
                case CheckGroup.COLLISION:
                    group_results = self.check_collision()
                case CheckGroup.LINOPS:
                    group_results = self.check_linops()
                case CheckGroup.TRANSPORT:
                    group_results = self.check_transport()
                case CheckGroup.HYDRO:
                    group_results = self.check_hydro()
                case CheckGroup.KINETIC:
                    group_results = self.check_kinetic()
                case CheckGroup.EXTENDED:
                    group_results = self.check_extended()
                case _:
                    raise KineticError(f"{request} has not implied")
            self.logger.info(f"{request} checks finished, execute time {time.time() - t0:.2f}s")
            results.extend(group_results)
        self._result = results
        return results

    @property
    def result(self) -> List[CheckResult]:
        return self._result

    def check_grid(self) -> List[CheckResult]:
        group = CheckGroup.GRID
        fine = build_velocity_grid(self.param.suite.fine_n_per_axis, self.param.suite.fine_v_max)
        rho, u, T = 1.2, np.array([0.1, -0.2, 0.05]), 0.9
        mu = maxwellian_values(rho, u, T, fine)
        m = macro_from_distribution(mu, fine)
        deviation = max(abs(m.rho - rho), np.max(np.abs(m.u - u)), abs(m.T - T))
        volume = abs(np.sum(self.g.weights) - (2 * self.g.v_max) ** 3) / (2 * self.g.v_max) ** 3
        try:
            build_velocity_grid(7, 5.0)
            odd_rejected = 0.0
        except KineticError:
            odd_rejected = 1.0
        return [_result("grid.maxwellian_moments", group, deviation, 1e-8),
                _result("grid.weight_volume", group, volume, 1e-12),
                _result("grid.odd_size_rejected", group, odd_rejected, 1.0, at_least=True)]

    def check_collision(self) -> List[CheckResult]:
        group = CheckGroup.COLLISION
        g, tables = self.g, self.tables
        mu = maxwellian_values(1.0, None, 1.0, g)
        radial = np.exp(-g.speed_sq / 2) * (1 + 0.3 * g.speed_sq)
        F = mu * (1 + 0.2 * self.rng.random(g.size))
        qb = q_b(F, F, tables.binary, g)
        qd = q_d(F, tables.scatter, g)
        phi = [MomentWeight.MASS, MomentWeight.MOMENTUM_X, MomentWeight.MOMENTUM_Y, MomentWeight.MOMENTUM_Z,
               MomentWeight.ENERGY]
        projected_b = conserve_project(qb, Invariants.MASS_MOMENTUM_ENERGY, g)
        projected_d = conserve_project(qd, Invariants.MASS_ENERGY, g)
        scale_b = np.sum(g.weights * np.abs(qb)) * (1 + g.v_max ** 2)
        scale_d = np.sum(g.weights * np.abs(qd)) * (1 + g.v_max ** 2)
        moments_b = max(abs(moment(projected_b, w, g)) for w in phi) / scale_b
        moments_d = max(abs(moment(projected_d, w, g)) for w in (MomentWeight.MASS, MomentWeight.ENERGY)) / scale_d
        raw_b = max(abs(moment(qb, w, g)) for w in phi) / scale_b
        return [_result("collision.qb_equilibrium", group, np.max(np.abs(q_b(mu, mu, tables.binary, g))), 1e-6),
                _result("collision.qd_radial", group, np.max(np.abs(q_d(radial, tables.scatter, g))), 1e-6),
                _result("collision.qb_moments_projected", group, moments_b, 1e-12),
                _result("collision.qd_moments_projected", group, moments_d, 1e-12),
                _result("collision.qb_moments_raw", group, raw_b, 1e-12, detail=str(tables.binary.mode)),
                _result("collision.entropy_dissipation_b", group, entropy_dissipation_b(F, tables.binary, g), 1e-14),
                _result("collision.entropy_dissipation_d", group, entropy_dissipation_d(F, tables.scatter, g), 1e-14)]

    def check_linops(self) -> List[CheckResult]:
        group = CheckGroup.LINOPS
        g, L, basis = self.g, self.operator, self.basis
        w = g.weights
        null_residual = max(np.sqrt(np.sum(L.apply(basis.psi_m) ** 2)), np.sqrt(np.sum(L.apply(basis.psi_e) ** 2)))
        f, h = self.rng.standard_normal((2, g.size))
        norm = lambda x: np.sqrt(np.sum(w * x ** 2))
        symmetry = abs(L.quadratic_form(f, h) - L.quadratic_form(h, f)) / (norm(f) * norm(h))
        spectrum = eigenvalues(L)
        psi_x, psi_y = basis.psi_momentum[0], basis.psi_momentum[1]
        cross = abs(np.sum(w * psi_x * L.apply(psi_y)))
        diagonal = [np.sum(w * p * L.apply(p)) for p in basis.psi_momentum]
        gap, lambda_d = spectral_gap(L, basis)
        lambdas = []
        for a in (0.25, 0.5, 1.0, 2.0):
            scaled, _ = scale_operator(L, g, 1.0, 1.0, a)
            lambdas.append(spectral_gap(scaled, basis)[1] / a)
        linearity = (max(lambdas) - min(lambdas)) / abs(np.mean(lambdas))
        small, _ = scale_operator(L, g, 1.0, 1.0, 0.01)
        gap_small = spectral_gap(small, build_null_basis(small, g))[0]

        target = project_null(self.rng.standard_normal(g.size), basis)[1]
        recovered = pseudo_inverse(L, L.apply(target), basis)
        round_trip = norm(recovered - target) / norm(target)
        grad_rho, grad_T = self.rng.standard_normal(3), self.rng.standard_normal(3)
        point = MacroFields(1.0, None, 1.0)
        cancel_m = abs(cancellation_check(point, grad_rho, grad_T, basis.psi_m, g))
        cancel_e = abs(cancellation_check(point, grad_rho, grad_T, basis.psi_e, g))
        detected = abs(cancellation_check(point, grad_rho, grad_T, basis.psi_m + 1e-3 * psi_x, g))

        T_direct = 1.4
        g_scaled = g.scaled(np.sqrt(T_direct))
        direct = assemble_L(1.3, T_direct, self.alpha, g_scaled, build_tables(g_scaled))
        predicted, _ = scale_operator(L, g, 1.3, T_direct, self.alpha)
        scaling = np.max(np.abs(direct.matrix - predicted.matrix)) / np.max(np.abs(direct.matrix))
        return [_result("linops.null_residual", group, null_residual, 1e-5),
                _result("linops.symmetry", group, symmetry, 1e-8),
                _result("linops.nonnegative", group, -spectrum[0] / spectrum[-1], 1e-8),
                _result("linops.kernel_dimension", group, abs(kernel_dimension(L) - 2), 0,
                        detail=f"{kernel_dimension(L)} eigenvalues below 1e-6"),
                _result("linops.boltzmann_kernel_dimension", group, abs(kernel_dimension(L, part="b") - 5), 0),
                _result("linops.momentum_cross", group, cross, 1e-8),
                _result("linops.momentum_isotropy", group, (max(diagonal) - min(diagonal)) / abs(diagonal[0]), 1e-6),
                _result("linops.spectral_gap_positive", group, gap, 0.0, detail=f"lambda={gap:.6g}", at_least=True),
                _result("linops.lambda_d_positive", group, lambda_d, 0.0, detail=f"lambda_d={lambda_d:.6g}",
                        at_least=True),
                _result("linops.lambda_d_linear", group, linearity, 1e-6),
                _result("linops.gap_shrinks_with_alpha", group, gap - gap_small, 0.0, at_least=True,
                        detail=f"lambda(0.01)={gap_small:.6g}"),
                _result("linops.pseudo_inverse_round_trip", group, round_trip, 1e-6),
                _result("linops.cancellation_mass", group, cancel_m, 1e-10),
                _result("linops.cancellation_energy", group, cancel_e, 1e-10),
                _result("linops.cancellation_detects", group, detected, 1e-8, at_least=True),
                _result("linops.scaling_law", group, scaling, 1e-6)]

    def check_transport(self) -> List[CheckResult]:
        group = CheckGroup.TRANSPORT
        g, c = self.g, self.coefficients
        h = c.tensors["H"]
        off = np.max(np.abs(h - np.diag(np.diag(h))))
        oracle = compute_coefficients(1.0, 1.0, self.alpha, self.operator, g, self.basis, method="direct")
        heights = []
        for a in ALPHA_LADDER:
            L, _ = scale_operator(self.operator, g, 1.0, 1.0, a)
            heights.append(compute_coefficients(1.0, 1.0, a, L, g).H)
        monotone = all(b > a for a, b in zip(heights[:-1], heights[1:]))

        table = self.table
        posed = [p.well_posed for row in table.points for p in row]
        reciprocity = max(p.reciprocity_defect for row in table.points for p in row)

        rho_mid, T_mid = 1.125, 1.125
        L_mid, _ = scale_operator(self.operator, g, 1.0, 1.0, self.alpha / rho_mid)
        direct_mid = scaled_coefficients(compute_coefficients(1.0, 1.0, self.alpha / rho_mid, L_mid, g), rho_mid, T_mid)
        H_mid, _, _, _ = table.lookup(rho_mid, T_mid)
        interpolation = abs(float(H_mid) - direct_mid.H) / abs(direct_mid.H)

        x = np.linspace(0, 1, 33)
        rho = 1 + 0.2 * np.sin(2 * np.pi * x)
        T = 1 + 0.1 * np.cos(2 * np.pi * x)
        grad_rho = 0.4 * np.pi * np.cos(2 * np.pi * x)
        grad_T = -0.2 * np.pi * np.sin(2 * np.pi * x)
        H, H_prime, H1_prime, _ = table.lookup(rho, T)
        gradient = fluxes_gradient_form(H, H_prime, H1_prime, rho, T, grad_rho, grad_T)
        local = np.array([onsager_matrix(a, b, b, d, t) for a, b, d, t in zip(H, H_prime, H1_prime, T)])
        onsager = fluxes_onsager_form(local, rho, T, grad_rho, grad_T)
        scale = max(np.max(np.abs(gradient[0])), np.max(np.abs(gradient[1])))
        forms = max(np.max(np.abs(a - b)) for a, b in zip(gradient, onsager)) / scale
        return [_result("transport.off_diagonal", group, off / abs(c.H), 1e-8),
                _result("transport.anisotropy", group, c.anisotropy_defect, 1e-6),
                _result("transport.reciprocity", group, c.reciprocity_defect, 1e-6),
                _result("transport.cross_identity", group, abs(c.H_prime_a - c.H_prime_b), 1e-8),
                _result("transport.direct_oracle", group, abs(c.H - oracle.H) / abs(oracle.H), 1e-8),
                _result("transport.well_posed", group, float(not all(posed)), 0.0,
                        detail=f"{sum(posed)}/{len(posed)} table points"),
                _result("transport.table_reciprocity", group, reciprocity, 1e-6),
                _result("transport.divergence_monotone", group, float(not monotone), 0.0,
                        detail=", ".join(f"H({a})={v:.6g}" for a, v in zip(ALPHA_LADDER, heights))),
                _result("transport.divergence_ratio", group, heights[-1] / heights[0], 3.0, at_least=True),
                _result("transport.interpolation_midpoint", group, interpolation, 0.01),
                _result("transport.flux_forms", group, forms, 1e-10),
                _result("transport.displayed_relation_defect", group, c.displayed_relation_defect, np.inf,
                        detail="deviation of the displayed closed forms, reported only")]

    def check_hydro(self) -> List[CheckResult]:
        group = CheckGroup.HYDRO
        table = self.table
        grid = SpatialGrid(1, 32)
        x = grid.centers()[0]
        uniform = HydroState(np.full(grid.shape, 1.2), np.full(grid.shape, 0.9))
        stepped = hydro_step(uniform, stability_bound(uniform, table, grid), table, grid)
        fixed = max(np.max(np.abs(stepped.rho - uniform.rho)), np.max(np.abs(stepped.T - uniform.T)))

        perturbed = HydroState(1 + 0.1 * np.cos(2 * np.pi * x), 1 + 0.05 * np.sin(2 * np.pi * x))
        one = hydro_step(perturbed, stability_bound(perturbed, table, grid), table, grid)
        mass0, energy0 = perturbed.totals(grid)
        mass1, energy1 = one.totals(grid)
        step_drift = max(abs(mass1 - mass0) / mass0, abs(energy1 - energy0) / energy0)

        c = table.points[2][2]
        k_d = 2 * np.sin(np.pi * grid.dx) / grid.dx
        slowest = float(np.min(c.parabolic_eigenvalues.real))
        t_end = 1.2 * np.log(1e6) / (k_d ** 2 * slowest)
        trajectory = hydro_solve(perturbed, t_end, table, grid)
        final = trajectory.final
        spread = max(np.max(np.abs(final.rho - np.mean(final.rho))), np.max(np.abs(final.T - np.mean(final.T))))
        norms = np.array(trajectory.gradient_norms)
        tail = norms[len(norms) // 2:]
        monotone = bool(np.all(np.diff(tail) <= 1e-14 * tail[:-1]))

        amplitude = 1e-3
        small = HydroState(1 + amplitude * np.cos(2 * np.pi * x), np.ones(grid.shape))
        t_mode = 1.0 / (k_d ** 2 * float(np.max(c.parabolic_eigenvalues.real)))
        run = hydro_solve(small, t_mode, table, grid, StepControl(cfl=0.25))
        measured = 2 * np.mean((run.final.rho - 1) * np.cos(2 * np.pi * x))
        predicted = linear_mode_oracle(1.0, 1.0, [amplitude, 1.5 * amplitude], 2 * np.pi, t_mode, table, grid)[0]
        dispersion = abs(measured - predicted) / abs(predicted)
        return [_result("hydro.uniform_fixed_point", group, fixed, 1e-14),
                _result("hydro.step_conservation", group, step_drift, 1e-12),
                _result("hydro.run_conservation", group, max(trajectory.mass_drift, trajectory.energy_drift), 1e-9),
                _result("hydro.equilibration", group, spread, 1e-6, detail=f"t_end={t_end:.4g}"),
                _result("hydro.gradient_decay", group, float(not monotone), 0.0),
                _result("hydro.dispersion", group, dispersion, 0.02,
                        detail=f"mode amplitude {measured:.6g} vs {predicted:.6g}")]

    def check_kinetic(self) -> List[CheckResult]:
        group = CheckGroup.KINETIC
        g, tables = self.g, self.tables
        grid = SpatialGrid(1, 8)
        literal = KineticParam()
        ctx = KineticContext.build(g, grid, tables, self.alpha, literal)
        mu = maxwellian_values(1.0, None, 1.0, g)
        steady = 0.0
        for epsilon in (0.1, 0.025):
            F = DistributionField(np.tile(mu, grid.shape + (1,)), epsilon)
            stepped, _ = kinetic_step(F, ctx.nominal_dt(epsilon), ctx)
            steady = max(steady, float(np.max(np.abs(stepped.values - F.values))))

        point = SpatialGrid(1, 1)
        tight = KineticParam(transport=TransportScheme.SPECTRAL, tol=1e-12)
        homogeneous = KineticContext.build(g, point, tables, self.alpha, tight)
        F = DistributionField(maxwellian_values(1.0, np.array([[0.3, 0.0, 0.0]]), np.array([1.0]), g), 1.0)
        speeds, entropies = [0.3], [float(entropy(F.values[0], g))]
        for _ in range(25):
            F, _ = kinetic_step(F, 0.5, homogeneous)
            speeds.append(float(np.linalg.norm(macro_from_distribution(F.values, g).u[0])))
            entropies.append(float(entropy(F.values[0], g)))
        decay_monotone = all(b <= a + 1e-14 for a, b in zip(speeds[:-1], speeds[1:]))
        entropy_growth = max(np.diff(entropies))

        cells = SpatialGrid(1, 16)
        x = cells.centers()[0]
        state = HydroState(1 + 0.1 * np.cos(2 * np.pi * x), np.ones(cells.shape))
        linearized = KineticParam(collision_model=CollisionModel.LINEARIZED)
        family = OperatorFamily.around(g, tables, self.alpha, 1.0, 1.0)
        run_ctx = KineticContext.build(g, cells, tables, self.alpha, linearized, family=family)
        F0, _ = well_prepared_initial(state, 0.0, g, cells)
        run = kinetic_solve(DistributionField(F0.values, 0.1), 0.1, 5 * run_ctx.nominal_dt(0.1), run_ctx)
        return [_result("kinetic.equilibrium_fixed_point", group, steady, 1e-7),
                _result("kinetic.momentum_decay_monotone", group, float(not decay_monotone), 0.0),
                _result("kinetic.momentum_final", group, speeds[-1], 1e-3),
                _result("kinetic.entropy_non_increasing", group, entropy_growth, 1e-8),
                _result("kinetic.conservation", group, max(run.mass_drift, run.energy_drift), 1e-8)]

    def check_extended(self) -> List[CheckResult]:
        group = CheckGroup.EXTENDED
        heights = []
        for n in (12, 16):
            g = build_velocity_grid(n, self.param.grid.v_max)
            L = assemble_L(1.0, 1.0, self.alpha, g, build_tables(g, cache_dir=self.param.cache_dir or None))
            heights.append(compute_coefficients(1.0, 1.0, self.alpha, L, g).H)
        refinement = abs(heights[0] - heights[1]) / abs(heights[1])

        g, tables = self.g, self.tables
        scheme = KineticParam(transport=TransportScheme.SPECTRAL, splitting=Splitting.STRANG, theta=0.5,
                              collision_model=CollisionModel.LINEARIZED)
        family = OperatorFamily.around(g, tables, self.alpha, 0.9, 1.1, 3)
        errors = []
        for n_cells in (32, 64):
            grid = SpatialGrid(1, n_cells)
            x = grid.centers()[0]
            state = HydroState(1 + 0.1 * np.cos(2 * np.pi * x), np.ones(grid.shape))
            hydro = hydro_solve(state, 0.02, self.table, grid)
            F0, _ = well_prepared_initial(state, 0.1, g, grid, family)
            ctx = KineticContext.build(g, grid, tables, self.alpha, scheme, family=family)
            errors.append(kinetic_solve(F0, 0.1, 0.02, ctx, hydro).errors[-1])
        spatial = abs(errors[0] - errors[1]) / abs(errors[1])
        return [_result("extended.velocity_refinement", group, refinement, 0.02,
                        detail=f"H(12)={heights[0]:.6g}, H(16)={heights[1]:.6g}"),
                _result("extended.spatial_refinement", group, spatial, 0.1,
                        detail=f"errors {errors[0]:.4g}, {errors[1]:.4g}")]
