import dataclasses
import logging
import math
import os
import time
from datetime import datetime
from typing import List

import numpy as np
import orjson

from ._typing import ConvergenceRow, ConvergenceReport, SuiteLedger
from .checks import SuiteEvaluator
from .math_helper import fit_convergence_order, relative_change
from .._typing import KineticError, CheckResult
from ..collision import build_tables
from ..config import RunParam
from ..grid import build_velocity_grid
from ..hydro import HydroState, HydroTrajectory, hydro_solve, hilbert_F1, compatibility_defect
from ..kinetic import KineticContext, KineticTrajectory, kinetic_solve, well_prepared_initial, save_snapshot
from ..linops import OperatorFamily, assemble_L
from ..transport import TransportCoefficients, TransportTable, compute_coefficients, tabulate
from ..utils import get_formatted_predefined, get_formatted_from_dict, get_formatted_verdict, STYLE


class Harness(object):
    """
    Drives a configured run: transport coefficients, hydro and kinetic solves, the epsilon
    convergence study and the property suite, then reports and saves the results.

    :param param: run parameters from convert_config
    :type param: RunParam
    """

    def __init__(self, param: RunParam):
        self._param = param
        self.logger = logging.getLogger(__name__)
        self._g = None
        self._tables = None
        self._coefficients: TransportCoefficients | None = None
        self._table: TransportTable | None = None
        self._hydro: HydroTrajectory | None = None
        self._kinetic: KineticTrajectory | None = None
        self._reports: List[ConvergenceReport] = []
        self._ledger: SuiteLedger | None = None
        self.__finished = False
        logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')

    # region property
    @property
    def param(self) -> RunParam:
        return self._param

    @property
    def coefficients(self) -> TransportCoefficients | None:
        return self._coefficients

    @property
    def table(self) -> TransportTable | None:
        return self._table

    @property
    def hydro(self) -> HydroTrajectory | None:
        return self._hydro

    @property
    def kinetic(self) -> KineticTrajectory | None:
        return self._kinetic

    @property
    def reports(self) -> List[ConvergenceReport]:
        return self._reports

    @property
    def ledger(self) -> SuiteLedger | None:
        return self._ledger

    @property
    def failed(self) -> bool:
        """
        a suite check failed, or a convergence study is partial or has no fitted order
        """
        if self._ledger is not None and not self._ledger.passed:
            return True
        return any(r.partial for r in self._reports)

    # endregion

    def _velocity(self):
        if self._g is None:
            p = self._param.grid
            self._g = build_velocity_grid(p.n_per_axis, p.v_max, p.angular_rule, p.angular_order)
            self._tables = build_tables(self._g, p.stencil, self._param.cache_dir or None)
        return self._g, self._tables

    def _table_around(self, s: HydroState) -> TransportTable:
        (rho_lo, rho_hi), (T_lo, T_hi) = s.envelope()
        margin = self._param.transport.margin
        rho_range = (rho_lo * (1 - margin), rho_hi * (1 + margin))
        T_range = (T_lo * (1 - margin), T_hi * (1 + margin))
        if self._table is not None and self._table.covers(rho_range, T_range, growth=0.0):
            return self._table
        g, tables = self._velocity()
        self._table = tabulate(rho_range, T_range, self._param.alpha, self._param.transport.resolution, g, tables,
                               scaling=self._param.transport.scaling, cache_dir=self._param.cache_dir or None)
        return self._table

    def _family_around(self, s: HydroState, n_temperatures: int) -> OperatorFamily:
        g, tables = self._velocity()
        _, (T_lo, T_hi) = s.envelope()
        margin = self._param.transport.margin
        return OperatorFamily.around(g, tables, self._param.alpha, T_lo * (1 - margin), T_hi * (1 + margin),
                                     n_temperatures)

    def run_coefficients(self) -> TransportCoefficients:
        """
        coefficients at the mean initial state, and the table over the initial envelope
        """
        t0 = time.time()
        g, tables = self._velocity()
        rho0, T0 = self._param.initial.rho0, self._param.initial.T0
        L = assemble_L(rho0, T0, self._param.alpha, g, tables)
        self._coefficients = compute_coefficients(rho0, T0, self._param.alpha, L, g)
        self._table_around(self._param.initial.state(self._param.spatial.grid()))
        self.__finished = True
        self.logger.info(f"transport coefficients finished, execute time {time.time() - t0:.2f}s")
        return self._coefficients

    def run_hydro(self, amplitude: float = 1.0, t_end: float | None = None) -> HydroTrajectory:
        """
        solve the diffusion limit from the configured initial state
        """
        t0 = time.time()
        grid = self._param.spatial.grid()
        s0 = self._param.initial.state(grid, amplitude)
        t_end = self._param.t_end if t_end is None else t_end
        control = dataclasses.replace(self._param.hydro,
                                      sample_times=sorted(set(self._param.hydro.sample_times) | {t_end}))
        self._hydro = hydro_solve(s0, t_end, self._table_around(s0), grid, control)
        self.__finished = True
        self.logger.info(f"hydro run finished, execute time {time.time() - t0:.2f}s")
        return self._hydro

    def run_kinetic(self) -> KineticTrajectory:
        """
        one kinetic run at the configured epsilon from well prepared data, compared with the hydro run
        """
        t0 = time.time()
        param = self._param
        g, tables = self._velocity()
        grid = param.spatial.grid()
        s0 = param.initial.state(grid)
        hydro = self.run_hydro(t_end=param.t_end)
        family = self._family_around(s0, param.kinetic.n_temperatures)
        F0, _ = well_prepared_initial(s0, param.epsilon, g, grid, family, param.kinetic.invariants)
        ctx = KineticContext.build(g, grid, tables, param.alpha, param.kinetic,
                                   reference=(float(np.mean(s0.rho)), float(np.mean(s0.T))), family=family)
        self._kinetic = kinetic_solve(F0, param.epsilon, param.t_end, ctx, hydro)
        self.__finished = True
        self.logger.info(f"kinetic run finished, execute time {time.time() - t0:.2f}s")
        return self._kinetic

    def run_convergence(self, amplitude: float = 1.0) -> ConvergenceReport:
        """
        Error at t_end against the hydro solution for every configured epsilon, and the fitted order.

        A failing epsilon is recorded in its row and the study goes on with the next one.
        """
        from .. import __version__
        t0 = time.time()
        param = self._param
        study = param.convergence
        g, tables = self._velocity()
        grid = param.spatial.grid()
        s0 = param.initial.state(grid, amplitude)
        hydro = hydro_solve(s0, study.t_end, self._table_around(s0), grid,
                            dataclasses.replace(param.hydro, sample_times=[study.t_end]))
        self._hydro = hydro
        defect = compatibility_defect(s0, g, grid)
        self.logger.info(f"initial data compatibility defect {defect:.3e}")
        family = self._family_around(s0, study.kinetic.n_temperatures)
        f1 = hilbert_F1(s0, family, g, grid, method=study.pseudo_inverse)
        reference = (float(np.mean(s0.rho)), float(np.mean(s0.T)))
        ctx = KineticContext.build(g, grid, tables, param.alpha, study.kinetic, reference=reference, family=family)

        report = ConvergenceReport(amplitude=amplitude, sobolev_bound=hydro.sobolev_bound,
                                   config_hash=param.config_hash, version=__version__)
        for epsilon in sorted(study.epsilons, reverse=True):
            row = ConvergenceRow(epsilon=epsilon, t_end=study.t_end)
            try:
                F0, row.positivity_threshold = well_prepared_initial(s0, epsilon, g, grid,
                                                                     invariants=study.kinetic.invariants, f1=f1)
                trajectory = kinetic_solve(F0, epsilon, study.t_end, ctx, hydro)
                row.error = trajectory.errors[-1]
                row.clamped_mass_fraction = trajectory.clamped_mass_fraction
                row.wall_time = trajectory.wall_time
                row.steps = trajectory.steps
                self._kinetic = trajectory
                if study.dt_refinement:
                    refined = kinetic_solve(F0, epsilon, study.t_end, ctx, hydro, dt=trajectory.dt / 2)
                    row.dt_refinement_change = relative_change(row.error, refined.errors[-1])
            except KineticError as e:
                row.status = e.message
                self.logger.error(f"epsilon={epsilon} failed: {e.message}")
            report.rows.append(row)
        valid = [r for r in report.rows if r.ok]
        report.fitted_order, report.fitted_constant, report.order_flag = \
            fit_convergence_order([r.epsilon for r in valid], [r.error for r in valid])
        if report.order_flag:
            self.logger.warning(f"convergence order undefined: {report.order_flag}")
        self._reports.append(report)
        self.__finished = True
        self.logger.info(f"convergence study finished, execute time {time.time() - t0:.2f}s")
        return report

    def run_amplitude_sweep(self) -> List[ConvergenceReport]:
        """
        convergence study for every configured amplitude scale of the initial perturbation
        """
        amplitudes = self._param.convergence.amplitudes or [1.0]
        return [self.run_convergence(a) for a in amplitudes]

    def run_suite(self) -> SuiteLedger:
        from .. import __version__
        t0 = time.time()
        evaluator = SuiteEvaluator(self._param)
        results: List[CheckResult] = evaluator.run(self._param.suite.groups)
        self._ledger = SuiteLedger(results, self._param.seed, self._param.config_hash, __version__)
        self.__finished = True
        self.logger.info(f"property suite finished, execute time {time.time() - t0:.2f}s")
        return self._ledger

    def output(self):
        """
        output results to console
        """
        if not self.__finished:
            raise KineticError("Please run first")
        if self._coefficients is not None:
            self.logger.info(get_formatted_predefined("Transport Coefficients", STYLE["header1"]))
            self.logger.info(self._coefficients.get_output_str())
        if self._hydro is not None:
            final = self._hydro.final
            self.logger.info(get_formatted_predefined("Hydro", STYLE["header1"]))
            self.logger.info(get_formatted_from_dict({"steps": str(self._hydro.steps),
                                                      "rejected": str(self._hydro.rejected),
                                                      "mass drift": f"{self._hydro.mass_drift:.3e}",
                                                      "energy drift": f"{self._hydro.energy_drift:.3e}",
                                                      "rho range": f"{np.min(final.rho):.6g} - {np.max(final.rho):.6g}",
                                                      "T range": f"{np.min(final.T):.6g} - {np.max(final.T):.6g}"}))
        if self._kinetic is not None and len(self._reports) == 0:
            self.logger.info(get_formatted_predefined("Kinetic", STYLE["header1"]))
            error = self._kinetic.errors[-1] if self._kinetic.errors else math.nan
            self.logger.info(get_formatted_from_dict({"steps": str(self._kinetic.steps),
                                                      "error": f"{error:.6g}",
                                                      "mass drift": f"{self._kinetic.mass_drift:.3e}",
                                                      "energy drift": f"{self._kinetic.energy_drift:.3e}"}))
        for report in self._reports:
            self.logger.info(get_formatted_predefined(f"Convergence, amplitude {report.amplitude:g}", STYLE["header1"]))
            self.logger.info(report.to_dataframe())
            self.logger.info(get_formatted_from_dict({"order": f"{report.fitted_order:.4g}",
                                                      "constant": f"{report.fitted_constant:.4g}",
                                                      "flag": report.order_flag or "-",
                                                      "order accepted": get_formatted_verdict(report.order_accepted),
                                                      "complete": get_formatted_verdict(not report.partial)}))
        if self._ledger is not None:
            self.logger.info(get_formatted_predefined("Property Suite", STYLE["header1"]))
            for r in self._ledger.results:
                self.logger.info(f"{get_formatted_verdict(r.passed)} {r.name}: {r.measured:.3e} "
                                 f"(tolerance {r.tolerance:.1e}) {r.detail}")
            self.logger.info(f"suite {get_formatted_verdict(self._ledger.passed)}, "
                             f"{len(self._ledger.failures())} of {len(self._ledger.results)} checks failed")

    def save_result(self, path: str | None = None) -> List[str]:
        """
        save every result of this harness

        :param path: directory, output_dir of the config when None
        :return: written files
        """
        if not self.__finished:
            raise KineticError("Please run first")
        from .. import __version__
        path = self._param.output_dir if path is None else path
        os.makedirs(path, exist_ok=True)
        file_name_head = "scatterkin-" + datetime.now().strftime('%Y%m%d-%H%M%S')
        file_list = []

        def dump(name: str, content):
            file_name = os.path.join(path, f"{file_name_head}.{name}.json")
            with open(file_name, "wb") as outfile:
                outfile.write(orjson.dumps(content, option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY,
                                           default=json_default))
            file_list.append(file_name)

        stamp = {"config_hash": self._param.config_hash, "version": __version__}
        if self._table is not None:
            file_name = os.path.join(path, file_name_head + ".transport.csv")
            self._table.save_csv(file_name)
            file_list.append(file_name)
        if self._coefficients is not None:
            dump("coefficients", {**stamp, **self._coefficients.to_dict()})
        if self._hydro is not None:
            file_name = os.path.join(path, file_name_head + ".hydro.csv")
            self._hydro.save_csv(file_name)
            file_list.append(file_name)
        if self._kinetic is not None:
            file_name = os.path.join(path, file_name_head + ".kinetic.csv")
            self._kinetic.save_macro_csv(file_name)
            file_list.append(file_name)
            snapshot_name = os.path.join(path, file_name_head + ".snapshot.npz")
            g, _ = self._velocity()
            save_snapshot(snapshot_name, self._kinetic.final, g, self._param.spatial.grid(), stamp)
            file_list.append(snapshot_name)
        for i, report in enumerate(self._reports):
            suffix = "convergence" if len(self._reports) == 1 else f"convergence-{i}"
            frame = report.to_dataframe()
            file_name = os.path.join(path, f"{file_name_head}.{suffix}.csv")
            frame.to_csv(file_name, index=False)
            file_list.append(file_name)
            # two column log-log plot data
            plot_name = os.path.join(path, f"{file_name_head}.{suffix}.dat")
            frame.loc[frame["status"] == "ok", ["epsilon", "error"]].to_csv(plot_name, sep=" ", index=False,
                                                                           header=False)
            file_list.append(plot_name)
            dump(suffix, {**report.metadata(), "parameters": self._param})
        if self._ledger is not None:
            dump("suite", self._ledger.to_dict())
        self.logger.info(f"files have saved to {','.join(file_list)}")
        return file_list


def json_default(obj):
    """
    format json data
    :param obj:
    :return:
    """
    if isinstance(obj, np.generic):
        return obj.item()
    elif isinstance(obj, (set, frozenset)):
        return sorted(obj)
    else:
        raise TypeError
