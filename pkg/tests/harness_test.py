import math
import os
import tempfile
import time
import unittest

import numpy as np
import orjson
import pandas as pd

from scatterkin import Harness, RunParam, SuiteEvaluator, KineticError
from scatterkin._typing import CheckGroup
from scatterkin.config import GridParam, SpatialParam, InitialStateParam, TransportParam, ConvergenceParam, SuiteParam
from scatterkin.core import fit_convergence_order, relative_change, ConvergenceReport, ConvergenceRow, ORDER_BAND
from scatterkin.runner import main


def small_param(output_dir="output") -> RunParam:
    return RunParam(alpha=1.0,
                    output_dir=output_dir,
                    grid=GridParam(n_per_axis=8, v_max=5.5),
                    spatial=SpatialParam(1, 32),
                    initial=InitialStateParam(rho_modes=[[1, 0.02]]),
                    transport=TransportParam(resolution=5),
                    convergence=ConvergenceParam(epsilons=[0.1, 0.05, 0.025], t_end=0.02),
                    suite=SuiteParam(groups=[CheckGroup.GRID]),
                    t_end=0.02)


class ConvergenceOrderTest(unittest.TestCase):
    def test_power_law(self):
        epsilons = [0.1, 0.05, 0.025]
        order, constant, flag = fit_convergence_order(epsilons, [2 * e ** 2 for e in epsilons])
        self.assertAlmostEqual(order, 2.0, places=10)
        self.assertAlmostEqual(constant, 2.0, places=8)
        self.assertEqual(flag, "")

    def test_too_few_points(self):
        order, constant, flag = fit_convergence_order([0.1, 0.05], [0.01, 0.005])
        self.assertTrue(math.isnan(order))
        self.assertTrue(math.isnan(constant))
        self.assertNotEqual(flag, "")

    def test_equilibrium_errors(self):
        order, _, flag = fit_convergence_order([0.1, 0.05, 0.025], [0.0, 0.0, 0.0])
        self.assertTrue(math.isnan(order))
        self.assertNotEqual(flag, "")
        order, _, flag = fit_convergence_order([0.1, 0.05, 0.025], [1e-9, 2e-9, 1e-9])
        self.assertTrue(math.isnan(order))
        self.assertIn("below", flag)

    def test_failed_rows_skipped(self):
        order, _, flag = fit_convergence_order([0.1, 0.05, 0.025, 0.0125], [0.1, 0.05, float("nan"), 0.0125])
        self.assertAlmostEqual(order, 1.0, places=10)
        self.assertEqual(flag, "")

    def test_relative_change(self):
        self.assertAlmostEqual(relative_change(2.0, 1.0), 0.5)
        self.assertEqual(relative_change(0.0, 0.0), 0.0)


class ReportTest(unittest.TestCase):
    def test_partial_report(self):
        report = ConvergenceReport(rows=[ConvergenceRow(0.025, 0.1, error=0.01),
                                         ConvergenceRow(0.1, 0.1, error=0.04),
                                         ConvergenceRow(0.05, 0.1, status="positivity")])
        self.assertTrue(report.partial)
        frame = report.to_dataframe()
        self.assertEqual(frame["epsilon"].tolist(), [0.1, 0.05, 0.025])
        self.assertEqual(frame["status"].tolist(), ["ok", "positivity", "ok"])
        self.assertTrue(report.metadata()["partial"])

    def test_order_band(self):
        report = ConvergenceReport(fitted_order=0.95)
        self.assertTrue(report.order_accepted)
        self.assertFalse(ConvergenceReport(fitted_order=0.6).order_accepted)
        self.assertFalse(ConvergenceReport(order_flag="fewer than 3 valid rows").order_accepted)


class HarnessTest(unittest.TestCase):
    def test_output_before_run(self):
        harness = Harness(small_param())
        with self.assertRaises(KineticError):
            harness.output()
        with self.assertRaises(KineticError):
            harness.save_result()

    def test_grid_suite(self):
        harness = Harness(small_param())
        ledger = harness.run_suite()
        for r in ledger.results:
            print(r)
        self.assertTrue(ledger.passed)
        self.assertEqual(len(ledger.by_group(CheckGroup.GRID)), 3)
        self.assertFalse(harness.failed)
        self.assertEqual(ledger.to_dict()["checks"][0]["group"], "GRID")

    def test_default_suite(self):
        t0 = time.time()
        ledger = Harness(RunParam()).run_suite()
        print(f"default suite finished in {time.time() - t0:.2f}s")
        for r in ledger.failures():
            print(r)
        self.assertEqual(ledger.failures(), [])
        groups = {r.group for r in ledger.results}
        self.assertEqual(groups, {CheckGroup.GRID, CheckGroup.COLLISION, CheckGroup.LINOPS, CheckGroup.TRANSPORT,
                                  CheckGroup.HYDRO, CheckGroup.KINETIC})
        flux = [r for r in ledger.results if r.name == "transport.flux_forms"][0]
        self.assertLess(flux.measured, 1e-10)

    def test_empty_groups(self):
        evaluator = SuiteEvaluator(small_param())
        self.assertEqual(evaluator.run([]), [])

    def test_convergence_study(self):
        with tempfile.TemporaryDirectory() as folder:
            harness = Harness(small_param(folder))
            t0 = time.time()
            report = harness.run_convergence()
            print(f"convergence study finished in {time.time() - t0:.2f}s")
            print(report.to_dataframe())
            self.assertEqual(len(report.rows), 3)
            self.assertFalse(report.partial)
            self.assertEqual(report.order_flag, "")
            self.assertGreaterEqual(report.fitted_order, ORDER_BAND)
            self.assertTrue(report.order_accepted)
            errors = [r.error for r in report.rows]
            self.assertTrue(all(np.isfinite(errors)))
            self.assertGreater(errors[0], errors[-1])
            self.assertFalse(harness.failed)

            harness.output()
            files = harness.save_result()
            self.assertTrue(all(os.path.exists(f) for f in files))
            csv = [f for f in files if f.endswith(".convergence.csv")][0]
            self.assertEqual(len(pd.read_csv(csv)), 3)
            dat = [f for f in files if f.endswith(".convergence.dat")][0]
            self.assertEqual(len(np.loadtxt(dat)), 3)
            meta = [f for f in files if f.endswith(".convergence.json")][0]
            with open(meta, "rb") as f:
                content = orjson.loads(f.read())
            self.assertAlmostEqual(content["fitted_order"], report.fitted_order)
            self.assertTrue(content["order_accepted"])
            self.assertEqual(content["parameters"]["alpha"], 1.0)
            self.assertTrue(any(f.endswith(".snapshot.npz") for f in files))


class RunnerTest(unittest.TestCase):
    def test_usage(self):
        self.assertEqual(main([]), 2)
        self.assertEqual(main(["unknown", "config.toml"]), 2)

    def test_missing_config(self):
        self.assertEqual(main(["suite", "/nonexistent/config.toml"]), 2)

    def test_invalid_config(self):
        with tempfile.TemporaryDirectory() as folder:
            path = os.path.join(folder, "bad.toml")
            with open(path, "w") as f:
                f.write("alpha = 0.0\n")
            self.assertEqual(main(["suite", path]), 2)

    def test_grid_suite(self):
        with tempfile.TemporaryDirectory() as folder:
            path = os.path.join(folder, "suite.toml")
            with open(path, "w") as f:
                f.write(f'output_dir = "{folder}"\n\n[suite]\ngroups = ["grid"]\n')
            self.assertEqual(main(["suite", path]), 0)
            self.assertTrue(any(name.endswith(".suite.json") for name in os.listdir(folder)))
