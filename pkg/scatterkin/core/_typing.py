from dataclasses import dataclass, field
from typing import List

import numpy as np
import pandas as pd

from .._typing import CheckResult, CheckGroup

REPORT_COLUMNS = ["epsilon", "t_end", "error", "clamped_mass_fraction", "wall_time", "steps", "status",
                  "dt_refinement_change", "positivity_threshold"]
# smallest fitted order accepted as first order convergence
ORDER_BAND = 0.8


@dataclass
class ConvergenceRow:
    """
    one kinetic run of the convergence study

    :param epsilon: Knudsen number
    :param t_end: final time
    :param error: |mu^(-1/2) (F - mu)|_2 at t_end, nan when the run failed
    :param clamped_mass_fraction: largest clamped mass fraction of any step
    :param wall_time: seconds
    :param steps: time steps
    :param status: ok, or the failure message
    :param dt_refinement_change: relative error change when dt is halved, nan when not measured
    :param positivity_threshold: epsilon below which the initial data needs no lifting
    """
    epsilon: float
    t_end: float
    error: float = float("nan")
    clamped_mass_fraction: float = 0.0
    wall_time: float = 0.0
    steps: int = 0
    status: str = "ok"
    dt_refinement_change: float = float("nan")
    positivity_threshold: float = float("nan")

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class ConvergenceReport:
    """
    :param rows: one per configured epsilon, sorted by epsilon descending
    :param fitted_order: slope of log error against log epsilon
    :param fitted_constant: C in error = C epsilon^order
    :param order_flag: why the fit is undefined, empty otherwise
    :param amplitude: scale applied to the configured initial perturbation
    :param sobolev_bound: discrete regularity bound of the hydro solution
    :param config_hash: hash of the raw config
    :param version: package version
    """
    rows: List[ConvergenceRow] = field(default_factory=list)
    fitted_order: float = float("nan")
    fitted_constant: float = float("nan")
    order_flag: str = ""
    amplitude: float = 1.0
    sobolev_bound: float = 0.0
    config_hash: str = ""
    version: str = ""

    @property
    def partial(self) -> bool:
        return any(not r.ok for r in self.rows)

    @property
    def order_accepted(self) -> bool:
        return not self.order_flag and self.fitted_order >= ORDER_BAND

    def to_dataframe(self) -> pd.DataFrame:
        frame = pd.DataFrame([[getattr(r, c) for c in REPORT_COLUMNS] for r in self.rows], columns=REPORT_COLUMNS)
        return frame.sort_values("epsilon", ascending=False, ignore_index=True)

    def metadata(self) -> dict:
        return {"fitted_order": self.fitted_order,
                "fitted_constant": self.fitted_constant,
                "order_flag": self.order_flag,
                "order_accepted": self.order_accepted,
                "partial": self.partial,
                "amplitude": self.amplitude,
                "sobolev_bound": self.sobolev_bound,
                "config_hash": self.config_hash,
                "version": self.version}


@dataclass
class SuiteLedger:
    """
    pass/fail ledger of the property campaign
    """
    results: List[CheckResult] = field(default_factory=list)
    seed: int = 0
    config_hash: str = ""
    version: str = ""

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self) -> List[CheckResult]:
        return [r for r in self.results if not r.passed]

    def to_dict(self) -> dict:
        return {"passed": self.passed,
                "seed": self.seed,
                "config_hash": self.config_hash,
                "version": self.version,
                "checks": [{"name": r.name,
                            "group": r.group.name,
                            "passed": r.passed,
                            "measured": None if not np.isfinite(r.measured) else r.measured,
                            "tolerance": r.tolerance,
                            "detail": r.detail} for r in self.results]}

    def by_group(self, group: CheckGroup) -> List[CheckResult]:
        return [r for r in self.results if r.group == group]
