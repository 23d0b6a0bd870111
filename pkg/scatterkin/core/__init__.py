from ._typing import ConvergenceRow, ConvergenceReport, SuiteLedger, REPORT_COLUMNS, ORDER_BAND
from .checks import SuiteEvaluator
from .harness import Harness, json_default
from .math_helper import fit_convergence_order, relative_change
