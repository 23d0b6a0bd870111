import numpy as np

SMALL_ERROR = 1e-6
MIN_POINTS = 3


def fit_convergence_order(epsilons, errors) -> (float, float, str):
    """
    least squares fit log(error) = order log(epsilon) + log(constant)

    :return: order, constant, and a flag explaining why the fit is undefined (empty when defined)
    """
    epsilons = np.asarray(epsilons, dtype=float)
    errors = np.asarray(errors, dtype=float)
    valid = np.isfinite(errors) & (errors > 0) & (epsilons > 0)
    if np.sum(valid) < MIN_POINTS:
        return float("nan"), float("nan"), f"fewer than {MIN_POINTS} valid rows"
    if np.all(errors[valid] <= SMALL_ERROR):
        return float("nan"), float("nan"), f"all errors below {SMALL_ERROR:g}, no measurable rate"
    order, intercept = np.polyfit(np.log(epsilons[valid]), np.log(errors[valid]), 1)
    return float(order), float(np.exp(intercept)), ""


def relative_change(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), 1e-300)
