"""Least-squares power-law fits on log-log data."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import FitError

MIN_POINTS = 4


@dataclass(frozen=True)
class SweepResult:
    """Errors sampled over a control parameter and their fitted power law.

    ``errors ~ exp(intercept) * lambdas**slope``.  ``lambdas`` holds whatever
    the sweep varied (coupling strength, time, inverse temperature).
    """

    lambdas: np.ndarray
    errors: np.ndarray
    slope: float
    slope_stderr: float
    intercept: float

    def predict(self, x):
        return np.exp(self.intercept) * np.asarray(x, dtype=float) ** self.slope


def loglog_fit(x, y, min_points: int = MIN_POINTS) -> SweepResult:
    """Ordinary least squares of ``log y`` against ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise FitError("x and y must be 1-d arrays of equal length")
    if x.size < min_points:
        raise FitError(f"need at least {min_points} samples for a fit, got {x.size}")
    if np.any(np.diff(x) <= 0):
        raise FitError("sample locations must be strictly increasing")
    if np.any(x <= 0):
        raise FitError("sample locations must be positive")
    if not np.all(np.isfinite(y)):
        raise FitError("errors contain non-finite values")
    if np.all(y == 0):
        raise FitError("all errors are zero: nothing to fit")
    if np.any(y <= 0):
        raise FitError("errors must be positive for a log-log fit")
    res = stats.linregress(np.log(x), np.log(y))
    return SweepResult(x, y, float(res.slope), float(res.stderr), float(res.intercept))


def fixed_exponent_prefactor(x, y, exponent: float) -> float:
    """Least-squares ``C`` in ``log y = log C + exponent log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise FitError("values must be positive")
    return float(np.exp(np.mean(np.log(y) - exponent * np.log(x))))
