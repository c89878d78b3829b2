"""Least-squares decay and growth fits on log-transformed data.

DecayFit.rate is the raw OLS slope: negative for decaying data.  Callers
that report a positive decay exponent negate it themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class DecayFit:
    """OLS line through log-transformed data over a distance/time window."""

    rate: float
    intercept: float
    r2: float
    window: tuple[float, float]
    count: int

    def __post_init__(self):
        if not 0.0 <= self.r2 <= 1.0:
            raise ParameterError("r2 must lie in [0, 1]")
        if self.count < 2:
            raise ParameterError("fit needs at least two points")


def _ols(x: np.ndarray, y: np.ndarray, window: tuple[float, float]) -> DecayFit:
    n = len(x)
    xm = x.mean()
    ym = y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        raise ParameterError("fit abscissae are all equal")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - ym) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res <= 1e-24 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    r2 = min(max(r2, 0.0), 1.0)
    return DecayFit(rate=slope, intercept=intercept, r2=r2,
                    window=(float(window[0]), float(window[1])), count=n)


def _select(x, y, window, min_points):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ParameterError("abscissae and values must be equal-length 1-d arrays")
    lo, hi = window
    keep = (x >= lo) & (x <= hi)
    if int(keep.sum()) < min_points:
        raise ParameterError(
            "only %d points in fit window [%g, %g], need %d"
            % (int(keep.sum()), lo, hi, min_points)
        )
    xs, ys = x[keep], y[keep]
    if np.any(ys <= 0.0):
        raise ParameterError("values in the fit window must be positive")
    return xs, ys


def fit_log_linear(x, values, window=None, min_points: int = 5) -> DecayFit:
    """OLS of log(values) against x over x in window (default: all)."""
    x = np.asarray(x, dtype=np.float64)
    if window is None:
        window = (float(np.min(x)), float(np.max(x)))
    xs, ys = _select(x, values, window, min_points)
    return _ols(xs, np.log(ys), window)


def fit_log_log(x, values, window=None, min_points: int = 5) -> DecayFit:
    """OLS of log(values) against log(x) over x in window (default: all)."""
    x = np.asarray(x, dtype=np.float64)
    if window is None:
        window = (float(np.min(x)), float(np.max(x)))
    xs, ys = _select(x, values, window, min_points)
    if np.any(xs <= 0.0):
        raise ParameterError("log-log fit needs positive abscissae")
    return _ols(np.log(xs), np.log(ys), window)


def half_life(fit: DecayFit) -> float:
    """Distance over which a fitted decay drops by e; inf for growth."""
    if fit.rate >= 0.0:
        return math.inf
    return -1.0 / fit.rate
