"""Time evolution on finite boxes through the eigenexpansion.

Everything here consumes a precomputed EigenSystem.  The evolution of
delta_q is reconstructed as sum_k e^{-i E_k t} u_k(p) u_k(q); projected
kernels and transport moments follow from the same expansion.  The
t-uniform bound sum_k |u_k(p)| |u_k(q)| over the projected indices
dominates every projected matrix element, which is how time-uniform decay
statements are certified without a sup over continuous time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ReflectionError
from .fitting import fit_log_log
from .operators import EigenSystem, localization_centers

DEFAULT_TIME_SAMPLES = 256
_MIN_TIME_SAMPLES = 64
_CONE_FACTOR = 2.5


@dataclass(frozen=True)
class SpectralProjection:
    """Eigen-indices of one EigenSystem with eigenvalue in [lo, hi]."""

    interval: tuple[float, float]
    indices: np.ndarray

    @property
    def count(self) -> int:
        return len(self.indices)


def spectral_projection(eig: EigenSystem, lo: float, hi: float) -> SpectralProjection:
    """Select the eigen-indices with eigenvalue in the closed interval."""
    if lo > hi:
        raise ParameterError("projection interval is reversed")
    idx = np.flatnonzero((eig.eigenvalues >= lo) & (eig.eigenvalues <= hi))
    return SpectralProjection(interval=(float(lo), float(hi)), indices=idx)


def evolve_amplitude(eig: EigenSystem, p: int, q: int, t: float) -> complex:
    """<delta_p, e^{-itH} delta_q> on the box; magnitude at most 1."""
    ip, iq = eig.site_index(p), eig.site_index(q)
    phases = np.exp(-1j * eig.eigenvalues * t)
    return complex(np.sum(phases * eig.eigenvectors[ip] * eig.eigenvectors[iq]))


def evolved_state(eig: EigenSystem, q: int, times) -> np.ndarray:
    """Columns e^{-i t H} delta_q for each t; shape (box size, len(times)).

    One dense matmul over all requested times, reusing the decomposition."""
    times = np.atleast_1d(np.asarray(times, dtype=np.float64))
    c = eig.eigenvectors[eig.site_index(q)]
    phases = np.exp(-1j * np.outer(eig.eigenvalues, times))
    return eig.eigenvectors @ (c[:, None] * phases)


def projected_evolve_amplitude(
    eig: EigenSystem, proj: SpectralProjection, p: int, q: int, t: float
) -> complex:
    """<delta_p, P_I e^{-itH} delta_q>, spectral restriction included."""
    ip, iq = eig.site_index(p), eig.site_index(q)
    k = proj.indices
    phases = np.exp(-1j * eig.eigenvalues[k] * t)
    return complex(np.sum(phases * eig.eigenvectors[ip, k] * eig.eigenvectors[iq, k]))


def projected_kernel_sup_bound(
    eig: EigenSystem, proj: SpectralProjection, p: int, q: int
) -> float:
    """sum over selected k of |u_k(p)| |u_k(q)|.

    Dominates |<delta_p, P_I e^{-itH} delta_q>| uniformly in t; at most 1
    by Cauchy-Schwarz."""
    ip, iq = eig.site_index(p), eig.site_index(q)
    k = proj.indices
    return float(np.sum(np.abs(eig.eigenvectors[ip, k]) * np.abs(eig.eigenvectors[iq, k])))


def projected_kernel_profile(
    eig: EigenSystem, proj: SpectralProjection, p: int
) -> np.ndarray:
    """Sup-bound kernel against every site q at once, aligned with eig.sites."""
    ip = eig.site_index(p)
    k = proj.indices
    if len(k) == 0:
        return np.zeros(eig.size)
    return np.abs(eig.eigenvectors[:, k]) @ np.abs(eig.eigenvectors[ip, k])


def correlator_by_center(
    eig: EigenSystem, proj: SpectralProjection, l: int
) -> dict[int, float]:
    """Site -> sum of u_k(s)^2 over selected eigenvectors centered at l."""
    eig.site_index(l)
    k = proj.indices
    if len(k) == 0:
        profile = np.zeros(eig.size)
    else:
        centers = localization_centers(eig)
        sel = k[centers[k] == l]
        profile = (eig.eigenvectors[:, sel] ** 2).sum(axis=1)
    return {int(s): float(v) for s, v in zip(eig.sites, profile)}


@dataclass(frozen=True)
class TransportSeries:
    """Time-averaged |X|^q moments of delta_0 on an ascending time grid."""

    q_exp: float
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if t.shape != v.shape or t.ndim != 1:
            raise ParameterError("times and values must be equal-length 1-d arrays")
        if len(t) >= 2 and np.any(np.diff(t) <= 0):
            raise ParameterError("times must ascend strictly")
        if np.any(~np.isfinite(v)) or np.any(v < 0):
            raise ParameterError("moment values must be finite and nonnegative")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


def _check_transport_box(eig: EigenSystem, T: float, samples: int) -> None:
    a, b = eig.window
    if a != -b:
        raise ParameterError("transport box must be centered at site 0")
    if samples < _MIN_TIME_SAMPLES:
        raise ParameterError("need at least %d time samples" % _MIN_TIME_SAMPLES)
    if T < 0:
        raise ParameterError("averaging time must be nonnegative")
    if b < _CONE_FACTOR * T:
        raise ReflectionError(
            "half-width %d below ballistic margin %.1f for T = %g"
            % (b, _CONE_FACTOR * T, T)
        )


def _moment_weights(eig: EigenSystem, q_exp: float) -> np.ndarray:
    sites = np.abs(eig.sites).astype(np.float64)
    if q_exp == 0.0:
        return np.ones_like(sites)
    return sites**q_exp


def transport_moment(
    eig: EigenSystem, q_exp: float, T: float, samples: int = DEFAULT_TIME_SAMPLES
) -> float:
    """Time-averaged q-th moment of the position of e^{-itH} delta_0.

    Averages sum_n |n|^q |<delta_n, e^{-itH} delta_0>|^2 over `samples`
    midpoint times in [0, T].  The box must be centered at 0 with
    half-width at least 2.5 T so the wavefront cannot reach the edge."""
    _check_transport_box(eig, T, samples)
    if q_exp < 0:
        raise ParameterError("moment exponent must be nonnegative")
    t = (np.arange(samples) + 0.5) * (T / samples)
    amp = evolved_state(eig, 0, t)
    prob = amp.real**2 + amp.imag**2
    return float(_moment_weights(eig, q_exp) @ prob.mean(axis=1))


def transport_series(
    eig: EigenSystem,
    q_exp: float,
    T_values,
    samples: int = DEFAULT_TIME_SAMPLES,
) -> TransportSeries:
    """transport_moment over an ascending grid of averaging times.

    All midpoint grids are evaluated in a single eigenbasis matmul."""
    T_values = np.asarray(T_values, dtype=np.float64)
    if T_values.ndim != 1 or len(T_values) == 0:
        raise ParameterError("need a 1-d grid of averaging times")
    if np.any(np.diff(T_values) <= 0):
        raise ParameterError("averaging times must ascend strictly")
    for T in T_values:
        _check_transport_box(eig, float(T), samples)
    if q_exp < 0:
        raise ParameterError("moment exponent must be nonnegative")
    offsets = (np.arange(samples) + 0.5) / samples
    all_times = np.concatenate([T * offsets for T in T_values])
    amp = evolved_state(eig, 0, all_times)
    prob = amp.real**2 + amp.imag**2
    weighted = _moment_weights(eig, q_exp) @ prob
    values = weighted.reshape(len(T_values), samples).mean(axis=1)
    return TransportSeries(q_exp=q_exp, times=T_values, values=values)


def growth_exponent_fit(
    series: TransportSeries, window: tuple[float, float] | None = None
) -> tuple[float, float, float]:
    """(exponent, intercept, r2) of log value against log T over the window."""
    if window is None:
        window = (float(series.times[0]), float(series.times[-1]))
    fit = fit_log_log(series.times, series.values, window=window, min_points=5)
    return (fit.rate, fit.intercept, fit.r2)
