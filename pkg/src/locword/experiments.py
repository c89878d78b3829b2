"""Disorder-averaged Monte Carlo studies.

Every experiment is a pure function of its spec and seed: realization i of
an ensemble draws from a stream derived from (base seed, i), results are
reduced in index order, and reruns reproduce outputs bit for bit.
Almost-sure statements about the infinite-volume operator become ensemble
fractions with binomial error bars; expectations become ensemble means.

Decay statistics are collected only for centers and probe sites inside a
buffered sub-box (margin one eighth of the box by default) so Dirichlet
edge effects stay out of the fits, and fits run over an intermediate
distance window (defaults: one twentieth to one quarter of the box) that
skips the pre-asymptotic short range.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from statistics import median

import numpy as np

from .dynamics import (
    TransportSeries,
    correlator_by_center,
    projected_kernel_profile,
    spectral_projection,
    transport_series,
)
from .errors import (
    EmptyBandError,
    InsufficientTrialsError,
    NearSingularError,
    ParameterError,
)
from .fitting import DecayFit, fit_log_linear
from .operators import (
    char_poly_log_batch,
    eigensystem,
    localization_centers,
    regularity,
    restrict,
)
from .seeding import spawn_seed
from .transfer import LyapunovEstimate, lyapunov_estimate
from .words import ValueStream, WordDistribution, sample_potential

GAMMA_REFERENCE_SITES = 10**7
_GAMMA_REFERENCE_SEED = 715517
_MIN_TRIALS = 100
_LOCALIZED_GAMMA_FLOOR = 1e-3
_MAX_RESAMPLE_ATTEMPTS = 32


@lru_cache(maxsize=128)
def gamma_reference(
    dist: WordDistribution, E: float, sites: int = GAMMA_REFERENCE_SITES
) -> LyapunovEstimate:
    """High-precision Lyapunov estimate used as the gamma(E) stand-in.

    Computed once per (distribution, energy) from a fixed internal seed so
    every experiment shares the same reference value."""
    return lyapunov_estimate(dist, E, sites=sites, seed=_GAMMA_REFERENCE_SEED)


@dataclass(frozen=True)
class EnsembleSpec:
    """A reproducible disorder ensemble on the box [-half_width, half_width].

    `interval` is the energy window selecting eigenstates; `sub_margin`
    (default: box size // 8) buffers statistics away from the box edges."""

    distribution: WordDistribution
    half_width: int
    count: int
    base_seed: int
    interval: tuple[float, float]
    sub_margin: int | None = None

    def __post_init__(self):
        if self.half_width < 1:
            raise ParameterError("half width must be at least 1")
        if self.count < 1:
            raise ParameterError("realization count must be at least 1")
        lo, hi = self.interval
        if lo > hi:
            raise ParameterError("energy window is reversed")
        if self.margin >= self.half_width:
            raise ParameterError("sub-box margin leaves no interior")

    @property
    def box_size(self) -> int:
        return 2 * self.half_width + 1

    @property
    def margin(self) -> int:
        return self.box_size // 8 if self.sub_margin is None else self.sub_margin

    @property
    def sub_half_width(self) -> int:
        return self.half_width - self.margin

    @property
    def window(self) -> tuple[int, int]:
        return (-self.half_width, self.half_width)

    def realization_seed(self, index: int) -> int:
        return spawn_seed(self.base_seed, index)

    def fit_window(self) -> tuple[float, float]:
        return (self.box_size / 20.0, self.box_size / 4.0)

    def in_sub_box(self, site: int) -> bool:
        return abs(site) <= self.sub_half_width


def _ensemble_eigensystem(ens: EnsembleSpec, index: int):
    r = sample_potential(
        ens.distribution, seed=ens.realization_seed(index), window=ens.window
    )
    return eigensystem(restrict(r, *ens.window))


@dataclass(frozen=True)
class DeviationSpec:
    """One large-deviation event for the window determinant.

    side 'plus': log|det(H_[1,n] - E)| >= (gamma + epsilon) n;
    side 'minus': <= (gamma - epsilon) n."""

    energy: float
    n: int
    epsilon: float
    side: str = "plus"

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError("interval length must be at least 2")
        if self.epsilon <= 0:
            raise ParameterError("epsilon must be positive")
        if self.side not in ("plus", "minus"):
            raise ParameterError("side must be 'plus' or 'minus'")


@dataclass(frozen=True)
class DeviationResult:
    """Empirical probability of one deviation event with binomial stderr."""

    spec: DeviationSpec
    probability: float
    stderr: float
    hits: int
    trials: int
    gamma_ref: float


def _stationary_value_rows(
    dist: WordDistribution, n: int, trials: int, seed: int
) -> np.ndarray:
    rows = np.empty((trials, n))
    for i in range(trials):
        rows[i] = ValueStream(dist, spawn_seed(seed, i)).take(n)
    return rows


def deviation_probability(
    dist: WordDistribution, spec: DeviationSpec, trials: int, seed: int
) -> DeviationResult:
    """Fraction of realizations in the deviation event, in log-domain."""
    if trials < _MIN_TRIALS:
        raise ParameterError("need at least %d trials" % _MIN_TRIALS)
    gamma = gamma_reference(dist, spec.energy).gamma
    rows = _stationary_value_rows(dist, spec.n, trials, seed)
    _, logabs = char_poly_log_batch(rows, spec.energy)
    if spec.side == "plus":
        hits = int(np.sum(logabs >= (gamma + spec.epsilon) * spec.n))
    else:
        hits = int(np.sum(logabs <= (gamma - spec.epsilon) * spec.n))
    p = hits / trials
    stderr = math.sqrt(p * (1.0 - p) / trials)
    return DeviationResult(
        spec=spec, probability=p, stderr=stderr, hits=hits, trials=trials,
        gamma_ref=gamma,
    )


@dataclass(frozen=True)
class LdpResult:
    """Exponential fit of deviation probabilities against interval length."""

    fit: DecayFit
    n_grid: tuple[int, ...]
    results: tuple[DeviationResult, ...]
    gamma_ref: float
    side: str

    @property
    def eta_hat(self) -> float:
        """Fitted decay rate of log P against n (positive means decay)."""
        return -self.fit.rate

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([r.probability for r in self.results])

    @property
    def stderrs(self) -> np.ndarray:
        return np.array([r.stderr for r in self.results])


def ldp_rate_fit(
    dist: WordDistribution,
    E: float,
    epsilon: float,
    n_grid,
    trials: int,
    seed: int,
    side: str = "plus",
) -> LdpResult:
    """Fit log P[deviation] vs n over the grid; eta_hat = -rate.

    Every empirical probability must be positive; a zero cell raises an
    insufficient-trials error naming the offending n (shrink epsilon or
    raise the trial count)."""
    n_grid = tuple(int(n) for n in n_grid)
    if len(n_grid) < 5:
        raise ParameterError("need at least 5 interval lengths")
    if sorted(n_grid) != list(n_grid):
        raise ParameterError("interval lengths must ascend")
    results = []
    for j, n in enumerate(n_grid):
        res = deviation_probability(
            dist, DeviationSpec(energy=E, n=n, epsilon=epsilon, side=side),
            trials, spawn_seed(seed, j),
        )
        if res.hits == 0:
            raise InsufficientTrialsError(
                "no deviation hits at n = %d with %d trials" % (n, trials), n=n
            )
        results.append(res)
    fit = fit_log_linear(
        np.array(n_grid, dtype=float),
        np.array([r.probability for r in results]),
        min_points=5,
    )
    return LdpResult(
        fit=fit, n_grid=n_grid, results=tuple(results),
        gamma_ref=results[0].gamma_ref, side=side,
    )


@dataclass(frozen=True)
class EigenDecaySummary:
    """Ensemble eigenvector decay rates against the Lyapunov reference."""

    band: tuple[float, float]
    median_rate: float
    gamma_ref: float
    ratio: float
    localized: bool
    vector_count: int
    realization_count: int
    rates: np.ndarray


def eigen_decay_vs_lyapunov(ens: EnsembleSpec, E_band=None) -> EigenDecaySummary:
    """Fit log|u(n)| vs distance-to-center for band eigenvectors.

    Eigenvectors are kept when their eigenvalue lies in the band and their
    center of localization sits in the buffered sub-box; each is fitted
    over the intermediate distance window.  The median fitted rate is
    compared with the Lyapunov reference at the band midpoint."""
    if ens.box_size < 500:
        raise ParameterError("eigenvector decay study needs a box of 500+ sites")
    band = tuple(map(float, E_band if E_band is not None else ens.interval))
    if band[0] > band[1]:
        raise ParameterError("energy band is reversed")
    d_lo, d_hi = ens.fit_window()
    rates = []
    for i in range(ens.count):
        eig = _ensemble_eigensystem(ens, i)
        sel = np.flatnonzero(
            (eig.eigenvalues >= band[0]) & (eig.eigenvalues <= band[1])
        )
        if len(sel) == 0:
            continue
        centers = localization_centers(eig)
        for k in sel:
            center = centers[k]
            if not ens.in_sub_box(center):
                continue
            dist_to_center = np.abs(eig.sites - center)
            mag = np.abs(eig.eigenvectors[:, k])
            keep = (dist_to_center >= d_lo) & (dist_to_center <= d_hi) & (mag > 0)
            if int(keep.sum()) < 5:
                continue
            fit = fit_log_linear(dist_to_center[keep], mag[keep], min_points=5)
            rates.append(-fit.rate)
    if not rates:
        raise EmptyBandError(
            "no eigenvector with eigenvalue in [%g, %g] and center in the sub-box"
            % band
        )
    mid = 0.5 * (band[0] + band[1])
    gamma = gamma_reference(ens.distribution, mid).gamma
    med = float(median(rates))
    ratio = med / gamma if gamma > 0 else math.inf
    localized = gamma > _LOCALIZED_GAMMA_FLOOR and med > 0.5 * gamma
    return EigenDecaySummary(
        band=band,
        median_rate=med,
        gamma_ref=gamma,
        ratio=ratio,
        localized=localized,
        vector_count=len(rates),
        realization_count=ens.count,
        rates=np.array(rates),
    )


def _distance_profile(
    site_values: np.ndarray, sites: np.ndarray, anchor: int
) -> tuple[np.ndarray, np.ndarray]:
    """Mean of site_values over the sites at each distance from anchor."""
    d = np.abs(sites - anchor)
    max_d = int(d.max())
    sums = np.bincount(d, weights=site_values, minlength=max_d + 1)
    counts = np.bincount(d, minlength=max_d + 1)
    distances = np.arange(max_d + 1)
    return distances, sums / counts


@dataclass(frozen=True)
class DecayProfile:
    """Ensemble-mean distance profile with its exponential fit.

    `fit` is None when the energy window caught no spectral mass anywhere
    in the fit window (the profile is identically zero there)."""

    anchor: int
    interval: tuple[float, float]
    distances: np.ndarray
    values: np.ndarray
    fit: DecayFit | None
    realization_count: int

    @property
    def decay_rate(self) -> float:
        """Positive-for-decay fitted exponent; nan without a fit."""
        return math.nan if self.fit is None else -self.fit.rate


def _ensemble_profile(ens: EnsembleSpec, anchor: int, per_site) -> DecayProfile:
    if not ens.in_sub_box(anchor):
        raise ParameterError("anchor site %d outside the buffered sub-box" % anchor)
    acc = np.zeros(ens.box_size)
    sites = None
    for i in range(ens.count):
        eig = _ensemble_eigensystem(ens, i)
        proj = spectral_projection(eig, *ens.interval)
        acc += per_site(eig, proj)
        sites = eig.sites
    mean_sites = acc / ens.count
    distances, values = _distance_profile(mean_sites, sites, anchor)
    d_lo, d_hi = ens.fit_window()
    in_window = (distances >= d_lo) & (distances <= d_hi)
    if np.any(in_window) and not np.any(values[in_window] > 0.0):
        fit = None
    else:
        fit = fit_log_linear(distances, values, window=(d_lo, d_hi), min_points=5)
    return DecayProfile(
        anchor=anchor,
        interval=ens.interval,
        distances=distances,
        values=values,
        fit=fit,
        realization_count=ens.count,
    )


def correlator_profile(ens: EnsembleSpec, l: int) -> DecayProfile:
    """Ensemble mean of the center-l eigenfunction correlator vs distance.

    decay_rate is the fitted exponent of sum over eigenvectors centered at
    l (eigenvalue in the window) of u(s)^2, averaged over disorder."""

    def per_site(eig, proj):
        corr = correlator_by_center(eig, proj, l)
        return np.array([corr[int(s)] for s in eig.sites])

    return _ensemble_profile(ens, l, per_site)


def edl_kernel_decay(ens: EnsembleSpec, p: int) -> DecayProfile:
    """Ensemble mean of the t-uniform projected kernel bound vs distance.

    decay_rate is the fitted exponent of the disorder-averaged dominating
    kernel sum_k |u_k(p)| |u_k(q)| over the energy window."""
    return _ensemble_profile(ens, p, lambda eig, proj: projected_kernel_profile(eig, proj, p))


@dataclass(frozen=True)
class RegularityProbability:
    """Fraction of (realization, site) probes passing the two-sided test."""

    probability: float
    stderr: float
    trials: int
    hits: int
    near_singular_resamples: int
    scale: int
    rate: float
    energy: float


def regularity_probability(
    ens: EnsembleSpec, c: float, n_scale: int, E: float, probes: int = 8
) -> RegularityProbability:
    """Empirical probability that a probe site is (c, n, E)-regular.

    Probes are evenly spaced sites of the buffered sub-box whose centered
    2n+1 box fits inside the ensemble box.  A near-singular Green
    evaluation is retried on spare realizations and tallied separately."""
    if n_scale < 1:
        raise ParameterError("scale must be at least 1")
    reach = ens.half_width - n_scale
    lo = max(-ens.sub_half_width, -reach)
    hi = min(ens.sub_half_width, reach)
    if lo > hi:
        raise ParameterError(
            "scale %d leaves no probe site inside the box" % n_scale
        )
    if probes < 1:
        raise ParameterError("need at least one probe site")
    sites = np.unique(np.linspace(lo, hi, probes).round().astype(int))
    hits = 0
    trials = 0
    resamples = 0
    spare = 0
    for i in range(ens.count):
        r = sample_potential(
            ens.distribution, seed=ens.realization_seed(i), window=ens.window
        )
        for x in sites:
            current = r
            for attempt in range(_MAX_RESAMPLE_ATTEMPTS + 1):
                try:
                    verdict = regularity(current, int(x), n_scale, E, c)
                    break
                except NearSingularError:
                    resamples += 1
                    current = sample_potential(
                        ens.distribution,
                        seed=spawn_seed(ens.base_seed, ens.count + spare),
                        window=ens.window,
                    )
                    spare += 1
            else:
                raise NearSingularError(
                    "probe at site %d stayed near-singular after %d resamples"
                    % (x, _MAX_RESAMPLE_ATTEMPTS)
                )
            trials += 1
            hits += int(verdict.regular)
    p = hits / trials
    stderr = math.sqrt(p * (1.0 - p) / trials)
    return RegularityProbability(
        probability=p,
        stderr=stderr,
        trials=trials,
        hits=hits,
        near_singular_resamples=resamples,
        scale=n_scale,
        rate=c,
        energy=E,
    )


@dataclass(frozen=True)
class TransportEnsemble:
    """Disorder-averaged transport moments over an averaging-time grid."""

    series: TransportSeries
    per_realization: np.ndarray
    count: int
    half_width: int


def transport_ensemble(
    dist: WordDistribution,
    half_width: int,
    q_exp: float,
    T_values,
    count: int,
    base_seed: int,
    samples: int = 256,
    workers: int = 1,
) -> TransportEnsemble:
    """Mean time-averaged |X|^q moment over `count` realizations.

    Realizations are independent (one child seed each), so `workers` > 1
    computes them on a thread pool; rows are assembled by realization
    index, keeping the result identical to the serial run."""
    if count < 1:
        raise ParameterError("realization count must be at least 1")
    if workers < 1:
        raise ParameterError("worker count must be at least 1")
    T_values = np.asarray(T_values, dtype=np.float64)
    rows = np.empty((count, len(T_values)))

    def one(i: int) -> np.ndarray:
        r = sample_potential(
            dist, seed=spawn_seed(base_seed, i), window=(-half_width, half_width)
        )
        eig = eigensystem(restrict(r, -half_width, half_width))
        return transport_series(eig, q_exp, T_values, samples=samples).values

    if workers == 1 or count == 1:
        for i in range(count):
            rows[i] = one(i)
    else:
        with ThreadPoolExecutor(max_workers=min(workers, count)) as pool:
            for i, values in enumerate(pool.map(one, range(count))):
                rows[i] = values
    mean = TransportSeries(q_exp=q_exp, times=T_values, values=rows.mean(axis=0))
    return TransportEnsemble(
        series=mean, per_realization=rows, count=count, half_width=half_width
    )
