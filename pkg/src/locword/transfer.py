"""Transfer-matrix cocycle and Lyapunov exponents.

The one-step matrix at energy E over potential value v maps
(psi(n), psi(n-1)) to (psi(n+1), psi(n)):

    [[E - v, -1],
     [1,      0]]

Interval products multiply one-step matrices with the last site leftmost.
Long products are renormalized so only logarithms of norms grow; the top
Lyapunov exponent is the per-site limit of log Frobenius norm, averaged
over an ensemble of realizations with split seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .seeding import spawn_seed
from .words import PotentialRealization, ValueStream, Word, WordDistribution

_FROB_LO = 0.5
_FROB_HI = 4.0
_NORM_FLOOR = 1e-300


def one_step(E: float, v: float) -> np.ndarray:
    """Single-site transfer matrix at energy E over potential value v."""
    return np.array([[E - v, -1.0], [1.0, 0.0]])


def word_transfer(E: float, word: Word | tuple) -> np.ndarray:
    """Product of one-step matrices over a word, last letter leftmost."""
    letters = word.letters if isinstance(word, Word) else tuple(word)
    out = np.eye(2)
    for v in letters:
        out = one_step(E, v) @ out
    return out


@dataclass(frozen=True, eq=False)
class LogNormProduct:
    """A transfer product stored as e**log_scale * matrix.

    The stored matrix keeps Frobenius norm inside [0.5, 4]; `steps` counts
    the one-step factors."""

    matrix: np.ndarray
    log_scale: float
    steps: int

    def reconstruct(self) -> np.ndarray:
        """The plain product; overflows for log_scale beyond float range."""
        return math.exp(self.log_scale) * self.matrix

    def log_norm(self) -> float:
        """log of the Frobenius norm of the full product."""
        return self.log_scale + math.log(float(np.linalg.norm(self.matrix)))


def interval_transfer(
    r: PotentialRealization, a: int, b: int, E: float
) -> LogNormProduct:
    """Renormalized transfer product over sites a..b of a realization.

    b = a - 1 is allowed and gives the identity."""
    wa, wb = r.window
    if b < a - 1:
        raise ParameterError("interval [%d, %d] is reversed" % (a, b))
    if b >= a and not (wa <= a and b <= wb):
        raise ParameterError("interval [%d, %d] outside window" % (a, b))
    m = np.eye(2)
    logs: list[float] = []
    for n in range(a, b + 1):
        v = r.values[n - wa]
        m = np.array([[(E - v) * m[0, 0] - m[1, 0], (E - v) * m[0, 1] - m[1, 1]], m[0]])
        nrm = float(np.linalg.norm(m))
        if nrm > _FROB_HI or nrm < _FROB_LO:
            m /= nrm
            logs.append(math.log(nrm))
    return LogNormProduct(matrix=m, log_scale=math.fsum(logs), steps=max(b - a + 1, 0))


# --------------------------------------------------------------------------
# batched cocycle kernel
#
# For ensembles and energy grids the product is reduced pairwise as a
# balanced tree: each level multiplies adjacent 2x2 factors (stored as four
# flat arrays) and extracts the Frobenius norm into a log account, so a
# chunk of sites costs O(log chunk) vectorized passes instead of a Python
# loop per site.


def _tree_log_norm_chunk(a11, a12, a21, a22, logs):
    """Reduce factor arrays of shape (L, B) to a single (B,) matrix tuple.

    Returns (m11, m12, m21, m22) with per-column log scales added into
    `logs` (shape (B,)).  Order: row i of the input is the factor for the
    i-th site, and later sites multiply from the left."""
    while a11.shape[0] > 1:
        if a11.shape[0] % 2 == 1:
            pad = np.zeros((1, a11.shape[1]))
            one = np.ones((1, a11.shape[1]))
            a11 = np.concatenate([a11, one])
            a12 = np.concatenate([a12, pad])
            a21 = np.concatenate([a21, pad])
            a22 = np.concatenate([a22, one])
        lo = slice(0, None, 2)
        hi = slice(1, None, 2)
        c11 = a11[hi] * a11[lo] + a12[hi] * a21[lo]
        c12 = a11[hi] * a12[lo] + a12[hi] * a22[lo]
        c21 = a21[hi] * a11[lo] + a22[hi] * a21[lo]
        c22 = a21[hi] * a12[lo] + a22[hi] * a22[lo]
        nrm = np.sqrt(c11 * c11 + c12 * c12 + c21 * c21 + c22 * c22)
        np.maximum(nrm, _NORM_FLOOR, out=nrm)
        logs += np.log(nrm).sum(axis=0)
        inv = 1.0 / nrm
        a11, a12, a21, a22 = c11 * inv, c12 * inv, c21 * inv, c22 * inv
    return a11[0], a12[0], a21[0], a22[0]


def _ensemble_log_norms(
    dist: WordDistribution,
    energies: np.ndarray,
    sites: int,
    seed: int,
    realizations: int,
) -> np.ndarray:
    """log Frobenius norms of the site-1..sites transfer products.

    Returns shape (n_energies, realizations); realization i streams from
    spawn_seed(seed, i)."""
    energies = np.asarray(energies, dtype=np.float64)
    n_e = len(energies)
    n_r = realizations
    b = n_e * n_r
    streams = [ValueStream(dist, spawn_seed(seed, i)) for i in range(n_r)]
    chunk = int(max(256, min(1 << 14, (1 << 21) // max(b, 1))))
    logs = np.zeros(b)
    m11 = np.ones(b)
    m12 = np.zeros(b)
    m21 = np.zeros(b)
    m22 = np.ones(b)
    done = 0
    while done < sites:
        take = min(chunk, sites - done)
        v = np.stack([s.take(take) for s in streams])  # (n_r, take)
        a = energies[:, None, None] - v[None, :, :]  # (n_e, n_r, take)
        a11 = a.reshape(b, take).T.copy()  # (take, b)
        ones = np.ones_like(a11)
        zeros = np.zeros_like(a11)
        c11, c12, c21, c22 = _tree_log_norm_chunk(a11, -ones, ones, zeros, logs)
        # multiply chunk product into the running product
        r11 = c11 * m11 + c12 * m21
        r12 = c11 * m12 + c12 * m22
        r21 = c21 * m11 + c22 * m21
        r22 = c21 * m12 + c22 * m22
        nrm = np.sqrt(r11 * r11 + r12 * r12 + r21 * r21 + r22 * r22)
        np.maximum(nrm, _NORM_FLOOR, out=nrm)
        logs += np.log(nrm)
        inv = 1.0 / nrm
        m11, m12, m21, m22 = r11 * inv, r12 * inv, r21 * inv, r22 * inv
        done += take
    final = np.sqrt(m11 * m11 + m12 * m12 + m21 * m21 + m22 * m22)
    total = logs + np.log(final)
    return total.reshape(n_e, n_r)


@dataclass(frozen=True)
class LyapunovEstimate:
    """Monte Carlo Lyapunov exponent at one energy.

    gamma is the mean over realizations of (1/sites) * log Frobenius norm;
    std_error is the standard error across realizations."""

    energy: float
    gamma: float
    std_error: float
    sites: int
    realizations: int


_MIN_SITES = 10**4
_MIN_REALIZATIONS = 8


def lyapunov_estimate(
    dist: WordDistribution,
    E: float,
    sites: int,
    seed: int,
    realizations: int = _MIN_REALIZATIONS,
) -> LyapunovEstimate:
    """Per-site Lyapunov exponent estimate at one energy."""
    if sites < _MIN_SITES:
        raise ParameterError("need at least %d sites" % _MIN_SITES)
    if realizations < _MIN_REALIZATIONS:
        raise ParameterError("need at least %d realizations" % _MIN_REALIZATIONS)
    log_norms = _ensemble_log_norms(dist, np.array([E]), sites, seed, realizations)[0]
    per = log_norms / sites
    gamma = float(per.mean())
    se = float(per.std(ddof=1) / np.sqrt(realizations))
    return LyapunovEstimate(
        energy=float(E), gamma=gamma, std_error=se, sites=sites, realizations=realizations
    )


@dataclass(frozen=True, eq=False)
class LyapunovCurve:
    """Lyapunov estimates over an energy grid with shared ensemble seeds.

    `flagged` marks grid points inside detected near-critical neighborhoods
    (gamma below `critical_threshold`, clusters widened by one grid step);
    `v_floor` is the smallest gamma over the remaining points (nan if every
    point is flagged)."""

    grid: np.ndarray
    estimates: tuple[LyapunovEstimate, ...]
    v_floor: float
    critical_threshold: float
    flagged: np.ndarray
    sites: int
    seed: int
    realizations: int
    distribution: WordDistribution | None = None

    @property
    def gammas(self) -> np.ndarray:
        return np.array([e.gamma for e in self.estimates])

    @property
    def std_errors(self) -> np.ndarray:
        return np.array([e.std_error for e in self.estimates])


def _clusters(mask: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of True as (start, stop) index pairs, stop exclusive."""
    out = []
    i = 0
    n = len(mask)
    while i < n:
        if mask[i]:
            j = i
            while j < n and mask[j]:
                j += 1
            out.append((i, j))
            i = j
        else:
            i += 1
    return out


def lyapunov_curve(
    dist: WordDistribution,
    grid,
    sites: int,
    seed: int,
    realizations: int = _MIN_REALIZATIONS,
    critical_threshold: float = 0.02,
) -> LyapunovCurve:
    """Lyapunov exponent over an energy grid, one shared ensemble."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or len(grid) == 0:
        raise ParameterError("energy grid must be a nonempty 1-d array")
    if sites < _MIN_SITES:
        raise ParameterError("need at least %d sites" % _MIN_SITES)
    if realizations < _MIN_REALIZATIONS:
        raise ParameterError("need at least %d realizations" % _MIN_REALIZATIONS)
    log_norms = _ensemble_log_norms(dist, grid, sites, seed, realizations)
    per = log_norms / sites
    gammas = per.mean(axis=1)
    ses = per.std(axis=1, ddof=1) / np.sqrt(realizations)
    estimates = tuple(
        LyapunovEstimate(float(e), float(g), float(s), sites, realizations)
        for e, g, s in zip(grid, gammas, ses)
    )
    flagged = np.zeros(len(grid), dtype=bool)
    for i0, i1 in _clusters(gammas < critical_threshold):
        flagged[max(i0 - 1, 0) : min(i1 + 1, len(grid))] = True
    unflagged = gammas[~flagged]
    v_floor = float(unflagged.min()) if len(unflagged) else float("nan")
    return LyapunovCurve(
        grid=grid,
        estimates=estimates,
        v_floor=v_floor,
        critical_threshold=critical_threshold,
        flagged=flagged,
        sites=sites,
        seed=seed,
        realizations=realizations,
        distribution=dist,
    )


def detect_critical_energies(curve: LyapunovCurve, threshold: float) -> list[float]:
    """Energies where the curve dips below `threshold`.

    Sub-threshold grid points are merged into clusters of adjacent points;
    each cluster is reported by its minimizing energy, sharpened by one
    bisection pass (three extra ensemble evaluations at half the grid step)
    when the curve carries its generating distribution."""
    gammas = curve.gammas
    out = []
    for i0, i1 in _clusters(gammas < threshold):
        idx = i0 + int(np.argmin(gammas[i0:i1]))
        best_e = float(curve.grid[idx])
        best_g = float(gammas[idx])
        if curve.distribution is not None and len(curve.grid) > 1:
            h = float(np.min(np.diff(curve.grid)))
            cand = [(best_g, best_e)]
            for e in (best_e - h / 2.0, best_e + h / 2.0):
                est = lyapunov_estimate(
                    curve.distribution, e, curve.sites, curve.seed, curve.realizations
                )
                cand.append((est.gamma, est.energy))
            cand.sort()
            mid = 0.5 * (cand[0][1] + cand[1][1])
            est = lyapunov_estimate(
                curve.distribution, mid, curve.sites, curve.seed, curve.realizations
            )
            cand.append((est.gamma, est.energy))
            best_e = min(cand)[1]
        out.append(best_e)
    return out


def min_word_trace(dist: WordDistribution, E: float) -> float:
    """Smallest |trace| of a support-word transfer matrix at energy E.

    Values at most 2 mean E lies in the spectrum of the periodic operator
    built from that word, a lower bound for the full spectrum."""
    best = math.inf
    for w, p in zip(dist.words, dist.weights):
        if p > 0.0:
            t = abs(float(np.trace(word_transfer(E, w))))
            best = min(best, t)
    return best
