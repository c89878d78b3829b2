"""Finite-volume restrictions: spectra, determinants, Green's functions.

The restriction of the Schrodinger operator to a window [a, b] is the
symmetric tridiagonal matrix with the potential on the diagonal and unit
off-diagonals.  Its characteristic determinant det(H - E) obeys the
three-term recursion P_k = (V_k - E) P_{k-1} - P_{k-2} and ties the window
to the transfer product: up to a parity sign per interval length, the four
entries of the interval transfer matrix are determinants of the window and
its three boundary trimmings (empty interval giving 1, reversed giving 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal, solve_banded

from .errors import CoverageError, NearSingularError, ParameterError
from .words import PotentialRealization

_RESCALE_EVERY = 64
_RESCALE_HI = 1e120
_RESCALE_LO = 1e-120
_NEAR_SINGULAR_TOL = 1e-10


@dataclass(eq=False)
class TridiagonalOperator:
    """Restriction to a window: diagonal = potential, off-diagonals = 1."""

    window: tuple[int, int]
    diagonal: np.ndarray
    _eigvals: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        a, b = self.window
        self.diagonal = np.ascontiguousarray(self.diagonal, dtype=np.float64)
        if b - a + 1 != len(self.diagonal):
            raise ParameterError("window size does not match diagonal length")
        if len(self.diagonal) < 1:
            raise ParameterError("operator needs at least one site")

    @property
    def size(self) -> int:
        return len(self.diagonal)

    def norm_bound(self) -> float:
        """Row-sum bound on the operator norm."""
        return 2.0 + float(np.max(np.abs(self.diagonal)))

    def eigenvalues(self) -> np.ndarray:
        """Ascending eigenvalues, computed once and cached."""
        if self._eigvals is None:
            if self.size == 1:
                self._eigvals = self.diagonal.copy()
            else:
                self._eigvals = eigh_tridiagonal(
                    self.diagonal, np.ones(self.size - 1), eigvals_only=True
                )
        return self._eigvals

    def dense(self) -> np.ndarray:
        m = np.diag(self.diagonal)
        idx = np.arange(self.size - 1)
        m[idx, idx + 1] = 1.0
        m[idx + 1, idx] = 1.0
        return m


def restrict(r: PotentialRealization, a: int, b: int) -> TridiagonalOperator:
    """Restriction of a realization to [a, b] (must lie inside its window)."""
    wa, wb = r.window
    if a > b:
        raise ParameterError("interval [%d, %d] is reversed" % (a, b))
    if a < wa or b > wb:
        raise CoverageError("interval [%d, %d] outside window [%d, %d]" % (a, b, wa, wb))
    return TridiagonalOperator(window=(a, b), diagonal=r.values[a - wa : b - wa + 1])


def char_poly_log_batch(values: np.ndarray, E: float) -> tuple[np.ndarray, np.ndarray]:
    """(sign, log|det(H - E)|) for a batch of diagonals, shape (..., n).

    Rescales the running pair so the recursion never overflows."""
    v = np.asarray(values, dtype=np.float64)
    n = v.shape[-1]
    x_prev = np.ones(v.shape[:-1])
    x = v[..., 0] - E
    off = np.zeros(v.shape[:-1])
    for k in range(1, n):
        x, x_prev = (v[..., k] - E) * x - x_prev, x
        if k % _RESCALE_EVERY == 0:
            m = np.maximum(np.abs(x), np.abs(x_prev))
            m = np.where((m > _RESCALE_HI) | ((m < _RESCALE_LO) & (m > 0.0)), m, 1.0)
            off += np.log(m)
            x = x / m
            x_prev = x_prev / m
    sign = np.sign(x)
    with np.errstate(divide="ignore"):
        logabs = off + np.log(np.abs(x))
    return sign, logabs


def char_poly_log(op: TridiagonalOperator, E: float) -> tuple[float, float]:
    """(sign, log|det(H - E)|) of the window restriction."""
    sign, logabs = char_poly_log_batch(op.diagonal, E)
    return float(sign), float(logabs)


def char_poly(op: TridiagonalOperator, E: float) -> float:
    """det(H - E); may overflow to inf for very large windows."""
    sign, logabs = char_poly_log(op, E)
    if logabs > 709.0:
        return math.inf * sign if sign != 0.0 else 0.0
    return sign * math.exp(logabs)


def _sub_determinant(values: np.ndarray, E: float, lo: int, hi: int) -> float:
    """det over values[lo..hi] with empty -> 1 and reversed -> 0."""
    width = hi - lo + 1
    if width == 0:
        return 1.0
    if width < 0:
        return 0.0
    sign, logabs = char_poly_log_batch(values[lo : hi + 1], E)
    return float(sign) * math.exp(float(logabs))


def transfer_determinant_entries(
    r: PotentialRealization, a: int, b: int, E: float
) -> tuple[float, float, float, float]:
    """Determinant quadruple (P[a,b], -P[a+1,b], P[a,b-1], -P[a+1,b-1]).

    P is det(H - E) over the subscripted window, with the empty interval
    giving 1 and a reversed interval 0.  Each value equals the matching
    interval-transfer entry up to the sign (-1)**(interval length)."""
    wa, wb = r.window
    if a > b:
        raise ParameterError("interval [%d, %d] is reversed" % (a, b))
    if a < wa or b > wb:
        raise CoverageError("interval [%d, %d] outside window" % (a, b))
    v = r.values
    p_full = _sub_determinant(v, E, a - wa, b - wa)
    p_left = _sub_determinant(v, E, a + 1 - wa, b - wa)
    p_right = _sub_determinant(v, E, a - wa, b - 1 - wa)
    p_both = _sub_determinant(v, E, a + 1 - wa, b - 1 - wa)
    return (p_full, -p_left, p_right, -p_both)


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Full spectral decomposition of a window restriction.

    eigenvalues ascend; eigenvectors[:, k] is the unit eigenvector for
    eigenvalues[k], indexed by site (row i is site window[0] + i)."""

    window: tuple[int, int]
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def size(self) -> int:
        return len(self.eigenvalues)

    def site_index(self, p: int) -> int:
        a, b = self.window
        if not a <= p <= b:
            raise ParameterError("site %d outside window [%d, %d]" % (p, a, b))
        return p - a

    @property
    def sites(self) -> np.ndarray:
        a, b = self.window
        return np.arange(a, b + 1)


def eigensystem(op: TridiagonalOperator) -> EigenSystem:
    """Eigenvalues and orthonormal eigenvectors of the restriction."""
    if op.size == 1:
        return EigenSystem(op.window, op.diagonal.copy(), np.ones((1, 1)))
    w, v = eigh_tridiagonal(op.diagonal, np.ones(op.size - 1))
    return EigenSystem(window=op.window, eigenvalues=w, eigenvectors=v)


@dataclass(frozen=True)
class GreenValue:
    """|G(x, y)| of the window restriction at energy E."""

    x: int
    y: int
    energy: float
    value: float
    method: str


def _check_not_singular(op: TridiagonalOperator, E: float) -> None:
    dist = float(np.min(np.abs(op.eigenvalues() - E)))
    if dist < _NEAR_SINGULAR_TOL * (op.norm_bound() + 1.0):
        raise NearSingularError(
            "E = %.17g within %.1e of the window spectrum" % (E, dist)
        )


def _solve_resolvent(op: TridiagonalOperator, E: float, rhs: np.ndarray) -> np.ndarray:
    """(H - E)^{-1} rhs by banded LU."""
    n = op.size
    ab = np.zeros((3, n))
    ab[0, 1:] = 1.0
    ab[1] = op.diagonal - E
    ab[2, :-1] = 1.0
    return solve_banded((1, 1), ab, rhs)


def green_log_magnitude(op: TridiagonalOperator, E: float, x: int, y: int) -> float:
    """log|G(x, y)| from the determinant splitting (no eigenvalue guard)."""
    a, b = op.window
    lo, hi = (x, y) if x <= y else (y, x)
    v = op.diagonal

    def logdet(l, h):
        if h - l + 1 == 0:
            return 0.0
        _, la = char_poly_log_batch(v[l - a : h - a + 1], E)
        return float(la)

    _, l_full = char_poly_log_batch(v, E)
    return logdet(a, lo - 1) + logdet(hi + 1, b) - float(l_full)


def green(
    op: TridiagonalOperator, E: float, x: int, y: int, method: str = "cramer"
) -> GreenValue:
    """|G(x, y)| = |<delta_x, (H - E)^{-1} delta_y>| on the window.

    cramer splits the determinant in log-domain; direct solves the banded
    system.  Both refuse energies within 1e-10 * (norm bound + 1) of the
    window spectrum."""
    a, b = op.window
    for site in (x, y):
        if not a <= site <= b:
            raise ParameterError("site %d outside window [%d, %d]" % (site, a, b))
    _check_not_singular(op, E)
    if method == "cramer":
        value = math.exp(green_log_magnitude(op, E, x, y))
    elif method == "direct":
        rhs = np.zeros(op.size)
        rhs[y - a] = 1.0
        value = abs(float(_solve_resolvent(op, E, rhs)[x - a]))
    else:
        raise ParameterError("method must be 'cramer' or 'direct'")
    return GreenValue(x=x, y=y, energy=E, value=value, method=method)


def eigenfunction_identity_residual(
    op: TridiagonalOperator, psi: np.ndarray, E: float, x: int
) -> float:
    """Residual |psi(x) + G(x,a) psi(a-1) + G(x,b) psi(b+1)|.

    psi holds values on [a-1, b+1], so len(psi) = size + 2.  For a solution
    of the difference equation at energy E the residual vanishes."""
    a, b = op.window
    psi = np.asarray(psi, dtype=np.float64)
    if len(psi) != op.size + 2:
        raise ParameterError("psi must cover [a-1, b+1]")
    if not a <= x <= b:
        raise ParameterError("site %d outside window" % x)
    _check_not_singular(op, E)
    rhs = np.zeros(op.size)
    rhs[0] = psi[0]
    rhs[-1] = psi[-1]
    g = _solve_resolvent(op, E, rhs)
    return abs(float(psi[x - a + 1] + g[x - a]))


@dataclass(frozen=True)
class RegularityVerdict:
    """Two-sided Green decay test on the box [site - scale, site + scale]."""

    site: int
    scale: int
    rate: float
    energy: float
    log_green_left: float
    log_green_right: float
    left_ok: bool
    right_ok: bool
    regular: bool


def regularity(
    r: PotentialRealization, x: int, n: int, E: float, c: float
) -> RegularityVerdict:
    """Check |G(x, x-n)| and |G(x, x+n)| <= e^{-c n} on [x-n, x+n]."""
    if n < 1:
        raise ParameterError("scale must be at least 1")
    op = restrict(r, x - n, x + n)
    _check_not_singular(op, E)
    log_left = green_log_magnitude(op, E, x, x - n)
    log_right = green_log_magnitude(op, E, x, x + n)
    bound = -c * n
    left_ok = log_left <= bound
    right_ok = log_right <= bound
    return RegularityVerdict(
        site=x,
        scale=n,
        rate=c,
        energy=E,
        log_green_left=log_left,
        log_green_right=log_right,
        left_ok=left_ok,
        right_ok=right_ok,
        regular=left_ok and right_ok,
    )


def center_of_localization(u: np.ndarray, start: int = 0) -> int:
    """Site of the largest |u|; ties prefer smaller |site|, then smaller site.

    `start` is the site of u[0]."""
    u = np.asarray(u)
    if len(u) == 0 or not np.any(u != 0):
        raise ParameterError("vector must have a nonzero entry")
    mag = np.abs(u)
    peak = mag.max()
    ties = np.flatnonzero(mag == peak) + start
    return int(min(ties, key=lambda s: (abs(s), s)))


def localization_centers(eig: EigenSystem) -> np.ndarray:
    """Center of localization of every eigenvector, in eigenvalue order."""
    a, _ = eig.window
    mag = np.abs(eig.eigenvectors)
    peaks = mag.max(axis=0)
    first = np.argmax(mag, axis=0)
    centers = first + a
    # argmax returns the lowest row, which is the smallest site; the tie
    # rule wants smallest |site| first, so fix up columns with actual ties
    multi = (mag == peaks[None, :]).sum(axis=0) > 1
    for k in np.flatnonzero(multi):
        centers[k] = center_of_localization(eig.eigenvectors[:, k], start=a)
    return centers


@dataclass(frozen=True)
class ChebyshevCheck:
    """Node-vs-global polynomial bound summary for one trial."""

    n: int
    theta: float
    node_max: float
    global_max: float
    base: float
    implied_c: float
    bound_holds: bool


def chebyshev_bound_check(
    coeffs, theta: float, a: float | None = None, grid_factor: int = 64
) -> ChebyshevCheck:
    """Compare |Q| at n shifted Chebyshev nodes with its max on [-1, 1].

    coeffs are monomial coefficients in increasing degree; n = len(coeffs)
    and the nodes are cos(2 pi (i + theta) / n) for i = 1..n.  The implied
    constant is global_max / (n * base**n) with base = node_max**(1/n)
    unless an explicit base `a` is supplied."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    n = len(coeffs)
    if n < 1:
        raise ParameterError("need at least one coefficient")
    if not 0.0 < theta < 0.5:
        raise ParameterError("theta must lie in (0, 1/2)")
    nodes = np.cos(2.0 * np.pi * (np.arange(1, n + 1) + theta) / n)
    node_max = float(np.max(np.abs(np.polynomial.polynomial.polyval(nodes, coeffs))))
    grid = np.linspace(-1.0, 1.0, max(grid_factor * n, 256) + 1)
    global_max = float(np.max(np.abs(np.polynomial.polynomial.polyval(grid, coeffs))))
    if node_max == 0.0:
        return ChebyshevCheck(n, theta, 0.0, global_max, 0.0, math.inf, False)
    base = node_max ** (1.0 / n) if a is None else float(a)
    implied_c = global_max / (n * base**n)
    holds = global_max <= implied_c * n * base**n * (1.0 + 1e-12)
    return ChebyshevCheck(
        n=n,
        theta=theta,
        node_max=node_max,
        global_max=global_max,
        base=base,
        implied_c=implied_c,
        bound_holds=holds,
    )
