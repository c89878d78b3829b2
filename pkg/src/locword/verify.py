"""Brute-force oracle and invariant suites.

Each suite checks one structural identity of the library against an
independent computation (dense determinants, direct solves, closed forms)
or a conservation law (unimodularity, unitarity, interlacing).  All suites
run from fixed internal seeds and report a violation count; the default
run must come back all zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    evolved_state,
    projected_evolve_amplitude,
    projected_kernel_sup_bound,
    spectral_projection,
)
from .errors import NearSingularError
from .operators import (
    TridiagonalOperator,
    eigensystem,
    green,
    restrict,
    transfer_determinant_entries,
)
from .transfer import interval_transfer
from .words import preset, sample_potential

_DEFAULT_SEED = 194680


@dataclass(frozen=True)
class SuiteResult:
    """Outcome of one verification suite."""

    name: str
    cases: int
    violations: int
    worst: float
    detail: str

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _dense_tridiag(diag: np.ndarray) -> np.ndarray:
    n = len(diag)
    m = np.diag(diag)
    idx = np.arange(n - 1)
    m[idx, idx + 1] = 1.0
    m[idx + 1, idx] = 1.0
    return m


def _mixed_distributions():
    return (
        preset("dimer", 1.0),
        preset("dimer", 0.5),
        preset("bernoulli_anderson", 0.0, 4.0, 0.5),
    )


def determinant_transfer_identity(cases: int = 200, seed: int = _DEFAULT_SEED) -> SuiteResult:
    """Window determinant quadruple vs parity-signed transfer entries."""
    rng = np.random.default_rng(seed)
    dists = _mixed_distributions()
    violations = 0
    worst = 0.0
    for c in range(cases):
        dist = dists[c % len(dists)]
        r = sample_potential(dist, seed=int(rng.integers(2**32)), window=(-20, 20))
        a = int(rng.integers(-18, 8))
        b = a + int(rng.integers(0, 12))
        E = float(rng.uniform(-3.5, 3.5))
        quad = transfer_determinant_entries(r, a, b, E)
        t = interval_transfer(r, a, b, E).reconstruct()
        n = b - a + 1
        s = (-1.0) ** n
        expected = (s * t[0, 0], -s * t[0, 1], -s * t[1, 0], s * t[1, 1])
        for got, want in zip(quad, expected):
            err = abs(got - want) / max(abs(want), 1.0)
            worst = max(worst, err)
            if err > 1e-9:
                violations += 1
    return SuiteResult(
        name="determinant-transfer identity",
        cases=cases * 4,
        violations=violations,
        worst=worst,
        detail="max relative entry error %.2e" % worst,
    )


def green_two_method(cases: int = 200, seed: int = _DEFAULT_SEED + 1) -> SuiteResult:
    """Determinant-split vs banded-solve Green magnitudes."""
    rng = np.random.default_rng(seed)
    dists = _mixed_distributions()
    violations = 0
    worst = 0.0
    done = 0
    while done < cases:
        dist = dists[done % len(dists)]
        n = int(rng.integers(8, 65))
        r = sample_potential(dist, seed=int(rng.integers(2**32)), window=(1, n))
        op = restrict(r, 1, n)
        E = float(rng.uniform(-4.0, 4.0))
        if np.min(np.abs(op.eigenvalues() - E)) < 1e-6 * op.norm_bound():
            continue
        x = int(rng.integers(1, n + 1))
        y = int(rng.integers(1, n + 1))
        try:
            g1 = green(op, E, x, y, method="cramer").value
            g2 = green(op, E, x, y, method="direct").value
        except NearSingularError:
            continue
        err = abs(g1 - g2) / max(g1, g2, 1e-300)
        worst = max(worst, err)
        if err > 1e-8:
            violations += 1
        done += 1
    return SuiteResult(
        name="Green two-method agreement",
        cases=cases,
        violations=violations,
        worst=worst,
        detail="max relative error %.2e" % worst,
    )


def eigen_residuals(size: int = 4096, seed: int = _DEFAULT_SEED + 2) -> SuiteResult:
    """Eigenpair residuals and orthonormality on a large disordered box,
    plus the closed-form free-box spectrum."""
    dist = preset("dimer", 1.0)
    half = size // 2
    r = sample_potential(dist, seed=seed, window=(-half, half))
    op = restrict(r, -half, half)
    eig = eigensystem(op)
    v = eig.eigenvectors
    hv = op.diagonal[:, None] * v
    hv[:-1] += v[1:]
    hv[1:] += v[:-1]
    resid = float(np.max(np.abs(hv - v * eig.eigenvalues)))
    rng = np.random.default_rng(seed)
    idx = rng.choice(eig.size, size=min(256, eig.size), replace=False)
    gram = v[:, idx].T @ v[:, idx]
    ortho = float(np.max(np.abs(gram - np.eye(len(idx)))))
    free = TridiagonalOperator(window=(1, 50), diagonal=np.zeros(50))
    expected = np.sort(2.0 * np.cos(np.pi * np.arange(1, 51) / 51.0))
    closed = float(np.max(np.abs(eigensystem(free).eigenvalues - expected)))
    worst = max(resid, ortho, closed)
    violations = int(resid > 1e-9) + int(ortho > 1e-9) + int(closed > 1e-9)
    return SuiteResult(
        name="eigenpair residuals",
        cases=eig.size + len(idx) + 50,
        violations=violations,
        worst=worst,
        detail="residual %.2e, orthonormality %.2e, free closed form %.2e"
        % (resid, ortho, closed),
    )


def unimodularity(cases: int = 200, seed: int = _DEFAULT_SEED + 3) -> SuiteResult:
    """det of short transfer products equals 1 after scale extraction."""
    rng = np.random.default_rng(seed)
    dists = _mixed_distributions()
    violations = 0
    worst = 0.0
    for c in range(cases):
        dist = dists[c % len(dists)]
        r = sample_potential(dist, seed=int(rng.integers(2**32)), window=(-8, 8))
        a = int(rng.integers(-8, 5))
        b = a + int(rng.integers(0, 5))
        E = float(rng.uniform(-1.5, 1.5))
        prod = interval_transfer(r, a, b, E)
        det = float(np.linalg.det(prod.matrix)) * math.exp(2.0 * prod.log_scale)
        err = abs(det - 1.0)
        worst = max(worst, err)
        if err > 1e-9:
            violations += 1
    return SuiteResult(
        name="unimodularity",
        cases=cases,
        violations=violations,
        worst=worst,
        detail="max |det - 1| = %.2e" % worst,
    )


def cocycle_law(cases: int = 100, seed: int = _DEFAULT_SEED + 4) -> SuiteResult:
    """T over [a,c] equals T over (b,c] times T over [a,b]."""
    rng = np.random.default_rng(seed)
    dists = _mixed_distributions()
    violations = 0
    worst = 0.0
    for c_i in range(cases):
        dist = dists[c_i % len(dists)]
        r = sample_potential(dist, seed=int(rng.integers(2**32)), window=(-30, 40))
        a = int(rng.integers(-28, 0))
        b = a + int(rng.integers(0, 20))
        c = b + 1 + int(rng.integers(0, 20))
        E = float(rng.uniform(-2.5, 2.5))
        whole = interval_transfer(r, a, c, E)
        left = interval_transfer(r, a, b, E)
        right = interval_transfer(r, b + 1, c, E)
        combined = right.matrix @ left.matrix
        scale = right.log_scale + left.log_scale
        nrm = float(np.linalg.norm(combined))
        unit_err = float(
            np.max(np.abs(combined / nrm - whole.matrix / np.linalg.norm(whole.matrix)))
        )
        log_err = abs((scale + math.log(nrm)) - (whole.log_scale + math.log(np.linalg.norm(whole.matrix))))
        err = max(unit_err, log_err)
        worst = max(worst, err)
        if err > 1e-9:
            violations += 1
    return SuiteResult(
        name="cocycle composition",
        cases=cases,
        violations=violations,
        worst=worst,
        detail="max composition error %.2e" % worst,
    )


def evolution_unitarity(seed: int = _DEFAULT_SEED + 5) -> SuiteResult:
    """Norm conservation of the eigenexpansion evolution."""
    dist = preset("dimer", 1.0)
    r = sample_potential(dist, seed=seed, window=(-100, 100))
    eig = eigensystem(restrict(r, -100, 100))
    rng = np.random.default_rng(seed)
    times = rng.uniform(0.0, 200.0, size=20)
    cols = evolved_state(eig, 7, times)
    norms = np.sum(np.abs(cols) ** 2, axis=0)
    worst = float(np.max(np.abs(norms - 1.0)))
    violations = int(np.sum(np.abs(norms - 1.0) > 1e-9))
    return SuiteResult(
        name="evolution unitarity",
        cases=len(times),
        violations=violations,
        worst=worst,
        detail="max |norm - 1| = %.2e" % worst,
    )


def kernel_domination(seed: int = _DEFAULT_SEED + 6) -> SuiteResult:
    """Projected amplitudes never exceed the t-uniform dominating kernel."""
    dist = preset("dimer", 1.0)
    r = sample_potential(dist, seed=seed, window=(-80, 80))
    eig = eigensystem(restrict(r, -80, 80))
    proj = spectral_projection(eig, 1.0, 2.0)
    rng = np.random.default_rng(seed)
    violations = 0
    worst = -math.inf
    pairs = [(-5, 12), (0, 40), (-33, -21)]
    for p, q in pairs:
        bound = projected_kernel_sup_bound(eig, proj, p, q)
        for _ in range(100):
            t = float(rng.uniform(0.0, 500.0))
            amp = abs(projected_evolve_amplitude(eig, proj, p, q, t))
            excess = amp - bound
            worst = max(worst, excess)
            if excess > 1e-10:
                violations += 1
    return SuiteResult(
        name="kernel domination",
        cases=300,
        violations=violations,
        worst=worst,
        detail="max (amplitude - bound) = %.2e" % worst,
    )


def sampling_stationarity(trials: int = 30000, seed: int = _DEFAULT_SEED + 7) -> SuiteResult:
    """Marginal of the sampled potential is translation invariant."""
    violations = 0
    worst = 0.0
    checks = []
    for dist, sites in ((preset("dimer", 1.0), (0, 17)), (preset("bernoulli_anderson", 0.0, 4.0, 0.5), (0, 9))):
        vals = np.empty((trials, 2))
        for i in range(trials):
            r = sample_potential(dist, seed=seed + i, window=(min(sites), max(sites)))
            vals[i, 0] = r.value(sites[0])
            vals[i, 1] = r.value(sites[1])
        for moment in (1, 2):
            a = vals[:, 0] ** moment
            b = vals[:, 1] ** moment
            se = math.sqrt((a.var(ddof=1) + b.var(ddof=1)) / trials)
            z = abs(a.mean() - b.mean()) / se if se > 0 else 0.0
            checks.append(z)
            worst = max(worst, z)
            if z > 5.0:
                violations += 1
    return SuiteResult(
        name="sampling stationarity",
        cases=len(checks),
        violations=violations,
        worst=worst,
        detail="max |z| over moment comparisons = %.2f (threshold 5)" % worst,
    )


def interlacing(cases: int = 100, seed: int = _DEFAULT_SEED + 8) -> SuiteResult:
    """Eigenvalues of nested boxes interlace."""
    rng = np.random.default_rng(seed)
    dists = _mixed_distributions()
    violations = 0
    worst = 0.0
    for c in range(cases):
        dist = dists[c % len(dists)]
        n = int(rng.integers(5, 61))
        r = sample_potential(dist, seed=int(rng.integers(2**32)), window=(1, n))
        big = restrict(r, 1, n).eigenvalues()
        small = restrict(r, 1, n - 1).eigenvalues()
        gap = 0.0
        for j in range(n - 1):
            gap = max(gap, big[j] - small[j], small[j] - big[j + 1])
        worst = max(worst, gap)
        if gap > 1e-12:
            violations += 1
    return SuiteResult(
        name="spectral interlacing",
        cases=cases,
        violations=violations,
        worst=worst,
        detail="max interlacing defect %.2e" % worst,
    )


def reflection_guard(seed: int = _DEFAULT_SEED + 9) -> SuiteResult:
    """Free-evolution probability beyond the ballistic cone is negligible."""
    op = TridiagonalOperator(window=(-250, 250), diagonal=np.zeros(501))
    eig = eigensystem(op)
    T = 100.0
    col = evolved_state(eig, 0, T)[:, 0]
    prob = np.abs(col) ** 2
    leak = float(prob[np.abs(eig.sites) > 2.2 * T].sum())
    return SuiteResult(
        name="ballistic cone guard",
        cases=1,
        violations=int(leak > 1e-6),
        worst=leak,
        detail="probability beyond 2.2 T at T=100: %.2e" % leak,
    )


ALL_SUITES = (
    determinant_transfer_identity,
    green_two_method,
    eigen_residuals,
    unimodularity,
    cocycle_law,
    evolution_unitarity,
    kernel_domination,
    sampling_stationarity,
    interlacing,
    reflection_guard,
)


def run_all() -> list[SuiteResult]:
    """Run every verification suite with its default parameters."""
    return [suite() for suite in ALL_SUITES]
