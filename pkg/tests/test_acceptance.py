"""Acceptance gate: quantitative targets at fixed tolerances and budgets.

Each criterion prints one [PASS]/[FAIL] line with the measured numbers and
its wall time; the collected lines are also written to acceptance_report.txt
at the repository root.  Criteria that miss their targets fail their assert
after reporting, so the suite outcome reflects the true state.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from locword.dynamics import growth_exponent_fit
from locword.errors import InsufficientTrialsError, NearSingularError
from locword.experiments import (
    EnsembleSpec,
    correlator_profile,
    edl_kernel_decay,
    eigen_decay_vs_lyapunov,
    gamma_reference,
    ldp_rate_fit,
    transport_ensemble,
)
from locword.operators import (
    chebyshev_bound_check,
    eigensystem,
    green,
    restrict,
    transfer_determinant_entries,
)
from locword.transfer import lyapunov_curve, lyapunov_estimate
from locword.verify import run_all
from locword.words import preset, sample_potential

_REPORT: list[str] = []
_REPORT_PATH = Path(__file__).resolve().parent.parent / "acceptance_report.txt"


def _report(num: int, passed: bool, detail: str, elapsed: float) -> None:
    line = "[%s] criterion %d: %s (%.1f s)" % (
        "PASS" if passed else "FAIL",
        num,
        detail,
        elapsed,
    )
    _REPORT.append(line)
    print(line)


@pytest.fixture(scope="module", autouse=True)
def _write_report():
    yield
    _REPORT_PATH.write_text("\n".join(_REPORT) + "\n", encoding="utf-8")


def _dense_sub_det(r, lo, hi, E):
    width = hi - lo + 1
    if width == 0:
        return 1.0
    if width < 0:
        return 0.0
    diag = np.array([r.value(s) for s in range(lo, hi + 1)]) - E
    m = np.diag(diag)
    idx = np.arange(width - 1)
    m[idx, idx + 1] = 1.0
    m[idx + 1, idx] = 1.0
    return float(np.linalg.det(m))


def test_criterion_01_determinant_transfer_identity():
    t0 = time.monotonic()
    rng = np.random.default_rng(20260101)
    dists = (
        preset("dimer", 1.0),
        preset("dimer", 0.5),
        preset("bernoulli_anderson", 0.0, 4.0, 0.5),
    )
    worst = 0.0
    for case in range(1000):
        dist = dists[case % 3]
        r = sample_potential(dist, seed=int(rng.integers(2**32)), window=(-15, 15))
        a = int(rng.integers(-14, 3))
        b = a + int(rng.integers(0, 12))
        E = float(rng.uniform(-4.0, 4.0))
        got = transfer_determinant_entries(r, a, b, E)
        want = (
            _dense_sub_det(r, a, b, E),
            -_dense_sub_det(r, a + 1, b, E),
            _dense_sub_det(r, a, b - 1, E),
            -_dense_sub_det(r, a + 1, b - 1, E),
        )
        for g, w in zip(got, want):
            worst = max(worst, abs(g - w) / max(abs(w), 1.0))
    elapsed = time.monotonic() - t0
    ok = worst <= 1e-9 and elapsed < 10.0
    _report(
        1,
        ok,
        "1000 window-determinant quadruples vs dense determinants, "
        "max rel err %.2e (tol 1e-9)" % worst,
        elapsed,
    )
    assert ok


def test_criterion_02_green_two_method_agreement():
    t0 = time.monotonic()
    rng = np.random.default_rng(20260202)
    dists = (
        preset("dimer", 1.0),
        preset("dimer", 0.5),
        preset("bernoulli_anderson", 0.0, 4.0, 0.5),
    )
    worst = 0.0
    done = 0
    while done < 1000:
        dist = dists[done % 3]
        n = int(rng.integers(4, 65))
        r = sample_potential(dist, seed=int(rng.integers(2**32)), window=(1, n))
        op = restrict(r, 1, n)
        E = float(rng.uniform(-4.5, 4.5))
        if np.min(np.abs(op.eigenvalues() - E)) < 1e-6 * op.norm_bound():
            continue
        x = int(rng.integers(1, n + 1))
        y = int(rng.integers(1, n + 1))
        try:
            g1 = green(op, E, x, y, method="cramer").value
            g2 = green(op, E, x, y, method="direct").value
        except NearSingularError:
            continue
        worst = max(worst, abs(g1 - g2) / max(g1, g2, 1e-300))
        done += 1
    elapsed = time.monotonic() - t0
    ok = worst <= 1e-8 and elapsed < 30.0
    _report(
        2,
        ok,
        "1000 Green magnitude pairs (det split vs banded solve), "
        "max rel err %.2e (tol 1e-8)" % worst,
        elapsed,
    )
    assert ok


def test_criterion_03_free_operator_calibration():
    t0 = time.monotonic()
    free = preset("free")
    g0 = lyapunov_estimate(free, 0.0, sites=10**6, seed=31).gamma
    g3 = lyapunov_estimate(free, 3.0, sites=10**6, seed=32).gamma
    target = math.acosh(1.5)
    eig = eigensystem(restrict(sample_potential(free, seed=1, window=(1, 50)), 1, 50))
    closed = np.sort(2.0 * np.cos(np.pi * np.arange(1, 51) / 51.0))
    eig_err = float(np.max(np.abs(eig.eigenvalues - closed)))
    elapsed = time.monotonic() - t0
    ok = abs(g0) < 5e-3 and abs(g3 - 0.962424) <= 0.01 and eig_err <= 1e-9
    _report(
        3,
        ok,
        "free chain: gamma(0) = %.2e (<5e-3), gamma(3) = %.6f "
        "(0.962424 +/- 0.01, closed form %.6f), free box eigenvalue err %.2e"
        % (g0, g3, target, eig_err),
        elapsed,
    )
    assert ok


def test_criterion_04_dimer_critical_energies():
    t0 = time.monotonic()
    lines = []
    ok = True
    for lam in (0.5, 1.0):
        dist = preset("dimer", lam)
        g_plus = lyapunov_estimate(dist, lam, sites=10**6, seed=41).gamma
        g_minus = lyapunov_estimate(dist, -lam, sites=10**6, seed=42).gamma
        grid = np.round(np.arange(-2.0, 2.0001, 0.1), 10)
        away = grid[
            (np.abs(grid - lam) >= 0.3) & (np.abs(grid + lam) >= 0.3)
        ]
        curve = lyapunov_curve(dist, away, sites=10**6, seed=43)
        g_away = float(np.min(curve.gammas))
        crit = max(g_plus, g_minus)
        cond = g_plus < 0.01 and g_minus < 0.01 and g_away > 5.0 * crit
        ok = ok and cond
        lines.append(
            "lambda %.1f: gamma(+/-lambda) = %.1e/%.1e (<0.01), "
            "min off-critical gamma %.3f > 5x%.1e" % (lam, g_plus, g_minus, g_away, crit)
        )
    elapsed = time.monotonic() - t0
    ok = ok and elapsed < 300.0
    _report(4, ok, "; ".join(lines), elapsed)
    assert ok


def test_criterion_05_deviation_probability_decay():
    t0 = time.monotonic()
    dist = preset("dimer", 1.0)
    lengths = (50, 100, 150, 200, 300)
    try:
        result = ldp_rate_fit(dist, 1.5, 0.15, lengths, 10**4, seed=5001, side="plus")
    except InsufficientTrialsError as exc:
        elapsed = time.monotonic() - t0
        _report(
            5,
            False,
            "deviation cell empty at n = %d with 1e4 trials; the plus-side "
            "probability falls below 1/trials before n = 300 at this energy, "
            "so this length grid cannot be fitted" % exc.n,
            elapsed,
        )
        assert False, "zero-hit deviation cell at n = %d" % exc.n
    probs = result.probabilities
    errs = result.stderrs
    mono = all(
        probs[i + 1] <= probs[i] + 2.0 * math.hypot(errs[i], errs[i + 1])
        for i in range(len(probs) - 1)
    )
    elapsed = time.monotonic() - t0
    ok = result.eta_hat > 0 and result.fit.r2 >= 0.9 and mono and elapsed < 600.0
    _report(
        5,
        ok,
        "eta_hat %.4f, r2 %.3f, monotone %s" % (result.eta_hat, result.fit.r2, mono),
        elapsed,
    )
    assert ok


def test_criterion_06_eigenfunction_decay_rate():
    t0 = time.monotonic()
    ens = EnsembleSpec(
        distribution=preset("dimer", 1.0),
        half_width=500,
        count=50,
        base_seed=600,
        interval=(1.2, 1.8),
    )
    summary = eigen_decay_vs_lyapunov(ens)
    rel = abs(summary.median_rate - summary.gamma_ref) / summary.gamma_ref
    elapsed = time.monotonic() - t0
    ok = rel <= 0.25 and elapsed < 600.0
    _report(
        6,
        ok,
        "median eigenvector decay %.4f vs gamma(1.5) = %.4f (off by %.1f%%, "
        "tol 25%%, %d vectors)" % (summary.median_rate, summary.gamma_ref,
                                   100 * rel, summary.vector_count),
        elapsed,
    )
    assert ok


def test_criterion_07_correlator_and_kernel_decay():
    t0 = time.monotonic()
    dist = preset("dimer", 1.0)

    def ensemble(interval):
        return EnsembleSpec(
            distribution=dist,
            half_width=200,
            count=200,
            base_seed=700,
            interval=interval,
        )

    away = ensemble((1.2, 1.8))
    corr = correlator_profile(away, 0)
    kern = edl_kernel_decay(away, 0)
    crit = correlator_profile(ensemble((0.8, 1.2)), 0)
    alpha = corr.decay_rate
    alpha_crit = crit.decay_rate
    gamma_tilde = kern.decay_rate
    contrast = alpha / alpha_crit if alpha_crit > 0 else math.inf
    elapsed = time.monotonic() - t0
    ok = (
        alpha > 0
        and gamma_tilde > 0
        and corr.fit is not None
        and kern.fit is not None
        and corr.fit.r2 >= 0.9
        and kern.fit.r2 >= 0.9
        and contrast >= 3.0
        and elapsed < 1200.0
    )
    _report(
        7,
        ok,
        "correlator rate %.4f (r2 %.3f), kernel rate %.4f (r2 %.3f), "
        "critical-window rate %.4f, contrast x%.1f (need >= 3)"
        % (alpha, corr.fit.r2 if corr.fit else math.nan, gamma_tilde,
           kern.fit.r2 if kern.fit else math.nan, alpha_crit, contrast),
        elapsed,
    )
    assert ok


def test_criterion_08_transport_contrast():
    t0 = time.monotonic()
    times = np.geomspace(20.0, 300.0, 8)
    dimer = transport_ensemble(
        preset("dimer", 1.0), 800, 2.0, times, count=20, base_seed=800
    )
    anderson = transport_ensemble(
        preset("bernoulli_anderson", 0.0, 4.0, 0.5), 800, 2.0, times,
        count=20, base_seed=801,
    )
    exp_dimer, _, r2_dimer = growth_exponent_fit(dimer.series)
    exp_and, _, r2_and = growth_exponent_fit(anderson.series)
    elapsed = time.monotonic() - t0
    ok = exp_dimer >= 1.2 and exp_and <= 0.3 and elapsed < 1800.0
    _report(
        8,
        ok,
        "time-averaged second moment growth: dimer(1) exponent %.3f "
        "(need >= 1.2, r2 %.3f), Bernoulli Anderson exponent %.3f "
        "(need <= 0.3, r2 %.3f)" % (exp_dimer, r2_dimer, exp_and, r2_and),
        elapsed,
    )
    assert ok


def test_criterion_09_node_bound_constant_across_degree():
    t0 = time.monotonic()
    rng = np.random.default_rng(20260909)
    max_c = {}
    for n in (8, 16, 32, 64):
        best = 0.0
        for _ in range(1000):
            coeffs = rng.standard_normal(n)
            check = chebyshev_bound_check(coeffs, 0.25)
            if math.isfinite(check.implied_c):
                best = max(best, check.implied_c)
        max_c[n] = best
    overall = max(max_c.values())
    elapsed = time.monotonic() - t0
    ok = overall <= 2.0 * max_c[8] and elapsed < 60.0
    _report(
        9,
        ok,
        "implied node-bound constants: " +
        ", ".join("n=%d max %.3f" % (n, c) for n, c in max_c.items()) +
        "; overall max within factor %.2f of n=8 (need <= 2)"
        % (overall / max_c[8]),
        elapsed,
    )
    assert ok


def test_criterion_10_invariant_suites_clean():
    t0 = time.monotonic()
    results = run_all()
    total = sum(r.violations for r in results)
    elapsed = time.monotonic() - t0
    ok = total == 0 and elapsed < 120.0
    _report(
        10,
        ok,
        "%d invariant suites, %d total violations (%s)"
        % (len(results), total,
           "; ".join("%s %d" % (r.name, r.violations) for r in results)),
        elapsed,
    )
    assert ok
