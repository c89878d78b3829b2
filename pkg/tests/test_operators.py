"""Finite-volume operators: determinants, spectra, Green's functions."""

import math

import numpy as np
import pytest

from locword.errors import CoverageError, NearSingularError, ParameterError
from locword.operators import (
    ChebyshevCheck,
    TridiagonalOperator,
    center_of_localization,
    char_poly,
    char_poly_log,
    char_poly_log_batch,
    chebyshev_bound_check,
    eigenfunction_identity_residual,
    eigensystem,
    green,
    green_log_magnitude,
    localization_centers,
    regularity,
    restrict,
    transfer_determinant_entries,
)
from locword.transfer import interval_transfer
from locword.words import preset, sample_potential


def dense_tridiag(diag):
    n = len(diag)
    m = np.diag(np.asarray(diag, dtype=float))
    for i in range(n - 1):
        m[i, i + 1] = 1.0
        m[i + 1, i] = 1.0
    return m


class TestCharPoly:
    def test_matches_dense_determinant(self):
        rng = np.random.default_rng(7)
        for n in range(1, 13):
            for _ in range(5):
                diag = rng.uniform(-3, 3, size=n)
                E = rng.uniform(-3, 3)
                op = TridiagonalOperator(window=(0, n - 1), diagonal=diag)
                expected = np.linalg.det(dense_tridiag(diag) - E * np.eye(n))
                assert char_poly(op, E) == pytest.approx(expected, rel=1e-9, abs=1e-9)

    def test_single_site(self):
        op = TridiagonalOperator(window=(5, 5), diagonal=np.array([2.0]))
        assert char_poly(op, 0.5) == pytest.approx(1.5)

    def test_log_form_consistent(self):
        rng = np.random.default_rng(11)
        diag = rng.uniform(-2, 2, size=9)
        op = TridiagonalOperator(window=(0, 8), diagonal=diag)
        sign, logabs = char_poly_log(op, 0.3)
        assert sign * math.exp(logabs) == pytest.approx(char_poly(op, 0.3), rel=1e-12)

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(3)
        batch = rng.uniform(-2, 2, size=(6, 20))
        signs, logs = char_poly_log_batch(batch, 0.7)
        for row, s, l in zip(batch, signs, logs):
            op = TridiagonalOperator(window=(1, 20), diagonal=row)
            s1, l1 = char_poly_log(op, 0.7)
            assert s == s1
            assert l == pytest.approx(l1, abs=1e-10)

    def test_no_overflow_on_long_window(self):
        dist = preset("dimer", 1.0)
        r = sample_potential(dist, seed=41, window=(1, 20000))
        op = restrict(r, 1, 20000)
        sign, logabs = char_poly_log(op, 1.5)
        assert math.isfinite(logabs)
        assert sign in (-1.0, 1.0)
        assert logabs > 1000.0

    def test_sign_flips_across_eigenvalue(self):
        op = TridiagonalOperator(window=(0, 3), diagonal=np.zeros(4))
        eigs = op.eigenvalues()
        below, _ = char_poly_log(op, eigs[0] - 0.01)
        above, _ = char_poly_log(op, eigs[0] + 0.01)
        assert below != above


class TestDeterminantTransferLink:
    def test_quadruple_matches_transfer_up_to_parity(self):
        dist = preset("bernoulli_anderson", 0.0, 4.0, 0.5)
        r = sample_potential(dist, seed=23, window=(-30, 30))
        rng = np.random.default_rng(5)
        for _ in range(40):
            a = int(rng.integers(-25, 20))
            b = a + int(rng.integers(0, 10))
            E = float(rng.uniform(-3, 3))
            quad = transfer_determinant_entries(r, a, b, E)
            t = interval_transfer(r, a, b, E).reconstruct()
            n = b - a + 1
            s = (-1.0) ** n
            assert quad[0] == pytest.approx(s * t[0, 0], rel=1e-9, abs=1e-9)
            assert quad[1] == pytest.approx(-s * t[0, 1], rel=1e-9, abs=1e-9)
            assert quad[2] == pytest.approx(-s * t[1, 0], rel=1e-9, abs=1e-9)
            assert quad[3] == pytest.approx(s * t[1, 1], rel=1e-9, abs=1e-9)

    def test_single_site_quadruple(self):
        dist = preset("free")
        r = sample_potential(dist, seed=1, window=(0, 0))
        quad = transfer_determinant_entries(r, 0, 0, 0.5)
        # det over one site with V = 0 is -E; trimmed windows are empty
        # (det 1) or reversed (det 0)
        assert quad == pytest.approx((-0.5, -1.0, 1.0, 0.0))

    def test_reversed_interval_rejected(self):
        dist = preset("free")
        r = sample_potential(dist, seed=1, window=(0, 10))
        with pytest.raises(ParameterError):
            transfer_determinant_entries(r, 5, 3, 0.0)


class TestEigensystem:
    def test_free_eigenvalues_closed_form(self):
        dist = preset("free")
        r = sample_potential(dist, seed=1, window=(1, 50))
        eig = eigensystem(restrict(r, 1, 50))
        expected = np.sort(2.0 * np.cos(np.pi * np.arange(1, 51) / 51.0))
        assert np.allclose(eig.eigenvalues, expected, atol=1e-9)

    def test_orthonormal_and_residual(self):
        dist = preset("dimer", 1.0)
        r = sample_potential(dist, seed=9, window=(1, 300))
        op = restrict(r, 1, 300)
        eig = eigensystem(op)
        gram = eig.eigenvectors.T @ eig.eigenvectors
        assert np.max(np.abs(gram - np.eye(300))) < 1e-9
        h = dense_tridiag(op.diagonal)
        resid = h @ eig.eigenvectors - eig.eigenvectors * eig.eigenvalues
        assert np.max(np.abs(resid)) < 1e-9

    def test_eigenvalues_cached(self):
        op = TridiagonalOperator(window=(0, 9), diagonal=np.zeros(10))
        first = op.eigenvalues()
        assert op.eigenvalues() is first

    def test_site_index(self):
        dist = preset("free")
        r = sample_potential(dist, seed=1, window=(-5, 5))
        eig = eigensystem(restrict(r, -5, 5))
        assert eig.site_index(-5) == 0
        assert eig.site_index(5) == 10
        with pytest.raises(ParameterError):
            eig.site_index(6)


class TestGreen:
    def test_methods_agree(self):
        dist = preset("dimer", 1.0)
        r = sample_potential(dist, seed=17, window=(-40, 40))
        op = restrict(r, -40, 40)
        rng = np.random.default_rng(2)
        for _ in range(25):
            x = int(rng.integers(-40, 41))
            y = int(rng.integers(-40, 41))
            g1 = green(op, 1.5, x, y, method="cramer")
            g2 = green(op, 1.5, x, y, method="direct")
            assert g1.value == pytest.approx(g2.value, rel=1e-8, abs=1e-300)

    def test_matches_dense_inverse(self):
        rng = np.random.default_rng(4)
        diag = rng.uniform(-2, 2, size=12)
        op = TridiagonalOperator(window=(3, 14), diagonal=diag)
        inv = np.linalg.inv(dense_tridiag(diag) - 0.25 * np.eye(12))
        for x in (3, 7, 14):
            for y in (3, 9, 14):
                g = green(op, 0.25, x, y)
                assert g.value == pytest.approx(abs(inv[x - 3, y - 3]), rel=1e-9)

    def test_symmetry(self):
        dist = preset("bernoulli_anderson", 0.0, 4.0, 0.5)
        r = sample_potential(dist, seed=31, window=(1, 60))
        op = restrict(r, 1, 60)
        g_xy = green(op, 2.0, 10, 50)
        g_yx = green(op, 2.0, 50, 10)
        assert g_xy.value == pytest.approx(g_yx.value, rel=1e-9)

    def test_near_singular_rejected(self):
        op = TridiagonalOperator(window=(1, 8), diagonal=np.zeros(8))
        e0 = float(op.eigenvalues()[3])
        with pytest.raises(NearSingularError):
            green(op, e0, 1, 8)

    def test_site_outside_window_rejected(self):
        op = TridiagonalOperator(window=(1, 8), diagonal=np.zeros(8))
        with pytest.raises(ParameterError):
            green(op, 5.0, 0, 4)

    def test_unknown_method_rejected(self):
        op = TridiagonalOperator(window=(1, 8), diagonal=np.zeros(8))
        with pytest.raises(ParameterError):
            green(op, 5.0, 1, 4, method="qr")

    def test_log_magnitude_matches_value(self):
        dist = preset("dimer", 1.0)
        r = sample_potential(dist, seed=12, window=(1, 30))
        op = restrict(r, 1, 30)
        lg = green_log_magnitude(op, 1.5, 5, 25)
        g = green(op, 1.5, 5, 25)
        assert math.exp(lg) == pytest.approx(g.value, rel=1e-10)


class TestEigenfunctionIdentity:
    def test_sine_solution_zero_residual(self):
        dist = preset("free")
        r = sample_potential(dist, seed=1, window=(1, 40))
        op = restrict(r, 1, 40)
        k = 0.9
        E = 2.0 * math.cos(k)
        psi = np.sin(k * np.arange(0, 42))
        for x in (1, 7, 20, 40):
            assert eigenfunction_identity_residual(op, psi, E, x) < 1e-10

    def test_non_solution_has_residual(self):
        dist = preset("free")
        r = sample_potential(dist, seed=1, window=(1, 20))
        op = restrict(r, 1, 20)
        psi = np.ones(22)
        assert eigenfunction_identity_residual(op, psi, 0.5, 10) > 1e-3

    def test_wrong_length_rejected(self):
        dist = preset("free")
        r = sample_potential(dist, seed=1, window=(1, 20))
        op = restrict(r, 1, 20)
        with pytest.raises(ParameterError):
            eigenfunction_identity_residual(op, np.ones(20), 0.5, 10)


class TestRestrict:
    def test_values_slice(self):
        dist = preset("bernoulli_anderson", 0.0, 4.0, 0.5)
        r = sample_potential(dist, seed=8, window=(-10, 10))
        op = restrict(r, -3, 4)
        expected = [r.value(n) for n in range(-3, 5)]
        assert np.array_equal(op.diagonal, expected)

    def test_outside_window_rejected(self):
        dist = preset("free")
        r = sample_potential(dist, seed=1, window=(0, 10))
        with pytest.raises(CoverageError):
            restrict(r, 0, 11)

    def test_reversed_rejected(self):
        dist = preset("free")
        r = sample_potential(dist, seed=1, window=(0, 10))
        with pytest.raises(ParameterError):
            restrict(r, 5, 4)


class TestRegularity:
    def test_free_not_regular_inside_spectrum(self):
        dist = preset("free")
        r = sample_potential(dist, seed=1, window=(-40, 40))
        verdict = regularity(r, 0, 40, 0.5, 0.1)
        assert not verdict.regular

    def test_dimer_regular_off_critical(self):
        dist = preset("dimer", 1.0)
        hits = 0
        for i in range(20):
            r = sample_potential(dist, seed=1000 + i, window=(-40, 40))
            try:
                if regularity(r, 0, 40, 1.5, 0.1).regular:
                    hits += 1
            except NearSingularError:
                continue
        assert hits >= 15

    def test_two_sided(self):
        dist = preset("dimer", 1.0)
        r = sample_potential(dist, seed=77, window=(-30, 30))
        v = regularity(r, 0, 30, 1.5, 0.1)
        assert v.regular == (v.left_ok and v.right_ok)
        assert v.left_ok == (v.log_green_left <= -0.1 * 30)

    def test_bad_scale_rejected(self):
        dist = preset("free")
        r = sample_potential(dist, seed=1, window=(-5, 5))
        with pytest.raises(ParameterError):
            regularity(r, 0, 0, 0.5, 0.1)


class TestCenterOfLocalization:
    def test_simple_peak(self):
        assert center_of_localization(np.array([0.1, 0.9, 0.2]), start=0) == 1

    def test_tie_prefers_smaller_absolute_site(self):
        u = np.zeros(11)
        u[1] = 0.7   # site -4
        u[9] = 0.7   # site 4
        assert center_of_localization(u, start=-5) == -4

    def test_tie_at_symmetric_sites_takes_negative(self):
        u = np.zeros(7)
        u[0] = 1.0   # site -3
        u[6] = 1.0   # site 3
        assert center_of_localization(u, start=-3) == -3

    def test_start_offset(self):
        assert center_of_localization(np.array([0.2, 1.0]), start=10) == 11

    def test_zero_vector_rejected(self):
        with pytest.raises(ParameterError):
            center_of_localization(np.zeros(5))

    def test_batch_matches_scalar(self):
        dist = preset("dimer", 1.0)
        r = sample_potential(dist, seed=3, window=(-25, 25))
        eig = eigensystem(restrict(r, -25, 25))
        centers = localization_centers(eig)
        for k in range(eig.size):
            assert centers[k] == center_of_localization(
                eig.eigenvectors[:, k], start=-25
            )


class TestChebyshevBound:
    def test_constant_polynomial(self):
        chk = chebyshev_bound_check([1.0], theta=0.25)
        assert chk.node_max == pytest.approx(1.0)
        assert chk.global_max == pytest.approx(1.0)
        assert chk.implied_c == pytest.approx(1.0)
        assert chk.bound_holds

    def test_small_node_values_force_large_constant(self):
        # vanish at all nodes but one: the sampled max is tiny next to the
        # global max, so the implied constant blows up
        n, theta = 8, 0.125
        nodes = np.cos(2.0 * np.pi * (np.arange(1, n + 1) + theta) / n)
        coeffs = np.polynomial.polynomial.polyfromroots(nodes[:-1])
        chk = chebyshev_bound_check(coeffs, theta=theta)
        assert chk.node_max < chk.global_max
        assert chk.implied_c * chk.n * chk.base**chk.n >= chk.global_max * (1 - 1e-12)
        assert chk.bound_holds

    def test_zero_polynomial_degenerate(self):
        chk = chebyshev_bound_check([0.0, 0.0, 0.0], theta=0.2)
        assert chk.node_max == 0.0
        assert math.isinf(chk.implied_c)
        assert not chk.bound_holds

    def test_monomial(self):
        # Q(x) = x^4: node max below 1, global max 1 at the endpoints
        chk = chebyshev_bound_check([0.0, 0.0, 0.0, 0.0, 1.0], theta=0.3)
        assert chk.global_max == pytest.approx(1.0)
        assert 0.0 < chk.node_max <= 1.0
        assert chk.bound_holds

    def test_explicit_base(self):
        chk = chebyshev_bound_check([0.0, 1.0], theta=0.2, a=1.0)
        assert chk.base == 1.0
        assert chk.implied_c == pytest.approx(chk.global_max / 2.0)

    def test_bad_theta_rejected(self):
        with pytest.raises(ParameterError):
            chebyshev_bound_check([1.0, 2.0], theta=0.5)
        with pytest.raises(ParameterError):
            chebyshev_bound_check([1.0, 2.0], theta=0.0)

    def test_result_type(self):
        assert isinstance(chebyshev_bound_check([1.0], theta=0.1), ChebyshevCheck)
