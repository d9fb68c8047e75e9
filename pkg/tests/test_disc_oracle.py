"""Bessel-ratio evaluation and the exact disc spectrum."""

import numpy as np
import pytest

from robin_asym import comparison_1d as c1
from robin_asym import disc_oracle as disc
from robin_asym.errors import ParameterError


class TestBesselRatio:
    def test_small_argument_limit(self):
        # I_0 ~ 1 + x^2/4, so x I_0'/I_0 ~ x^2/2 -> 0
        for x in (1e-4, 1e-3, 1e-2):
            val = disc.bessel_i_ratio(0, x)
            assert abs(val - 0.5 * x * x) < x**4

    def test_large_argument_asymptotics(self):
        # ratio = x - 1/2 + (4m^2 - 1)/(8x) + O(x^-2)
        x = 100.0
        for m in (0, 1, 2):
            approx = x - 0.5 + (4 * m * m - 1) / (8 * x)
            assert abs(disc.bessel_i_ratio(m, x) - approx) < 1e-3

    def test_against_mpmath(self):
        import mpmath

        mpmath.mp.dps = 40
        for m, x in ((3, 5.0), (0, 0.7), (1, 12.5), (7, 2.0), (25, 40.0), (60, 200.0)):
            exact = float(
                x * mpmath.besseli(m, x, derivative=1) / mpmath.besseli(m, x)
            )
            assert abs(disc.bessel_i_ratio(m, x) - exact) < 1e-12 * max(1.0, abs(exact))

    def test_strictly_increasing_in_x(self):
        for m in (0, 1, 5):
            xs = np.geomspace(0.05, 400.0, 300)
            vals = np.array([disc.bessel_i_ratio(m, x) for x in xs])
            assert np.all(np.diff(vals) > 0)

    def test_domain_checks(self):
        with pytest.raises(ParameterError):
            disc.bessel_i_ratio(-1, 1.0)
        with pytest.raises(ParameterError):
            disc.bessel_i_ratio(300, 1.0)
        with pytest.raises(ParameterError):
            disc.bessel_i_ratio(0, 0.0)


class TestDiscEigenvalue:
    def test_two_term_defect_scaling(self):
        # defect from the displayed two terms shrinks like 1/beta
        req80 = disc.DiscSpectrumRequest(1.0, 80.0, 3)
        for m in (0, 1, 2):
            defects = []
            for beta in (20.0, 40.0, 80.0):
                req = disc.DiscSpectrumRequest(1.0, beta, 3)
                lam = disc.disc_eigenvalue(m, req)
                defects.append(abs(lam - disc.two_term_approximation(m, req)) * beta)
            assert max(defects) <= 2.0 * min(defects)

    def test_scaling_relation(self):
        # lambda(m; R, beta) = lambda(m; 1, beta R) / R^2
        for m in (0, 2):
            a = disc.disc_eigenvalue(m, disc.DiscSpectrumRequest(2.0, 10.0, 1))
            b = disc.disc_eigenvalue(m, disc.DiscSpectrumRequest(1.0, 20.0, 1))
            assert abs(a - b / 4.0) < 1e-9 * abs(a)

    def test_root_unique_on_log_grid(self):
        alpha = 15.0
        xs = np.geomspace(0.5, 60.0, 400)
        vals = np.array([disc.bessel_i_ratio(0, x) for x in xs]) - alpha
        assert int(np.sum(np.diff(np.sign(vals)) != 0)) == 1

    def test_no_mode_beyond_alpha(self):
        with pytest.raises(ParameterError):
            disc.disc_eigenvalue(12, disc.DiscSpectrumRequest(1.0, 10.0, 1))

    def test_cross_check_against_fem(self, circle_alc):
        from robin_asym import robin_fem as fem

        lam = disc.disc_eigenvalue(0, disc.DiscSpectrumRequest(1.0, 4.0, 1))
        res = fem.compute_spectrum(circle_alc, 4.0, 1, order=2, target_h=0.1)
        est = float(res.discretization_error_estimate[0])
        assert abs(float(res.eigenvalues[0]) - lam) < max(est, 1e-6 * abs(lam)) * 3


class TestDiscSpectrum:
    def test_ordering_and_multiplicity(self):
        res = disc.disc_spectrum(disc.DiscSpectrumRequest(1.0, 30.0, 5))
        lam = res.eigenvalues
        assert np.all(np.diff(lam) >= -1e-12)
        assert lam[0] < lam[1]
        assert abs(lam[1] - lam[2]) < 1e-12 * abs(lam[1])
        assert abs(lam[3] - lam[4]) < 1e-12 * abs(lam[3])

    def test_consistency_with_comparison_spectrum(self, circle_cp):
        # lambda_n + (beta + 1/2)^2 - mu_n -> 0 at rate 1/beta
        op = c1.build_comparison_operator(circle_cp)
        mu = c1.solve_periodic_spectrum(op, 5, 128).eigenvalues
        gaps = {}
        for beta in (40.0, 80.0):
            res = disc.disc_spectrum(disc.DiscSpectrumRequest(1.0, beta, 5))
            gaps[beta] = np.abs(res.eigenvalues + (beta + 0.5) ** 2 - mu)
        assert np.all(gaps[40.0] < 0.1)
        assert np.all(gaps[80.0] < 0.6 * gaps[40.0])

    def test_rows_and_csv(self, tmp_path):
        req = disc.DiscSpectrumRequest(1.0, 40.0, 5)
        rows = disc.spectrum_rows(req)
        assert [r[0] for r in rows] == [0, 1, 2, 3, 4, 5]
        path = tmp_path / "disc.csv"
        disc.rows_to_csv(rows, path)
        header = path.read_text().splitlines()[0]
        assert header == "m,X,lambda,lambda_asymptotic_2term,defect"

    def test_request_validation(self):
        with pytest.raises(ParameterError):
            disc.DiscSpectrumRequest(0.0, 10.0, 3)
        with pytest.raises(ParameterError):
            disc.DiscSpectrumRequest(1.0, 10.0, 0)
