"""Periodic comparison operator, bracketing envelopes, and their spectra."""

import numpy as np
import pytest
import scipy.sparse as sparse
import scipy.sparse.linalg as spla

from robin_asym import comparison_1d as c1
from robin_asym import geometry
from robin_asym.errors import ParameterError, ResolutionError, SingularCoordinateError


def fd_periodic_oracle(op: c1.PeriodicSchrodinger, n_modes: int, grid: int = 16384):
    """Independent second-order central finite differences on the circle."""
    h = op.length_L / grid
    v = geometry.resample_periodic(op.potential, grid)
    main = 2.0 * op.kinetic_coefficient / h**2 + v
    side = -op.kinetic_coefficient / h**2
    mat = sparse.diags(
        [main, np.full(grid - 1, side), np.full(grid - 1, side)], [0, 1, -1], format="lil"
    )
    mat[0, grid - 1] = side
    mat[grid - 1, 0] = side
    vals = spla.eigsh(mat.tocsc(), k=n_modes, sigma=float(v.min()) - 1.0,
                      which="LM", return_eigenvectors=False)
    return np.sort(vals)


class TestComparisonOperator:
    def test_disc_constant_potential(self, circle_cp):
        op = c1.build_comparison_operator(circle_cp)
        assert op.kinetic_coefficient == 1.0
        assert np.max(np.abs(op.potential + 0.25)) < 1e-9

    def test_potential_nonpositive(self, ellipse_cp):
        op = c1.build_comparison_operator(ellipse_cp)
        assert np.all(op.potential <= 0.0)

    def test_ellipse_minimum_potential(self, ellipse_cp):
        op = c1.build_comparison_operator(ellipse_cp)
        assert abs(float(op.potential.min()) + 0.5625) < 1e-6


class TestDiscSpectrum:
    def test_explicit_disc_eigenvalues(self, circle_cp):
        op = c1.build_comparison_operator(circle_cp)
        spec = c1.solve_periodic_spectrum(op, 8, 128)
        expected = np.array([-0.25 + (j // 2) ** 2 for j in range(1, 9)], dtype=float)
        assert np.max(np.abs(spec.eigenvalues - expected)) < 1e-8

    def test_free_operator(self):
        op = c1.PeriodicSchrodinger(1.0, 1.0, np.zeros(64))
        spec = c1.solve_periodic_spectrum(op, 5, 64)
        expected = np.array([0.0, (2 * np.pi) ** 2, (2 * np.pi) ** 2,
                             (4 * np.pi) ** 2, (4 * np.pi) ** 2])
        assert np.max(np.abs(spec.eigenvalues - expected)) < 1e-8

    def test_pairs_for_constant_potential(self, circle_cp):
        op = c1.build_comparison_operator(circle_cp)
        mu = c1.solve_periodic_spectrum(op, 9, 128).eigenvalues
        for j in (1, 3, 5, 7):
            assert abs(mu[j] - mu[j + 1]) < 1e-9

    def test_ellipse_against_fd_oracle(self, ellipse_cp):
        op = c1.build_comparison_operator(ellipse_cp)
        spec = c1.solve_periodic_spectrum(op, 6, 512)
        oracle = fd_periodic_oracle(op, 6)
        assert np.max(np.abs(spec.eigenvalues - oracle)) < 1e-6

    def test_variational_bounds(self, ellipse_cp):
        op = c1.build_comparison_operator(ellipse_cp)
        mu1 = c1.solve_periodic_spectrum(op, 1, 256).eigenvalues[0]
        assert mu1 >= float(op.potential.min()) - 1e-12
        assert mu1 <= float(op.potential.mean()) + 1e-12

    def test_grid_doubling_stability(self, ellipse_cp):
        op = c1.build_comparison_operator(ellipse_cp)
        a = c1.solve_periodic_spectrum(op, 6, 256, check_convergence=False).eigenvalues
        b = c1.solve_periodic_spectrum(op, 6, 512, check_convergence=False).eigenvalues
        assert np.max(np.abs(a - b) / np.maximum(np.abs(b), 1.0)) < 1e-8

    def test_insufficient_grid_rejected(self):
        op = c1.PeriodicSchrodinger(1.0, 1.0, np.zeros(64))
        with pytest.raises(ParameterError):
            c1.solve_periodic_spectrum(op, 10, 64)

    def test_rough_potential_flagged(self):
        # square-wave potential: 1/k Fourier decay defeats the 1e-8 target
        s = np.arange(512) / 512
        rough = 40.0 * np.sign(np.sin(2 * np.pi * s) + 0.3)
        op = c1.PeriodicSchrodinger(1.0, 1.0, rough)
        with pytest.raises(ResolutionError):
            c1.solve_periodic_spectrum(op, 4, 64)


class TestBracketing:
    def test_small_a_limit(self, ellipse_cp):
        s_op = c1.build_comparison_operator(ellipse_cp)
        upper, lower = c1.build_bracketing_operators(ellipse_cp, 1e-6)
        assert np.max(np.abs(upper.potential - s_op.potential)) < 1e-5
        assert np.max(np.abs(lower.potential - s_op.potential)) < 1e-5
        assert abs(upper.kinetic_coefficient - 1.0) < 1e-5
        assert abs(lower.kinetic_coefficient - 1.0) < 1e-5

    def test_disc_constant_curvature_values(self, circle_cp):
        upper, lower = c1.build_bracketing_operators(circle_cp, 0.1)
        assert np.max(np.abs(upper.potential + 1.0 / (4 * 1.1**2))) < 1e-6
        assert abs(upper.kinetic_coefficient - 0.9**-2) < 1e-9
        assert abs(lower.kinetic_coefficient - 1.1**-2) < 1e-9

    def test_envelope_ordering(self, ellipse_cp):
        upper, lower = c1.build_bracketing_operators(ellipse_cp, 0.05)
        assert np.all(lower.potential < upper.potential)

    def test_out_of_range_a(self, ellipse_cp):
        with pytest.raises(ParameterError):
            c1.build_bracketing_operators(ellipse_cp, 0.5)  # 1/(2*gamma_plus) = 1/3
        with pytest.raises(ParameterError):
            c1.build_bracketing_operators(ellipse_cp, -0.01)

    def test_eigenvalue_monotonicity_in_potential(self, ellipse_cp):
        # min-max: pointwise ordered potentials give ordered eigenvalues
        upper, lower = c1.build_bracketing_operators(ellipse_cp, 0.05)
        mids = c1.build_comparison_operator(ellipse_cp)
        ops = [c1.PeriodicSchrodinger(ellipse_cp.length_L, 1.0, p)
               for p in (lower.potential, mids.potential, upper.potential)]
        spectra = [c1.solve_periodic_spectrum(op, 5, 256).eigenvalues for op in ops]
        assert np.all(spectra[0] <= spectra[1] + 1e-10)
        assert np.all(spectra[1] <= spectra[2] + 1e-10)


class TestEffectivePotential:
    def test_u_zero(self, ellipse_cp):
        vals = c1.effective_potential(ellipse_cp, ellipse_cp.s_grid, 0.0)
        assert np.max(np.abs(vals + ellipse_cp.gamma**2 / 4.0)) < 1e-9

    def test_disc_value(self, circle_cp):
        val = c1.effective_potential(circle_cp, 1.0, 0.2)
        assert abs(val + 1.0 / (4.0 * 0.64)) < 1e-9

    def test_envelopes_squeeze_potential(self, ellipse_cp):
        a = 0.08
        upper, lower = c1.build_bracketing_operators(ellipse_cp, a)
        s = np.linspace(0.0, ellipse_cp.length_L, 160, endpoint=False)
        u = np.linspace(0.0, a, 40)
        vals = c1.effective_potential(ellipse_cp, s[None, :], u[:, None])
        v_up = geometry.trig_interpolate(upper.potential, ellipse_cp.length_L, s)
        v_lo = geometry.trig_interpolate(lower.potential, ellipse_cp.length_L, s)
        assert np.all(vals <= v_up[None, :] + 1e-10)
        assert np.all(vals >= v_lo[None, :] - 1e-10)

    def test_singular_coordinate(self, ellipse_cp):
        with pytest.raises(SingularCoordinateError):
            c1.effective_potential(ellipse_cp, 0.0, 0.9)  # 1/gamma_star = 2/3


class TestMuConvergence:
    def test_disc_halving_and_decay(self, circle_cp):
        table = c1.verify_mu_convergence(circle_cp, 4, [0.02, 0.01, 0.005], grid_size=256)
        for ratios in table.halving_ratios.values():
            assert all(0.4 <= r <= 0.6 for r in ratios)
        # errors decrease monotonically as a -> 0
        for side in (table.err_dirichlet, table.err_neumann):
            grid = side.reshape(3, 4)  # (a, j), a ascending
            assert np.all(grid[0] < grid[1])
            assert np.all(grid[1] < grid[2])

    def test_ellipse_constant_stable(self, ellipse_cp):
        table = c1.verify_mu_convergence(ellipse_cp, 6, [0.02, 0.01, 0.005], grid_size=512)
        ratio = np.maximum(table.err_dirichlet, table.err_neumann) / (
            table.a_values * table.j_values.astype(float) ** 2
        )
        # the fitted constant per a-value stays within a factor 2 across the grid
        per_a = ratio.reshape(3, 6).max(axis=1)
        assert float(per_a.max()) <= 2.0 * float(per_a.min())
        assert np.isfinite(table.c_fit) and table.c_fit > 0

    def test_invalid_a_rejected(self, ellipse_cp):
        with pytest.raises(ParameterError):
            c1.verify_mu_convergence(ellipse_cp, 3, [0.4])

    def test_csv_roundtrip(self, circle_cp, tmp_path):
        table = c1.verify_mu_convergence(circle_cp, 2, [0.02, 0.01], grid_size=128)
        path = tmp_path / "mu.csv"
        table.to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "j,a,err_D,err_N"
        assert len(lines) == 1 + 4
