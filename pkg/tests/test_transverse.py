"""Transverse strip modes: transcendental roots, enclosures, FD oracle."""

import math

import numpy as np
import pytest

from robin_asym import transverse as tv
from robin_asym.errors import ParameterError


class TestDirichletMode:
    def test_enclosure_at_large_coupling(self):
        p = tv.TransverseParams(a=0.5, beta=100.0, gamma_boundary=1.0)
        root = tv.solve_dirichlet_mode(p)
        lo, hi = tv.dirichlet_bounds(p)
        assert lo <= root.zeta <= hi
        assert root.residual < 1e-12

    def test_enclosure_on_moderate_grid(self):
        for a in (0.25, 0.4, 0.7):
            for beta in (6.0, 12.0, 30.0):
                p = tv.TransverseParams(a=a, beta=beta, gamma_boundary=0.8)
                if p.a * p.robin_strength <= 4.0 / 3.0:
                    continue
                root = tv.solve_dirichlet_mode(p)
                lo, hi = tv.dirichlet_bounds(p)
                assert lo <= root.zeta <= hi

    def test_half_line_limit_clamped(self):
        p = tv.TransverseParams(a=1.0, beta=1000.0, gamma_boundary=1.0)
        root = tv.solve_dirichlet_mode(p)
        assert root.clamped
        assert abs(root.k - p.robin_strength) < 1e-300
        assert root.zeta == -p.robin_strength**2

    def test_matches_fd_oracle(self):
        p = tv.TransverseParams(a=0.3, beta=10.0, gamma_boundary=0.5)
        root = tv.solve_dirichlet_mode(p)
        oracle = tv.fd_transverse_oracle(p, "dirichlet", 4096)
        assert abs(oracle.eigenvalues[0] - root.zeta) < 1e-6 * abs(root.zeta)
        assert oracle.negative_count == 1

    def test_richardson_agreement(self):
        p = tv.TransverseParams(a=0.3, beta=10.0, gamma_boundary=0.5)
        root = tv.solve_dirichlet_mode(p)
        rich = tv.richardson_ground_state(p, "dirichlet")
        assert abs(rich - root.zeta) < 1e-8 * abs(root.zeta)

    def test_precondition_enforced(self):
        with pytest.raises(ParameterError):
            tv.solve_dirichlet_mode(tv.TransverseParams(a=0.1, beta=5.0, gamma_boundary=0.0))

    def test_root_unique_on_dense_scan(self):
        p = tv.TransverseParams(a=0.3, beta=10.0, gamma_boundary=0.5)
        c = p.robin_strength
        ks = np.linspace(1e-6, c * (1 - 1e-9), 10000)
        g = 2 * p.a * ks + np.log(c - ks) - np.log(c + ks)
        assert int(np.sum(np.diff(np.sign(g)) != 0)) == 1

    def test_monotone_in_beta(self):
        zetas = [tv.solve_dirichlet_mode(
            tv.TransverseParams(a=0.4, beta=b, gamma_boundary=0.5)).zeta
            for b in (8.0, 12.0, 18.0, 27.0)]
        assert all(z2 < z1 for z1, z2 in zip(zetas, zetas[1:]))


class TestNeumannMode:
    def test_enclosure_at_large_coupling(self):
        p = tv.TransverseParams(a=0.5, beta=100.0, gamma_boundary=1.0, gamma_plus=1.0)
        root = tv.solve_neumann_mode(p)
        lo, hi = tv.neumann_bounds(p)
        assert lo <= root.zeta <= hi
        # k - c is exponentially small here, below double resolution
        assert root.k >= p.robin_strength

    def test_matches_fd_oracle(self):
        p = tv.TransverseParams(a=0.4, beta=10.0, gamma_boundary=0.8, gamma_plus=1.0)
        root = tv.solve_neumann_mode(p)
        oracle = tv.fd_transverse_oracle(p, "neumann", 4096)
        assert abs(oracle.eigenvalues[0] - root.zeta) < 1e-6 * abs(root.zeta)
        assert oracle.negative_count == 1

    def test_richardson_agreement(self):
        p = tv.TransverseParams(a=0.4, beta=10.0, gamma_boundary=0.8, gamma_plus=1.0)
        root = tv.solve_neumann_mode(p)
        rich = tv.richardson_ground_state(p, "neumann")
        assert abs(rich - root.zeta) < 1e-8 * abs(root.zeta)

    def test_flat_far_end_limit(self):
        # gamma_plus = 0 and a*c large: k -> c up to double precision
        p = tv.TransverseParams(a=50.0, beta=8.0, gamma_boundary=0.0, gamma_plus=0.0)
        root = tv.solve_neumann_mode(p)
        assert abs(root.k - p.robin_strength) <= 1e-12 * p.robin_strength

    def test_strong_far_coupling_binds_second_mode(self):
        # with 2a > 2/c + 2/c_a the far-end Robin term traps a shallow extra
        # mode near -c_a^2; the ground state and its enclosure are unaffected
        p = tv.TransverseParams(a=0.8, beta=8.0, gamma_boundary=1.0, gamma_plus=1.0)
        root = tv.solve_neumann_mode(p)
        lo, hi = tv.neumann_bounds(p)
        assert lo <= root.zeta <= hi
        oracle = tv.fd_transverse_oracle(p, "neumann", 4096)
        assert oracle.negative_count == 2
        ca = p.far_coefficient
        assert -ca * ca < oracle.eigenvalues[1] < 0.0
        assert abs(oracle.eigenvalues[0] - root.zeta) < 1e-6 * abs(root.zeta)

    def test_precondition_enforced(self):
        with pytest.raises(ParameterError):
            tv.solve_neumann_mode(
                tv.TransverseParams(a=0.05, beta=2.0, gamma_boundary=0.0, gamma_plus=0.5))

    def test_monotone_in_beta(self):
        zetas = [tv.solve_neumann_mode(
            tv.TransverseParams(a=0.4, beta=b, gamma_boundary=1.0, gamma_plus=1.0)).zeta
            for b in (8.0, 12.0, 18.0, 27.0)]
        assert all(z2 < z1 for z1, z2 in zip(zetas, zetas[1:]))


class TestFdOracle:
    def test_free_mixed_mode(self):
        # beta ~ 0 wall with hard far end: lowest mode (pi/(2a))^2
        p = tv.TransverseParams(a=0.5, beta=1e-12, gamma_boundary=0.0)
        out = tv.fd_transverse_oracle(p, "dirichlet", 2048)
        expected = (math.pi / (2 * 0.5)) ** 2
        assert abs(out.eigenvalues[0] - expected) < 5e-6 * expected
        assert out.negative_count == 0

    def test_cells_floor(self):
        p = tv.TransverseParams(a=0.5, beta=10.0, gamma_boundary=0.0)
        with pytest.raises(ParameterError):
            tv.fd_transverse_oracle(p, "dirichlet", 100)

    def test_unknown_kind(self):
        p = tv.TransverseParams(a=0.5, beta=10.0, gamma_boundary=0.0)
        with pytest.raises(ParameterError):
            tv.fd_transverse_oracle(p, "mixed", 512)


class TestEigenfunction:
    def test_dirichlet_boundary_conditions(self):
        p = tv.TransverseParams(a=0.3, beta=10.0, gamma_boundary=0.5)
        root = tv.solve_dirichlet_mode(p)
        mode = tv.transverse_eigenfunction(root.k, p, "dirichlet")
        norm = float(np.max(np.abs(mode.values)))
        assert abs(mode.values[-1]) < 1e-10 * norm
        assert abs(mode.derivative[0] + p.robin_strength * mode.values[0]) < 1e-10 * norm

    def test_neumann_boundary_conditions(self):
        p = tv.TransverseParams(a=0.4, beta=10.0, gamma_boundary=0.8, gamma_plus=1.0)
        root = tv.solve_neumann_mode(p)
        mode = tv.transverse_eigenfunction(root.k, p, "neumann")
        norm = float(np.max(np.abs(mode.values)))
        assert abs(mode.derivative[0] + p.robin_strength * mode.values[0]) < 1e-10 * norm
        assert abs(mode.derivative[-1] - p.far_coefficient * mode.values[-1]) < 1e-10 * norm

    def test_overlap_with_fd_ground_state(self):
        from scipy.linalg import eigh_tridiagonal

        p = tv.TransverseParams(a=0.3, beta=10.0, gamma_boundary=0.5)
        root = tv.solve_dirichlet_mode(p)
        mode = tv.transverse_eigenfunction(root.k, p, "dirichlet", n_samples=8193)
        cells = 4096
        diag, off = tv._fd_tridiagonal(p, "dirichlet", cells)
        _, vec = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
        fd_vec = vec[:, 0].copy()
        fd_vec[0] *= math.sqrt(2.0)  # undo the symmetrizing similarity
        grid = np.arange(cells) * (p.a / cells)
        exact = np.interp(grid, mode.u, mode.values)
        cosine = abs(np.dot(fd_vec, exact)) / (np.linalg.norm(fd_vec) * np.linalg.norm(exact))
        assert cosine > 0.99999
