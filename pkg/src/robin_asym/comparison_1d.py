"""Periodic 1D Schrodinger operators built from the boundary curvature.

The comparison operator has unit kinetic coefficient and potential -gamma^2/4;
the bracketing pair rescales the kinetic term by (1 -+ a*gamma_plus)^(-2) and
shifts the potential by curvature-derivative envelopes.  Spectra are computed
with a plane-wave Galerkin discretization (spectrally accurate for the smooth
periodic potentials that arise here).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IterationError, ParameterError, ResolutionError, SingularCoordinateError
from .geometry import CurvatureProfile, resample_periodic, trig_interpolate

TWO_PI = 2.0 * np.pi

_DENSE_LIMIT = 4096


@dataclass(frozen=True)
class PeriodicSchrodinger:
    """Operator kinetic_coefficient * (-d^2/ds^2) + potential on a circle of length L."""

    length_L: float
    kinetic_coefficient: float
    potential: np.ndarray  # samples on the uniform s-grid

    def __post_init__(self):
        if self.length_L <= 0:
            raise ParameterError("length must be positive")
        if self.kinetic_coefficient <= 0:
            raise ParameterError("kinetic coefficient must be positive")
        if not np.all(np.isfinite(self.potential)):
            raise ParameterError("potential contains non-finite values")


@dataclass(frozen=True)
class Spectrum1D:
    """Ascending eigenvalues mu_1 <= mu_2 <= ... of a periodic operator."""

    eigenvalues: np.ndarray
    count: int
    grid_size: int

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        if np.any(np.diff(ev) < -1e-10 * (1.0 + np.max(np.abs(ev)))):
            raise ParameterError("eigenvalues must be ascending")


def build_comparison_operator(cp: CurvatureProfile) -> PeriodicSchrodinger:
    """Unit kinetic term with potential -gamma(s)^2 / 4.

    The potential is nonpositive and cannot vanish identically: a closed
    boundary has total curvature 2*pi, so gamma != 0 somewhere.
    """
    return PeriodicSchrodinger(cp.length_L, 1.0, -0.25 * cp.gamma**2)


def build_bracketing_operators(cp: CurvatureProfile, a: float):
    """Separated-variable envelope operators for strip width a.

    Returns (dirichlet_side, neumann_side).  The Dirichlet-side operator has
    kinetic coefficient (1 - a*gamma_plus)^(-2) and the upper potential
    envelope; the Neumann side uses (1 + a*gamma_plus)^(-2) and the lower one.
    """
    gp = cp.gamma_plus
    if not 0.0 < a < 1.0 / (2.0 * gp):
        raise ParameterError(
            f"strip width a={a} outside (0, 1/(2*gamma_plus)) = (0, {1.0/(2.0*gp):.6g})"
        )
    minus = 1.0 - a * gp
    plus = 1.0 + a * gp
    v_plus = -cp.gamma**2 / (4.0 * plus**2) + a * cp.gamma_d2_plus / (2.0 * minus**3)
    v_minus = (-cp.gamma**2 / (4.0 * minus**2)
               - a * cp.gamma_d2_plus / (2.0 * minus**3)
               - 1.25 * a**2 * cp.gamma_d1_plus**2 / minus**4)
    upper = PeriodicSchrodinger(cp.length_L, minus**-2, v_plus)
    lower = PeriodicSchrodinger(cp.length_L, plus**-2, v_minus)
    return upper, lower


def effective_potential(cp: CurvatureProfile, s, u):
    """Straightened-strip potential V(s, u); s and u broadcast together."""
    s_arr, u_arr = np.broadcast_arrays(np.asarray(s, float), np.asarray(u, float))
    sq = np.mod(s_arr, cp.length_L)
    g = trig_interpolate(cp.gamma, cp.length_L, sq)
    g1 = trig_interpolate(cp.gamma_prime, cp.length_L, sq)
    g2 = trig_interpolate(cp.gamma_second, cp.length_L, sq)
    w = 1.0 - u_arr * g
    if np.any(w <= 0.0):
        raise SingularCoordinateError("1 - u*gamma(s) must stay positive")
    value = (-g**2 / (4.0 * w**2)
             - u_arr * g2 / (2.0 * w**3)
             - 1.25 * u_arr**2 * g1**2 / w**4)
    if value.ndim == 0:
        return float(value)
    return value


def _plane_wave_eigenvalues(op: PeriodicSchrodinger, n_modes: int, m: int) -> np.ndarray:
    v = resample_periodic(op.potential, m)
    freqs = np.rint(np.fft.fftfreq(m, d=1.0 / m)).astype(int)
    kinetic = op.kinetic_coefficient * (TWO_PI * freqs / op.length_L) ** 2
    if m <= _DENSE_LIMIT:
        vhat = np.fft.fft(v) / m
        h = vhat[np.mod(np.subtract.outer(freqs, freqs), m)]
        h[np.diag_indices(m)] += kinetic
        return np.linalg.eigvalsh(h)[:n_modes]

    from scipy.sparse.linalg import LinearOperator, eigsh

    def matvec(psi):
        return (np.fft.ifft(kinetic * np.fft.fft(psi)).real + v * psi)

    aop = LinearOperator((m, m), matvec=matvec, dtype=float)
    try:
        vals = eigsh(aop, k=n_modes, which="SA", tol=1e-12,
                     maxiter=50 * m, return_eigenvectors=False)
    except Exception as exc:  # pragma: no cover - iterative fallback path
        raise IterationError(f"iterative 1D eigensolve failed: {exc}") from exc
    return np.sort(vals)


def solve_periodic_spectrum(op: PeriodicSchrodinger, n_modes: int, grid_size: int,
                            check_convergence: bool = True) -> Spectrum1D:
    """Lowest eigenvalues of a periodic operator by plane-wave Galerkin.

    With check_convergence the solve is repeated on a doubled grid and the
    result must agree to 1e-8 relative per mode, otherwise ResolutionError.
    """
    if n_modes < 1:
        raise ParameterError("n_modes must be positive")
    if grid_size < 8 * n_modes:
        raise ParameterError("grid_size must be at least 8 * n_modes")
    vals = _plane_wave_eigenvalues(op, n_modes, grid_size)
    if check_convergence:
        fine = _plane_wave_eigenvalues(op, n_modes, 2 * grid_size)
        drift = np.abs(fine - vals) / np.maximum(np.abs(fine), 1.0)
        if float(np.max(drift)) > 1e-8:
            raise ResolutionError(
                f"eigenvalue drift {float(np.max(drift)):.3e} under grid doubling; "
                "increase grid_size"
            )
        vals = fine
    vmin = float(np.min(op.potential))
    vmean = float(np.mean(op.potential))
    tol = 1e-9 * (1.0 + abs(vmin))
    if vals[0] < vmin - tol or vals[0] > vmean + tol:
        raise ResolutionError(
            f"ground state {vals[0]:.12g} violates variational bounds "
            f"[{vmin:.12g}, {vmean:.12g}]"
        )
    return Spectrum1D(np.asarray(vals, dtype=float), n_modes, grid_size)


@dataclass(frozen=True)
class MuConvergenceTable:
    """Errors |mu_j^{D/N}(a) - mu_j| over a (j, a) grid, plus the scaling fit."""

    j_values: np.ndarray       # flattened j per row
    a_values: np.ndarray       # flattened a per row
    err_dirichlet: np.ndarray
    err_neumann: np.ndarray
    mu_reference: np.ndarray   # mu_j of the comparison operator, j = 1..j_max
    c_fit: float               # max err / (a j^2) over the whole table
    halving_ratios: dict = field(default_factory=dict)  # (side, j) -> list of ratios

    def rows(self):
        for i in range(self.j_values.shape[0]):
            yield (int(self.j_values[i]), float(self.a_values[i]),
                   float(self.err_dirichlet[i]), float(self.err_neumann[i]))

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("j,a,err_D,err_N\n")
            for j, a, ed, en in self.rows():
                fh.write(f"{j},{a:.16e},{ed:.16e},{en:.16e}\n")


def verify_mu_convergence(cp: CurvatureProfile, j_max: int, a_list,
                          grid_size: int = 1024) -> MuConvergenceTable:
    """Tabulate bracketing-spectrum errors against the comparison spectrum.

    Reports the empirical constant C' = max err/(a j^2) and, for consecutive
    halvings of a, the per-mode error ratios (expected near 0.5: the envelopes
    differ from the comparison operator at first order in a).
    """
    a_list = sorted(float(a) for a in a_list)
    for a in a_list:
        if not 0.0 < a < 1.0 / (2.0 * cp.gamma_plus):
            raise ParameterError(f"a={a} outside (0, 1/(2*gamma_plus))")
    base = solve_periodic_spectrum(build_comparison_operator(cp), j_max, grid_size)
    mu = base.eigenvalues
    j_idx = np.arange(1, j_max + 1)

    errs_d, errs_n = {}, {}
    rows_j, rows_a, rows_ed, rows_en = [], [], [], []
    for a in a_list:
        op_d, op_n = build_bracketing_operators(cp, a)
        mu_d = solve_periodic_spectrum(op_d, j_max, grid_size).eigenvalues
        mu_n = solve_periodic_spectrum(op_n, j_max, grid_size).eigenvalues
        errs_d[a] = np.abs(mu_d - mu)
        errs_n[a] = np.abs(mu_n - mu)
        rows_j.extend(j_idx)
        rows_a.extend([a] * j_max)
        rows_ed.extend(errs_d[a])
        rows_en.extend(errs_n[a])

    ed = np.asarray(rows_ed)
    en = np.asarray(rows_en)
    jj = np.asarray(rows_j, dtype=float)
    aa = np.asarray(rows_a, dtype=float)
    c_fit = float(np.max(np.maximum(ed, en) / (aa * jj**2)))

    ratios: dict = {}
    for lo, hi in zip(a_list[:-1], a_list[1:]):
        if abs(hi / lo - 2.0) > 0.02:
            continue
        for side, errs in (("D", errs_d), ("N", errs_n)):
            for j in range(j_max):
                denom = errs[hi][j]
                if denom > 0:
                    ratios.setdefault((side, j + 1), []).append(float(errs[lo][j] / denom))
    return MuConvergenceTable(
        j_values=np.asarray(rows_j), a_values=aa,
        err_dirichlet=ed, err_neumann=en,
        mu_reference=mu, c_fit=c_fit, halving_ratios=ratios,
    )


def spectrum_to_csv(spec: Spectrum1D, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("j,mu_j\n")
        for j, mu in enumerate(spec.eigenvalues, start=1):
            fh.write(f"{j},{mu:.16e}\n")
