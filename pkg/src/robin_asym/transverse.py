"""Transverse operators on (0, a): Robin wall at 0, Dirichlet or Robin far end.

Each operator has a single negative eigenvalue -k^2 pinned by a transcendental
equation.  All root-finding happens in log space for the exponentially small
distance between k and the Robin strength, which the raw exponential form
cannot represent once a*(beta + gamma_b/2) is large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ResolutionError

_LOG5 = math.log(5.0)
_UNDERFLOW_MARGIN = 700.0


@dataclass(frozen=True)
class TransverseParams:
    """Strip width, coupling, boundary curvature value, and |curvature| max."""

    a: float
    beta: float
    gamma_boundary: float
    gamma_plus: float = 0.0

    def __post_init__(self):
        if self.a <= 0 or self.beta <= 0:
            raise ParameterError("a and beta must be positive")
        if self.gamma_plus < 0:
            raise ParameterError("gamma_plus must be nonnegative")

    @property
    def robin_strength(self) -> float:
        return self.beta + 0.5 * self.gamma_boundary

    @property
    def far_coefficient(self) -> float:
        if self.a * self.gamma_plus >= 1.0:
            raise ParameterError("a * gamma_plus must be below 1")
        return self.gamma_plus / (2.0 * (1.0 - self.a * self.gamma_plus))

    def require_dirichlet(self) -> None:
        if self.a * self.robin_strength <= 4.0 / 3.0:
            raise ParameterError(
                "need a*(beta + gamma_b/2) > 4/3 for a guaranteed unique negative mode"
            )

    def require_neumann(self) -> None:
        c = self.robin_strength
        bound = max(self.far_coefficient, 2.0 * _LOG5 / (3.0 * self.a))
        if c <= bound:
            raise ParameterError(
                f"need beta + gamma_b/2 > {bound:.6g} for the far-Robin variant"
            )


@dataclass(frozen=True)
class TransverseRoot:
    zeta: float
    k: float
    residual: float
    clamped: bool = False


@dataclass(frozen=True)
class FdSpectrum:
    eigenvalues: np.ndarray
    negative_count: int


@dataclass(frozen=True)
class TransverseMode:
    u: np.ndarray
    values: np.ndarray
    derivative: np.ndarray


def _bisect_then_newton(f, fprime, lo, hi, bisect_width=1e-3, max_newton=80):
    """Root of increasing-through-zero f on a sign-changing bracket [lo, hi]."""
    flo, fhi = f(lo), f(hi)
    if flo > 0 or fhi < 0:
        raise ResolutionError("root bracket lost its sign change")
    while hi - lo > bisect_width:
        mid = 0.5 * (lo + hi)
        if f(mid) <= 0:
            lo = mid
        else:
            hi = mid
    y = 0.5 * (lo + hi)
    best, best_res = y, abs(f(y))
    for _ in range(max_newton):
        fy = f(y)
        if abs(fy) < best_res:
            best, best_res = y, abs(fy)
        if fy <= 0:
            lo = max(lo, y)
        else:
            hi = min(hi, y)
        if abs(fy) < 1e-15:
            break
        dy = fy / fprime(y)
        y_next = y - dy
        if not lo < y_next < hi:
            y_next = 0.5 * (lo + hi)
        if abs(y_next - y) < 1e-16 * max(1.0, abs(y)):
            y = y_next
            break
        y = y_next
    fy = f(y)
    if abs(fy) < best_res:
        best, best_res = y, abs(fy)
    return best, best_res


def solve_dirichlet_mode(p: TransverseParams) -> TransverseRoot:
    """Unique negative eigenvalue with a hard wall at u = a.

    Solves 2*a*k = log(c + k) - log(c - k) with c = beta + gamma_b/2 for
    k in (0, c), writing k = c - s and iterating in y = log(s).  When s
    underflows double precision the eigenvalue is reported as -c^2 and
    flagged as clamped.
    """
    p.require_dirichlet()
    c = p.robin_strength
    ac = p.a * c
    y0 = math.log(2.0 * c) - 2.0 * ac
    if y0 < -_UNDERFLOW_MARGIN:
        return TransverseRoot(zeta=-c * c, k=c, residual=0.0, clamped=True)

    two_a = 2.0 * p.a

    def f(y):
        s = math.exp(y)
        return y - math.log(2.0 * c - s) + two_a * (c - s)

    def fprime(y):
        s = math.exp(y)
        return 1.0 + s / (2.0 * c - s) - two_a * s

    lo = y0 - 5.0
    for _ in range(200):
        if f(lo) < 0:
            break
        lo -= 5.0
    hi = math.log(0.5 * c)  # f there equals a*c - log 3 > 0 under the precondition
    y, residual = _bisect_then_newton(f, fprime, lo, hi)
    if residual > 1e-12:
        raise ResolutionError(f"transcendental residual {residual:.3e} above 1e-12")
    s = math.exp(y)
    k = c - s
    return TransverseRoot(zeta=-k * k, k=k, residual=residual)


def solve_neumann_mode(p: TransverseParams) -> TransverseRoot:
    """Lowest negative eigenvalue with the Robin far-end coefficient.

    Solves exp(2*k*a) = ((k + c)/(k - c)) * ((k + c_a)/(k - c_a)) for
    k in (c, 1.5*c), with c = beta + gamma_b/2 and the far-end coefficient
    c_a = gamma_plus / (2*(1 - a*gamma_plus)); k = c + s, y = log(s).

    For strongly coupled far ends (2*a > 2/c + 2/c_a) the same determinant
    also has a root below c_a, i.e. a second, shallow negative eigenvalue;
    the ground state solved here and its enclosure are unaffected.
    """
    p.require_neumann()
    c = p.robin_strength
    ca = p.far_coefficient
    ac = p.a * c
    y0 = math.log(2.0 * c) + math.log((c + ca) / (c - ca)) - 2.0 * ac
    if y0 < -_UNDERFLOW_MARGIN:
        return TransverseRoot(zeta=-c * c, k=c, residual=0.0, clamped=True)

    two_a = 2.0 * p.a

    def g(y):
        s = math.exp(y)
        return (two_a * (c + s) - math.log(2.0 * c + s) + y
                - math.log(c + ca + s) + math.log(c - ca + s))

    def gprime(y):
        s = math.exp(y)
        return 1.0 + s * (two_a - 1.0 / (2.0 * c + s)
                          - 1.0 / (c + ca + s) + 1.0 / (c - ca + s))

    lo = y0 - 5.0
    for _ in range(200):
        if g(lo) < 0:
            break
        lo -= 5.0
    hi = math.log(0.5 * c)  # g there is >= 3*a*c - 2*log 5 > 0 under the precondition
    y, residual = _bisect_then_newton(g, gprime, lo, hi)
    if residual > 1e-12:
        raise ResolutionError(f"transcendental residual {residual:.3e} above 1e-12")
    s = math.exp(y)
    k = c + s
    return TransverseRoot(zeta=-k * k, k=k, residual=residual)


def dirichlet_bounds(p: TransverseParams):
    """Two-sided enclosure for the hard-wall mode."""
    c = p.robin_strength
    gap = 4.0 * c * c * math.exp(-p.a * c) if p.a * c < _UNDERFLOW_MARGIN else 0.0
    return -c * c, -c * c + gap


def neumann_bounds(p: TransverseParams):
    """Two-sided enclosure for the far-Robin mode."""
    c = p.robin_strength
    gap = 11.25 * c * c * math.exp(-p.a * c) if p.a * c < _UNDERFLOW_MARGIN else 0.0
    return -c * c - gap, -c * c


def _fd_tridiagonal(p: TransverseParams, kind: str, cells: int):
    h = p.a / cells
    r0 = p.robin_strength
    inv_h2 = 1.0 / (h * h)
    if kind == "dirichlet":
        size = cells
        diag = np.full(size, 2.0 * inv_h2)
        off = np.full(size - 1, -inv_h2)
        diag[0] -= 2.0 * r0 / h
        off[0] = -math.sqrt(2.0) * inv_h2
    else:
        ca = p.far_coefficient
        size = cells + 1
        diag = np.full(size, 2.0 * inv_h2)
        off = np.full(size - 1, -inv_h2)
        diag[0] -= 2.0 * r0 / h
        diag[-1] -= 2.0 * ca / h
        off[0] = -math.sqrt(2.0) * inv_h2
        off[-1] = -math.sqrt(2.0) * inv_h2
    return diag, off


def fd_transverse_oracle(p: TransverseParams, kind: str, cells: int) -> FdSpectrum:
    """Second-order ghost-point finite differences on (0, a).

    Robin wall phi'(0) = -(gamma_b/2 + beta) phi(0); far end either phi(a) = 0
    or phi'(a) = c_a phi(a).  The ghost elimination is symmetrized by a
    diagonal similarity so a tridiagonal eigensolver applies.
    """
    from scipy.linalg import eigh_tridiagonal

    if cells < 256:
        raise ParameterError("cells must be at least 256")
    if kind not in ("dirichlet", "neumann"):
        raise ParameterError("kind must be 'dirichlet' or 'neumann'")
    diag, off = _fd_tridiagonal(p, kind, cells)
    size = diag.shape[0]
    n_low = min(6, size - 1)
    lowest = eigh_tridiagonal(diag, off, eigvals_only=True,
                              select="i", select_range=(0, n_low))
    pads = np.concatenate([[0.0], np.abs(off)]) + np.concatenate([np.abs(off), [0.0]])
    gersh = float(np.min(diag - pads)) - 1.0
    negatives = eigh_tridiagonal(diag, off, eigvals_only=True,
                                 select="v", select_range=(gersh, 0.0))
    return FdSpectrum(np.asarray(lowest, dtype=float), int(negatives.shape[0]))


def richardson_ground_state(p: TransverseParams, kind: str,
                            cells=(1024, 2048, 4096)) -> float:
    """Richardson-extrapolated finite-difference ground state."""
    from scipy.linalg import eigh_tridiagonal

    if len(cells) != 3 or not (cells[1] == 2 * cells[0] and cells[2] == 2 * cells[1]):
        raise ParameterError("cells must be three successive doublings")
    lam = []
    for n in cells:
        diag, off = _fd_tridiagonal(p, kind, n)
        lam.append(eigh_tridiagonal(diag, off, eigvals_only=True,
                                    select="i", select_range=(0, 0))[0])
    first = [(4.0 * lam[i + 1] - lam[i]) / 3.0 for i in range(2)]
    return (16.0 * first[1] - first[0]) / 15.0


def transverse_eigenfunction(k: float, p: TransverseParams, kind: str,
                             n_samples: int = 2001) -> TransverseMode:
    """Normalized eigenfunction samples for a solved mode.

    Uses the overflow-free representations exp(-k u) - exp(-k (2a - u)) for
    the hard wall and (k - c_a) exp(-k u) + (k + c_a) exp(-k (2a - u)) for the
    far-Robin end.
    """
    if kind not in ("dirichlet", "neumann"):
        raise ParameterError("kind must be 'dirichlet' or 'neumann'")
    u = np.linspace(0.0, p.a, n_samples)
    tail = np.exp(-k * (2.0 * p.a - u))
    head = np.exp(-k * u)
    if kind == "dirichlet":
        vals = head - tail
        deriv = -k * head - k * tail
    else:
        ca = p.far_coefficient
        vals = (k - ca) * head + (k + ca) * tail
        deriv = -k * (k - ca) * head + k * (k + ca) * tail
    norm = math.sqrt(float(np.trapezoid(vals * vals, u)))
    return TransverseMode(u, vals / norm, deriv / norm)


def sweep_to_csv(rows, path) -> None:
    """Write sweep rows (a, beta, zeta_D, lo_D, hi_D, zeta_N, lo_N, hi_N)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("a,beta,zeta_D,zeta_D_lower,zeta_D_upper,"
                 "zeta_N,zeta_N_lower,zeta_N_upper\n")
        for row in rows:
            fh.write(",".join(f"{x:.16e}" for x in row) + "\n")
