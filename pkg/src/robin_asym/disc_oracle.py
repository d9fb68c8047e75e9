"""Exact Robin spectrum on a disc through modified Bessel function ratios.

Only the logarithmic derivative x I'_m(x) / I_m(x) is ever evaluated: the raw
I_m overflows near x = beta*R, while the ratio is benign.  Small arguments use
the power series of the ratio; large ones a backward recurrence for
I_{m+1}/I_m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ResolutionError
from .robin_fem import EigenResult


@dataclass(frozen=True)
class DiscSpectrumRequest:
    radius_R: float
    beta: float
    n_levels: int

    def __post_init__(self):
        if self.radius_R <= 0 or self.beta <= 0 or self.n_levels <= 0:
            raise ParameterError("radius, beta, and n_levels must all be positive")


def bessel_i_ratio(m: int, x: float) -> float:
    """x * I'_m(x) / I_m(x), stable over the whole range.

    Power series of the ratio for x < max(12, 2m); otherwise backward
    recurrence for r = I_{m+1}/I_m combined with I'_m = I_{m+1} + (m/x) I_m.
    Strictly increasing in x.
    """
    if m < 0 or m > 200:
        raise ParameterError("m must lie in [0, 200]")
    if x <= 0:
        raise ParameterError("x must be positive")
    if x < max(12.0, 2.0 * m):
        q = 0.25 * x * x
        term = 1.0
        num = float(m)
        den = 1.0
        for j in range(500):
            term *= q / ((j + 1) * (m + j + 1))
            num += (m + 2 * (j + 1)) * term
            den += term
            if term < 1e-18 * den:
                break
        else:  # pragma: no cover - series always terminates far earlier
            raise ResolutionError("ratio series did not converge")
        return num / den
    start = int(2 * (x + m)) + 40
    r = 0.0
    for n in range(start, m, -1):
        r = 1.0 / (2.0 * n / x + r)
    return m + x * r


def disc_eigenvalue(m: int, req: DiscSpectrumRequest) -> float:
    """Negative eigenvalue -(X/R)^2 with X solving the ratio condition.

    The bracket is seeded from the large-argument expansion
    X ~ alpha + 1/2 - (4m^2 - 1)/(8 alpha) and widened until it straddles the
    root; monotonicity of the ratio guarantees capture.
    """
    from scipy.optimize import brentq

    alpha = req.beta * req.radius_R
    if alpha <= m:
        raise ParameterError(
            f"no negative eigenvalue for angular index m={m} at beta*R={alpha:.6g}"
        )

    def f(x):
        return bessel_i_ratio(m, x) - alpha

    guess = alpha + 0.5 - (4.0 * m * m - 1.0) / (8.0 * alpha)
    width = max(1.0, 10.0 / alpha)
    lo = max(guess - width, 1e-8)
    hi = guess + width
    for _ in range(200):
        if f(lo) < 0:
            break
        lo *= 0.5
    for _ in range(200):
        if f(hi) > 0:
            break
        hi *= 1.5
    x_root = brentq(f, lo, hi, xtol=1e-13, rtol=8.9e-16)
    if abs(f(x_root)) > 1e-10 * alpha:
        raise ResolutionError("Bessel ratio root residual above 1e-10 * alpha")
    return -((x_root / req.radius_R) ** 2)


def two_term_approximation(m: int, req: DiscSpectrumRequest) -> float:
    """-(beta + 1/(2R))^2 + (m^2 - 1/4)/R^2, the two displayed expansion terms."""
    r = req.radius_R
    return -((req.beta + 0.5 / r) ** 2) + (m * m - 0.25) / (r * r)


def disc_spectrum(req: DiscSpectrumRequest) -> EigenResult:
    """Lowest negative eigenvalues with angular multiplicities (1 for m=0, else 2)."""
    values: list[float] = []
    m = 0
    alpha = req.beta * req.radius_R
    while len(values) < req.n_levels and m < alpha:
        lam = disc_eigenvalue(m, req)
        values.append(lam)
        if m > 0:
            values.append(lam)
        m += 1
    values = sorted(values)[: req.n_levels]
    arr = np.asarray(values, dtype=float)
    return EigenResult(
        beta=req.beta,
        eigenvalues=arr,
        mesh_id=f"bessel-disc-R{req.radius_R:g}",
        discretization_error_estimate=np.abs(arr) * 1e-12,
    )


def spectrum_rows(req: DiscSpectrumRequest, m_max: int | None = None):
    """Rows (m, X, lambda, lambda_two_term, defect) for reporting."""
    if m_max is None:
        m_max = req.n_levels
    rows = []
    for m in range(m_max + 1):
        if m >= req.beta * req.radius_R:
            break
        lam = disc_eigenvalue(m, req)
        x_root = req.radius_R * math.sqrt(-lam)
        approx = two_term_approximation(m, req)
        rows.append((m, x_root, lam, approx, lam - approx))
    return rows


def rows_to_csv(rows, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("m,X,lambda,lambda_asymptotic_2term,defect\n")
        for m, x_root, lam, approx, defect in rows:
            fh.write(f"{m},{x_root:.16e},{lam:.16e},{approx:.16e},{defect:.16e}\n")
