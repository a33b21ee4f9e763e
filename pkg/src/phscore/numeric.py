"""Distribution functions, small symmetric solves and finite differences.

The special functions are thin wrappers over :mod:`scipy.special`; the
linear algebra is a Cholesky solve with an eigenvalue-based reciprocal
condition estimate, which is all the score test ever needs (matrices are at
most a few dozen rows).
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg, special

__all__ = [
    "SpdSolveResult",
    "std_normal_cdf",
    "std_normal_sf",
    "std_normal_quantile",
    "chi2_sf",
    "spd_solve",
    "finite_diff_gradient",
    "finite_diff_hessian",
    "RCOND_THRESHOLD",
]

#: Matrices whose reciprocal condition number falls below this are singular.
RCOND_THRESHOLD = 1e-10


def std_normal_cdf(x):
    """Standard normal distribution function."""
    return special.ndtr(x)


def std_normal_sf(x):
    """Upper tail ``1 - Phi(x)`` without cancellation for large ``x``."""
    return special.ndtr(-np.asarray(x, dtype=float))


def std_normal_quantile(p):
    """Inverse of :func:`std_normal_cdf` on the open interval (0, 1)."""
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)) or np.any(np.isnan(p)):
        raise ValueError("quantile argument must lie strictly inside (0, 1)")
    out = special.ndtri(p)
    return out if out.ndim else float(out)


def chi2_sf(x, k):
    """Survival function of the chi-squared law with ``k`` degrees of freedom.

    Evaluated as the regularized upper incomplete gamma function
    ``Q(k/2, x/2)``.
    """
    if k < 1:
        raise ValueError("degrees of freedom must be >= 1")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("chi-squared argument must be nonnegative")
    out = special.gammaincc(0.5 * k, 0.5 * x)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SpdSolveResult:
    """Outcome of :func:`spd_solve`.

    ``solution`` is ``None`` whenever ``success`` is false.
    """

    solution: np.ndarray | None
    rcond: float
    success: bool


def spd_solve(a, b, threshold=RCOND_THRESHOLD):
    """Solve ``a @ x = b`` for symmetric positive definite ``a``.

    Parameters
    ----------
    a : (m, m) array_like
        Symmetric matrix; only its symmetric part is used.
    b : (m,) or (m, k) array_like
        Right-hand side(s).
    threshold : float
        Minimum acceptable reciprocal condition number ``lambda_min /
        lambda_max``.

    Returns
    -------
    SpdSolveResult
        ``success`` is false when ``a`` is not positive definite or is
        worse conditioned than ``threshold``.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.asarray(b, dtype=float)
    if a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    a = 0.5 * (a + a.T)
    if not np.all(np.isfinite(a)):
        return SpdSolveResult(None, 0.0, False)
    eig = np.linalg.eigvalsh(a)
    top = eig[-1]
    rcond = float(eig[0] / top) if top > 0 else 0.0
    if rcond < threshold:
        return SpdSolveResult(None, max(rcond, 0.0), False)
    try:
        factor = linalg.cho_factor(a, lower=True, check_finite=False)
    except linalg.LinAlgError:
        return SpdSolveResult(None, rcond, False)
    x = linalg.cho_solve(factor, b, check_finite=False)
    return SpdSolveResult(x, rcond, True)


def _steps(x, step, scale=1e-5):
    x = np.asarray(x, dtype=float)
    if step is None:
        return x, scale * (1.0 + np.abs(x))
    return x, np.broadcast_to(np.asarray(step, dtype=float), x.shape)


def finite_diff_gradient(f, x, step=None):
    """Central-difference gradient of a scalar function.

    ``step`` defaults to ``1e-5 * (1 + |x_i|)`` per coordinate.
    """
    x, h = _steps(x, step)
    grad = np.empty(x.shape)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h[i]
        grad[i] = (f(x + e) - f(x - e)) / (2 * h[i])
    return grad


def finite_diff_hessian(f, x, step=None):
    """Central-difference Hessian of a scalar function (symmetrized).

    ``step`` defaults to ``1e-4 * (1 + |x_i|)``: second differences lose
    about twice as many digits to rounding as first differences.
    """
    x, h = _steps(x, step, 1e-4)
    m = x.size
    hess = np.empty((m, m))
    f0 = f(x)
    for i in range(m):
        ei = np.zeros_like(x)
        ei[i] = h[i]
        hess[i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros_like(x)
            ej[j] = h[j]
            val = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4 * h[i] * h[j])
            hess[i, j] = hess[j, i] = val
    return hess
