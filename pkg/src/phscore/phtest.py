"""Score test of proportional hazards for chosen covariates.

Under the alternative the hazard ratio of the tested covariates drifts with
the baseline distribution function ``F``; the score for the drift parameter
at zero, with ``beta`` replaced by the partial likelihood estimate and ``F``
by ``1 - exp(-Breslow)``, is

    U = - sum_events F(t) (z_J,fail - E_J(t, beta_hat)).

Its variance is the Schur complement ``D = S_JJ - S_J' S^-1 S_J`` of the
matrices collected in :class:`SigmaSet`. One tested covariate gives a signed
statistic compared with the standard normal law; several give a quadratic
form compared with chi-squared.
"""

from dataclasses import dataclass

import numpy as np

from .cox import fit as fit_cox
from .exceptions import DegenerateVarianceError, NumericalError, SingularMatrixError
from .numeric import RCOND_THRESHOLD, chi2_sf, spd_solve, std_normal_sf
from .survival import event_aggregates

__all__ = [
    "SigmaSet",
    "PhTestReport",
    "score_statistic",
    "sigma_set",
    "variance",
    "test",
    "per_covariate_report",
    "FHAT_SIDES",
]

FHAT_SIDES = ("right", "left")


@dataclass(frozen=True)
class SigmaSet:
    """Variance building blocks, all divided by ``n``.

    Attributes
    ----------
    sigma_jj : (k, k) ndarray
        ``sum_events F^2 V_JJ / n``.
    sigma_j : (m, k) ndarray
        ``sum_events F V_.J / n``.
    sigma : (m, m) ndarray
        ``sum_events V / n`` (the normalized information).
    """

    sigma_jj: np.ndarray
    sigma_j: np.ndarray
    sigma: np.ndarray


@dataclass(frozen=True)
class PhTestReport:
    """Result of testing proportionality for the covariates ``tested``.

    ``statistic`` is on the standard normal scale when one covariate is
    tested (``df == 1``, two-sided p-value) and on the chi-squared scale
    otherwise. When the statistic could not be computed ``error`` holds the
    reason and the numbers are NaN.
    """

    tested: tuple
    tested_names: tuple
    u_gamma: np.ndarray
    d_hat: np.ndarray
    statistic: float
    df: int
    p_value: float
    alpha: float
    reject: bool
    n: int
    error: str | None = None

    @property
    def label(self):
        return "+".join(self.tested_names)


def _indices(sample, tested):
    if isinstance(tested, (str, int, np.integer)):
        tested = [tested]
    idx = tuple(sample.column_index(j) for j in tested)
    if not idx:
        raise ValueError("at least one covariate must be tested")
    if len(set(idx)) != len(idx):
        raise ValueError("tested covariates must be distinct")
    return idx


def _require_converged(fit):
    if not fit.converged:
        raise NumericalError("the Cox fit did not converge")


@dataclass(frozen=True)
class _Pieces:
    # Per-event ingredients shared by the statistic and its variance.
    fhat: np.ndarray
    counts: np.ndarray
    resid: np.ndarray
    v: np.ndarray
    n: int


def _pieces(sample, fit, fhat_side):
    if fhat_side not in FHAT_SIDES:
        raise ValueError(f"fhat_side must be one of {FHAT_SIDES}")
    _require_converged(fit)
    agg = event_aggregates(sample, fit.beta_hat)
    fhat = fit.baseline_cdf(agg.times, side=fhat_side)
    resid = agg.zfail - agg.counts[:, None] * agg.e
    return _Pieces(fhat, agg.counts.astype(float), resid, agg.v, sample.n)


def _u(p, idx):
    return -(p.fhat @ p.resid[:, list(idx)])


def _sigmas(p, idx):
    idx = list(idx)
    dv = p.counts[:, None, None] * p.v
    sigma = dv.sum(axis=0) / p.n
    cols = dv[:, :, idx]
    sigma_j = np.einsum("k,kij->ij", p.fhat, cols) / p.n
    sigma_jj = np.einsum("k,kij->ij", p.fhat**2, cols[:, idx, :]) / p.n
    return SigmaSet(sigma_jj, sigma_j, sigma)


def score_statistic(sample, fit, tested, fhat_side="right"):
    """Non-proportionality score vector for the covariates ``tested``.

    Parameters
    ----------
    sample : SurvivalSample
    fit : CoxFit
        Converged fit of all covariates of ``sample``.
    tested : int, str or sequence of them
        Covariates (0-based positions or names).
    fhat_side : {'right', 'left'}
        Whether ``F`` at an event time includes the jump at that time.
    """
    idx = _indices(sample, tested)
    return _u(_pieces(sample, fit, fhat_side), idx)


def sigma_set(sample, fit, tested, fhat_side="right"):
    """Matrices entering the variance of :func:`score_statistic`."""
    idx = _indices(sample, tested)
    return _sigmas(_pieces(sample, fit, fhat_side), idx)


def variance(sigmas, threshold=RCOND_THRESHOLD):
    """Schur complement ``sigma_jj - sigma_j' sigma^-1 sigma_j``.

    Raises
    ------
    SingularMatrixError
        ``sigma`` is not positive definite: the information of the null
        model is degenerate.
    DegenerateVarianceError
        The complement is not positive definite, so the statistic cannot
        be standardized.
    """
    solved = spd_solve(sigmas.sigma, sigmas.sigma_j, threshold)
    if not solved.success:
        raise SingularMatrixError(
            "normalized information is singular or not positive definite "
            f"(rcond = {solved.rcond:.3g})"
        )
    d = sigmas.sigma_jj - sigmas.sigma_j.T @ solved.solution
    d = 0.5 * (d + d.T)
    eig = np.linalg.eigvalsh(d)
    scale = max(np.max(np.abs(np.diag(sigmas.sigma_jj))), np.finfo(float).tiny)
    if eig[0] <= 1e-12 * scale or eig[0] <= threshold * eig[-1]:
        raise DegenerateVarianceError(
            f"variance of the statistic is degenerate (smallest eigenvalue {eig[0]:.3g})"
        )
    return d


def _report(sample, pieces, idx, alpha, joint=False):
    names = tuple(sample.covariate_names[j] for j in idx)
    k = len(idx)
    u = _u(pieces, idx)
    d = variance(_sigmas(pieces, idx))
    n = sample.n
    if k == 1 and not joint:
        stat = float(u[0] / np.sqrt(n * d[0, 0]))
        p = float(2 * std_normal_sf(abs(stat)))
    else:
        solved = spd_solve(d, u)
        if not solved.success:
            raise DegenerateVarianceError("variance of the statistic is singular")
        stat = float(u @ solved.solution / n)
        p = float(chi2_sf(max(stat, 0.0), k))
    return PhTestReport(idx, names, u, d, stat, k, p, alpha, p < alpha, n)


def _check_alpha(alpha):
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")


def test(sample, tested, alpha=0.05, fit=None, fhat_side="right", joint=False):
    """Test proportional hazards for the covariates ``tested``.

    Parameters
    ----------
    sample : SurvivalSample
    tested : int, str or sequence of them
        One covariate gives the signed normal statistic, several the
        chi-squared quadratic form.
    alpha : float
        Significance level for the ``reject`` flag.
    fit : CoxFit, optional
        Reused when given; otherwise the Cox model with every covariate of
        ``sample`` is fitted.
    fhat_side : {'right', 'left'}
    joint : bool
        Use the chi-squared form even for a single covariate.

    Returns
    -------
    PhTestReport
    """
    _check_alpha(alpha)
    idx = _indices(sample, tested)
    fit = fit_cox(sample) if fit is None else fit
    return _report(sample, _pieces(sample, fit, fhat_side), idx, alpha, joint)


# Keep pytest from collecting the public ``test`` function.
test.__test__ = False


def _failed(sample, idx, alpha, exc):
    names = tuple(sample.covariate_names[j] for j in idx)
    k = len(idx)
    nan = np.full(k, np.nan)
    return PhTestReport(
        idx, names, nan, np.full((k, k), np.nan), np.nan, k, np.nan, alpha, False,
        sample.n, error=str(exc),
    )


def per_covariate_report(sample, alpha=0.05, fit=None, fhat_side="right"):
    """Test each covariate separately and all of them jointly.

    One Cox fit is shared by every test. A degenerate covariate yields a
    report with ``error`` set instead of aborting the batch.

    Returns
    -------
    reports : list of PhTestReport
        One per covariate, in column order.
    overall : PhTestReport
        Joint chi-squared test of all covariates (``df == m``), also when
        ``m == 1``.
    """
    _check_alpha(alpha)
    fit = fit_cox(sample) if fit is None else fit
    pieces = _pieces(sample, fit, fhat_side)
    out = []
    groups = [(j,) for j in range(sample.m)] + [tuple(range(sample.m))]
    for g, idx in enumerate(groups):
        try:
            out.append(_report(sample, pieces, idx, alpha, joint=g == sample.m))
        except NumericalError as exc:
            out.append(_failed(sample, idx, alpha, exc))
    return out[:-1], out[-1]
