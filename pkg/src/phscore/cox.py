"""Cox partial likelihood, its Newton maximizer and the Breslow estimator."""

import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError, SeparationError, SingularMatrixError
from .numeric import RCOND_THRESHOLD, spd_solve
from .survival import event_aggregates

__all__ = [
    "StepFunction",
    "CoxFit",
    "log_partial_likelihood",
    "score",
    "information",
    "fit",
    "breslow_cumhaz",
    "baseline_cdf",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous step function, zero before the first jump.

    ``values[k]`` is the value on ``[times[k], times[k + 1])``.
    """

    times: np.ndarray
    values: np.ndarray

    def __call__(self, t, side="right"):
        """Evaluate at ``t``.

        ``side='left'`` returns the limit from the left, i.e. the value just
        before a jump located at ``t``.
        """
        if side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        t = np.asarray(t, dtype=float)
        k = np.searchsorted(self.times, t, side=side)
        padded = np.concatenate([[0.0], self.values])
        out = padded[k]
        return out if out.ndim else float(out)

    def map(self, func):
        return StepFunction(self.times, func(self.values))


def _check_beta(sample, beta):
    beta = np.asarray(beta, dtype=float).reshape(-1)
    if beta.shape != (sample.m,):
        raise ValueError(f"beta must have {sample.m} entries")
    if not np.all(np.isfinite(beta)):
        raise ValueError("beta must be finite")
    return beta


def _loglik(agg, beta):
    return float(np.sum(agg.zfail @ beta - agg.counts * agg.log_s0))


def _score(agg):
    return np.sum(agg.zfail - agg.counts[:, None] * agg.e, axis=0)


def _information(agg):
    return np.einsum("k,kij->ij", agg.counts.astype(float), agg.v)


def log_partial_likelihood(sample, beta):
    """Breslow log partial likelihood ``sum_k [beta'z_(k) - d_k log S0(t_k)]``."""
    beta = _check_beta(sample, beta)
    return _loglik(event_aggregates(sample, beta), beta)


def score(sample, beta):
    """Gradient of :func:`log_partial_likelihood`."""
    return _score(event_aggregates(sample, _check_beta(sample, beta)))


def information(sample, beta):
    """Observed information, minus the Hessian of the log partial likelihood."""
    return _information(event_aggregates(sample, _check_beta(sample, beta)))


@dataclass(frozen=True)
class CoxFit:
    """Maximum partial likelihood fit of the proportional hazards model.

    Attributes
    ----------
    beta_hat : (m,) ndarray
    score_at_hat : (m,) ndarray
    information : (m, m) ndarray
        Un-normalized observed information at ``beta_hat``.
    loglik : float
    loglik_null : float
        Log partial likelihood at ``beta = 0``.
    iterations : int
    converged : bool
    breslow : StepFunction
        Breslow cumulative baseline hazard.
    baseline_cdf : StepFunction
        ``1 - exp(-breslow)``.
    """

    beta_hat: np.ndarray
    score_at_hat: np.ndarray
    information: np.ndarray
    loglik: float
    loglik_null: float
    iterations: int
    converged: bool
    breslow: StepFunction
    baseline_cdf: StepFunction


def _breslow_from(agg):
    jumps = agg.counts * np.exp(-agg.log_s0)
    return StepFunction(agg.times, np.cumsum(jumps))


def breslow_cumhaz(sample, beta):
    """Breslow estimator ``sum_{t_k <= t} d_k / S0(t_k, beta)``."""
    return _breslow_from(event_aggregates(sample, _check_beta(sample, beta)))


def baseline_cdf(cumhaz):
    """Baseline distribution function ``1 - exp(-Lambda)`` as a step function."""
    if np.any(np.diff(cumhaz.values) < 0) or np.any(cumhaz.values < 0):
        raise ValueError("cumulative hazard must be nonnegative and nondecreasing")
    return cumhaz.map(lambda v: -np.expm1(-v))


def fit(sample, tol=1e-9, max_iter=50, init=None, max_abs_beta=50.0, max_halvings=30):
    """Maximize the partial likelihood by Newton's method with step halving.

    Parameters
    ----------
    sample : SurvivalSample
    tol : float
        Convergence threshold on the sup-norm of the score.
    max_iter : int
    init : array_like, optional
        Starting point, zero by default.
    max_abs_beta : float
        Divergence bound used to detect monotone likelihood.
    max_halvings : int

    Returns
    -------
    CoxFit

    Raises
    ------
    SeparationError
        The iterates diverge: the likelihood keeps increasing towards
        infinity along some direction.
    SingularMatrixError
        The information matrix is singular at the starting point or at
        the solution (collinear or constant covariates).
    ConvergenceError
        ``max_iter`` iterations were not enough.
    """
    beta = np.zeros(sample.m) if init is None else _check_beta(sample, init)
    agg = event_aggregates(sample, beta)
    ll = _loglik(agg, beta)
    ll_null = ll if init is None else log_partial_likelihood(sample, np.zeros(sample.m))
    info_scale = np.max(np.linalg.eigvalsh(_information(agg)))
    last_step = np.inf
    for it in range(max_iter + 1):
        u = _score(agg)
        info = _information(agg)
        small_score = np.max(np.abs(u)) <= tol
        # A vanishing score with non-vanishing Newton steps is the signature of
        # an infinite maximizer, so convergence also requires a settled step.
        if small_score and last_step <= 1e-6 * (1.0 + np.max(np.abs(beta))):
            break
        solved = spd_solve(info, u)
        if not solved.success:
            if it > 0 and last_step > 0.1:
                raise SeparationError(
                    "information became singular while the coefficients were "
                    f"still moving (|beta|max = {np.max(np.abs(beta)):.3g}): "
                    "monotone partial likelihood"
                )
            if small_score:
                break
            raise SingularMatrixError(
                "information matrix is singular (rcond = "
                f"{solved.rcond:.3g}); check for constant or collinear covariates"
            )
        if it == max_iter:
            raise ConvergenceError(
                f"no convergence after {max_iter} Newton iterations "
                f"(|score|max = {np.max(np.abs(u)):.3g})"
            )
        step = solved.solution
        for _ in range(max_halvings + 1):
            trial = beta + step
            trial_agg = event_aggregates(sample, trial)
            trial_ll = _loglik(trial_agg, trial)
            if np.isfinite(trial_ll) and trial_ll >= ll - 1e-12 * (1 + abs(ll)):
                break
            step = step / 2
        else:
            raise ConvergenceError("step halving failed to increase the likelihood")
        beta, agg, ll = trial, trial_agg, trial_ll
        last_step = float(np.max(np.abs(step)))
        log.debug("iteration %d: loglik %.12g, step %.3g", it + 1, ll, last_step)
        if np.max(np.abs(beta)) > max_abs_beta:
            raise SeparationError(
                f"|beta|max exceeded {max_abs_beta:g}: monotone partial likelihood"
            )
    info = _information(agg)
    check = spd_solve(info, np.zeros(sample.m))
    # Information that collapsed while the coefficients grew: the risk sets
    # became separated and the score vanished only by underflow.
    if np.linalg.eigvalsh(info)[0] <= RCOND_THRESHOLD * info_scale and np.any(beta):
        raise SeparationError(
            f"information vanished at |beta|max = {np.max(np.abs(beta)):.3g}: "
            "monotone partial likelihood"
        )
    if check.rcond < RCOND_THRESHOLD:
        raise SingularMatrixError(
            f"information matrix at the estimate is singular (rcond = {check.rcond:.3g})"
        )
    cumhaz = _breslow_from(agg)
    return CoxFit(
        beta_hat=beta,
        score_at_hat=_score(agg),
        information=info,
        loglik=ll,
        loglik_null=ll_null,
        iterations=it,
        converged=True,
        breslow=cumhaz,
        baseline_cdf=baseline_cdf(cumhaz),
    )
