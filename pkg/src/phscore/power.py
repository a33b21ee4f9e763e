"""Power of the single-covariate test against approaching alternatives.

Under ``gamma = c / sqrt(n)`` the statistic is asymptotically normal with
unit variance and a mean shift determined by the noncentrality ``d``. The
limit functions entering ``d`` are estimated by plugging in one large sample
simulated under proportional hazards at the true ``beta``.

Two conversions of ``d`` into the mean shift are offered: ``"printed"``
divides by the limiting variance ``D`` and ``"sqrt"`` by its square root.
"""

import math
from dataclasses import dataclass

import numpy as np

from .cox import fit as fit_cox
from .exceptions import NumericalError, PowerStudyError, SurvivalDataError
from .numeric import std_normal_cdf, std_normal_quantile
from .phtest import per_covariate_report
from .phtest import test as ph_test
from .phtest import variance, SigmaSet
from .simulate import simulate
from .survival import event_aggregates

__all__ = [
    "PluginLimits",
    "PowerResult",
    "plugin_limits",
    "noncentrality",
    "shift",
    "analytic_power",
    "simulate_statistics",
    "mc_power",
    "MU_SCALINGS",
]

MU_SCALINGS = ("printed", "sqrt")


@dataclass(frozen=True)
class PluginLimits:
    """Large-sample plug-in estimates of the limit quantities under the null.

    ``d_per_c`` is the noncentrality per unit of ``c``; ``D`` the limiting
    variance of the normalized score; ``d_per_c_se`` a batch-means standard
    error of ``d_per_c``.
    """

    d_per_c: float
    d_per_c_se: float
    D: float
    sigma: SigmaSet
    n_plugin: int
    seed: int


def _sigma_at_truth(sample, beta, j):
    agg = event_aggregates(sample, beta)
    counts = agg.counts.astype(float)
    cumhaz = np.cumsum(counts * np.exp(-agg.log_s0))
    fhat = -np.expm1(-cumhaz)
    dv = counts[:, None, None] * agg.v
    n = sample.n
    sigma = dv.sum(axis=0) / n
    sigma_j = np.einsum("k,ki->i", fhat, dv[:, :, j])[:, None] / n
    sigma_jj = np.array([[np.sum(fhat**2 * dv[:, j, j]) / n]])
    return SigmaSet(sigma_jj, sigma_j, sigma)


def _schur(s):
    return float(variance(s)[0, 0])


def plugin_limits(spec, n_plugin=100_000, seed=0, batches=10):
    """Estimate ``d / c`` and ``D`` for the single tested covariate of ``spec``.

    The sample is drawn with ``gamma = 0``. Risk-set averages and the
    Breslow estimate of ``F`` are evaluated at the true ``beta``; integrals
    against ``s0 dLambda`` become event sums divided by ``n``.
    """
    if len(spec.tested) != 1:
        raise ValueError("power calculations cover a single tested covariate")
    j = spec.tested[0]
    null = spec.null()
    sample = simulate(n_plugin, null, seed=(seed, 1))
    full = _sigma_at_truth(sample, null.beta, j)
    value = _schur(full)
    per_batch = []
    size = n_plugin // batches
    for b in range(batches):
        sl = slice(b * size, (b + 1) * size)
        part = type(sample)(sample.times[sl], sample.status[sl], sample.covariates[sl])
        try:
            per_batch.append(_schur(_sigma_at_truth(part, null.beta, j)))
        except (NumericalError, SurvivalDataError):
            continue
    se = float(np.std(per_batch, ddof=1) / math.sqrt(len(per_batch))) if len(
        per_batch
    ) > 1 else math.nan
    # Under the plug-in both d / c and D reduce to the same Schur complement.
    return PluginLimits(value, se, value, full, n_plugin, seed)


def noncentrality(spec, c, n_plugin=100_000, seed=0, limits=None):
    """Noncentrality ``d`` of the local alternative ``gamma = c / sqrt(n)``.

    ``d = c [int F^2 v_jj s0 dLambda - int F v_j' s0 dLambda Sigma^-1
    int F v_j s0 dLambda]``, estimated by :func:`plugin_limits`.
    """
    limits = plugin_limits(spec, n_plugin, seed) if limits is None else limits
    return float(c) * limits.d_per_c


def shift(d, D, scaling="printed"):
    """Mean shift of the statistic: ``d / D`` or ``d / sqrt(D)``."""
    if scaling not in MU_SCALINGS:
        raise ValueError(f"scaling must be one of {MU_SCALINGS}")
    if not D > 0:
        raise ValueError("D must be positive")
    return d / D if scaling == "printed" else d / math.sqrt(D)


def analytic_power(mu, alpha=0.05):
    """Asymptotic power ``2 - Phi(z - mu) - Phi(z + mu)``, ``z`` the upper alpha/2 point."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    z = std_normal_quantile(1 - alpha / 2)
    # Written with upper tails to keep precision when the power is near alpha.
    return float(std_normal_cdf(mu - z) + std_normal_cdf(-z - mu))


@dataclass(frozen=True)
class PowerResult:
    """Analytic and Monte Carlo power at one local alternative.

    ``mc_ci`` is the normal-approximation 95% interval
    ``mc_power +/- 1.96 sqrt(p (1 - p) / R)``.
    """

    c: float
    n: int
    alpha: float
    d: float
    D: float
    mu: float
    mu_scaling: str
    analytic_power: float
    mc_power: float
    mc_ci: tuple
    replicates: int
    failures: int
    d_se: float

    @property
    def ci_halfwidth(self):
        return 0.5 * (self.mc_ci[1] - self.mc_ci[0])


def simulate_statistics(spec, n, replicates, seed=0, tested=None, max_failure_rate=0.05):
    """Signed single-covariate statistics over simulated replicates.

    Parameters
    ----------
    spec : AltModelSpec
    n : int
        Sample size per replicate.
    replicates : int
    seed : int
        Replicate ``r`` uses the stream ``(seed, r)``.
    tested : sequence of int, optional
        Covariates to test one at a time; all covariates by default.

    Returns
    -------
    stats : (R, k) ndarray
        NaN rows mark failed replicates.
    failures : int

    Raises
    ------
    PowerStudyError
        More than ``max_failure_rate`` of the replicates failed.
    """
    tested = list(range(spec.m)) if tested is None else [int(j) for j in tested]
    stats = np.full((replicates, len(tested)), np.nan)
    failures = 0
    for r in range(replicates):
        try:
            sample = simulate(n, spec, seed=(seed, r))
            fit = fit_cox(sample)
            if tested == list(range(spec.m)):
                reports, _ = per_covariate_report(sample, fit=fit)
                if any(rep.error for rep in reports):
                    raise NumericalError(reports[0].error)
            else:
                reports = [ph_test(sample, j, fit=fit) for j in tested]
            stats[r] = [rep.statistic for rep in reports]
        except (NumericalError, SurvivalDataError, ValueError):
            failures += 1
    if failures > max_failure_rate * replicates:
        raise PowerStudyError(f"{failures} of {replicates} replicates failed")
    return stats, failures


def mc_power(spec, c, n, replicates=500, alpha=0.05, seed=0, scaling="printed",
             n_plugin=100_000, limits=None):
    """Monte Carlo power at ``gamma = c / sqrt(n)`` next to its analytic value.

    Parameters
    ----------
    spec : AltModelSpec
        Model with one tested covariate; its ``gamma`` is replaced.
    c : float
    n : int
    replicates : int
        At least 100.
    alpha : float
    seed : int
    scaling : {'printed', 'sqrt'}
        How the noncentrality is turned into the mean shift.
    n_plugin : int
        Size of the plug-in sample for the limit quantities.
    limits : PluginLimits, optional
        Reuse a previous plug-in estimate.

    Returns
    -------
    PowerResult
    """
    if replicates < 100:
        raise ValueError("at least 100 replicates are required")
    if len(spec.tested) != 1:
        raise ValueError("power calculations cover a single tested covariate")
    limits = plugin_limits(spec, n_plugin, seed) if limits is None else limits
    d = noncentrality(spec, c, limits=limits)
    mu = shift(d, limits.D, scaling)
    power = analytic_power(mu, alpha)
    stats, failures = simulate_statistics(
        spec.local(c, n), n, replicates, seed=seed, tested=spec.tested
    )
    good = stats[~np.isnan(stats[:, 0]), 0]
    z = std_normal_quantile(1 - alpha / 2)
    p = float(np.mean(np.abs(good) > z))
    half = 1.96 * math.sqrt(p * (1 - p) / good.size)
    return PowerResult(
        c=float(c), n=n, alpha=alpha, d=d, D=limits.D, mu=mu, mu_scaling=scaling,
        analytic_power=power, mc_power=p, mc_ci=(p - half, p + half),
        replicates=replicates, failures=failures, d_se=abs(float(c)) * limits.d_per_c_se,
    )
