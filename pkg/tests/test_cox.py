import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize

from phscore.cox import (
    StepFunction,
    baseline_cdf,
    breslow_cumhaz,
    fit,
    information,
    log_partial_likelihood,
    score,
)
from phscore.exceptions import SeparationError, SingularMatrixError
from phscore.numeric import finite_diff_gradient, finite_diff_hessian
from phscore.survival import SurvivalSample

import oracles
from conftest import random_sample


def two_records():
    # z = 1 fails at t = 1, z = 0 fails at t = 2.
    return SurvivalSample([1.0, 2.0], [1, 1], [[1.0], [0.0]])


def test_loglik_null_collapses_to_counts():
    assert log_partial_likelihood(two_records(), [0.0]) == pytest.approx(-math.log(2))


def test_loglik_two_term_hand_value():
    value = log_partial_likelihood(two_records(), [1.0])
    assert value == pytest.approx(1 - math.log(1 + math.e), rel=1e-15)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), ties=st.booleans())
def test_loglik_matches_enumeration(seed, ties):
    rng = np.random.default_rng(seed)
    s = random_sample(rng, n=15, m=2, ties=ties)
    beta = rng.normal(size=2)
    assert log_partial_likelihood(s, beta) == pytest.approx(oracles.loglik(s, beta),
                                                            rel=1e-12, abs=1e-12)


def test_constant_covariate_score_and_information_vanish():
    rng = np.random.default_rng(1)
    s = random_sample(rng, n=20, m=2)
    z = s.covariates.copy()
    z[:, 1] = 3.0
    s = SurvivalSample(s.times, s.status, z)
    for beta in ([0.0, 0.0], [0.7, -2.0]):
        assert score(s, beta)[1] == pytest.approx(0.0, abs=1e-12)
        info = information(s, beta)
        np.testing.assert_allclose(info[1], 0.0, atol=1e-12)
        np.testing.assert_allclose(info[:, 1], 0.0, atol=1e-12)


def test_score_four_record_enumeration():
    # Failures in time order carry z = 0, 1, 0, 1.
    s = SurvivalSample([1.0, 2.0, 3.0, 4.0], [1, 1, 1, 1], [[0.0], [1.0], [0.0], [1.0]])
    hand = 0.0
    z = [0.0, 1.0, 0.0, 1.0]
    for k in range(4):
        risk = z[k:]
        hand += z[k] - sum(risk) / len(risk)
    assert hand == pytest.approx(-2 / 3)
    assert score(s, [0.0])[0] == pytest.approx(hand, abs=1e-15)


def test_single_event_information_is_bernoulli_variance():
    s = SurvivalSample([1.0, 2.0], [1, 0], [[0.0], [1.0]])
    assert information(s, [0.0])[0, 0] == pytest.approx(0.25, abs=1e-15)


def _rel(a, b):
    return np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b)))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 100_000), n=st.integers(5, 50), m=st.integers(1, 5),
       ties=st.booleans())
def test_score_and_information_match_finite_differences(seed, n, m, ties):
    rng = np.random.default_rng(seed)
    s = random_sample(rng, n=n, m=m, ties=ties)
    beta = rng.normal(scale=0.5, size=m)
    f = lambda b: log_partial_likelihood(s, b)  # noqa: E731
    assert _rel(score(s, beta), finite_diff_gradient(f, beta)) <= 1e-6
    assert _rel(-information(s, beta), finite_diff_hessian(f, beta)) <= 1e-5


def test_information_symmetric_psd():
    rng = np.random.default_rng(5)
    s = random_sample(rng, n=40, m=4, ties=True)
    info = information(s, rng.normal(size=4))
    np.testing.assert_array_equal(info, info.T)
    assert np.linalg.eigvalsh(info)[0] > -1e-12


def test_separation_detected():
    s = SurvivalSample([1.0, 2.0], [1, 1], [[1.0], [0.0]])
    with pytest.raises(SeparationError):
        fit(s)


def test_collinear_covariates_are_singular():
    rng = np.random.default_rng(2)
    s = random_sample(rng, n=30, m=2)
    z = s.covariates.copy()
    z[:, 1] = 2 * z[:, 0]
    with pytest.raises(SingularMatrixError):
        fit(SurvivalSample(s.times, s.status, z))


def test_recidivism_fit_matches_independent_maximizer(rossi):
    res = fit(rossi)
    assert res.converged
    assert np.max(np.abs(res.score_at_hat)) <= 1e-9
    # Quasi-Newton with numerical gradients on an independently coded likelihood.
    obj = lambda b: -oracles.loglik_masked(rossi, b)  # noqa: E731
    ref = optimize.minimize(obj, np.zeros(rossi.m), method="BFGS", options={"gtol": 1e-8})
    np.testing.assert_allclose(res.beta_hat, ref.x, atol=2e-4)
    assert res.loglik >= -ref.fun - 1e-9
    assert res.loglik >= res.loglik_null


def test_recidivism_breslow_matches_loop(rossi):
    res = fit(rossi)
    times, values = oracles.breslow(rossi, res.beta_hat)
    np.testing.assert_allclose(res.breslow(times), values, rtol=1e-12)
    assert res.breslow(52.0) == pytest.approx(values[-1], rel=1e-12)
    assert res.breslow(0.0) == 0.0


def test_breslow_nelson_aalen_reduction():
    s = SurvivalSample([1.0, 2.0, 3.0], [1, 1, 1], [[0.0], [1.0], [2.0]])
    cum = breslow_cumhaz(s, [0.0])
    assert cum(3.0) == pytest.approx(11 / 6, rel=1e-15)
    assert cum(2.5) == pytest.approx(1 / 3 + 1 / 2)
    assert cum(0.5) == 0.0
    assert baseline_cdf(cum)(3.0) == pytest.approx(1 - math.exp(-11 / 6), rel=1e-15)


def test_breslow_left_limit_excludes_jump():
    cum = breslow_cumhaz(SurvivalSample([1.0, 2.0], [1, 1], [[0.0], [1.0]]), [0.0])
    assert cum(1.0, side="left") == 0.0
    assert cum(1.0) == 0.5


def test_baseline_cdf_values():
    step = StepFunction(np.array([1.0, 2.0]), np.array([0.0, math.log(2)]))
    cdf = baseline_cdf(step)
    assert cdf(1.5) == 0.0
    assert cdf(2.0) == pytest.approx(0.5, rel=1e-15)
    with pytest.raises(ValueError):
        baseline_cdf(StepFunction(np.array([1.0, 2.0]), np.array([1.0, 0.5])))


def test_fit_outputs_are_well_formed(rossi):
    res = fit(rossi)
    assert np.all(np.diff(res.breslow.values) >= 0)
    f = res.baseline_cdf.values
    assert np.all((f >= 0) & (f < 1)) and np.all(np.diff(f) >= 0)
    np.testing.assert_allclose(res.information, res.information.T)
    assert np.linalg.eigvalsh(res.information)[0] > 0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), lam=st.floats(0.0, 1.0))
def test_loglik_concave_on_segments(seed, lam):
    rng = np.random.default_rng(seed)
    s = random_sample(rng, n=25, m=3, ties=True)
    b1, b2 = rng.normal(size=3), rng.normal(size=3)
    mid = lam * b1 + (1 - lam) * b2
    lhs = log_partial_likelihood(s, mid)
    rhs = lam * log_partial_likelihood(s, b1) + (1 - lam) * log_partial_likelihood(s, b2)
    assert lhs >= rhs - 1e-10


@pytest.mark.parametrize("transform", [np.log1p, np.sqrt, lambda t: t**3 + 5 * t])
def test_rank_invariance_of_fit(rossi, transform):
    base = fit(rossi)
    moved = SurvivalSample(transform(rossi.times), rossi.status, rossi.covariates,
                           rossi.covariate_names)
    if np.any(moved.times <= 0):
        moved = SurvivalSample(moved.times - moved.times.min() + 1, rossi.status,
                               rossi.covariates, rossi.covariate_names)
    other = fit(moved)
    np.testing.assert_allclose(other.beta_hat, base.beta_hat, rtol=1e-10)
    np.testing.assert_allclose(other.breslow.values, base.breslow.values, rtol=1e-10)
