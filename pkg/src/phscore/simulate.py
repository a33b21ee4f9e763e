"""Simulation from the non-proportional hazards alternative.

The hazard of a subject with covariates ``z`` is ``g(z, Lambda(t)) lambda(t)``
with

    g = exp(beta'z + Lambda a) / (1 + a (exp(Lambda a) - 1)),   a = exp(gamma'z_J),

which reduces to the Cox model when ``gamma = 0``. The hazard ratio between
two covariate values moves from ``exp(beta'dz)`` at ``t = 0`` to
``exp((beta - gamma)'dz)`` as ``Lambda(t)`` grows. Integrating over the
baseline gives the closed form

    H(t | z) = exp(beta'z) a^-2 log(1 + a (exp(a Lambda(t)) - 1)),

which is inverted exactly when drawing failure times.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import ndtri

from .survival import SurvivalSample

__all__ = [
    "Exponential",
    "Weibull",
    "Baseline",
    "NoCensoring",
    "UniformCensoring",
    "ExponentialCensoring",
    "Bernoulli",
    "Normal",
    "FixedDesign",
    "AltModelSpec",
    "g_factor",
    "log_g_factor",
    "cum_hazard_alt",
    "simulate",
    "hazard_ratio_curve",
    "spec_from_dict",
]

CHUNK = 4096


# -- baselines ---------------------------------------------------------------

class Baseline:
    """Baseline cumulative hazard given by a callable.

    ``inverse`` falls back to root bracketing; subclasses with a closed-form
    inverse override it.
    """

    def __init__(self, cumhaz, upper=1e12):
        self._cumhaz = cumhaz
        self.upper = upper

    def cumhaz(self, t):
        return self._cumhaz(t)

    def inverse(self, value):
        value = np.asarray(value, dtype=float)
        out = np.empty(value.shape)
        for i, v in np.ndenumerate(value):
            if v <= 0:
                out[i] = 0.0
            elif not np.isfinite(v) or self.cumhaz(self.upper) < v:
                out[i] = np.inf
            else:
                out[i] = optimize.brentq(
                    lambda t: self.cumhaz(t) - v, 0.0, self.upper, xtol=1e-14, rtol=1e-14
                )
        return out if out.ndim else float(out)

    def to_dict(self):
        raise TypeError("a callable baseline cannot be serialized")


@dataclass(frozen=True)
class Exponential(Baseline):
    """Constant baseline hazard ``rate``."""

    rate: float = 1.0

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("rate must be positive")

    def cumhaz(self, t):
        return self.rate * np.asarray(t, dtype=float)

    def inverse(self, value):
        return np.asarray(value, dtype=float) / self.rate

    def to_dict(self):
        return {"law": "exponential", "rate": self.rate}


@dataclass(frozen=True)
class Weibull(Baseline):
    """``Lambda(t) = (t / scale) ** shape``."""

    shape: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ValueError("shape and scale must be positive")

    def cumhaz(self, t):
        return (np.asarray(t, dtype=float) / self.scale) ** self.shape

    def inverse(self, value):
        return self.scale * np.asarray(value, dtype=float) ** (1.0 / self.shape)

    def to_dict(self):
        return {"law": "weibull", "shape": self.shape, "scale": self.scale}


# -- censoring ---------------------------------------------------------------

@dataclass(frozen=True)
class NoCensoring:
    def draw(self, u):
        return np.full(u.shape, np.inf)

    def to_dict(self):
        return {"law": "none"}


@dataclass(frozen=True)
class UniformCensoring:
    """Censoring times uniform on ``(0, upper)``."""

    upper: float

    def draw(self, u):
        return self.upper * u

    def to_dict(self):
        return {"law": "uniform", "upper": self.upper}


@dataclass(frozen=True)
class ExponentialCensoring:
    rate: float

    def draw(self, u):
        return -np.log1p(-u) / self.rate

    def to_dict(self):
        return {"law": "exponential", "rate": self.rate}


# -- covariate laws ------------------------------------------------------------

@dataclass(frozen=True)
class Bernoulli:
    p: float = 0.5

    def draw(self, u):
        return (u < self.p).astype(float)

    def to_dict(self):
        return {"law": "bernoulli", "p": self.p}


@dataclass(frozen=True)
class Normal:
    mean: float = 0.0
    sd: float = 1.0

    def draw(self, u):
        return self.mean + self.sd * ndtri(u)

    def to_dict(self):
        return {"law": "normal", "mean": self.mean, "sd": self.sd}


@dataclass(frozen=True, eq=False)
class FixedDesign:
    """Fixed covariate matrix, recycled row-wise when ``n`` exceeds its length."""

    matrix: np.ndarray

    def rows(self, start, stop):
        z = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        return z[np.arange(start, stop) % z.shape[0]]

    def to_dict(self):
        return {"law": "fixed", "matrix": np.asarray(self.matrix).tolist()}


# -- model -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AltModelSpec:
    """Data-generating model for simulation and power calculations.

    Parameters
    ----------
    beta : (m,) array_like
        Regression coefficients.
    gamma : (k,) array_like
        Drift of the hazard ratio for the covariates in ``tested``; zero gives
        proportional hazards.
    tested : sequence of int
        0-based positions of the covariates whose proportionality is violated.
    baseline : Baseline
        Baseline cumulative hazard, e.g. :class:`Exponential`.
    censoring : NoCensoring, UniformCensoring or ExponentialCensoring
    design : sequence of covariate laws or FixedDesign
        One law (:class:`Bernoulli`, :class:`Normal`) per covariate.
    horizon : float, optional
        Administrative end of follow-up; later times are censored there.
    """

    beta: np.ndarray
    gamma: np.ndarray
    tested: tuple
    baseline: Baseline = field(default_factory=Exponential)
    censoring: object = field(default_factory=NoCensoring)
    design: object = None
    horizon: float | None = None

    def __post_init__(self):
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        gamma = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        tested = tuple(int(j) for j in np.atleast_1d(self.tested))
        if gamma.shape != (len(tested),):
            raise ValueError("gamma needs one entry per tested covariate")
        if any(not 0 <= j < beta.size for j in tested) or len(set(tested)) != len(tested):
            raise ValueError("tested indices must be distinct covariate positions")
        design = self.design
        if design is None:
            design = tuple(Normal() for _ in range(beta.size))
        if not isinstance(design, FixedDesign):
            design = tuple(design)
            if len(design) != beta.size:
                raise ValueError("design needs one covariate law per coefficient")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "tested", tested)
        object.__setattr__(self, "design", design)

    @property
    def m(self):
        return self.beta.size

    def with_gamma(self, gamma):
        return AltModelSpec(
            self.beta, gamma, self.tested, self.baseline, self.censoring, self.design,
            self.horizon,
        )

    def local(self, c, n):
        """The approaching alternative ``gamma = c / sqrt(n)``."""
        c = np.broadcast_to(np.asarray(c, dtype=float), self.gamma.shape)
        return self.with_gamma(c / math.sqrt(n))

    def null(self):
        return self.with_gamma(np.zeros_like(self.gamma))

    def to_dict(self):
        if isinstance(self.design, FixedDesign):
            design = self.design.to_dict()
        else:
            design = [law.to_dict() for law in self.design]
        return {
            "beta": self.beta.tolist(),
            "gamma": self.gamma.tolist(),
            "tested": list(self.tested),
            "baseline": self.baseline.to_dict(),
            "censoring": self.censoring.to_dict(),
            "design": design,
            "horizon": self.horizon,
        }


def _law(d, table, what):
    d = dict(d)
    name = d.pop("law", None)
    if name not in table:
        raise ValueError(f"unknown {what} law {name!r}; expected one of {sorted(table)}")
    return table[name](**d)


def spec_from_dict(config, names=None):
    """Build an :class:`AltModelSpec` from a plain mapping (e.g. parsed JSON).

    ``tested`` entries may be covariate names when ``names`` is given.
    """
    config = dict(config)
    tested = config.get("tested", [])
    if names is not None:
        tested = [names.index(j) if isinstance(j, str) else j for j in tested]
    design = config.get("design")
    if isinstance(design, dict):
        design = FixedDesign(np.asarray(design["matrix"], dtype=float))
    elif design is not None:
        table = {"bernoulli": Bernoulli, "normal": Normal}
        design = [_law(d, table, "covariate") for d in design]
    baseline = _law(
        config.get("baseline", {"law": "exponential"}),
        {"exponential": Exponential, "weibull": Weibull},
        "baseline",
    )
    censoring = _law(
        config.get("censoring", {"law": "none"}),
        {"none": NoCensoring, "uniform": UniformCensoring,
         "exponential": ExponentialCensoring},
        "censoring",
    )
    return AltModelSpec(
        beta=config["beta"],
        gamma=config.get("gamma", [0.0] * len(tested)),
        tested=tested,
        baseline=baseline,
        censoring=censoring,
        design=design,
        horizon=config.get("horizon"),
    )


# -- hazard functions -----------------------------------------------------------

def _log1p_a_expm1(x, a):
    # log(1 + a (e^x - 1)) for x >= 0, a > 0, without overflow.
    x, a = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(a, dtype=float))
    out = np.empty(x.shape)
    small = x <= 1.0
    out[small] = np.log1p(a[small] * np.expm1(x[small]))
    big = ~small
    xb, ab = x[big], a[big]
    out[big] = xb + np.log(ab) + np.log1p((1.0 - ab) / ab * np.exp(-xb))
    return out


def _drift(z, spec_or_gamma, tested=None):
    z = np.asarray(z, dtype=float)
    if tested is None:
        spec = spec_or_gamma
        gamma, tested = spec.gamma, spec.tested
    else:
        gamma = np.atleast_1d(np.asarray(spec_or_gamma, dtype=float))
    return z[..., list(tested)] @ gamma


def log_g_factor(z, cumhaz, beta, gamma, tested):
    """Logarithm of :func:`g_factor`, finite for any ``cumhaz >= 0``."""
    z = np.asarray(z, dtype=float)
    lam = np.asarray(cumhaz, dtype=float)
    if np.any(lam < 0):
        raise ValueError("cumulative hazard must be nonnegative")
    lin = z @ np.asarray(beta, dtype=float)
    log_a = _drift(z, gamma, tested)
    a = np.exp(log_a)
    x = lam * a
    return lin + x - _log1p_a_expm1(x, a)


def g_factor(z, cumhaz, beta, gamma, tested):
    """Hazard multiplier ``g(z, Lambda, beta, gamma)`` of the alternative model.

    Parameters
    ----------
    z : (m,) or (n, m) array_like
    cumhaz : float or array_like
        Baseline cumulative hazard ``Lambda(t)`` at the time of interest.
    beta : (m,) array_like
    gamma : (k,) array_like
    tested : sequence of int
        Positions of the covariates multiplied by ``gamma``.
    """
    out = np.exp(log_g_factor(z, cumhaz, beta, gamma, tested))
    return out if out.ndim else float(out)


def _cum_from_lambda(z, lam, spec):
    z = np.asarray(z, dtype=float)
    lin = z @ spec.beta
    log_a = _drift(z, spec)
    a = np.exp(log_a)
    return np.exp(lin - 2 * log_a) * _log1p_a_expm1(a * lam, a)


def cum_hazard_alt(t, z, spec):
    """Cumulative hazard ``H(t | z)`` of the alternative model.

    ``H`` is nondecreasing in ``t`` with ``H(0 | z) = 0`` and equals
    ``exp(beta'z) Lambda(t)`` when ``gamma = 0``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    out = _cum_from_lambda(z, spec.baseline.cumhaz(t), spec)
    return out if out.ndim else float(out)


def _invert(target, z, spec):
    # Baseline cumulative hazard at which H(. | z) reaches ``target``.
    lin = z @ spec.beta
    log_a = _drift(z, spec)
    a = np.exp(log_a)
    y = target * np.exp(2 * log_a - lin)
    lam = np.empty(y.shape)
    small = y <= 1.0
    lam[small] = np.log1p(np.expm1(y[small]) / a[small])
    big = ~small
    lam[big] = y[big] - log_a[big] + np.log1p((a[big] - 1.0) * np.exp(-y[big]))
    return lam / a


def _generator(seed, chunk):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([*seed, chunk])))


def _seed_key(seed):
    # Integers or tuples of integers, e.g. (study_seed, replicate).
    key = (seed,) if isinstance(seed, (int, np.integer)) else tuple(seed)
    if not key or any(not isinstance(s, (int, np.integer)) or s < 0 for s in key):
        raise ValueError("seed must be a nonnegative integer or a tuple of them")
    return tuple(int(s) for s in key)


def _draw_chunk(spec, seed, chunk, start, stop):
    # Full blocks are always drawn so a sample is a prefix of any larger one.
    rng = _generator(seed, chunk)
    size = stop - start
    u = rng.random((CHUNK, spec.m))[:size]
    u_fail = rng.random(CHUNK)[:size]
    u_cens = rng.random(CHUNK)[:size]
    if isinstance(spec.design, FixedDesign):
        z = spec.design.rows(start, stop)
    else:
        z = np.column_stack([law.draw(u[:, j]) for j, law in enumerate(spec.design)])
    target = -np.log1p(-u_fail)
    times = spec.baseline.inverse(_invert(target, z, spec))
    cens = spec.censoring.draw(u_cens)
    if spec.horizon is not None:
        cens = np.minimum(cens, spec.horizon)
    return z, times, cens


def simulate(n, spec, seed=0, names=None):
    """Draw a right-censored sample of size ``n`` from ``spec``.

    Failure times are obtained by exact inversion of the cumulative hazard.
    Records are generated in fixed blocks of 4096, each with its own random
    stream derived from ``(seed, block)``; ``seed`` may be an integer or a
    tuple of integers. A sample of size ``n`` is the prefix of any larger
    sample drawn with the same seed.

    Raises
    ------
    SurvivalDataError
        The draw contains no observed failure.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    seed = _seed_key(seed)
    zs, ts, cs = [], [], []
    for chunk, start in enumerate(range(0, n, CHUNK)):
        z, t, c = _draw_chunk(spec, seed, chunk, start, min(start + CHUNK, n))
        zs.append(z)
        ts.append(t)
        cs.append(c)
    z, t, c = np.vstack(zs), np.concatenate(ts), np.concatenate(cs)
    status = t <= c
    times = np.where(status, t, c)
    if not np.all(np.isfinite(times)):
        raise ValueError("unbounded follow-up: set a censoring law or a horizon")
    return SurvivalSample(times, status.astype(float), z, names)


def hazard_ratio_curve(z1, z2, spec, grid):
    """Hazard ratio ``lambda(t | z2) / lambda(t | z1)`` on a time grid.

    Returns
    -------
    (len(grid), 2) ndarray
        Columns ``t`` and ``c(t)``.
    """
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    others = [j for j in range(spec.m) if j not in spec.tested]
    if np.any(z1[others] != z2[others]):
        raise ValueError("z1 and z2 may differ only in the tested covariates")
    grid = np.asarray(grid, dtype=float)
    lam = spec.baseline.cumhaz(grid)
    ratio = np.exp(
        log_g_factor(z2, lam, spec.beta, spec.gamma, spec.tested)
        - log_g_factor(z1, lam, spec.beta, spec.gamma, spec.tested)
    )
    return np.column_stack([grid, ratio])
