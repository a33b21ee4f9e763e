"""Right-censored regression samples and risk-set aggregates.

A subject is at risk at time ``t`` when its observed time is ``>= t``, so a
subject failing at ``t`` still belongs to the risk set at ``t``. Tied event
times share one risk set (Breslow convention).
"""

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .exceptions import SurvivalDataError

__all__ = [
    "SurvivalSample",
    "RiskAggregates",
    "EventTable",
    "EventAggregates",
    "build_sample",
    "risk_aggregates",
    "event_table",
    "event_aggregates",
]

MISSING_POLICIES = ("drop", "fail")


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SurvivalSample:
    """Observed times, event indicators and covariates of ``n`` subjects.

    Parameters
    ----------
    times : (n,) array_like
        Observed times ``min(T_i, C_i)``; strictly positive.
    status : (n,) array_like
        1 if the failure was observed, 0 if the record is censored.
    covariates : (n, m) array_like
        Covariate matrix, one row per subject.
    covariate_names : sequence of str, optional
        Column labels; defaults to ``z1 .. zm``.
    dropped_count : int
        Number of raw records discarded because of missing values.

    The arrays are copied and made read-only.
    """

    times: np.ndarray
    status: np.ndarray
    covariates: np.ndarray
    covariate_names: tuple = None
    dropped_count: int = 0

    def __post_init__(self):
        times = _readonly(self.times).ravel()
        status = np.asarray(self.status)
        covariates = _readonly(self.covariates)
        if covariates.ndim == 1:
            covariates = _readonly(covariates[:, None])
        n = times.size
        if covariates.ndim != 2 or covariates.shape[0] != n or status.size != n:
            raise SurvivalDataError(
                "times, status and covariates must describe the same records"
            )
        if n < 2:
            raise SurvivalDataError("at least two records are required")
        m = covariates.shape[1]
        if m < 1:
            raise SurvivalDataError("at least one covariate is required")
        if not np.all(np.isfinite(times)) or not np.all(np.isfinite(covariates)):
            raise SurvivalDataError("times and covariates must be finite")
        if np.any(times <= 0):
            raise SurvivalDataError("observed times must be positive")
        status_f = np.asarray(status, dtype=float).ravel()
        if not np.all((status_f == 0) | (status_f == 1)):
            raise SurvivalDataError("status values must be 0 or 1")
        if not status_f.any():
            raise SurvivalDataError("no events: the sample has no observed failures")
        names = self.covariate_names
        if names is None:
            names = tuple(f"z{j + 1}" for j in range(m))
        names = tuple(str(s) for s in names)
        if len(names) != m:
            raise SurvivalDataError(f"expected {m} covariate names, got {len(names)}")
        if len(set(names)) != m:
            raise SurvivalDataError("covariate names must be unique")
        status_i = status_f.astype(np.int8)
        status_i.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "status", status_i)
        object.__setattr__(self, "covariates", covariates)
        object.__setattr__(self, "covariate_names", names)
        object.__setattr__(self, "dropped_count", int(self.dropped_count))

    @property
    def n(self):
        return self.times.size

    @property
    def m(self):
        return self.covariates.shape[1]

    @property
    def tau(self):
        """Observation horizon: the largest observed time."""
        return float(self.times.max())

    @property
    def n_events(self):
        return int(self.status.sum())

    def column_index(self, key):
        """Translate a covariate name or 0-based position into a position."""
        if isinstance(key, (int, np.integer)):
            if not 0 <= key < self.m:
                raise SurvivalDataError(f"covariate index {key} out of range")
            return int(key)
        try:
            return self.covariate_names.index(str(key))
        except ValueError:
            raise SurvivalDataError(f"unknown covariate {key!r}") from None

    @cached_property
    def _layout(self):
        return _Layout.build(self)


@dataclass(frozen=True)
class _Layout:
    # Sorted view of a sample shared by every event-time computation.
    order: np.ndarray
    sorted_times: np.ndarray
    event_times: np.ndarray
    first_at_risk: np.ndarray
    counts: np.ndarray
    failing: tuple

    @classmethod
    def build(cls, sample):
        order = np.argsort(sample.times, kind="stable")
        sorted_times = sample.times[order]
        fail_idx = np.flatnonzero(sample.status)
        fail_times = sample.times[fail_idx]
        event_times, inverse, counts = np.unique(
            fail_times, return_inverse=True, return_counts=True
        )
        grouping = np.argsort(inverse, kind="stable")
        failing = tuple(np.split(fail_idx[grouping], np.cumsum(counts)[:-1]))
        first = np.searchsorted(sorted_times, event_times, side="left")
        return cls(order, sorted_times, event_times, first, counts, failing)


@dataclass(frozen=True)
class RiskAggregates:
    """Weighted risk-set sums at one time point and one coefficient vector.

    ``e`` and ``v`` are ``None`` when nobody is at risk (``empty``).
    """

    s0: float
    s1: np.ndarray
    s2: np.ndarray
    e: np.ndarray | None
    v: np.ndarray | None
    at_risk: int

    @property
    def empty(self):
        return self.at_risk == 0


@dataclass(frozen=True)
class EventTable:
    """Distinct observed failure times with their multiplicities."""

    times: np.ndarray
    counts: np.ndarray
    failing: tuple = field(repr=False)

    def __len__(self):
        return self.times.size


@dataclass(frozen=True)
class EventAggregates:
    """Risk-set quantities evaluated at every distinct event time.

    Attributes
    ----------
    times : (D,) ndarray
        Distinct event times.
    counts : (D,) ndarray
        Number of failures at each time.
    at_risk : (D,) ndarray
        Size of the risk set.
    log_s0 : (D,) ndarray
        ``log S0(t, beta)``.
    e : (D, m) ndarray
        ``E(t, beta)``.
    v : (D, m, m) ndarray
        ``V(t, beta)``.
    zfail : (D, m) ndarray
        Sum of the covariates of the subjects failing at each time.
    """

    times: np.ndarray
    counts: np.ndarray
    at_risk: np.ndarray
    log_s0: np.ndarray
    e: np.ndarray
    v: np.ndarray
    zfail: np.ndarray


def _parse_cell(value):
    if value is None:
        return math.nan
    if isinstance(value, str):
        text = value.strip()
        if text == "" or text.upper() in {"NA", "NAN", "."}:
            return math.nan
        return float(text)
    return float(value)


def build_sample(records, covariate_names=None, missing="drop"):
    """Validate raw rows and assemble a :class:`SurvivalSample`.

    Parameters
    ----------
    records : iterable of sequences
        Each row is ``(time, status, z_1, ..., z_m)``. ``None``, NaN, empty
        strings and ``"NA"`` mark missing values.
    covariate_names : sequence of str, optional
    missing : {'drop', 'fail'}
        ``'drop'`` removes incomplete rows (listwise deletion) and records how
        many were removed; ``'fail'`` raises on the first incomplete row.
    """
    if missing not in MISSING_POLICIES:
        raise ValueError(f"missing-data policy must be one of {MISSING_POLICIES}")
    rows = []
    width = None
    for r, raw in enumerate(records):
        raw = list(raw)
        if width is None:
            width = len(raw)
            if width < 3:
                raise SurvivalDataError("rows need a time, a status and a covariate")
        elif len(raw) != width:
            raise SurvivalDataError(f"row {r}: expected {width} fields, got {len(raw)}")
        try:
            rows.append([_parse_cell(x) for x in raw])
        except (TypeError, ValueError):
            raise SurvivalDataError(f"row {r}: non-numeric value") from None
    if not rows:
        raise SurvivalDataError("no records")
    data = np.array(rows, dtype=float)
    complete = np.all(np.isfinite(data), axis=1)
    if missing == "fail" and not complete.all():
        r = int(np.flatnonzero(~complete)[0])
        c = int(np.flatnonzero(~np.isfinite(data[r]))[0])
        label = ["time", "status"][c] if c < 2 else (
            covariate_names[c - 2] if covariate_names else f"z{c - 1}"
        )
        raise SurvivalDataError(f"row {r}: missing value in column {label!r}")
    dropped = int((~complete).sum())
    data = data[complete]
    if data.shape[0] == 0:
        raise SurvivalDataError("every record has missing values")
    return SurvivalSample(
        data[:, 0], data[:, 1], data[:, 2:], covariate_names, dropped_count=dropped
    )


def risk_aggregates(sample, beta, t):
    """Risk-set sums ``S0, S1, S2`` and the derived ``E, V`` at time ``t``.

    Computed directly from the records at risk; see :func:`event_aggregates`
    for the vectorized evaluation at all event times.
    """
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (sample.m,) or not np.all(np.isfinite(beta)):
        raise ValueError("beta must be a finite vector with one entry per covariate")
    if t < 0:
        raise ValueError("t must be nonnegative")
    at_risk = sample.times >= t
    z = sample.covariates[at_risk]
    w = np.exp(z @ beta)
    s0 = float(w.sum())
    s1 = w @ z
    s2 = (z * w[:, None]).T @ z
    if not at_risk.any():
        return RiskAggregates(0.0, s1, s2, None, None, 0)
    e = s1 / s0
    dz = z - e
    v = (dz * w[:, None]).T @ dz / s0
    return RiskAggregates(s0, s1, s2, e, v, int(at_risk.sum()))


def event_table(sample):
    """Jump points of the aggregated counting process with tie multiplicities."""
    lay = sample._layout
    return EventTable(lay.event_times, lay.counts, lay.failing)


def _tail_sums(a, first):
    # Sums over sorted rows first[k]: ... via reversed cumulative sums.
    rev = np.cumsum(a[::-1], axis=0)[::-1]
    return rev[first]


def event_aggregates(sample, beta):
    """Evaluate ``S0``, ``E`` and ``V`` at every distinct event time.

    Covariates are centred and the linear predictor shifted before
    exponentiation; ``S0`` is returned on the log scale of the raw covariates.
    """
    beta = np.asarray(beta, dtype=float)
    lay = sample._layout
    z = sample.covariates[lay.order]
    centre = sample.covariates.mean(axis=0)
    zc = z - centre
    lp = zc @ beta
    shift = lp.max()
    w = np.exp(lp - shift)
    s0 = _tail_sums(w, lay.first_at_risk)
    s1 = _tail_sums(w[:, None] * zc, lay.first_at_risk)
    s2 = _tail_sums(w[:, None, None] * zc[:, :, None] * zc[:, None, :], lay.first_at_risk)
    with np.errstate(divide="ignore", invalid="ignore"):
        ec = s1 / s0[:, None]
        v = s2 / s0[:, None, None] - ec[:, :, None] * ec[:, None, :]
        log_s0 = np.log(s0) + shift + centre @ beta
    v = 0.5 * (v + np.swapaxes(v, 1, 2))
    starts = np.concatenate([[0], np.cumsum(lay.counts)[:-1]])
    zfail = np.add.reduceat(sample.covariates[np.concatenate(lay.failing)], starts, axis=0)
    at_risk = sample.n - lay.first_at_risk
    return EventAggregates(
        lay.event_times, lay.counts, at_risk, log_s0, ec + centre, v, zfail
    )
