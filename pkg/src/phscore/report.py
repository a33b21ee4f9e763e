"""CSV ingestion and rendering of test and power reports."""

import csv
import io
import json
import math

import numpy as np

from .exceptions import SurvivalDataError
from .survival import MISSING_POLICIES, SurvivalSample, _parse_cell

__all__ = [
    "read_csv_sample",
    "write_csv_sample",
    "render_tests",
    "render_power",
    "FORMATS",
]

FORMATS = ("text", "csv", "jsonl")


def read_csv_sample(source, time_col, status_col, covariates=None, missing="drop"):
    """Read a comma-separated file with a header row into a sample.

    Parameters
    ----------
    source : path or file object
    time_col, status_col : str
        Header names of the observed time and the event indicator.
    covariates : sequence of str, optional
        Covariate columns; every other column by default.
    missing : {'drop', 'fail'}
        Empty cells and ``NA`` are missing values. Rows with a missing value
        are dropped (and counted) or rejected.

    Raises
    ------
    SurvivalDataError
        Unknown columns, non-numeric cells or invalid records. Messages
        give the 1-based line number of the file and the column name.
    """
    if missing not in MISSING_POLICIES:
        raise ValueError(f"missing-data policy must be one of {MISSING_POLICIES}")
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, newline="", encoding="utf-8") as fh:
            return _read(fh, time_col, status_col, covariates, missing)
    return _read(source, time_col, status_col, covariates, missing)


def _read(fh, time_col, status_col, covariates, missing):
    reader = csv.reader(fh)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise SurvivalDataError("empty file: a header row is required") from None
    if covariates is None:
        covariates = [h for h in header if h not in (time_col, status_col)]
    columns = [time_col, status_col, *covariates]
    absent = [c for c in columns if c not in header]
    if absent:
        raise SurvivalDataError(f"columns not found in header: {', '.join(absent)}")
    pos = [header.index(c) for c in columns]
    rows = []
    dropped = 0
    for line, raw in enumerate(reader, start=2):
        if not raw or all(not x.strip() for x in raw):
            continue
        if len(raw) != len(header):
            raise SurvivalDataError(
                f"line {line}: expected {len(header)} fields, got {len(raw)}"
            )
        values = []
        for name, p in zip(columns, pos):
            try:
                values.append(_parse_cell(raw[p]))
            except ValueError:
                raise SurvivalDataError(
                    f"line {line}, column {name!r}: non-numeric value {raw[p]!r}"
                ) from None
        if not all(math.isfinite(v) for v in values):
            if missing == "fail":
                bad = next(c for c, v in zip(columns, values) if not math.isfinite(v))
                raise SurvivalDataError(f"line {line}, column {bad!r}: missing value")
            dropped += 1
            continue
        rows.append(values)
    if not rows:
        raise SurvivalDataError("no complete records")
    data = np.array(rows, dtype=float)
    return SurvivalSample(
        data[:, 0], data[:, 1], data[:, 2:], tuple(covariates), dropped_count=dropped
    )


def write_csv_sample(sample, fh):
    """Write ``time,status,<covariates>`` with full precision."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["time", "status", *sample.covariate_names])
    for t, s, z in zip(sample.times, sample.status, sample.covariates):
        writer.writerow([repr(float(t)), int(s), *(repr(float(v)) for v in z)])


def _num(x):
    x = float(x)
    return None if math.isnan(x) else x


def _test_rows(reports, overall):
    rows = []
    for rep in list(reports) + ([overall] if overall is not None else []):
        label = "global" if rep is overall else rep.label
        rows.append({
            "covariate": label,
            "statistic": _num(rep.statistic),
            "df": rep.df,
            "p_value": _num(rep.p_value),
            "reject": bool(rep.reject),
            "alpha": rep.alpha,
            "n": rep.n,
            "error": rep.error,
        })
    return rows


def _fmt(x, digits=3):
    return "NA" if x is None else f"{x:.{digits}f}"


def render_tests(reports, overall=None, fmt="text", sample=None):
    """Render test reports as an aligned table, CSV or JSON lines.

    Text output rounds to three decimals; CSV and JSON carry full precision.
    """
    rows = _test_rows(reports, overall)
    if fmt == "jsonl":
        return "".join(json.dumps(r) + "\n" for r in rows)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        keys = list(rows[0])
        writer.writerow(keys)
        for r in rows:
            writer.writerow(
                ["" if r[k] is None else repr(r[k]) if isinstance(r[k], float) else r[k]
                 for k in keys]
            )
        return buf.getvalue()
    if fmt != "text":
        raise ValueError(f"format must be one of {FORMATS}")
    lines = []
    if sample is not None:
        lines.append(
            f"n = {sample.n} ({sample.dropped_count} dropped), events = {sample.n_events}"
        )
    width = max(10, *(len(r["covariate"]) for r in rows))
    lines.append(f"{'covariate':<{width}} {'statistic':>10} {'df':>3} {'p-value':>8}  reject")
    for r in rows:
        line = (
            f"{r['covariate']:<{width}} {_fmt(r['statistic']):>10} {r['df']:>3} "
            f"{_fmt(r['p_value']):>8}  {'yes' if r['reject'] else 'no'}"
        )
        if r["error"]:
            line += f"  ({r['error']})"
        lines.append(line)
    return "\n".join(lines) + "\n"


def render_power(results, fmt="text"):
    """Render :class:`~phscore.power.PowerResult` objects."""
    rows = []
    for res in results:
        rows.append({
            "c": res.c, "n": res.n, "alpha": res.alpha, "d": res.d, "d_se": res.d_se,
            "D": res.D, "mu_scaling": res.mu_scaling, "mu": res.mu,
            "analytic_power": res.analytic_power, "mc_power": res.mc_power,
            "mc_ci_low": res.mc_ci[0], "mc_ci_high": res.mc_ci[1],
            "replicates": res.replicates, "failures": res.failures,
        })
    if fmt == "jsonl":
        return "".join(json.dumps(r) + "\n" for r in rows)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
        return buf.getvalue()
    if fmt != "text":
        raise ValueError(f"format must be one of {FORMATS}")
    lines = []
    for r in rows:
        lines += [
            f"c = {r['c']:g}, n = {r['n']}, alpha = {r['alpha']:g}",
            f"  d              {r['d']:.6f} (se {r['d_se']:.2g})",
            f"  D              {r['D']:.6f}",
            f"  mu ({r['mu_scaling']:<7})   {r['mu']:.6f}",
            f"  analytic power {r['analytic_power']:.3f}",
            f"  MC power       {r['mc_power']:.3f} "
            f"[{r['mc_ci_low']:.3f}, {r['mc_ci_high']:.3f}]",
            f"  replicates     {r['replicates']} ({r['failures']} failed)",
        ]
    return "\n".join(lines) + "\n"
