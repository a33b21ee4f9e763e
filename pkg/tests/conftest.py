from pathlib import Path

import numpy as np
import pytest

from phscore.report import read_csv_sample
from phscore.survival import SurvivalSample

DATA = Path(__file__).parent / "data"

ROSSI_COVARIATES = ["fin", "age", "race", "wexp", "mar", "paro", "prio"]
UIS_COVARIATES = [
    "age", "beck", "ndr1", "ndr2", "ivhx_3", "race", "treat", "site", "agexs", "racexs",
]

_acceptance_lines = []


@pytest.fixture(scope="session")
def rossi():
    return read_csv_sample(DATA / "rossi.csv", "week", "arrest", ROSSI_COVARIATES)


@pytest.fixture(scope="session")
def uis():
    return read_csv_sample(DATA / "uis.csv", "time", "censor", UIS_COVARIATES)


def random_sample(rng, n=30, m=2, ties=False, censor=0.3):
    """Small synthetic sample; integer times when ``ties`` is set."""
    z = rng.normal(size=(n, m))
    z[:, 0] = rng.integers(0, 2, size=n)
    beta = rng.normal(scale=0.3, size=m)
    t = rng.exponential(size=n) / np.exp(z @ beta)
    if ties:
        t = np.ceil(t * 4) / 4
    status = (rng.random(n) > censor).astype(float)
    status[0] = 1.0
    return SurvivalSample(t, status, z)


@pytest.fixture
def acceptance_log():
    return _acceptance_lines.append


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
