import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from galileo.model import Dataset, Schema

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def make_schema(cards):
    return Schema.from_values([(f"a{m}", [f"v{j}" for j in range(c)]) for m, c in enumerate(cards)])


def make_dataset(codes, cards=None, weights=None):
    codes = np.asarray(codes, dtype=np.int32)
    if codes.ndim == 1:
        codes = codes[:, None]
    if cards is None:
        cards = codes.max(axis=0) + 1
    return Dataset(make_schema(cards), codes, weights)


def two_blocks(n_per=20):
    """Two disjoint pure blocks over three binary attributes."""
    codes = np.vstack([np.zeros((n_per, 3), int), np.ones((n_per, 3), int)])
    return make_dataset(codes, [2, 2, 2])


@pytest.fixture
def data_dir():
    return DATA_DIR


#: one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
