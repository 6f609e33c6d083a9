import os

# keep BLAS single-threaded so the timed end-to-end budget is honest
for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import numpy as np
import pytest

from memaudit.core import PredictionSet
from memaudit.data import LabeledDataset


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


# acceptance-criterion results, echoed after the run so they survive capture
_acceptance_lines: list[str] = []


def record_acceptance(line: str) -> None:
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


def random_prediction_set(rng, n=50, classes=4) -> PredictionSet:
    raw = rng.random((n, classes))
    probs = raw / raw.sum(axis=1, keepdims=True)
    labels = rng.integers(0, classes, size=n)
    return PredictionSet(probs=probs, labels=labels, num_classes=classes)


def tiny_dataset(rng, n=40, dim=3, classes=2) -> LabeledDataset:
    labels = rng.integers(0, classes, size=n)
    features = rng.standard_normal((n, dim)) + 2.0 * labels[:, None]
    return LabeledDataset(features=features, labels=labels, num_classes=classes)
