"""Black-box prediction evidence and per-sample membership metrics.

The classifier under audit is visible only through probability outputs.
Each audited sample therefore reduces to a probability vector plus its
true label, and three scalar readings of that pair:

- correctness:        1 if the top class matches the label, else 0
- confidence:         the probability assigned to the true label
- negative entropy:   sum_i p_i * ln(p_i), larger for peakier outputs

Larger values of every metric indicate a sample the model treats as
familiar, which is the raw evidence for membership decisions downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

PROB_SUM_TOL = 1e-6

# p*ln(p) is evaluated as p*ln(max(p, clamp)) so exact zeros contribute 0
# without a branch.
ENTROPY_CLAMP = 1e-12


class MetricKind(Enum):
    """The three membership metrics; the audit always uses all of them."""

    CORRECTNESS = "correctness"
    CONFIDENCE = "confidence"
    NEGATIVE_ENTROPY = "negative_entropy"


def validate_probability_vector(probs: np.ndarray, tol: float = PROB_SUM_TOL) -> np.ndarray:
    """Check a 1-D probability vector: entries in [0, 1], sum within tol of 1."""
    arr = np.asarray(probs, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("probability vector must be 1-D with at least 2 classes")
    if not np.all(np.isfinite(arr)):
        raise ValueError("probability vector contains non-finite entries")
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("probability entries must lie in [0, 1]")
    if abs(float(arr.sum()) - 1.0) > tol:
        raise ValueError(f"probabilities sum to {arr.sum():.8f}, expected 1 within {tol}")
    return arr


@dataclass(frozen=True)
class PredictionRecord:
    """One sample's probability vector and its true label."""

    probs: np.ndarray
    label: int

    def __post_init__(self):
        arr = validate_probability_vector(self.probs)
        object.__setattr__(self, "probs", arr)
        object.__setattr__(self, "label", int(self.label))
        if not 0 <= self.label < arr.size:
            raise ValueError(f"label {self.label} out of range for {arr.size} classes")

    @property
    def num_classes(self) -> int:
        return self.probs.size


@dataclass(frozen=True)
class PredictionSet:
    """An ordered batch of prediction records sharing one class count."""

    probs: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if probs.ndim != 2 or probs.shape[0] < 1:
            raise ValueError("prediction set must hold a non-empty (n, C) probability matrix")
        if probs.shape[1] != self.num_classes or self.num_classes < 2:
            raise ValueError(
                f"probability matrix has {probs.shape[1]} columns, expected num_classes={self.num_classes} >= 2"
            )
        if labels.shape != (probs.shape[0],):
            raise ValueError("labels must be a vector with one entry per record")
        if not np.all(np.isfinite(probs)):
            raise ValueError("probability matrix contains non-finite entries")
        if np.any(probs < 0.0) or np.any(probs > 1.0):
            raise ValueError("probability entries must lie in [0, 1]")
        sums = probs.sum(axis=1)
        bad = np.nonzero(np.abs(sums - 1.0) > PROB_SUM_TOL)[0]
        if bad.size:
            raise ValueError(f"record {bad[0]}: probabilities sum to {sums[bad[0]]:.8f}")
        if np.any(labels < 0) or np.any(labels >= self.num_classes):
            raise ValueError("labels must lie in [0, num_classes)")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_records(cls, records) -> "PredictionSet":
        records = list(records)
        if not records:
            raise ValueError("prediction set must be non-empty")
        widths = {r.num_classes for r in records}
        if len(widths) != 1:
            raise ValueError("all records must share the same number of classes")
        return cls(
            probs=np.stack([r.probs for r in records]),
            labels=np.array([r.label for r in records], dtype=np.int64),
            num_classes=widths.pop(),
        )

    def __len__(self) -> int:
        return self.probs.shape[0]

    def record(self, i: int) -> PredictionRecord:
        return PredictionRecord(probs=self.probs[i], label=int(self.labels[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self.record(i)


def metric_correctness(record: PredictionRecord) -> float:
    """1.0 if the argmax class equals the label, else 0.0 (ties go to the lowest index)."""
    return float(int(np.argmax(record.probs)) == record.label)


def metric_confidence(record: PredictionRecord) -> float:
    """Probability the model assigns to the true label."""
    return float(record.probs[record.label])


def metric_negative_entropy(record: PredictionRecord) -> float:
    """sum_i p_i * ln(p_i); 0 for one-hot outputs, -ln(C) for uniform ones."""
    p = record.probs
    return float(np.sum(p * np.log(np.maximum(p, ENTROPY_CLAMP))))


def compute_metric(kind: MetricKind, preds: PredictionSet) -> np.ndarray:
    """Per-record metric values, in record order."""
    p = preds.probs
    y = preds.labels
    if kind is MetricKind.CORRECTNESS:
        return (np.argmax(p, axis=1) == y).astype(np.float64)
    if kind is MetricKind.CONFIDENCE:
        return p[np.arange(p.shape[0]), y]
    if kind is MetricKind.NEGATIVE_ENTROPY:
        return np.sum(p * np.log(np.maximum(p, ENTROPY_CLAMP)), axis=1)
    raise ValueError(f"unknown metric kind: {kind!r}")
