"""Per-metric decision thresholds learned from a calibration set.

The calibration set is split in two; a fresh model is trained on the
first half. Samples the calibration model was trained on play the role
of members, the held-out half the role of non-members, and for each
metric the threshold maximising balanced accuracy

    BA(tau) = (TPR(tau) + TNR(tau)) / 2

is selected, where TPR is the fraction of calibration-train scores >= tau
and TNR the fraction of calibration-test scores strictly below tau.
Candidates range over every observed score; BA is piecewise constant in
between, so nothing finer is needed. Ties go to the smallest candidate,
which biases toward calling query points members and is the conservative
choice when certifying removal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .core import MetricKind, PredictionSet, compute_metric
from .data import LabeledDataset


@dataclass(frozen=True)
class ThresholdSet:
    """One threshold per metric plus the balanced accuracy achieved there."""

    thresholds: Mapping[MetricKind, float]
    balanced_accuracies: Mapping[MetricKind, float]

    def __post_init__(self):
        for mapping, name in ((self.thresholds, "thresholds"), (self.balanced_accuracies, "balanced_accuracies")):
            if set(mapping) != set(MetricKind):
                raise ValueError(f"{name} must contain exactly one entry per metric kind")
        for kind, ba in self.balanced_accuracies.items():
            if not 0.5 <= ba <= 1.0:
                raise ValueError(f"balanced accuracy for {kind.value} is {ba}, outside [0.5, 1]")


@dataclass(frozen=True)
class CalibrationSplit:
    train: LabeledDataset
    test: LabeledDataset
    split_fraction: float
    seed: int


def split_calibration(cal: LabeledDataset, fraction: float, seed: int) -> CalibrationSplit:
    """Deterministic shuffle, then floor(fraction * n) samples to the train side."""
    n = len(cal)
    if n < 2:
        raise ValueError("calibration set must contain at least 2 samples")
    if not 0.0 < fraction < 1.0:
        raise ValueError("split fraction must lie strictly between 0 and 1")
    n_train = math.floor(fraction * n)
    if n_train == 0 or n_train == n:
        raise ValueError(f"fraction {fraction} leaves one side of the {n}-sample split empty")
    perm = np.random.default_rng(seed).permutation(n)
    return CalibrationSplit(
        train=cal.take(perm[:n_train]),
        test=cal.take(perm[n_train:]),
        split_fraction=fraction,
        seed=seed,
    )


def balanced_accuracy(tau: float, train_scores, test_scores) -> float:
    """(TPR + TNR) / 2 of the rule 'score >= tau means member'."""
    train = np.asarray(train_scores, dtype=np.float64)
    test = np.asarray(test_scores, dtype=np.float64)
    if train.size == 0 or test.size == 0:
        raise ValueError("score lists must be non-empty")
    tpr = float(np.mean(train >= tau))
    tnr = float(np.mean(test < tau))
    return 0.5 * (tpr + tnr)


def best_threshold(train_scores, test_scores) -> tuple[float, float]:
    """Scan every observed score and return (tau, BA) maximising balanced accuracy.

    The maximiser is always a member of the observed-score union; among
    ties the smallest candidate wins.
    """
    train = np.sort(np.asarray(train_scores, dtype=np.float64))
    test = np.sort(np.asarray(test_scores, dtype=np.float64))
    if train.size == 0 or test.size == 0:
        raise ValueError("score lists must be non-empty")
    candidates = np.unique(np.concatenate([train, test]))
    # (size - below) / size, not 1 - below/size: keeps the arithmetic, and
    # therefore tie-breaking, bit-identical to a direct count-based sweep.
    tpr = (train.size - np.searchsorted(train, candidates, side="left")) / train.size
    tnr = np.searchsorted(test, candidates, side="left") / test.size
    ba = 0.5 * (tpr + tnr)
    best = int(np.argmax(ba))  # first maximum = smallest candidate
    return float(candidates[best]), float(ba[best])


def infer_thresholds(
    trainer: Callable[[LabeledDataset], object],
    cal: LabeledDataset,
    fraction: float = 0.5,
    seed: int = 0,
) -> ThresholdSet:
    """Train a calibration model and pick one threshold per metric.

    ``trainer`` maps a labeled dataset to any object with a
    ``predict_proba(features) -> (n, C) probabilities`` method.
    """
    split = split_calibration(cal, fraction, seed)
    model = trainer(split.train)
    preds_train = PredictionSet(model.predict_proba(split.train.features), split.train.labels, cal.num_classes)
    preds_test = PredictionSet(model.predict_proba(split.test.features), split.test.labels, cal.num_classes)

    taus: dict[MetricKind, float] = {}
    bas: dict[MetricKind, float] = {}
    for kind in MetricKind:
        tau, ba = best_threshold(compute_metric(kind, preds_train), compute_metric(kind, preds_test))
        taus[kind] = tau
        bas[kind] = ba
    return ThresholdSet(thresholds=taus, balanced_accuracies=bas)
