"""Kolmogorov-Smirnov ratio baseline for removal auditing.

The prior approach compares prediction-output distributions through the
two-sample KS distance and forms the ratio

    ratio = KS(target_on_query, querymodel_on_query)
          / KS(calibration_on_query, querymodel_on_query)

reading ratio >= 1 as "the query set has been forgotten". The scalar
distribution behind each term is a projection of the probability
outputs; since several projections are defensible, all three are
provided and the choice is recorded alongside any result.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import MetricKind, PredictionSet, compute_metric


class ProjectionMode(Enum):
    """How a prediction set becomes the 1-D sample behind an empirical CDF."""

    ALL_PROBS = "all_probs"      # every class probability of every record
    MAX_PROB = "max_prob"        # per-record top-class probability
    TRUE_CLASS = "true_class"    # per-record probability of the true label


class DistributionSource(Enum):
    TARGET_ON_QUERY = "target_on_query"
    CALIBRATION_ON_QUERY = "calibration_on_query"
    QUERY_ON_QUERY = "query_on_query"


class DegenerateCalibrationError(ValueError):
    """Calibration outputs coincide with query-model outputs; the ratio is undefined."""


@dataclass(frozen=True)
class OutputDistribution:
    values: np.ndarray
    source: DistributionSource | None = None

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64).ravel()
        if arr.size == 0:
            raise ValueError("output distribution must be non-empty")
        if not np.all(np.isfinite(arr)):
            raise ValueError("output distribution contains non-finite values")
        object.__setattr__(self, "values", arr)


def project_outputs(
    preds: PredictionSet,
    mode: ProjectionMode = ProjectionMode.ALL_PROBS,
    source: DistributionSource | None = None,
) -> OutputDistribution:
    """Project probability outputs to the scalar sample used for the ECDF."""
    if mode is ProjectionMode.ALL_PROBS:
        values = preds.probs.ravel()
    elif mode is ProjectionMode.MAX_PROB:
        values = preds.probs.max(axis=1)
    elif mode is ProjectionMode.TRUE_CLASS:
        values = compute_metric(MetricKind.CONFIDENCE, preds)
    else:
        raise ValueError(f"unknown projection mode: {mode!r}")
    return OutputDistribution(values=values, source=source)


def _values(dist) -> np.ndarray:
    if isinstance(dist, OutputDistribution):
        return dist.values
    arr = np.asarray(dist, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("sample must be non-empty")
    return arr


def ks_distance(a, b) -> float:
    """sup |ECDF_a - ECDF_b|, evaluated at every observed point."""
    x = np.sort(_values(a))
    y = np.sort(_values(b))
    everywhere = np.concatenate([x, y])
    cdf_x = np.searchsorted(x, everywhere, side="right") / x.size
    cdf_y = np.searchsorted(y, everywhere, side="right") / y.size
    return float(np.max(np.abs(cdf_x - cdf_y)))


def rho_ks(target_on_q, cal_on_q, query_on_q) -> float:
    """KS-distance ratio; >= 1 reads as removed/forgotten, < 1 as memorized.

    A zero denominator means the calibration model's outputs on the query
    match the query model's outputs exactly, which is precisely the
    low-quality-calibration failure mode, so it is an error rather than a
    verdict.
    """
    numerator = ks_distance(target_on_q, query_on_q)
    denominator = ks_distance(cal_on_q, query_on_q)
    if denominator == 0.0:
        raise DegenerateCalibrationError(
            "calibration outputs equal query-model outputs; KS ratio undefined"
        )
    return numerator / denominator
