"""Sample-wise membership bits and their aggregation into one audit score.

A query sample counts as memorized when at least one metric clears its
threshold (a logical OR across metrics). The resulting binary membership
vector M is compared against the all-ones vector of a fully memorized
query set with a two-sample test; the p-value is the audit score. A
score at or below the significance level alpha rejects "memorized" and
concludes the query set was removed.

Tests offered:

- t-test: t = (mean(M) - 1) / ((std(M) + 1e-8) / sqrt(n)), sample
  standard deviation with n-1 normalisation, two-sided p from Student's
  t with n-1 degrees of freedom. The epsilon keeps the all-ones case
  finite, where t = 0 and the p-value is exactly 1.
- KS test: two-sample Kolmogorov-Smirnov between M and the ones vector;
  for binary M the statistic equals 1 - mean(M), and the p-value comes
  from the asymptotic Kolmogorov distribution at
  (sqrt(n/2) + 0.12 + 0.11/sqrt(n/2)) * D, the classic finite-sample
  correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .baseline import ks_distance
from .core import MetricKind, PredictionSet, compute_metric
from .special import kolmogorov_sf, student_t_two_sided_p
from .thresholds import ThresholdSet

T_STAT_EPSILON = 1e-8
DEFAULT_ALPHA = 0.1


class TestKind(Enum):
    __test__ = False  # not a pytest class, despite the name

    T_TEST = "t"
    KS_TEST = "ks"


class Verdict(Enum):
    MEMORIZED = "memorized"
    REMOVED = "removed"


@dataclass(frozen=True)
class AuditReport:
    """Outcome of one audit: score, decision rule inputs, and verdict."""

    rho_ema: float
    test_kind: TestKind
    alpha: float
    verdict: Verdict
    member_fraction: float
    query_size: int

    def __post_init__(self):
        if not 0.0 <= self.rho_ema <= 1.0:
            raise ValueError("audit score must be a p-value in [0, 1]")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0.0 <= self.member_fraction <= 1.0:
            raise ValueError("member_fraction must lie in [0, 1]")
        expected = Verdict.REMOVED if self.rho_ema <= self.alpha else Verdict.MEMORIZED
        if self.verdict is not expected:
            raise ValueError("verdict inconsistent with score and alpha")

    def to_dict(self) -> dict:
        return {
            "rho_ema": self.rho_ema,
            "test_kind": self.test_kind.value,
            "alpha": self.alpha,
            "verdict": self.verdict.value,
            "member_fraction": self.member_fraction,
            "query_size": self.query_size,
        }


def as_membership_vector(m) -> np.ndarray:
    """Validate and canonicalise a membership vector to a float {0,1} array."""
    arr = np.asarray(m, dtype=np.float64).ravel()
    if arr.size < 1:
        raise ValueError("membership vector must be non-empty")
    if not np.all((arr == 0.0) | (arr == 1.0)):
        raise ValueError("membership vector entries must be 0 or 1")
    return arr


def infer_membership(query_preds: PredictionSet, thresholds: ThresholdSet) -> np.ndarray:
    """Per-sample membership bits: 1 when any metric reaches its threshold."""
    bits = np.zeros(len(query_preds), dtype=bool)
    for kind in MetricKind:
        bits |= compute_metric(kind, query_preds) >= thresholds.thresholds[kind]
    return bits.astype(np.int64)


def t_test_vs_ones(m) -> float:
    """Two-sided t-test p-value of the membership vector against all ones."""
    arr = as_membership_vector(m)
    n = arr.size
    if n < 2:
        raise ValueError("t-test needs at least 2 samples")
    # the input is binary, so the mean and the n-1-normalised sample
    # standard deviation reduce exactly to functions of the ones count;
    # this keeps the p-value bit-identical under permutation
    ones = float(arr.sum())
    mu = ones / n
    variance = (ones * (1.0 - mu) ** 2 + (n - ones) * mu**2) / (n - 1)
    sigma = math.sqrt(variance)
    t = (mu - 1.0) / ((sigma + T_STAT_EPSILON) / math.sqrt(n))
    return student_t_two_sided_p(t, n - 1)


def ks_statistic_vs_ones(m) -> float:
    """Two-sample KS statistic between the membership vector and all ones.

    Computed through the generic ECDF route; for binary input it equals
    1 - mean(m) up to rounding of the counts.
    """
    arr = as_membership_vector(m)
    return ks_distance(arr, np.ones_like(arr))


def ks_test_vs_ones(m) -> float:
    """Asymptotic two-sample KS p-value against the all-ones vector."""
    arr = as_membership_vector(m)
    n = arr.size
    d = ks_statistic_vs_ones(arr)
    en = math.sqrt(n * n / (2.0 * n))
    return kolmogorov_sf((en + 0.12 + 0.11 / en) * d)


def ema_score(
    query_preds: PredictionSet,
    thresholds: ThresholdSet,
    test_kind: TestKind = TestKind.T_TEST,
    alpha: float = DEFAULT_ALPHA,
) -> AuditReport:
    """Full audit of a query prediction set: membership bits, then aggregation."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    m = infer_membership(query_preds, thresholds)
    if test_kind is TestKind.T_TEST:
        p = t_test_vs_ones(m)
    elif test_kind is TestKind.KS_TEST:
        p = ks_test_vs_ones(m)
    else:
        raise ValueError(f"unknown test kind: {test_kind!r}")
    return AuditReport(
        rho_ema=p,
        test_kind=test_kind,
        alpha=alpha,
        verdict=Verdict.REMOVED if p <= alpha else Verdict.MEMORIZED,
        member_fraction=float(np.mean(m)),
        query_size=len(query_preds),
    )
