"""Dataset ingestion, synthetic generation, fold splitting, and calibration corruption.

File formats owned here:

- labeled dataset CSV: header ``label,f0,f1,...``; floats written with
  shortest round-trip decimal formatting;
- prediction interchange JSON-lines: a leading header object
  ``{"num_classes": C, "producer": "..."}`` followed by one
  ``{"label": int, "probs": [...]}`` object per record.

The corruption helpers reproduce the low-quality-calibration protocol:
keep k% of samples untouched and degrade the rest with additive Gaussian
noise and (in the two-sided mode) a rotation. Rotation of image-shaped
data is a 90-degree grid rotation; for plain feature vectors it is a
fixed seeded random orthogonal transform, recorded in the output
metadata so downstream reports are honest about the stand-in.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .core import PredictionSet

PROB_SUM_TOL = 1e-6


class DataFormatError(ValueError):
    """A file failed structural validation; the message names the line."""


@dataclass
class LabeledDataset:
    """Feature matrix plus integer class labels."""

    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    image_shape: tuple[int, int] | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.features.shape[0] < 1:
            raise ValueError("features must be a non-empty (n, d) matrix")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError("labels must be a vector with one entry per row")
        if self.num_classes < 1:
            raise ValueError("num_classes must be >= 1")
        if np.any(self.labels < 0) or np.any(self.labels >= self.num_classes):
            raise ValueError("labels must lie in [0, num_classes)")
        if self.image_shape is not None:
            h, w = self.image_shape
            if h * w != self.features.shape[1]:
                raise ValueError(f"image_shape {self.image_shape} does not match feature dim {self.dim}")

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def take(self, indices) -> "LabeledDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(
            features=self.features[idx].copy(),
            labels=self.labels[idx].copy(),
            num_classes=self.num_classes,
            image_shape=self.image_shape,
            metadata=dict(self.metadata),
        )


class CorruptionMode(Enum):
    NOISE_AND_ROTATE = "noise_and_rotate"
    NOISE_ONLY = "noise_only"


@dataclass(frozen=True)
class CorruptionSpec:
    """Quality parameter k (percent kept clean) and how the rest degrades."""

    k: int
    noise_sigma: float = 0.5
    seed: int = 0
    mode: CorruptionMode = CorruptionMode.NOISE_AND_ROTATE

    def __post_init__(self):
        if not 0 <= self.k <= 100:
            raise ValueError("k must be a percentage in [0, 100]")
        if self.noise_sigma <= 0:
            raise ValueError("noise_sigma must be positive")


# ---------------------------------------------------------------------------
# CSV datasets

def save_dataset_csv(data: LabeledDataset, path) -> None:
    lines = ["label," + ",".join(f"f{i}" for i in range(data.dim))]
    for label, row in zip(data.labels, data.features):
        lines.append(str(int(label)) + "," + ",".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_dataset(path, format: str = "auto", num_classes: int | None = None) -> LabeledDataset:
    """Parse a labeled dataset file; malformed rows are reported by line number.

    ``num_classes`` fixes C for validation; when omitted it is inferred as
    max(label) + 1.
    """
    path = Path(path)
    if format == "auto":
        if path.suffix.lower() == ".csv":
            format = "csv"
        else:
            raise DataFormatError(f"cannot detect dataset format from extension {path.suffix!r}; pass format='csv'")
    if format != "csv":
        raise DataFormatError(f"unsupported dataset format: {format!r}")

    text = path.read_text()
    lines = text.splitlines()
    if not lines or all(not ln.strip() for ln in lines):
        raise DataFormatError(f"{path}: empty dataset file")
    header = lines[0].split(",")
    if header[0].strip() != "label" or len(header) < 2:
        raise DataFormatError(f"{path}: line 1: expected header 'label,f0,...', got {lines[0]!r}")
    dim = len(header) - 1

    labels: list[int] = []
    rows: list[list[float]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != dim + 1:
            raise DataFormatError(f"{path}: line {lineno}: expected {dim + 1} fields, got {len(fields)}")
        try:
            label = int(fields[0])
        except ValueError:
            raise DataFormatError(f"{path}: line {lineno}: label {fields[0]!r} is not an integer") from None
        if label < 0:
            raise DataFormatError(f"{path}: line {lineno}: label {label} is negative")
        if num_classes is not None and label >= num_classes:
            raise DataFormatError(f"{path}: line {lineno}: label {label} out of range for {num_classes} classes")
        try:
            row = [float(v) for v in fields[1:]]
        except ValueError:
            raise DataFormatError(f"{path}: line {lineno}: non-numeric feature value") from None
        labels.append(label)
        rows.append(row)

    if not rows:
        raise DataFormatError(f"{path}: empty dataset file")
    c = num_classes if num_classes is not None else max(labels) + 1
    return LabeledDataset(features=np.array(rows, dtype=np.float64), labels=np.array(labels), num_classes=c)


# ---------------------------------------------------------------------------
# Prediction interchange (JSON lines)

def save_predictions(preds: PredictionSet, path, producer: str) -> None:
    with open(path, "w") as f:
        f.write(json.dumps({"num_classes": preds.num_classes, "producer": producer}, sort_keys=True) + "\n")
        for i in range(len(preds)):
            row = {"label": int(preds.labels[i]), "probs": [float(p) for p in preds.probs[i]]}
            f.write(json.dumps(row, sort_keys=True) + "\n")


def load_predictions(path) -> PredictionSet:
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise DataFormatError(f"{path}: empty prediction file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError:
        raise DataFormatError(f"{path}: line 1: header is not valid JSON") from None
    if not isinstance(header, dict) or "num_classes" not in header or "producer" not in header:
        raise DataFormatError(f"{path}: line 1: header must be an object with num_classes and producer")
    c = header["num_classes"]
    if not isinstance(c, int) or c < 2:
        raise DataFormatError(f"{path}: line 1: num_classes must be an integer >= 2")

    labels: list[int] = []
    rows: list[list[float]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            raise DataFormatError(f"{path}: line {lineno}: not valid JSON") from None
        if not isinstance(obj, dict) or "label" not in obj or "probs" not in obj:
            raise DataFormatError(f"{path}: line {lineno}: expected an object with label and probs")
        probs = obj["probs"]
        if not isinstance(probs, list) or len(probs) != c:
            got = len(probs) if isinstance(probs, list) else type(probs).__name__
            raise DataFormatError(f"{path}: line {lineno}: expected {c} probabilities, got {got}")
        vec = np.asarray(probs, dtype=np.float64)
        if np.any(vec < 0.0) or np.any(vec > 1.0):
            raise DataFormatError(f"{path}: line {lineno}: probabilities must lie in [0, 1]")
        if abs(float(vec.sum()) - 1.0) > PROB_SUM_TOL:
            raise DataFormatError(f"{path}: line {lineno}: probabilities sum to {vec.sum():.8f}")
        label = obj["label"]
        if not isinstance(label, int) or not 0 <= label < c:
            raise DataFormatError(f"{path}: line {lineno}: label {label!r} out of range for {c} classes")
        labels.append(label)
        rows.append(probs)

    if not rows:
        raise DataFormatError(f"{path}: prediction file has a header but no records")
    return PredictionSet(probs=np.array(rows, dtype=np.float64), labels=np.array(labels, dtype=np.int64), num_classes=c)


# ---------------------------------------------------------------------------
# Synthetic data

def _class_directions(classes: int, dim: int) -> np.ndarray:
    """Unit-scale layout of class means; a pure function of (classes, dim).

    For dim >= classes the centred orthonormal-corner construction gives
    exactly unit pairwise distance between every pair of means. For
    smaller dim, fixed-seed random unit directions are used and pairwise
    distances merely stay proportional to the separation factor.
    """
    if dim >= classes:
        corners = np.eye(classes, dim)
        corners -= corners.mean(axis=0, keepdims=True)
        return corners / math.sqrt(2.0)
    rng = np.random.default_rng(classes * 100003 + dim)
    dirs = rng.standard_normal((classes, dim))
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


def synth_generate(classes: int, per_class: int, dim: int, separation: float, seed: int) -> LabeledDataset:
    """Gaussian blobs with unit covariance and means scaled by ``separation``.

    Class means depend only on (classes, dim, separation), so datasets
    drawn with different seeds are fresh samples from one distribution.
    Output is class-major; shuffle downstream if order matters.
    """
    if classes < 2:
        raise ValueError("need at least 2 classes")
    if per_class < 1:
        raise ValueError("need at least 1 sample per class")
    if dim < 2:
        raise ValueError("need feature dimension >= 2")
    means = separation * _class_directions(classes, dim)
    rng = np.random.default_rng(seed)
    features = np.vstack([means[c] + rng.standard_normal((per_class, dim)) for c in range(classes)])
    labels = np.repeat(np.arange(classes, dtype=np.int64), per_class)
    return LabeledDataset(features=features, labels=labels, num_classes=classes)


def shift_class_means(data: LabeledDataset, magnitude: float, seed: int) -> LabeledDataset:
    """Offset every class mean by ``magnitude`` in a seeded random direction.

    Produces a distribution-shifted variant with unchanged labels, used
    as the off-distribution query family.
    """
    rng = np.random.default_rng(seed)
    features = data.features.copy()
    for c in range(data.num_classes):
        direction = rng.standard_normal(data.dim)
        direction /= np.linalg.norm(direction)
        features[data.labels == c] += magnitude * direction
    meta = dict(data.metadata)
    meta["mean_shift"] = f"magnitude={magnitude!r},seed={seed}"
    return LabeledDataset(features, data.labels.copy(), data.num_classes, data.image_shape, meta)


def sample_rows(data: LabeledDataset, size: int, seed: int) -> LabeledDataset:
    """Draw ``size`` rows without replacement, deterministically under seed."""
    if not 1 <= size <= len(data):
        raise ValueError(f"sample size {size} out of range for dataset of {len(data)}")
    idx = np.random.default_rng(seed).choice(len(data), size=size, replace=False)
    return data.take(idx)


def split_folds(data: LabeledDataset, folds: int, seed: int) -> list[LabeledDataset]:
    """Disjoint equal-size folds whose union is the input; n must divide evenly."""
    if folds < 2:
        raise ValueError("need at least 2 folds")
    n = len(data)
    if n % folds != 0:
        raise ValueError(f"dataset size {n} is not divisible into {folds} equal folds")
    perm = np.random.default_rng(seed).permutation(n)
    size = n // folds
    return [data.take(perm[i * size:(i + 1) * size]) for i in range(folds)]


# ---------------------------------------------------------------------------
# Calibration corruption

def _random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(a)
    return q * np.sign(np.diag(r))


def corrupt_calibration(data: LabeledDataset, spec: CorruptionSpec) -> LabeledDataset:
    """Degrade a calibration set in place of a clean one.

    Keeps round(k% * n) samples untouched. In NOISE_AND_ROTATE mode the
    remainder splits into floor(half) noise and the rest rotation; in
    NOISE_ONLY mode the full remainder gets noise. Labels, sample count,
    and feature dimension never change.
    """
    n = len(data)
    n_clean = round(spec.k * n / 100)
    remainder = n - n_clean
    rng = np.random.default_rng(spec.seed)
    perm = rng.permutation(n)
    if spec.mode is CorruptionMode.NOISE_ONLY:
        n_noise = remainder
    else:
        n_noise = remainder // 2
    noise_idx = perm[n_clean:n_clean + n_noise]
    rotate_idx = perm[n_clean + n_noise:]

    features = data.features.copy()
    if noise_idx.size:
        features[noise_idx] += spec.noise_sigma * rng.standard_normal((noise_idx.size, data.dim))
    meta = dict(data.metadata)
    meta["corruption"] = f"k={spec.k},mode={spec.mode.value},sigma={spec.noise_sigma!r},seed={spec.seed}"
    if rotate_idx.size:
        if data.image_shape is not None:
            h, w = data.image_shape
            imgs = features[rotate_idx].reshape(-1, h, w)
            features[rotate_idx] = np.rot90(imgs, k=1, axes=(1, 2)).reshape(rotate_idx.size, -1)
            meta["rotation"] = "grid_90"
        else:
            transform = _random_orthogonal(data.dim, rng)
            features[rotate_idx] = features[rotate_idx] @ transform.T
            meta["rotation"] = "random_orthogonal_standin"

    return LabeledDataset(features, data.labels.copy(), data.num_classes, data.image_shape, meta)
