"""Deterministic from-scratch MLP classifier: training, inference, checkpoints.

ReLU hidden layers, softmax output, mini-batch SGD on cross-entropy with
inverse-time learning-rate decay lr / (1 + decay * step). Everything is
seeded through one generator, so identical (config, data) reproduce
bit-identical weights.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .core import PredictionSet


class DimensionMismatchError(ValueError):
    """Feature dimensionality does not match the model."""


class TrainingDivergedError(ArithmeticError):
    """Training loss became non-finite; carries the offending epoch."""

    def __init__(self, message: str, epoch: int):
        super().__init__(message)
        self.epoch = epoch


@dataclass(frozen=True)
class MlpConfig:
    input_dim: int
    num_classes: int
    hidden_sizes: tuple[int, ...] = (256, 256)
    learning_rate: float = 0.05
    epochs: int = 50
    lr_decay: float = 1e-4
    batch_size: int = 64
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if self.input_dim < 1 or self.num_classes < 1 or any(h < 1 for h in self.hidden_sizes):
            raise ValueError("all layer dimensions must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.lr_decay < 0:
            raise ValueError("lr_decay must be >= 0")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden_sizes, self.num_classes)


@dataclass
class TrainedModel:
    config: MlpConfig
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    train_loss_history: list[float] = field(default_factory=list)

    def __post_init__(self):
        sizes = self.config.layer_sizes
        expected = list(zip(sizes[:-1], sizes[1:]))
        if len(self.weights) != len(expected) or len(self.biases) != len(expected):
            raise ValueError("layer count does not match config")
        for w, b, (fan_in, fan_out) in zip(self.weights, self.biases, expected):
            if w.shape != (fan_in, fan_out) or b.shape != (fan_out,):
                raise ValueError(f"weight shape {w.shape} / bias shape {b.shape} inconsistent with config")

    def predict_proba(self, features) -> np.ndarray:
        return predict_proba(self, features)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shift-invariant by construction."""
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _forward_logits(weights, biases, x: np.ndarray) -> np.ndarray:
    a = x
    for w, b in zip(weights[:-1], biases[:-1]):
        a = np.maximum(a @ w + b, 0.0)
    return a @ weights[-1] + biases[-1]


def loss_and_gradients(weights, biases, x: np.ndarray, y: np.ndarray):
    """Mean cross-entropy over the batch plus gradients for every layer."""
    activations = [x]
    for w, b in zip(weights[:-1], biases[:-1]):
        activations.append(np.maximum(activations[-1] @ w + b, 0.0))
    logits = activations[-1] @ weights[-1] + biases[-1]
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_z
    n = x.shape[0]
    loss = -float(np.mean(log_probs[np.arange(n), y]))

    delta = np.exp(log_probs)
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grad_w = [np.empty(0)] * len(weights)
    grad_b = [np.empty(0)] * len(biases)
    for layer in reversed(range(len(weights))):
        grad_w[layer] = activations[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ weights[layer].T) * (activations[layer] > 0.0)
    return loss, grad_w, grad_b


def train_mlp(config: MlpConfig, data) -> TrainedModel:
    """Mini-batch SGD with He initialisation from the seeded generator."""
    x = np.asarray(data.features, dtype=np.float64)
    y = np.asarray(data.labels, dtype=np.int64)
    if x.shape[1] != config.input_dim:
        raise DimensionMismatchError(f"data has {x.shape[1]} features, model expects {config.input_dim}")
    if np.any(y >= config.num_classes):
        raise DimensionMismatchError(f"label {int(y.max())} out of range for {config.num_classes} classes")

    rng = np.random.default_rng(config.seed)
    sizes = config.layer_sizes
    weights = [rng.normal(0.0, math.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
               for fan_in, fan_out in zip(sizes[:-1], sizes[1:])]
    biases = [np.zeros(fan_out) for fan_out in sizes[1:]]

    n = x.shape[0]
    step = 0
    history: list[float] = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            loss, grad_w, grad_b = loss_and_gradients(weights, biases, x[idx], y[idx])
            if not math.isfinite(loss):
                raise TrainingDivergedError(f"non-finite training loss at epoch {epoch}", epoch=epoch)
            lr = config.learning_rate / (1.0 + config.lr_decay * step)
            for w, g in zip(weights, grad_w):
                w -= lr * g
            for b, g in zip(biases, grad_b):
                b -= lr * g
            step += 1
            batch_losses.append(loss)
        history.append(float(np.mean(batch_losses)))

    return TrainedModel(config=config, weights=weights, biases=biases, train_loss_history=history)


def predict_proba(model: TrainedModel, features) -> np.ndarray:
    """Softmax class probabilities, one row per input row."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatchError("features must be a 2-D matrix")
    if x.shape[1] != model.config.input_dim:
        raise DimensionMismatchError(f"features have dim {x.shape[1]}, model expects {model.config.input_dim}")
    return softmax(_forward_logits(model.weights, model.biases, x))


def predict_dataset(model: TrainedModel, data) -> PredictionSet:
    """Run the model over a labeled dataset and package the black-box view."""
    return PredictionSet(
        probs=predict_proba(model, data.features),
        labels=np.asarray(data.labels, dtype=np.int64),
        num_classes=model.config.num_classes,
    )


def train_accuracy(model: TrainedModel, data) -> float:
    probs = predict_proba(model, data.features)
    return float(np.mean(np.argmax(probs, axis=1) == np.asarray(data.labels)))


# ---------------------------------------------------------------------------
# Checkpoints: one JSON header line, then raw little-endian float64 bytes for
# each array (weights and biases interleaved per layer). Round-trips are
# bit-exact and the bytes are a pure function of the model.

_CHECKPOINT_FORMAT = "memaudit-mlp-checkpoint"
_CHECKPOINT_VERSION = 1


def save_checkpoint(model: TrainedModel, path) -> None:
    arrays: list[np.ndarray] = []
    for w, b in zip(model.weights, model.biases):
        arrays.append(w)
        arrays.append(b)
    header = {
        "format": _CHECKPOINT_FORMAT,
        "version": _CHECKPOINT_VERSION,
        "config": {
            "input_dim": model.config.input_dim,
            "num_classes": model.config.num_classes,
            "hidden_sizes": list(model.config.hidden_sizes),
            "learning_rate": model.config.learning_rate,
            "epochs": model.config.epochs,
            "lr_decay": model.config.lr_decay,
            "batch_size": model.config.batch_size,
            "seed": model.config.seed,
        },
        "loss_history": [float(v) for v in model.train_loss_history],
        "array_shapes": [list(a.shape) for a in arrays],
    }
    with open(path, "wb") as f:
        f.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        for a in arrays:
            f.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def load_checkpoint(path) -> TrainedModel:
    raw = Path(path).read_bytes()
    newline = raw.find(b"\n")
    if newline < 0:
        raise DataFormatCheckpointError(path, "missing header line")
    try:
        header = json.loads(raw[:newline].decode("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError):
        raise DataFormatCheckpointError(path, "header is not valid JSON") from None
    if header.get("format") != _CHECKPOINT_FORMAT:
        raise DataFormatCheckpointError(path, "not a model checkpoint")
    if header.get("version") != _CHECKPOINT_VERSION:
        raise DataFormatCheckpointError(path, f"unsupported checkpoint version {header.get('version')}")

    cfg = header["config"]
    config = MlpConfig(
        input_dim=cfg["input_dim"],
        num_classes=cfg["num_classes"],
        hidden_sizes=tuple(cfg["hidden_sizes"]),
        learning_rate=cfg["learning_rate"],
        epochs=cfg["epochs"],
        lr_decay=cfg["lr_decay"],
        batch_size=cfg["batch_size"],
        seed=cfg["seed"],
    )
    arrays = []
    offset = newline + 1
    for shape in header["array_shapes"]:
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        end = offset + 8 * count
        if end > len(raw):
            raise DataFormatCheckpointError(path, "truncated array data")
        arrays.append(np.frombuffer(raw[offset:end], dtype="<f8").reshape(shape).copy())
        offset = end
    if offset != len(raw):
        raise DataFormatCheckpointError(path, "trailing bytes after array data")
    weights = arrays[0::2]
    biases = arrays[1::2]
    return TrainedModel(config=config, weights=weights, biases=biases,
                        train_loss_history=list(header.get("loss_history", [])))


class DataFormatCheckpointError(ValueError):
    def __init__(self, path, message: str):
        super().__init__(f"{path}: {message}")


def make_trainer(template: MlpConfig):
    """Bind a config into a training procedure LabeledDataset -> TrainedModel.

    Input and output dimensions are re-derived from each dataset so one
    template drives target, calibration, and query-model training alike.
    """
    def trainer(data) -> TrainedModel:
        config = replace(template, input_dim=data.features.shape[1], num_classes=data.num_classes)
        return train_mlp(config, data)

    return trainer
