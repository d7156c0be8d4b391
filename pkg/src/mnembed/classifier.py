"""Logistic-regression binary classifier trained by shuffled per-example SGD."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit


class ClassifierInputError(ValueError):
    pass


@dataclass(frozen=True)
class ClassifierConfig:
    epochs: int = 50
    lr: float = 0.01
    l2: float = 1e-4
    standardize: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0 or self.lr <= 0 or self.l2 < 0:
            raise ValueError("epochs >= 0, lr > 0 and l2 >= 0 required")


@dataclass
class BinaryClassifier:
    weights: np.ndarray
    bias: float
    mean: np.ndarray | None = field(default=None, repr=False)
    scale: np.ndarray | None = field(default=None, repr=False)

    @property
    def feature_dim(self) -> int:
        return int(self.weights.size)

    def _prepare(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if x.ndim != 2 or x.shape[1] != self.feature_dim:
            raise ClassifierInputError(f"expected n x {self.feature_dim} features, got {x.shape}")
        if self.mean is not None:
            x = (x - self.mean) / self.scale
        return x

    def decision(self, x) -> np.ndarray:
        return self._prepare(x) @ self.weights + self.bias

    def predict(self, x) -> np.ndarray:
        return (self.decision(x) >= 0).astype(np.int64)

    def dump(self) -> str:
        """One line: bias followed by the weights, %.17g."""
        return " ".join(f"{v:.17g}" for v in np.concatenate([[self.bias], self.weights]))


@njit(cache=True)
def _sigmoid(z):
    if z >= 0:
        return 1.0 / (1.0 + np.exp(-z))
    e = np.exp(z)
    return e / (1.0 + e)


@njit(cache=True)
def _sgd_epoch(x, y, w, b, order, lr, l2):
    m = x.shape[1]
    for idx in order:
        z = b
        for c in range(m):
            z += w[c] * x[idx, c]
        g = _sigmoid(z) - y[idx]
        for c in range(m):
            w[c] -= lr * (g * x[idx, c] + l2 * w[c])
        b -= lr * g
    return b


def _validate(x, y):
    x = np.asarray(x)
    if x.dtype not in (np.float32, np.float64):
        x = x.astype(np.float64)
    y = np.asarray(y)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ClassifierInputError("features must be an n x m array with n >= 1")
    if y.shape != (x.shape[0],):
        raise ClassifierInputError("labels must have one entry per row")
    if not np.isin(y, (0, 1)).all():
        raise ClassifierInputError("labels must be 0 or 1")
    if not np.isfinite(x).all():
        raise ClassifierInputError("features contain non-finite values")
    return np.ascontiguousarray(x), y.astype(np.float64)


def fit(features, labels, config: ClassifierConfig = ClassifierConfig()) -> BinaryClassifier:
    x, y = _validate(features, labels)
    mean = scale = None
    if config.standardize:
        mean = x.mean(axis=0, dtype=np.float64)
        scale = x.std(axis=0, dtype=np.float64)
        scale[scale == 0] = 1.0
        x = np.ascontiguousarray((x - mean) / scale, dtype=x.dtype)
    rng = np.random.default_rng(config.seed)
    w = np.zeros(x.shape[1])
    b = 0.0
    for _ in range(config.epochs):
        b = _sgd_epoch(x, y, w, b, rng.permutation(x.shape[0]), config.lr, config.l2)
    model = BinaryClassifier(w, float(b), mean, scale)
    if not (np.isfinite(w).all() and np.isfinite(b)):
        raise FloatingPointError("classifier weights diverged")
    return model


def accuracy(model: BinaryClassifier, features, labels) -> float:
    labels = np.asarray(labels)
    if labels.size == 0:
        return float("nan")
    return float(np.mean(model.predict(features) == labels))


def log_loss(weights, bias, features, labels, l2: float = 0.0) -> float:
    """Mean log-loss plus l2 * |w|^2 / 2 (numerically stable)."""
    z = np.asarray(features, dtype=np.float64) @ weights + bias
    y = np.asarray(labels, dtype=np.float64)
    # -log sigma(z) = logaddexp(0, -z)
    loss = y * np.logaddexp(0.0, -z) + (1 - y) * np.logaddexp(0.0, z)
    return float(loss.mean() + 0.5 * l2 * np.dot(weights, weights))


def log_loss_gradient(weights, bias, features, labels, l2: float = 0.0):
    x = np.asarray(features, dtype=np.float64)
    z = x @ weights + bias
    resid = 0.5 * (1.0 + np.tanh(0.5 * z)) - np.asarray(labels, dtype=np.float64)
    n = x.shape[0]
    return x.T @ resid / n + l2 * weights, float(resid.sum() / n)
