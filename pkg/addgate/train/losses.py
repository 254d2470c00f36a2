"""Losses and metrics."""

from __future__ import annotations

from enum import Enum

import numpy as np

from addgate.tensor import ShapeError, softmax

_TINY = 1e-300


class LossKind(Enum):
    MSE = "mse"
    CROSS_ENTROPY = "cross-entropy"


def loss_mse(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean of squared differences over every entry."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeError(f"loss_mse shape mismatch: pred {pred.shape}, target {target.shape}")
    if pred.size == 0:
        raise ShapeError("loss_mse of empty arrays")
    diff = pred - target
    return float(np.mean(diff * diff))


def mse_grad(pred: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Gradient of :func:`loss_mse` with respect to *pred*."""
    if pred.shape != target.shape:
        raise ShapeError(f"mse_grad shape mismatch: pred {pred.shape}, target {target.shape}")
    return 2.0 * (pred - target) / pred.size


def _check_labels(probs: np.ndarray, labels: np.ndarray) -> None:
    if probs.ndim != 2 or labels.shape != (probs.shape[0],):
        raise ShapeError(
            f"expected probs (batch, classes) and labels (batch,), "
            f"got {probs.shape} and {labels.shape}"
        )


def cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean negative log-likelihood of integer *labels* under softmax *probs*."""
    _check_labels(probs, labels)
    picked = probs[np.arange(len(labels)), labels]
    return float(-np.mean(np.log(np.maximum(picked, _TINY))))


def cross_entropy_logit_grad(probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Gradient of :func:`cross_entropy` with respect to the softmax logits."""
    _check_labels(probs, labels)
    grad = probs.copy()
    grad[np.arange(len(labels)), labels] -= 1.0
    return grad / len(labels)


def softmax_cross_entropy(
    logits: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray]:
    """Cross-entropy of softmax(*logits*) and its gradient w.r.t. the logits."""
    probs = softmax(np.asarray(logits, dtype=np.float64))
    return cross_entropy(probs, labels), cross_entropy_logit_grad(probs, labels)


def accuracy(scores: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of rows whose argmax equals the label."""
    _check_labels(scores, labels)
    return float(np.mean(np.argmax(scores, axis=-1) == labels))
