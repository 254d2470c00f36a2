"""Dense float64 linear algebra, activations and the seeded generator.

Vectors and matrices are plain numpy arrays.  A Vector is 1-D, or 2-D with a
leading batch axis ``(batch, dim)``; a Matrix is 2-D, row-major (C order).
Functions here never coerce their inputs' dtype, so object arrays of
instrumented scalars (see ``addgate.tensor.audit``) flow through unchanged.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import TypeAlias

import numpy as np

Vector: TypeAlias = np.ndarray
Matrix: TypeAlias = np.ndarray


class ShapeError(ValueError):
    """Raised when operand shapes do not line up."""


class ActivationKind(Enum):
    """Elementwise activation functions (softmax is readout-only)."""

    TANH = "tanh"
    SIGMOID = "sigmoid"
    RELU = "relu"
    IDENTITY = "identity"
    SOFTMAX = "softmax"

    @property
    def nonnegative(self) -> bool:
        """True for activations whose outputs are never negative."""
        return self in (ActivationKind.RELU, ActivationKind.SIGMOID, ActivationKind.SOFTMAX)


def as_vector(values: object) -> Vector:
    """Return *values* as a float64 vector (copying lists, not arrays of float64)."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim not in (1, 2):
        raise ShapeError(f"vector must be 1-D or (batch, dim), got shape {v.shape}")
    return v


def as_matrix(rows: object) -> Matrix:
    """Return *rows* as a C-ordered float64 matrix."""
    m = np.ascontiguousarray(rows, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"matrix must be 2-D, got shape {m.shape}")
    return m


def matvec(m: Matrix, v: Vector) -> Vector:
    """Matrix-vector product ``m @ v``; batched vectors give ``v @ m.T``."""
    if m.ndim != 2:
        raise ShapeError(f"matvec expects a 2-D matrix, got shape {m.shape}")
    if v.ndim not in (1, 2):
        raise ShapeError(f"matvec expects a 1-D or batched vector, got shape {v.shape}")
    if m.shape[1] != v.shape[-1]:
        raise ShapeError(
            f"matvec dimension mismatch: matrix has {m.shape[1]} columns, "
            f"vector has length {v.shape[-1]}"
        )
    return v @ m.T


def sigmoid(v: Vector) -> Vector:
    """Logistic function in the sign-branched form (no overflow for large |x|)."""
    out = np.empty_like(v, dtype=np.float64)
    pos = v >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    neg = ~pos
    ex = np.exp(v[neg])
    out[neg] = ex / (1.0 + ex)
    return out


def sigmoid_scalar(x: float) -> float:
    """Scalar counterpart of :func:`sigmoid`."""
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def softmax(v: Vector) -> Vector:
    """Softmax over the last axis."""
    shifted = v - np.max(v, axis=-1, keepdims=True)
    ex = np.exp(shifted)
    return ex / np.sum(ex, axis=-1, keepdims=True)


def relu(v: Vector) -> Vector:
    return np.maximum(v, 0)


def relu_pos_neg(v: Vector) -> tuple[Vector, Vector]:
    """Split *v* into ``(max(0, v), min(0, v))``; the two parts sum to *v* exactly."""
    return np.maximum(v, 0), np.minimum(v, 0)


def apply_activation(kind: ActivationKind, v: Vector) -> Vector:
    """Apply *kind* elementwise (softmax: over the last axis)."""
    if kind is ActivationKind.RELU:
        return relu(v)
    if kind is ActivationKind.IDENTITY:
        return v
    if kind is ActivationKind.TANH:
        return np.tanh(v)
    if kind is ActivationKind.SIGMOID:
        return sigmoid(v)
    if kind is ActivationKind.SOFTMAX:
        return softmax(v)
    raise ValueError(f"Unknown activation: {kind!r}")


def activation_grad(kind: ActivationKind, pre: Vector, out: Vector) -> Vector:
    """Elementwise derivative of *kind* at *pre*, given ``out = kind(pre)``.

    ReLU'(0) is 0.  Softmax has no elementwise derivative; use
    :func:`softmax_backward`.
    """
    if kind is ActivationKind.RELU:
        return (pre > 0).astype(np.float64)
    if kind is ActivationKind.IDENTITY:
        return np.ones_like(pre, dtype=np.float64)
    if kind is ActivationKind.TANH:
        return 1.0 - out * out
    if kind is ActivationKind.SIGMOID:
        return out * (1.0 - out)
    raise ValueError(f"{kind.value} has no elementwise derivative")


def softmax_backward(out: Vector, grad_out: Vector) -> Vector:
    """Vector-Jacobian product of softmax at output *out*."""
    inner = np.sum(grad_out * out, axis=-1, keepdims=True)
    return out * (grad_out - inner)


class Rng:
    """Seeded generator on numpy's counter-based Philox bit generator.

    Identical seeds give bit-identical streams on every platform.  A Rng is
    single-owner: use :meth:`spawn` to hand independent streams to workers.
    """

    def __init__(self, seed: int) -> None:
        self.seed = int(seed)
        self._spawn_key: tuple[int, ...] = ()
        self._gen = self._generator()

    def spawn(self, key: int) -> Rng:
        """Return an independent stream derived from this seed and *key*."""
        child = Rng.__new__(Rng)
        child.seed = self.seed
        child._spawn_key = (*self._spawn_key, int(key))
        child._gen = child._generator()
        return child

    def _generator(self) -> np.random.Generator:
        # spawn(0) never reproduces the parent stream.
        seq = np.random.SeedSequence(self.seed, spawn_key=self._spawn_key)
        return np.random.Generator(np.random.Philox(seq))

    def uniform(self, n: int, low: float = 0.0, high: float = 1.0) -> Vector:
        """Return *n* i.i.d. samples from U[low, high)."""
        if n < 1:
            raise ValueError(f"uniform sample count must be >= 1, got {n}")
        return self._gen.uniform(low, high, size=n)

    def integers(self, low: int, high: int) -> int:
        """Return one integer uniform on [low, high)."""
        return int(self._gen.integers(low, high))

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def normal(self, size: int | tuple[int, ...], scale: float = 1.0) -> np.ndarray:
        return self._gen.normal(0.0, scale, size=size)

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, stream={self._spawn_key})"
