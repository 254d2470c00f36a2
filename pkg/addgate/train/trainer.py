"""Deterministic mini-batch training loop.

Sequences are processed as one batched forward/backward pass per mini-batch
(the batch axis replaces per-sequence workers); the batch gradient is the mean
over sequences, reduced in a fixed order, so a seed reproduces the history
bit-identically.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from addgate.cells import (
    CellParams,
    ReadoutParams,
    SequenceResult,
    initial_state,
    readout,
    run_sequence,
)
from addgate.tensor import ActivationKind, Rng, ShapeError
from addgate.train.backprop import (
    TrainingError,
    bptt,
    clip_by_global_norm,
    named_arrays,
    with_arrays,
)
from addgate.train.losses import (
    LossKind,
    accuracy,
    cross_entropy,
    cross_entropy_logit_grad,
    loss_mse,
    mse_grad,
)
from addgate.train.optim import AdamState, adam_step

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ("epoch", "split", "loss", "metric")


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 64
    epochs: int = 10
    seed: int = 0
    loss_kind: LossKind = LossKind.MSE
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    clip_norm: float | None = None

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise TrainingError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise TrainingError(f"epochs must be >= 1, got {self.epochs}")
        if self.lr < 0:
            raise TrainingError(f"lr must be >= 0, got {self.lr}")
        if self.clip_norm is not None and self.clip_norm <= 0:
            raise TrainingError(f"clip_norm must be positive, got {self.clip_norm}")


@dataclass
class SequenceDataset:
    """``inputs`` is (N, T, input_dim); ``targets`` is (N, out) floats or (N,) labels."""

    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self) -> None:
        if self.inputs.ndim != 3:
            raise ShapeError(f"inputs must be (N, T, input_dim), got {self.inputs.shape}")
        if self.targets.shape[:1] != self.inputs.shape[:1]:
            raise ShapeError(
                f"{self.inputs.shape[0]} input sequences but {self.targets.shape[0]} targets"
            )

    def __len__(self) -> int:
        return self.inputs.shape[0]

    @property
    def length(self) -> int:
        return self.inputs.shape[1]

    def take(self, idx: np.ndarray) -> SequenceDataset:
        return SequenceDataset(self.inputs[idx], self.targets[idx])


@dataclass(frozen=True)
class EpochMetrics:
    """One history row.  ``metric`` is the MSE for regression, accuracy for classification."""

    epoch: int
    split: str
    loss: float
    metric: float


@dataclass
class TrainResult:
    params: CellParams
    readout: ReadoutParams
    history: list[EpochMetrics] = field(default_factory=list)

    def last(self, split: str) -> EpochMetrics:
        for row in reversed(self.history):
            if row.split == split:
                return row
        raise KeyError(split)

    def first(self, split: str) -> EpochMetrics:
        for row in self.history:
            if row.split == split:
                return row
        raise KeyError(split)


def forward(
    p: CellParams, r: ReadoutParams, inputs: np.ndarray, record: bool = False
) -> tuple[np.ndarray, SequenceResult]:
    """Run a (N, T, input_dim) batch and read out the final state."""
    init = initial_state(p, batch=inputs.shape[0])
    xs = [inputs[:, t, :] for t in range(inputs.shape[1])]
    res = run_sequence(p, init, xs, record=record)
    return readout(r, res.final.h), res


def _batch_loss(
    y: np.ndarray, targets: np.ndarray, loss_kind: LossKind
) -> tuple[float, float, np.ndarray]:
    """Return (loss, metric, dL/dy or dL/dlogits)."""
    if loss_kind is LossKind.MSE:
        loss = loss_mse(y, targets)
        return loss, loss, mse_grad(y, targets)
    return (
        cross_entropy(y, targets),
        accuracy(y, targets),
        cross_entropy_logit_grad(y, targets),
    )


def evaluate(
    p: CellParams,
    r: ReadoutParams,
    dataset: SequenceDataset,
    loss_kind: LossKind,
    batch_size: int = 1000,
) -> tuple[float, float]:
    """Mean loss and metric over *dataset*, without updating anything."""
    if len(dataset) == 0:
        raise TrainingError("cannot evaluate on an empty dataset")
    loss_sum = metric_sum = 0.0
    for start in range(0, len(dataset), batch_size):
        chunk = dataset.take(np.arange(start, min(start + batch_size, len(dataset))))
        y, _ = forward(p, r, chunk.inputs)
        loss, metric, _ = _batch_loss(y, chunk.targets, loss_kind)
        loss_sum += loss * len(chunk)
        metric_sum += metric * len(chunk)
    return loss_sum / len(dataset), metric_sum / len(dataset)


def train(
    p: CellParams,
    r: ReadoutParams,
    dataset: SequenceDataset,
    cfg: TrainConfig,
    *,
    test: SequenceDataset | None = None,
) -> TrainResult:
    """Train with Adam; history starts with an epoch-0 evaluation before any update."""
    if len(dataset) == 0:
        raise TrainingError("cannot train on an empty dataset")
    if cfg.loss_kind is LossKind.CROSS_ENTROPY and r.activation is not ActivationKind.SOFTMAX:
        raise TrainingError("cross-entropy training needs a softmax readout")
    rng = Rng(cfg.seed)
    state = AdamState(cfg.lr, cfg.beta1, cfg.beta2, cfg.epsilon)
    wrt_logits = cfg.loss_kind is LossKind.CROSS_ENTROPY
    result = TrainResult(p, r)

    def record(epoch: int, split: str, loss: float, metric: float) -> None:
        result.history.append(EpochMetrics(epoch, split, loss, metric))
        logger.info("epoch %d %s loss=%.6g metric=%.6g", epoch, split, loss, metric)

    def record_test(epoch: int) -> None:
        if test is not None:
            record(epoch, "test", *evaluate(p, r, test, cfg.loss_kind))

    record(0, "train", *evaluate(p, r, dataset, cfg.loss_kind))
    record_test(0)

    n = len(dataset)
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        loss_sum = metric_sum = 0.0
        for batch_no, start in enumerate(range(0, n, cfg.batch_size)):
            batch = dataset.take(order[start : start + cfg.batch_size])
            y, res = forward(p, r, batch.inputs, record=True)
            loss, metric, grad = _batch_loss(y, batch.targets, cfg.loss_kind)
            if not math.isfinite(loss):
                raise TrainingError(
                    f"non-finite loss {loss} at epoch {epoch}, batch {batch_no} "
                    f"({p.kind.value}, lr={cfg.lr}); try a smaller lr or --clip-norm"
                )
            xs = [batch.inputs[:, t, :] for t in range(batch.length)]
            grads = bptt(p, r, xs, res.traces, grad, wrt_logits=wrt_logits).named()
            if cfg.clip_norm is not None:
                grads = clip_by_global_norm(grads, cfg.clip_norm)
            flat, state = adam_step(state, named_arrays(p, r), grads)
            p, r = with_arrays(p, r, flat)
            loss_sum += loss * len(batch)
            metric_sum += metric * len(batch)
        record(epoch, "train", loss_sum / n, metric_sum / n)
        record_test(epoch)

    result.params, result.readout = p, r
    return result


def write_history_csv(
    rows: list[EpochMetrics],
    path: Path,
    extra: dict[str, str] | None = None,
    append: bool = False,
) -> None:
    """Write history rows; *extra* columns (e.g. cell, trial) are prepended."""
    extra = extra or {}
    header = [*extra, *HISTORY_COLUMNS]
    write_header = not append or not Path(path).exists() or Path(path).stat().st_size == 0
    try:
        with open(path, "a" if append else "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            if write_header:
                writer.writerow(header)
            for row in rows:
                writer.writerow(
                    [
                        *extra.values(),
                        row.epoch,
                        row.split,
                        repr(float(row.loss)),
                        repr(float(row.metric)),
                    ]
                )
    except OSError as e:
        raise TrainingError(f"Cannot write history to {path}: {e}") from e
