"""Finite-difference verification of :func:`bptt`."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from addgate.cells import (
    CellParams,
    CellState,
    ReadoutParams,
    StepTrace,
    readout,
    relu_arguments,
    run_sequence,
)
from addgate.train.backprop import Gradients, bptt, named_arrays
from addgate.train.losses import (
    LossKind,
    cross_entropy,
    cross_entropy_logit_grad,
    loss_mse,
    mse_grad,
)


@dataclass
class GradCheckResult:
    max_abs_error: float
    mismatches: list[tuple[str, tuple[int, ...], float, float]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def sequence_loss(
    p: CellParams,
    r: ReadoutParams,
    init: CellState,
    xs: Sequence[np.ndarray],
    target: np.ndarray,
    loss_kind: LossKind = LossKind.MSE,
) -> float:
    y = readout(r, run_sequence(p, init, xs).final.h)
    if loss_kind is LossKind.MSE:
        return loss_mse(y, target)
    return cross_entropy(np.atleast_2d(y), np.atleast_1d(target))


def analytic_gradients(
    p: CellParams,
    r: ReadoutParams,
    init: CellState,
    xs: Sequence[np.ndarray],
    target: np.ndarray,
    loss_kind: LossKind = LossKind.MSE,
) -> Gradients:
    res = run_sequence(p, init, xs, record=True)
    y = readout(r, res.final.h)
    if loss_kind is LossKind.MSE:
        return bptt(p, r, xs, res.traces, mse_grad(y, target))
    grad = cross_entropy_logit_grad(np.atleast_2d(y), np.atleast_1d(target)).reshape(y.shape)
    return bptt(p, r, xs, res.traces, grad, wrt_logits=True)


def numerical_gradients(
    p: CellParams,
    r: ReadoutParams,
    init: CellState,
    xs: Sequence[np.ndarray],
    target: np.ndarray,
    loss_kind: LossKind = LossKind.MSE,
    eps: float = 1e-5,
) -> dict[str, np.ndarray]:
    """Central differences for every parameter entry, keyed like :func:`named_arrays`.

    Entries are perturbed in place and restored afterwards.
    """
    out: dict[str, np.ndarray] = {}
    for name, arr in named_arrays(p, r).items():
        grad = np.zeros_like(arr)
        for idx in np.ndindex(arr.shape):
            orig = arr[idx]
            arr[idx] = orig + eps
            plus = sequence_loss(p, r, init, xs, target, loss_kind)
            arr[idx] = orig - eps
            minus = sequence_loss(p, r, init, xs, target, loss_kind)
            arr[idx] = orig
            grad[idx] = (plus - minus) / (2.0 * eps)
        out[name] = grad
    return out


def kink_distance(p: CellParams, traces: Sequence[StepTrace]) -> float:
    """Smallest nonzero |argument| of any ReLU in the run (inf if none).

    Exact zeros are skipped: they arise from clamped upstream terms and are
    locally constant, so finite differences agree there.
    """
    best = float("inf")
    for trace in traces:
        for arg in relu_arguments(p, trace):
            mags = np.abs(arg[arg != 0])
            if mags.size:
                best = min(best, float(mags.min()))
    return best


def compare_gradients(
    analytic: dict[str, np.ndarray],
    numeric: dict[str, np.ndarray],
    rtol: float = 1e-4,
    atol: float = 1e-6,
) -> GradCheckResult:
    """Entries fail when ``|a - n| > max(rtol * max(|a|, |n|), atol)``."""
    result = GradCheckResult(0.0)
    for name, a in analytic.items():
        n = numeric[name]
        for idx in np.ndindex(a.shape):
            av, nv = float(a[idx]), float(n[idx])
            err = abs(av - nv)
            result.max_abs_error = max(result.max_abs_error, err)
            if err > max(rtol * max(abs(av), abs(nv)), atol):
                result.mismatches.append((name, idx, av, nv))
    return result


def check_gradients(
    p: CellParams,
    r: ReadoutParams,
    init: CellState,
    xs: Sequence[np.ndarray],
    target: np.ndarray,
    loss_kind: LossKind = LossKind.MSE,
    eps: float = 1e-5,
    rtol: float = 1e-4,
    atol: float = 1e-6,
) -> GradCheckResult:
    analytic = analytic_gradients(p, r, init, xs, target, loss_kind).named()
    numeric = numerical_gradients(p, r, init, xs, target, loss_kind, eps)
    return compare_gradients(analytic, numeric, rtol, atol)
