"""Fixed-point integer forward pass for the addition-based cells.

A real value x is stored as the integer ``round(x * S)`` for a power-of-two
scale S.  Inputs, weights and biases are quantized with round-half-even.
An affine stage accumulates ``W x + U h`` exactly at scale S**2 and applies a
single right shift by log2(S) with round-half-up, then adds the bias.  The
gate and combine stage is the float path's :func:`additive_gate` run on
integers: addition, negation and min/max with zero only.

All arithmetic runs on Python integers and is converted back to int64 with
an overflow check, so nothing wraps around silently.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from addgate.cells import (
    GATE_NAMES,
    CellKind,
    CellParams,
    GateParams,
    NegativeStateError,
    additive_gate,
)
from addgate.tasks import AddingInstance, adding_to_dataset, handcrafted_solver
from addgate.tensor import ActivationKind, relu

logger = logging.getLogger(__name__)

INT64_MAX = np.iinfo(np.int64).max
INT64_MIN = np.iinfo(np.int64).min

QUANTIZABLE_KINDS = (CellKind.AGNU, CellKind.AGRU)
INTEGER_EXACT_ACTIVATIONS = (ActivationKind.RELU, ActivationKind.IDENTITY)


class QuantError(ValueError):
    """Raised for parameters or scales the integer path cannot represent."""


class QuantOverflowError(QuantError):
    """Raised when an integer result leaves the int64 range."""


def check_scale(scale: int) -> int:
    """Return log2(*scale*); *scale* must be a positive power of two."""
    if not isinstance(scale, int | np.integer) or scale < 1 or scale & (scale - 1):
        raise QuantError(f"scale must be a positive power of two, got {scale!r}")
    return int(scale).bit_length() - 1


def to_int64(values: np.ndarray) -> np.ndarray:
    """Checked conversion of Python-int (object) arrays to int64."""
    arr = np.asarray(values, dtype=object)
    if arr.size and (max(arr.flat) > INT64_MAX or min(arr.flat) < INT64_MIN):
        raise QuantOverflowError(
            f"integer value out of int64 range (max {max(arr.flat)}, min {min(arr.flat)})"
        )
    return arr.astype(np.int64)


def _as_objects(values: np.ndarray) -> np.ndarray:
    return np.asarray(values).astype(object)


def quantize_vector(x: np.ndarray, scale: int) -> np.ndarray:
    """``round_half_even(x * scale)`` as int64."""
    check_scale(scale)
    scaled = np.rint(np.asarray(x, dtype=np.float64) * scale)
    if not np.all(np.isfinite(scaled)) or np.any(np.abs(scaled) >= 2.0**63):
        raise QuantOverflowError(f"values do not fit int64 at scale {scale}")
    return scaled.astype(np.int64)


def dequantize(q: np.ndarray, scale: int) -> np.ndarray:
    check_scale(scale)
    return np.asarray(q, dtype=np.float64) / scale


@dataclass(frozen=True)
class IntGate:
    W: np.ndarray
    U: np.ndarray
    b: np.ndarray

    def arrays(self) -> dict[str, np.ndarray]:
        return {"W": self.W, "U": self.U, "b": self.b}


@dataclass(frozen=True)
class QuantParams:
    """Integer copy of an aGNU/aGRU cell at fixed-point scale ``scale``."""

    scale: int
    kind: CellKind
    input_dim: int
    units: int
    gates: dict[str, IntGate]
    proposal_activation: ActivationKind = ActivationKind.RELU

    @property
    def shift(self) -> int:
        return check_scale(self.scale)


def quantize(p: CellParams, scale: int) -> QuantParams:
    """Round every weight and bias of *p* to the nearest multiple of 1/scale."""
    check_scale(scale)
    if p.kind not in QUANTIZABLE_KINDS:
        raise QuantError(
            f"integer path supports {', '.join(k.value for k in QUANTIZABLE_KINDS)}, "
            f"not {p.kind.value}"
        )
    if p.proposal_activation not in INTEGER_EXACT_ACTIVATIONS:
        raise QuantError(
            f"{p.proposal_activation.value} is not integer-exact; "
            "the integer path needs a relu proposal"
        )
    gates = {
        name: IntGate(*(quantize_vector(arr, scale) for arr in p.gates[name].arrays().values()))
        for name in GATE_NAMES[p.kind]
    }
    return QuantParams(scale, p.kind, p.input_dim, p.units, gates, p.proposal_activation)


def dequantize_params(q: QuantParams) -> CellParams:
    gates = {
        name: GateParams(*(dequantize(arr, q.scale) for arr in g.arrays().values()))
        for name, g in q.gates.items()
    }
    return CellParams(q.kind, q.input_dim, q.units, gates, q.proposal_activation)


def int_affine(q: QuantParams, gate: str, x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """``((W x + U h) + S/2) >> log2(S)) + b`` on Python integers."""
    g = q.gates[gate]
    acc = _as_objects(x) @ _as_objects(g.W).T + _as_objects(h) @ _as_objects(g.U).T
    shift = q.shift
    if shift:
        acc = (acc + (1 << (shift - 1))) >> shift
    return acc + _as_objects(g.b)


def _proposal(q: QuantParams, a: np.ndarray) -> np.ndarray:
    return relu(a) if q.proposal_activation is ActivationKind.RELU else a


def _check_state(q: QuantParams, h: np.ndarray, x: np.ndarray) -> None:
    if x.shape[-1] != q.input_dim or h.shape[-1] != q.units:
        raise QuantError(
            f"expected input {q.input_dim} and state {q.units}, "
            f"got {x.shape[-1]} and {h.shape[-1]}"
        )
    if np.any(h < 0):
        raise NegativeStateError("integer addition-based cells require a non-negative state")


def step_agnu_int(q: QuantParams, h: np.ndarray, x: np.ndarray) -> np.ndarray:
    """One integer aGNU step; *h* and *x* are int64 at scale ``q.scale``."""
    if q.kind is not CellKind.AGNU:
        raise QuantError(f"step_agnu_int needs agnu parameters, got {q.kind.value}")
    _check_state(q, h, x)
    u = int_affine(q, "update", x, h)
    hhat = _proposal(q, int_affine(q, "proposal", x, h))
    return to_int64(additive_gate(_as_objects(h), u, hhat))


def step_agru_int(q: QuantParams, h: np.ndarray, x: np.ndarray) -> np.ndarray:
    """One integer aGRU step; the reset gate is ``(h + r^-)^+``."""
    if q.kind is not CellKind.AGRU:
        raise QuantError(f"step_agru_int needs agru parameters, got {q.kind.value}")
    _check_state(q, h, x)
    hh = _as_objects(h)
    u = int_affine(q, "update", x, h)
    r = int_affine(q, "reset", x, h)
    hr = relu(hh + np.minimum(r, 0))
    hhat = _proposal(q, int_affine(q, "proposal", x, hr))
    return to_int64(additive_gate(hh, u, hhat))


INT_STEP_FUNCTIONS = {CellKind.AGNU: step_agnu_int, CellKind.AGRU: step_agru_int}


def run_int_sequence(
    q: QuantParams, xs: Sequence[np.ndarray], h0: np.ndarray | None = None
) -> np.ndarray:
    """Unroll the integer cell over int64 inputs; returns the final int64 state."""
    fn = INT_STEP_FUNCTIONS[q.kind]
    if h0 is None:
        batch = xs[0].shape[:-1] if len(xs) else ()
        h0 = np.zeros((*batch, q.units), dtype=np.int64)
    h = h0
    for x in xs:
        h = fn(q, h, x)
    return h


def run_handcrafted_int(a: float, instance: AddingInstance, scale: int) -> float:
    """Quantize the hand-crafted solver and one instance, run on integers, dequantize."""
    return float(run_handcrafted_int_batch(a, [instance], scale)[0])


def run_handcrafted_int_batch(
    a: float, instances: Sequence[AddingInstance], scale: int
) -> np.ndarray:
    """Batched :func:`run_handcrafted_int` over instances of one length."""
    q = quantize(handcrafted_solver(a), scale)
    inputs = quantize_vector(adding_to_dataset(instances).inputs, scale)
    xs = [inputs[:, t, :] for t in range(inputs.shape[1])]
    h = run_int_sequence(q, xs)
    logger.debug("integer solver at scale %d over %d instances", scale, len(instances))
    return dequantize(h[:, 0], scale)
