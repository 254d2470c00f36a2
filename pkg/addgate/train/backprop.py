"""Backpropagation through time for every cell kind.

The backward functions mirror the step functions in ``addgate.cells.steps``
and read the intermediates stored in each :class:`StepTrace`.  Every function
takes the gradient w.r.t. the step's output state (``dh``, plus ``dc`` for the
LSTM family), accumulates parameter gradients, and returns the gradients
w.r.t. the previous state.  ReLU'(0) = 0 throughout, as in the forward
``activation_grad``.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from addgate.cells import (
    GATE_NAMES,
    CellKind,
    CellParams,
    GateParams,
    ReadoutParams,
    StepTrace,
)
from addgate.tensor import (
    ActivationKind,
    ShapeError,
    activation_grad,
    apply_activation,
    matvec,
    softmax_backward,
)

logger = logging.getLogger(__name__)


class TrainingError(Exception):
    """Raised when gradients or training cannot proceed."""


@dataclass
class Gradients:
    """Parameter gradients, shaped like the CellParams/ReadoutParams they differentiate.

    ``state_grad_norms[t]`` is the norm of dL/dh after step t (batch summed).
    """

    gates: dict[str, GateParams]
    readout: dict[str, np.ndarray] = field(default_factory=dict)
    state_grad_norms: list[float] = field(default_factory=list)

    def named(self) -> dict[str, np.ndarray]:
        """Flat ``{"<gate>.<W|U|b>": array, "readout.<W|b>": array}`` view."""
        return _flatten(self.gates, self.readout)


def named_arrays(p: CellParams, r: ReadoutParams | None = None) -> dict[str, np.ndarray]:
    """Flat view of the parameter arrays, in gate order, readout last."""
    return _flatten(p.gates, r.arrays() if r is not None else {})


def with_arrays(
    p: CellParams, r: ReadoutParams | None, flat: dict[str, np.ndarray]
) -> tuple[CellParams, ReadoutParams | None]:
    """Rebuild parameters from a flat view produced by :func:`named_arrays`."""
    gates = {
        name: GateParams(flat[f"{name}.W"], flat[f"{name}.U"], flat[f"{name}.b"])
        for name in GATE_NAMES[p.kind]
    }
    readout = None
    if r is not None:
        readout = ReadoutParams(flat["readout.W"], flat["readout.b"], r.activation)
    return p.replace_gates(gates), readout


def _flatten(
    gates: dict[str, GateParams], readout: dict[str, np.ndarray]
) -> dict[str, np.ndarray]:
    flat: dict[str, np.ndarray] = {}
    for name, g in gates.items():
        for part, arr in g.arrays().items():
            flat[f"{name}.{part}"] = arr
    for part, arr in readout.items():
        flat[f"readout.{part}"] = arr
    return flat


class _Accumulator:
    """Per-gate gradient sums over steps (and over the batch)."""

    def __init__(self, p: CellParams) -> None:
        self.p = p
        self.sums = {
            name: {"W": np.zeros_like(g.W), "U": np.zeros_like(g.U), "b": np.zeros_like(g.b)}
            for name, g in p.gates.items()
        }

    def add(self, name: str, d: np.ndarray, x: np.ndarray, h_in: np.ndarray) -> np.ndarray:
        """Record pre-activation gradient *d* of gate *name*; return ``d @ U``."""
        s = self.sums[name]
        s["W"] += _outer_sum(d, x)
        s["U"] += _outer_sum(d, h_in)
        s["b"] += d if d.ndim == 1 else d.sum(axis=0)
        return d @ self.p.gates[name].U

    def gradients(self) -> dict[str, GateParams]:
        return {name: GateParams(s["W"], s["U"], s["b"]) for name, s in self.sums.items()}


def _outer_sum(d: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.outer(d, v) if d.ndim == 1 else d.T @ v


def _proposal_grad(p: CellParams, pre: np.ndarray, out: np.ndarray) -> np.ndarray:
    return activation_grad(p.proposal_activation, pre, out)


def _back_simple_rnn(p, tr: StepTrace, dh, dc, acc: _Accumulator):
    da = dh * _proposal_grad(p, tr["a"], tr["h"])
    return acc.add("hidden", da, tr.x, tr.h_prev), None


def _back_gru(p, tr: StepTrace, dh, dc, acc: _Accumulator):
    z, r, hhat, h_prev = tr["z"], tr["r"], tr["hhat"], tr.h_prev
    daz = dh * (h_prev - hhat) * z * (1.0 - z)
    dah = dh * (1.0 - z) * _proposal_grad(p, tr["ah"], hhat)
    drh = acc.add("proposal", dah, tr.x, tr["rh"])
    dar = drh * h_prev * r * (1.0 - r)
    dh_prev = dh * z + drh * r
    dh_prev = dh_prev + acc.add("update", daz, tr.x, h_prev)
    dh_prev = dh_prev + acc.add("reset", dar, tr.x, h_prev)
    return dh_prev, None


def _back_lstm(p, tr: StepTrace, dh, dc, acc: _Accumulator):
    f, i, o, chat, tc = tr["f"], tr["i"], tr["o"], tr["chat"], tr["tc"]
    dct = dc + dh * o * activation_grad(p.output_activation, tr["c"], tc)
    dao = dh * tc * o * (1.0 - o)
    daf = dct * tr.c_prev * f * (1.0 - f)
    dai = dct * chat * i * (1.0 - i)
    dac = dct * i * _proposal_grad(p, tr["ac"], chat)
    dh_prev = sum(
        acc.add(name, d, tr.x, tr.h_prev)
        for name, d in (("forget", daf), ("input", dai), ("output", dao), ("candidate", dac))
    )
    return dh_prev, dct * f


def _back_gnu(p, tr: StepTrace, dh, dc, acc: _Accumulator):
    z, hhat, h_prev = tr["z"], tr["hhat"], tr.h_prev
    daz = dh * (h_prev - hhat) * z * (1.0 - z)
    dah = dh * (1.0 - z) * _proposal_grad(p, tr["ah"], hhat)
    dh_prev = dh * z
    dh_prev = dh_prev + acc.add("update", daz, tr.x, h_prev)
    dh_prev = dh_prev + acc.add("proposal", dah, tr.x, h_prev)
    return dh_prev, None


def _combine_grads(tr: StepTrace, dh, shifted: bool):
    """Split dh over the two ReLU terms; return (d keep, d take, d u)."""
    u = tr["u"]
    dkeep = dh * (tr["keep"] > 0)
    dtake = dh * (tr["take"] > 0)
    if shifted:
        du = dkeep * (u < 1) - dtake * (u > -1)
    else:
        du = dkeep * (u < 0) - dtake * (u > 0)
    return dkeep, dtake, du


def _back_agnu(p, tr: StepTrace, dh, dc, acc: _Accumulator):
    dkeep, dtake, du = _combine_grads(tr, dh, shifted=False)
    dah = dtake * _proposal_grad(p, tr["ah"], tr["hhat"])
    dh_prev = dkeep
    dh_prev = dh_prev + acc.add("update", du, tr.x, tr.h_prev)
    dh_prev = dh_prev + acc.add("proposal", dah, tr.x, tr.h_prev)
    return dh_prev, None


def _back_agru_family(p, tr: StepTrace, dh, acc: _Accumulator, shifted: bool):
    dkeep, dtake, du = _combine_grads(tr, dh, shifted)
    dah = dtake * _proposal_grad(p, tr["ah"], tr["hhat"])
    dhr = acc.add("proposal", dah, tr.x, tr["hr"])
    dreset_in = dhr * (tr["reset_in"] > 0)
    dr = dreset_in * (tr["r"] < 0)
    dh_prev = dkeep + dreset_in
    dh_prev = dh_prev + acc.add("update", du, tr.x, tr.h_prev)
    dh_prev = dh_prev + acc.add("reset", dr, tr.x, tr.h_prev)
    return dh_prev, None


def _back_agru(p, tr: StepTrace, dh, dc, acc: _Accumulator):
    return _back_agru_family(p, tr, dh, acc, shifted=False)


def _back_agru_shifted(p, tr: StepTrace, dh, dc, acc: _Accumulator):
    return _back_agru_family(p, tr, dh, acc, shifted=True)


def _back_alstm(p, tr: StepTrace, dh, dc, acc: _Accumulator):
    dco = dh * activation_grad(p.output_activation, tr["co"], tr["h"])
    dct = dc + dco
    dkeep = dct * (tr["keep"] > 0)
    dtake = dct * (tr["take"] > 0)
    daf = -dkeep * (tr["af"] > 0)
    dai = -dtake * (tr["ai"] > 0)
    dao = -dco * (tr["ao"] > 0)
    dac = dtake * _proposal_grad(p, tr["ac"], tr["chat"])
    dh_prev = sum(
        acc.add(name, d, tr.x, tr.h_prev)
        for name, d in (("forget", daf), ("input", dai), ("output", dao), ("candidate", dac))
    )
    return dh_prev, dkeep


BackwardFn = Callable[..., tuple[np.ndarray, np.ndarray | None]]

BACKWARD_FUNCTIONS: dict[CellKind, BackwardFn] = {
    CellKind.SIMPLE_RNN: _back_simple_rnn,
    CellKind.GRU: _back_gru,
    CellKind.LSTM: _back_lstm,
    CellKind.GNU: _back_gnu,
    CellKind.AGNU: _back_agnu,
    CellKind.AGRU: _back_agru,
    CellKind.AGRU_SHIFTED: _back_agru_shifted,
    CellKind.ALSTM: _back_alstm,
}


def bptt(
    p: CellParams,
    r: ReadoutParams,
    xs: Sequence[np.ndarray],
    traces: Sequence[StepTrace] | None,
    output_grad: np.ndarray,
    *,
    wrt_logits: bool = False,
) -> Gradients:
    """Exact reverse-mode gradients of a loss applied to the final readout.

    *output_grad* is dL/d(readout output).  With *wrt_logits* it is taken as
    dL/d(readout pre-activation) instead; that is how softmax plus
    cross-entropy is fed in.
    """
    if traces is None:
        raise TrainingError("bptt needs the traces of a recorded run (record=True)")
    if len(traces) != len(xs):
        raise TrainingError(f"bptt needs one trace per step: {len(xs)} steps, {len(traces)} traces")
    if not traces:
        raise TrainingError("bptt of an empty sequence")

    h_final = traces[-1]["h"]
    pre = matvec(r.W, h_final) + r.b
    out = apply_activation(r.activation, pre)
    g = np.asarray(output_grad, dtype=np.float64)
    if g.shape != out.shape:
        raise ShapeError(f"output gradient has shape {g.shape}, readout output {out.shape}")
    if wrt_logits or r.activation is ActivationKind.IDENTITY:
        dpre = g
    elif r.activation is ActivationKind.SOFTMAX:
        dpre = softmax_backward(out, g)
    else:
        dpre = g * activation_grad(r.activation, pre, out)

    readout = {
        "W": _outer_sum(dpre, h_final),
        "b": dpre if dpre.ndim == 1 else dpre.sum(axis=0),
    }
    dh = dpre @ r.W
    dc = np.zeros_like(dh) if p.kind.has_cell_state else None

    acc = _Accumulator(p)
    backward = BACKWARD_FUNCTIONS[p.kind]
    norms = [0.0] * len(traces)
    for t in reversed(range(len(traces))):
        norms[t] = float(np.linalg.norm(dh))
        dh, dc = backward(p, traces[t], dh, dc, acc)
    logger.debug("bptt %s over %d steps, |dL/dh_1| = %g", p.kind.value, len(traces), norms[0])
    return Gradients(acc.gradients(), readout, norms)


def global_norm(grads: dict[str, np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))


def clip_by_global_norm(
    grads: dict[str, np.ndarray], max_norm: float
) -> dict[str, np.ndarray]:
    """Scale all gradients together so their joint norm is at most *max_norm*."""
    if max_norm <= 0:
        raise TrainingError(f"clip norm must be positive, got {max_norm}")
    norm = global_norm(grads)
    if norm <= max_norm:
        return dict(grads)
    scale = max_norm / norm
    return {name: g * scale for name, g in grads.items()}
