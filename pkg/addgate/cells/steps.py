"""Forward evaluation of every cell kind.

Each ``step_<kind>(p, s, x)`` returns the next :class:`CellState` and a
:class:`StepTrace` with the intermediates BPTT needs.  States and inputs may
carry a leading batch axis.  The addition-based steps multiply only inside
``matvec`` (weights times variables); their gating and combination stages use
addition, negation and comparison with zero only.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field

import numpy as np

from addgate.cells.params import CellError, CellKind, CellParams, GateParams, ReadoutParams
from addgate.tensor import (
    ActivationKind,
    ShapeError,
    apply_activation,
    matvec,
    relu,
    relu_pos_neg,
    sigmoid,
)

logger = logging.getLogger(__name__)


class NegativeStateError(CellError):
    """Raised when an addition-based cell receives a negative state."""


@dataclass(frozen=True)
class CellState:
    """Recurrent state: h, plus the cell state c for the LSTM family."""

    h: np.ndarray
    c: np.ndarray | None = None


@dataclass
class StepTrace:
    """Intermediates of one step, retained for backpropagation."""

    x: np.ndarray
    h_prev: np.ndarray
    c_prev: np.ndarray | None = None
    values: dict[str, np.ndarray] = field(default_factory=dict)

    def __getitem__(self, key: str) -> np.ndarray:
        return self.values[key]


@dataclass
class SequenceResult:
    """Output of :func:`run_sequence`."""

    final: CellState
    states: list[CellState]
    traces: list[StepTrace] | None = None

    @property
    def hs(self) -> list[np.ndarray]:
        return [s.h for s in self.states]


def _affine(g: GateParams, x: np.ndarray, h: np.ndarray) -> np.ndarray:
    return matvec(g.W, x) + matvec(g.U, h) + g.b


def _check_dims(p: CellParams, s: CellState, x: np.ndarray) -> None:
    if x.shape[-1] != p.input_dim:
        raise ShapeError(f"input has dimension {x.shape[-1]}, cell expects {p.input_dim}")
    if s.h.shape[-1] != p.units:
        raise ShapeError(f"state has dimension {s.h.shape[-1]}, cell expects {p.units}")
    if s.h.shape[:-1] != x.shape[:-1]:
        raise ShapeError(f"batch shape mismatch: state {s.h.shape}, input {x.shape}")


def _require_nonnegative(name: str, v: np.ndarray) -> None:
    if np.any(v < 0):
        raise NegativeStateError(
            f"addition-based cells require a non-negative {name}; "
            f"got minimum {float(np.min(v.astype(np.float64)))!r}"
        )


def _require_cell_state(s: CellState) -> np.ndarray:
    if s.c is None:
        raise CellError("LSTM-family cells need a cell state c")
    return s.c


def forget_gate(h: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Addition-only forget gate ``(h + u^-)^+``.

    Keeps h for u >= 0 and extinguishes it for u <= -h, the same limits as
    ``sigmoid(u) * h``.
    """
    return relu(h + np.minimum(u, 0))


def _additive_terms(
    h: np.ndarray, u: np.ndarray, hhat: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    u_pos, u_neg = relu_pos_neg(u)
    return h + u_neg, hhat - u_pos


def _shifted_terms(
    h: np.ndarray, u: np.ndarray, hhat: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    return h + np.minimum(u - 1, 0) + 1, hhat - np.maximum(u + 1, 0) + 1


def additive_gate(h: np.ndarray, u: np.ndarray, hhat: np.ndarray) -> np.ndarray:
    """Combine state and proposal: ``(h + u^-)^+ + (hhat - u^+)^+``.

    Works unchanged on float, integer and instrumented object arrays.
    """
    keep, take = _additive_terms(h, u, hhat)
    return relu(keep) + relu(take)


def shifted_additive_gate(h: np.ndarray, u: np.ndarray, hhat: np.ndarray) -> np.ndarray:
    """Shifted combination for states in about [-1, 1].

    ``(h + (u-1)^- + 1)^+ + (hhat - (u+1)^+ + 1)^+ - 1``.
    """
    keep, take = _shifted_terms(h, u, hhat)
    return relu(keep) + relu(take) - 1


def step_simple_rnn(p: CellParams, s: CellState, x: np.ndarray) -> tuple[CellState, StepTrace]:
    _check_dims(p, s, x)
    a = _affine(p.gates["hidden"], x, s.h)
    h = apply_activation(p.proposal_activation, a)
    return CellState(h), StepTrace(x, s.h, values={"a": a, "h": h})


def step_gru(p: CellParams, s: CellState, x: np.ndarray) -> tuple[CellState, StepTrace]:
    _check_dims(p, s, x)
    h_prev = s.h
    az = _affine(p.gates["update"], x, h_prev)
    z = sigmoid(az)
    ar = _affine(p.gates["reset"], x, h_prev)
    r = sigmoid(ar)
    rh = r * h_prev
    ah = _affine(p.gates["proposal"], x, rh)
    hhat = apply_activation(p.proposal_activation, ah)
    h = z * h_prev + (1.0 - z) * hhat
    values = {"az": az, "z": z, "ar": ar, "r": r, "rh": rh, "ah": ah, "hhat": hhat, "h": h}
    return CellState(h), StepTrace(x, h_prev, values=values)


def step_lstm(p: CellParams, s: CellState, x: np.ndarray) -> tuple[CellState, StepTrace]:
    c_prev = _require_cell_state(s)
    _check_dims(p, s, x)
    h_prev = s.h
    af = _affine(p.gates["forget"], x, h_prev)
    ai = _affine(p.gates["input"], x, h_prev)
    ao = _affine(p.gates["output"], x, h_prev)
    ac = _affine(p.gates["candidate"], x, h_prev)
    f, i, o = sigmoid(af), sigmoid(ai), sigmoid(ao)
    chat = apply_activation(p.proposal_activation, ac)
    c = f * c_prev + i * chat
    tc = apply_activation(p.output_activation, c)
    h = o * tc
    values = {
        "af": af, "ai": ai, "ao": ao, "ac": ac,
        "f": f, "i": i, "o": o, "chat": chat,
        "c": c, "tc": tc, "h": h,
    }
    return CellState(h, c), StepTrace(x, h_prev, c_prev, values)


def step_gnu(p: CellParams, s: CellState, x: np.ndarray) -> tuple[CellState, StepTrace]:
    _check_dims(p, s, x)
    h_prev = s.h
    az = _affine(p.gates["update"], x, h_prev)
    z = sigmoid(az)
    ah = _affine(p.gates["proposal"], x, h_prev)
    hhat = apply_activation(p.proposal_activation, ah)
    h = z * h_prev + (1.0 - z) * hhat
    values = {"az": az, "z": z, "ah": ah, "hhat": hhat, "h": h}
    return CellState(h), StepTrace(x, h_prev, values=values)


def step_agnu(p: CellParams, s: CellState, x: np.ndarray) -> tuple[CellState, StepTrace]:
    _check_dims(p, s, x)
    h_prev = s.h
    _require_nonnegative("state h", h_prev)
    u = _affine(p.gates["update"], x, h_prev)
    ah = _affine(p.gates["proposal"], x, h_prev)
    hhat = apply_activation(p.proposal_activation, ah)
    keep, take = _additive_terms(h_prev, u, hhat)
    h = relu(keep) + relu(take)
    values = {"u": u, "ah": ah, "hhat": hhat, "keep": keep, "take": take, "h": h}
    return CellState(h), StepTrace(x, h_prev, values=values)


def _agru_proposal(p: CellParams, x: np.ndarray, h_prev: np.ndarray) -> dict[str, np.ndarray]:
    r = _affine(p.gates["reset"], x, h_prev)
    reset_in = h_prev + np.minimum(r, 0)
    hr = relu(reset_in)
    ah = _affine(p.gates["proposal"], x, hr)
    hhat = apply_activation(p.proposal_activation, ah)
    return {"r": r, "reset_in": reset_in, "hr": hr, "ah": ah, "hhat": hhat}


def step_agru(p: CellParams, s: CellState, x: np.ndarray) -> tuple[CellState, StepTrace]:
    _check_dims(p, s, x)
    h_prev = s.h
    _require_nonnegative("state h", h_prev)
    u = _affine(p.gates["update"], x, h_prev)
    values = _agru_proposal(p, x, h_prev)
    keep, take = _additive_terms(h_prev, u, values["hhat"])
    h = relu(keep) + relu(take)
    values.update({"u": u, "keep": keep, "take": take, "h": h})
    return CellState(h), StepTrace(x, h_prev, values=values)


def step_agru_shifted(p: CellParams, s: CellState, x: np.ndarray) -> tuple[CellState, StepTrace]:
    """aGRU on the stored shifted state ``h' = h - 1``.

    u, r and the proposal are computed from h' itself; the combination is the
    shifted gate.  No clamp is applied to the result.
    """
    if p.proposal_activation is not ActivationKind.TANH:
        raise CellError("shifted aGRU requires a tanh proposal activation")
    _check_dims(p, s, x)
    h_prev = s.h
    u = _affine(p.gates["update"], x, h_prev)
    values = _agru_proposal(p, x, h_prev)
    keep, take = _shifted_terms(h_prev, u, values["hhat"])
    h = relu(keep) + relu(take) - 1
    values.update({"u": u, "keep": keep, "take": take, "h": h})
    return CellState(h), StepTrace(x, h_prev, values=values)


def step_alstm(p: CellParams, s: CellState, x: np.ndarray) -> tuple[CellState, StepTrace]:
    c_prev = _require_cell_state(s)
    _check_dims(p, s, x)
    _require_nonnegative("cell state c", c_prev)
    h_prev = s.h
    af = _affine(p.gates["forget"], x, h_prev)
    ai = _affine(p.gates["input"], x, h_prev)
    ao = _affine(p.gates["output"], x, h_prev)
    ac = _affine(p.gates["candidate"], x, h_prev)
    f, i, o = relu(af), relu(ai), relu(ao)
    chat = apply_activation(p.proposal_activation, ac)
    keep = c_prev - f
    take = chat - i
    c = relu(keep) + relu(take)
    co = c - o
    h = apply_activation(p.output_activation, co)
    values = {
        "af": af, "ai": ai, "ao": ao, "ac": ac,
        "f": f, "i": i, "o": o, "chat": chat,
        "keep": keep, "take": take, "c": c, "co": co, "h": h,
    }
    return CellState(h, c), StepTrace(x, h_prev, c_prev, values)


StepFn = Callable[[CellParams, CellState, np.ndarray], tuple[CellState, StepTrace]]

STEP_FUNCTIONS: dict[CellKind, StepFn] = {
    CellKind.SIMPLE_RNN: step_simple_rnn,
    CellKind.GRU: step_gru,
    CellKind.LSTM: step_lstm,
    CellKind.GNU: step_gnu,
    CellKind.AGNU: step_agnu,
    CellKind.AGRU: step_agru,
    CellKind.AGRU_SHIFTED: step_agru_shifted,
    CellKind.ALSTM: step_alstm,
}


def step(p: CellParams, s: CellState, x: np.ndarray) -> tuple[CellState, StepTrace]:
    """Advance one step with the step function for ``p.kind``."""
    return STEP_FUNCTIONS[p.kind](p, s, x)


def initial_state(p: CellParams, batch: int | None = None) -> CellState:
    """All-zero state (and cell state, for the LSTM family)."""
    shape = (p.units,) if batch is None else (batch, p.units)
    c = np.zeros(shape) if p.kind.has_cell_state else None
    return CellState(np.zeros(shape), c)


def run_sequence(
    p: CellParams,
    init: CellState,
    xs: Iterable[np.ndarray],
    record: bool = False,
) -> SequenceResult:
    """Unroll *p* over *xs*; traces are kept only when *record* is set."""
    fn = STEP_FUNCTIONS[p.kind]
    state = init
    states: list[CellState] = []
    traces: list[StepTrace] | None = [] if record else None
    for x in xs:
        state, trace = fn(p, state, x)
        states.append(state)
        if traces is not None:
            traces.append(trace)
    logger.debug("ran %s over %d steps", p.kind.value, len(states))
    return SequenceResult(state, states, traces)


def readout(r: ReadoutParams, h: np.ndarray) -> np.ndarray:
    """``activation(W h + b)``."""
    if h.shape[-1] != r.units:
        raise ShapeError(f"readout expects dimension {r.units}, got {h.shape[-1]}")
    return apply_activation(r.activation, matvec(r.W, h) + r.b)


def relu_arguments(p: CellParams, trace: StepTrace) -> list[np.ndarray]:
    """Every value fed to a ReLU (or to min/max with zero) during one step.

    Finite-difference checks use these to stay away from kinks.
    """
    v = trace.values
    relu_prop = p.proposal_activation is ActivationKind.RELU
    relu_out = p.output_activation is ActivationKind.RELU
    out: list[np.ndarray] = []
    if p.kind is CellKind.SIMPLE_RNN and relu_prop:
        out.append(v["a"])
    elif p.kind in (CellKind.GRU, CellKind.GNU) and relu_prop:
        out.append(v["ah"])
    elif p.kind is CellKind.LSTM:
        if relu_prop:
            out.append(v["ac"])
        if relu_out:
            out.append(v["c"])
    elif p.kind is CellKind.AGNU:
        out += [v["u"], v["keep"], v["take"]]
        if relu_prop:
            out.append(v["ah"])
    elif p.kind in (CellKind.AGRU, CellKind.AGRU_SHIFTED):
        out += [v["r"], v["reset_in"], v["keep"], v["take"]]
        if p.kind is CellKind.AGRU:
            out.append(v["u"])
        else:
            out += [v["u"] - 1, v["u"] + 1]
        if relu_prop:
            out.append(v["ah"])
    elif p.kind is CellKind.ALSTM:
        out += [v["af"], v["ai"], v["ao"], v["keep"], v["take"]]
        if relu_prop:
            out.append(v["ac"])
        if relu_out:
            out.append(v["co"])
    return out
