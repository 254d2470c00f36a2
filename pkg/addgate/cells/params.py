"""Cell kinds and their parameter containers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from addgate.tensor import ActivationKind, Rng, ShapeError


class CellError(ValueError):
    """Raised for invalid cell configurations or states."""


class CellKind(Enum):
    """The eight recurrent cell variants."""

    SIMPLE_RNN = "rnn"
    GRU = "gru"
    LSTM = "lstm"
    GNU = "gnu"
    AGNU = "agnu"
    AGRU = "agru"
    AGRU_SHIFTED = "agru-shifted"
    ALSTM = "alstm"

    @property
    def additive(self) -> bool:
        """True for the ReLU-and-addition gated kinds."""
        return self in _ADDITIVE

    @property
    def has_cell_state(self) -> bool:
        return self in (CellKind.LSTM, CellKind.ALSTM)


_ADDITIVE = frozenset(
    {CellKind.AGNU, CellKind.AGRU, CellKind.AGRU_SHIFTED, CellKind.ALSTM}
)

# Fixed gate order per kind; parameter files and flattening follow it.
GATE_NAMES: dict[CellKind, tuple[str, ...]] = {
    CellKind.SIMPLE_RNN: ("hidden",),
    CellKind.GRU: ("update", "reset", "proposal"),
    CellKind.LSTM: ("forget", "input", "output", "candidate"),
    CellKind.GNU: ("update", "proposal"),
    CellKind.AGNU: ("update", "proposal"),
    CellKind.AGRU: ("update", "reset", "proposal"),
    CellKind.AGRU_SHIFTED: ("update", "reset", "proposal"),
    CellKind.ALSTM: ("forget", "input", "output", "candidate"),
}

# (proposal activation, output activation).  The output activation is only
# read by the LSTM family (phi_h applied to the cell state).
DEFAULT_ACTIVATIONS: dict[CellKind, tuple[ActivationKind, ActivationKind]] = {
    CellKind.SIMPLE_RNN: (ActivationKind.TANH, ActivationKind.IDENTITY),
    CellKind.GRU: (ActivationKind.TANH, ActivationKind.IDENTITY),
    CellKind.LSTM: (ActivationKind.TANH, ActivationKind.TANH),
    CellKind.GNU: (ActivationKind.SIGMOID, ActivationKind.IDENTITY),
    CellKind.AGNU: (ActivationKind.RELU, ActivationKind.IDENTITY),
    CellKind.AGRU: (ActivationKind.RELU, ActivationKind.IDENTITY),
    CellKind.AGRU_SHIFTED: (ActivationKind.TANH, ActivationKind.IDENTITY),
    CellKind.ALSTM: (ActivationKind.RELU, ActivationKind.RELU),
}


@dataclass(frozen=True)
class GateParams:
    """Input kernel W (units x input_dim), recurrent kernel U (units x units), bias b."""

    W: np.ndarray
    U: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        units = self.b.shape[0] if self.b.ndim == 1 else -1
        if (
            self.W.ndim != 2
            or self.U.shape != (units, units)
            or self.W.shape[0] != units
        ):
            raise ShapeError(
                f"inconsistent gate shapes: W {self.W.shape}, U {self.U.shape}, b {self.b.shape}"
            )

    @property
    def units(self) -> int:
        return self.b.shape[0]

    @property
    def input_dim(self) -> int:
        return self.W.shape[1]

    def arrays(self) -> dict[str, np.ndarray]:
        return {"W": self.W, "U": self.U, "b": self.b}

    @classmethod
    def zeros(cls, input_dim: int, units: int) -> GateParams:
        return cls(
            np.zeros((units, input_dim)), np.zeros((units, units)), np.zeros(units)
        )


@dataclass(frozen=True)
class CellParams:
    """All gate parameters of one cell, plus its activations.

    Instances are treated as immutable: training produces new CellParams.
    """

    kind: CellKind
    input_dim: int
    units: int
    gates: dict[str, GateParams]
    proposal_activation: ActivationKind = field(default=None)  # type: ignore[assignment]
    output_activation: ActivationKind = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        default_prop, default_out = DEFAULT_ACTIVATIONS[self.kind]
        if self.proposal_activation is None:
            object.__setattr__(self, "proposal_activation", default_prop)
        if self.output_activation is None:
            object.__setattr__(self, "output_activation", default_out)
        self._validate()

    def _validate(self) -> None:
        expected = GATE_NAMES[self.kind]
        if tuple(self.gates) != expected:
            raise CellError(
                f"{self.kind.value} needs gates {list(expected)}, got {list(self.gates)}"
            )
        for name, gate in self.gates.items():
            if gate.input_dim != self.input_dim or gate.units != self.units:
                raise ShapeError(
                    f"gate {name!r} has shape {gate.units}x{gate.input_dim}, "
                    f"cell declares {self.units}x{self.input_dim}"
                )
        for act in (self.proposal_activation, self.output_activation):
            if act is ActivationKind.SOFTMAX:
                raise CellError("softmax is a readout activation, not a cell activation")
        if self.kind is CellKind.AGRU_SHIFTED:
            if self.proposal_activation is not ActivationKind.TANH:
                raise CellError(
                    "shifted aGRU requires a tanh proposal activation, "
                    f"got {self.proposal_activation.value}"
                )
        elif self.kind.additive:
            if not self.proposal_activation.nonnegative:
                raise CellError(
                    f"{self.kind.value} requires a non-negative proposal activation "
                    f"(relu or sigmoid), got {self.proposal_activation.value}"
                )
            if self.kind is CellKind.ALSTM and not self.output_activation.nonnegative:
                raise CellError(
                    "alstm requires a non-negative output activation "
                    f"(relu or sigmoid), got {self.output_activation.value}"
                )

    def gate(self, name: str) -> GateParams:
        return self.gates[name]

    def replace_gates(self, gates: dict[str, GateParams]) -> CellParams:
        """Return a copy with *gates* swapped in."""
        return CellParams(
            self.kind,
            self.input_dim,
            self.units,
            gates,
            self.proposal_activation,
            self.output_activation,
        )


@dataclass(frozen=True)
class ReadoutParams:
    """Affine readout ``activation(W h + b)``."""

    W: np.ndarray
    b: np.ndarray
    activation: ActivationKind = ActivationKind.IDENTITY

    def __post_init__(self) -> None:
        if self.W.ndim != 2 or self.b.shape != (self.W.shape[0],):
            raise ShapeError(
                f"inconsistent readout shapes: W {self.W.shape}, b {self.b.shape}"
            )

    @property
    def units(self) -> int:
        return self.W.shape[1]

    @property
    def output_dim(self) -> int:
        return self.W.shape[0]

    def arrays(self) -> dict[str, np.ndarray]:
        return {"W": self.W, "b": self.b}


def glorot_uniform(rng: Rng, fan_out: int, fan_in: int) -> np.ndarray:
    """Uniform in +-sqrt(6 / (fan_in + fan_out)), shape (fan_out, fan_in)."""
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(fan_out * fan_in, -limit, limit).reshape(fan_out, fan_in)


def limit_spectral_radius(U: np.ndarray, radius: float) -> np.ndarray:
    """Scale *U* down so that its spectral radius is at most *radius*."""
    rho = float(np.max(np.abs(np.linalg.eigvals(U))))
    return U if rho <= radius else U * (radius / rho)


def init_cell_params(
    kind: CellKind,
    input_dim: int,
    units: int,
    rng: Rng,
    *,
    proposal_activation: ActivationKind | None = None,
    output_activation: ActivationKind | None = None,
    recurrent_radius: float | None = None,
) -> CellParams:
    """Glorot-uniform kernels and zero biases for every gate of *kind*.

    With *recurrent_radius* each recurrent kernel U is scaled down to that
    spectral radius.
    """
    if input_dim < 1 or units < 1:
        raise CellError(f"input_dim and units must be >= 1, got {input_dim}, {units}")
    if recurrent_radius is not None and not recurrent_radius > 0:
        raise CellError(f"recurrent_radius must be > 0, got {recurrent_radius}")
    gates = {}
    for name in GATE_NAMES[kind]:
        W = glorot_uniform(rng, units, input_dim)
        U = glorot_uniform(rng, units, units)
        if recurrent_radius is not None:
            U = limit_spectral_radius(U, recurrent_radius)
        gates[name] = GateParams(W, U, np.zeros(units))
    return CellParams(
        kind, input_dim, units, gates, proposal_activation, output_activation
    )


def init_readout(
    units: int,
    output_dim: int,
    rng: Rng,
    activation: ActivationKind = ActivationKind.IDENTITY,
) -> ReadoutParams:
    return ReadoutParams(
        glorot_uniform(rng, output_dim, units), np.zeros(output_dim), activation
    )
