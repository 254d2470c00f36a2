"""Recurrent cells: conventional and addition-based gating."""

from addgate.cells.params import (
    DEFAULT_ACTIVATIONS,
    GATE_NAMES,
    CellError,
    CellKind,
    CellParams,
    GateParams,
    ReadoutParams,
    init_cell_params,
    init_readout,
    limit_spectral_radius,
)
from addgate.cells.params_file import (
    ParamsFileError,
    is_params_file,
    load_params,
    save_params,
)
from addgate.cells.steps import (
    STEP_FUNCTIONS,
    CellState,
    NegativeStateError,
    SequenceResult,
    StepTrace,
    additive_gate,
    forget_gate,
    initial_state,
    readout,
    relu_arguments,
    run_sequence,
    shifted_additive_gate,
    step,
    step_agnu,
    step_agru,
    step_agru_shifted,
    step_alstm,
    step_gnu,
    step_gru,
    step_lstm,
    step_simple_rnn,
)

__all__ = [
    "DEFAULT_ACTIVATIONS",
    "GATE_NAMES",
    "STEP_FUNCTIONS",
    "CellError",
    "CellKind",
    "CellParams",
    "CellState",
    "GateParams",
    "NegativeStateError",
    "ParamsFileError",
    "ReadoutParams",
    "SequenceResult",
    "StepTrace",
    "additive_gate",
    "forget_gate",
    "init_cell_params",
    "init_readout",
    "limit_spectral_radius",
    "initial_state",
    "is_params_file",
    "load_params",
    "readout",
    "relu_arguments",
    "run_sequence",
    "save_params",
    "shifted_additive_gate",
    "step",
    "step_agnu",
    "step_agru",
    "step_agru_shifted",
    "step_alstm",
    "step_gnu",
    "step_gru",
    "step_lstm",
    "step_simple_rnn",
]
