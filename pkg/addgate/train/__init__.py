"""Backpropagation through time, losses, Adam and the training loop."""

from addgate.train.backprop import (
    BACKWARD_FUNCTIONS,
    Gradients,
    TrainingError,
    bptt,
    clip_by_global_norm,
    global_norm,
    named_arrays,
    with_arrays,
)
from addgate.train.experiments import (
    ADDING_BASELINE_MSE,
    ADDITIVE_PROPOSAL,
    ADDITIVE_RECURRENT_RADIUS,
    TRIAL_STREAM,
    TrialResult,
    TrialSummary,
    run_trials,
    summarize_trials,
)
from addgate.train.gradcheck import (
    GradCheckResult,
    analytic_gradients,
    check_gradients,
    compare_gradients,
    kink_distance,
    numerical_gradients,
    sequence_loss,
)
from addgate.train.losses import (
    LossKind,
    accuracy,
    cross_entropy,
    cross_entropy_logit_grad,
    loss_mse,
    mse_grad,
    softmax_cross_entropy,
)
from addgate.train.optim import AdamState, adam_step
from addgate.train.trainer import (
    HISTORY_COLUMNS,
    EpochMetrics,
    SequenceDataset,
    TrainConfig,
    TrainResult,
    evaluate,
    forward,
    train,
    write_history_csv,
)

__all__ = [
    "ADDING_BASELINE_MSE",
    "ADDITIVE_PROPOSAL",
    "ADDITIVE_RECURRENT_RADIUS",
    "AdamState",
    "BACKWARD_FUNCTIONS",
    "EpochMetrics",
    "GradCheckResult",
    "Gradients",
    "HISTORY_COLUMNS",
    "LossKind",
    "SequenceDataset",
    "TrainConfig",
    "TrainResult",
    "TRIAL_STREAM",
    "TrainingError",
    "TrialResult",
    "TrialSummary",
    "accuracy",
    "adam_step",
    "analytic_gradients",
    "bptt",
    "check_gradients",
    "clip_by_global_norm",
    "compare_gradients",
    "cross_entropy",
    "cross_entropy_logit_grad",
    "evaluate",
    "forward",
    "global_norm",
    "kink_distance",
    "loss_mse",
    "mse_grad",
    "named_arrays",
    "numerical_gradients",
    "run_trials",
    "sequence_loss",
    "softmax_cross_entropy",
    "summarize_trials",
    "train",
    "with_arrays",
]
