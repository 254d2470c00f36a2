"""Repeated seeded training trials and their summary statistics."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from addgate.cells import CellKind, init_cell_params, init_readout
from addgate.tensor import ActivationKind, Rng
from addgate.train.losses import LossKind
from addgate.train.trainer import SequenceDataset, TrainConfig, TrainResult, evaluate, train

logger = logging.getLogger(__name__)

ADDING_BASELINE_MSE = 1.0 / 6.0
SUCCESS_MARGIN = 0.01

# Training recipe for the addition-based cells.  A sigmoid proposal keeps each
# step from adding more than 1 to the state; recurrent kernels start at
# spectral radius <= 1.
ADDITIVE_PROPOSAL: dict[CellKind, ActivationKind] = {
    CellKind.AGNU: ActivationKind.SIGMOID,
    CellKind.AGRU: ActivationKind.SIGMOID,
    CellKind.ALSTM: ActivationKind.SIGMOID,
}
ADDITIVE_RECURRENT_RADIUS = 1.0

# Data splits draw from Rng(seed).spawn(0) and spawn(1).
TRIAL_STREAM = 2


@dataclass
class TrialResult:
    kind: CellKind
    trial: int
    seed: int
    test_loss: float
    test_metric: float
    result: TrainResult


@dataclass(frozen=True)
class TrialSummary:
    """``top`` is the best-side quantile of the test metric (quantile 0 = best of N)."""

    kind: CellKind
    trials: int
    top: float
    mean: float
    median: float
    successes: int


def run_trials(
    kind: CellKind,
    units: int,
    train_set: SequenceDataset,
    test_set: SequenceDataset,
    cfg: TrainConfig,
    trials: int,
    *,
    output_dim: int = 1,
    proposal_activation: ActivationKind | None = None,
) -> list[TrialResult]:
    """Train *trials* freshly initialized models; trial k draws from
    ``Rng(cfg.seed).spawn(TRIAL_STREAM).spawn(k)``.

    Addition-based kinds default to :data:`ADDITIVE_PROPOSAL` and recurrent
    kernels limited to :data:`ADDITIVE_RECURRENT_RADIUS`.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    readout_act = (
        ActivationKind.SOFTMAX
        if cfg.loss_kind is LossKind.CROSS_ENTROPY
        else ActivationKind.IDENTITY
    )
    input_dim = train_set.inputs.shape[2]
    if proposal_activation is None:
        proposal_activation = ADDITIVE_PROPOSAL.get(kind)
    radius = ADDITIVE_RECURRENT_RADIUS if kind.additive else None
    base = Rng(cfg.seed).spawn(TRIAL_STREAM)
    out: list[TrialResult] = []
    for k in range(trials):
        rng = base.spawn(k)
        p = init_cell_params(
            kind, input_dim, units, rng,
            proposal_activation=proposal_activation, recurrent_radius=radius,
        )
        r = init_readout(units, output_dim, rng, readout_act)
        seed = rng.integers(0, 2**31)
        result = train(p, r, train_set, replace(cfg, seed=seed), test=test_set)
        loss, metric = evaluate(result.params, result.readout, test_set, cfg.loss_kind)
        logger.info("%s trial %d: test loss=%.6g metric=%.6g", kind.value, k, loss, metric)
        out.append(TrialResult(kind, k, seed, loss, metric, result))
    return out


def summarize_trials(
    results: list[TrialResult],
    *,
    quantile: float = 0.0,
    higher_is_better: bool = False,
    success_below: float | None = ADDING_BASELINE_MSE - SUCCESS_MARGIN,
) -> TrialSummary:
    """Summarize test metrics; a trial succeeds when its metric is below *success_below*.

    For accuracy (``higher_is_better``) the top quantile is taken from the
    upper end and *success_below* is ignored.
    """
    if not results:
        raise ValueError("no trials to summarize")
    if not 0.0 <= quantile <= 1.0:
        raise ValueError(f"quantile must be in [0, 1], got {quantile}")
    scores = np.array([t.test_metric for t in results])
    q = 1.0 - quantile if higher_is_better else quantile
    successes = 0
    if not higher_is_better and success_below is not None:
        successes = int(np.sum(scores < success_below))
    return TrialSummary(
        results[0].kind,
        len(results),
        float(np.quantile(scores, q)),
        float(np.mean(scores)),
        float(np.median(scores)),
        successes,
    )
