"""Tests for the training loop, history CSV and trial summaries."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import pytest

from addgate.cells import CellKind, init_cell_params, init_readout, initial_state, run_sequence
from addgate.tasks import adding_to_dataset, gen_adding_dataset
from addgate.tensor import ActivationKind, Rng, ShapeError
from addgate.train import (
    HISTORY_COLUMNS,
    EpochMetrics,
    LossKind,
    SequenceDataset,
    TRIAL_STREAM,
    TrainConfig,
    TrainingError,
    TrialResult,
    evaluate,
    named_arrays,
    run_trials,
    summarize_trials,
    train,
    write_history_csv,
)


def _adding(count: int = 64, n: int = 10, seed: int = 0) -> SequenceDataset:
    return adding_to_dataset(gen_adding_dataset(Rng(seed), count, n))


def _model(kind: CellKind = CellKind.AGRU, units: int = 4, seed: int = 1):
    rng = Rng(seed)
    return init_cell_params(kind, 2, units, rng), init_readout(units, 1, rng)


class TestTrainConfig:
    """Configuration validation."""

    @pytest.mark.parametrize(
        "kwargs",
        [{"batch_size": 0}, {"epochs": 0}, {"lr": -0.1}, {"clip_norm": 0.0}],
    )
    def test_invalid(self, kwargs: dict[str, float]) -> None:
        with pytest.raises(TrainingError):
            TrainConfig(**kwargs)

    def test_defaults(self) -> None:
        cfg = TrainConfig()
        assert cfg.batch_size == 64
        assert cfg.lr == 1e-3
        assert cfg.clip_norm is None


class TestSequenceDataset:
    """Dataset shape checks."""

    def test_count_mismatch(self) -> None:
        with pytest.raises(ShapeError, match="targets"):
            SequenceDataset(np.zeros((3, 4, 2)), np.zeros((2, 1)))

    def test_rank(self) -> None:
        with pytest.raises(ShapeError):
            SequenceDataset(np.zeros((3, 4)), np.zeros((3, 1)))

    def test_take(self) -> None:
        data = _adding(10)
        part = data.take(np.array([3, 1]))
        assert len(part) == 2
        assert np.array_equal(part.inputs[0], data.inputs[3])
        assert part.length == 10


class TestTrain:
    """The mini-batch Adam loop."""

    def test_zero_lr_leaves_parameters(self) -> None:
        p, r = _model()
        result = train(p, r, _adding(), TrainConfig(batch_size=16, epochs=3, lr=0.0))
        before = named_arrays(p, r)
        for name, arr in named_arrays(result.params, result.readout).items():
            assert np.array_equal(arr, before[name]), name
        losses = [row.loss for row in result.history if row.split == "train"]
        assert losses[1:] == [pytest.approx(losses[0])] * 3

    def test_history_starts_at_epoch_zero(self) -> None:
        p, r = _model()
        result = train(
            p, r, _adding(), TrainConfig(batch_size=32, epochs=2), test=_adding(16, seed=9)
        )
        assert [(row.epoch, row.split) for row in result.history] == [
            (0, "train"), (0, "test"),
            (1, "train"), (1, "test"),
            (2, "train"), (2, "test"),
        ]
        assert result.first("test").epoch == 0
        assert result.last("test").epoch == 2

    def test_deterministic(self) -> None:
        data = _adding()
        cfg = TrainConfig(batch_size=8, epochs=2, seed=5)
        a = train(*_model(), data, cfg)
        b = train(*_model(), data, cfg)
        assert a.history == b.history
        for name, arr in named_arrays(a.params, a.readout).items():
            assert np.array_equal(arr, named_arrays(b.params, b.readout)[name])

    def test_seed_changes_order(self) -> None:
        data = _adding()
        a = train(*_model(), data, TrainConfig(batch_size=8, epochs=1, seed=1))
        b = train(*_model(), data, TrainConfig(batch_size=8, epochs=1, seed=2))
        assert a.history[-1] != b.history[-1]

    def test_learns_a_little(self) -> None:
        """A few epochs on a short adding task lower the training loss."""
        p, r = _model(CellKind.GRU, units=8)
        result = train(p, r, _adding(256, n=6), TrainConfig(batch_size=16, epochs=15, lr=1e-2))
        assert result.last("train").loss < result.first("train").loss

    def test_does_not_mutate_inputs(self) -> None:
        p, r = _model()
        before = {k: v.copy() for k, v in named_arrays(p, r).items()}
        train(p, r, _adding(), TrainConfig(batch_size=16, epochs=1, lr=0.1))
        for name, arr in named_arrays(p, r).items():
            assert np.array_equal(arr, before[name])

    def test_clipping(self) -> None:
        p, r = _model()
        result = train(p, r, _adding(), TrainConfig(batch_size=16, epochs=1, clip_norm=1e-3))
        assert np.isfinite(result.last("train").loss)

    def test_empty_dataset(self) -> None:
        p, r = _model()
        empty = SequenceDataset(np.zeros((0, 4, 2)), np.zeros((0, 1)))
        with pytest.raises(TrainingError, match="empty"):
            train(p, r, empty, TrainConfig())

    def test_non_finite_loss(self) -> None:
        p, r = _model(CellKind.SIMPLE_RNN)
        data = _adding(8)
        data.targets[0, 0] = np.inf
        with pytest.raises(TrainingError, match="non-finite loss"):
            train(p, r, data, TrainConfig(batch_size=8, epochs=1))

    def test_cross_entropy_needs_softmax(self) -> None:
        p, r = _model()
        labels = SequenceDataset(np.zeros((4, 3, 2)), np.zeros(4, dtype=np.int64))
        with pytest.raises(TrainingError, match="softmax"):
            train(p, r, labels, TrainConfig(loss_kind=LossKind.CROSS_ENTROPY))

    def test_classification(self) -> None:
        """Two separable classes: sequences of ones vs zeros."""
        rng = Rng(3)
        inputs = np.concatenate([np.ones((20, 5, 2)), np.zeros((20, 5, 2))])
        labels = np.array([1] * 20 + [0] * 20, dtype=np.int64)
        data = SequenceDataset(inputs, labels)
        p = init_cell_params(CellKind.GRU, 2, 4, rng)
        r = init_readout(4, 2, rng, ActivationKind.SOFTMAX)
        cfg = TrainConfig(batch_size=8, epochs=20, lr=0.05, loss_kind=LossKind.CROSS_ENTROPY)
        result = train(p, r, data, cfg)
        loss, acc = evaluate(result.params, result.readout, data, LossKind.CROSS_ENTROPY)
        assert acc == 1.0
        assert loss < result.first("train").loss


class TestEvaluate:
    """Evaluation in chunks."""

    def test_chunking_does_not_change_result(self) -> None:
        p, r = _model()
        data = _adding(50)
        whole = evaluate(p, r, data, LossKind.MSE)
        chunked = evaluate(p, r, data, LossKind.MSE, batch_size=7)
        assert chunked == pytest.approx(whole, rel=1e-12)

    def test_metric_is_mse_for_regression(self) -> None:
        p, r = _model()
        loss, metric = evaluate(p, r, _adding(20), LossKind.MSE)
        assert loss == metric


class TestHistoryCsv:
    """History file output."""

    ROWS = [EpochMetrics(0, "train", 0.25, 0.25), EpochMetrics(1, "test", 0.1, 0.1)]

    def test_columns(self, tmp_path: Path) -> None:
        path = tmp_path / "h.csv"
        write_history_csv(self.ROWS, path)
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        assert tuple(rows[0]) == HISTORY_COLUMNS
        assert rows[1] == ["0", "train", "0.25", "0.25"]

    def test_extra_columns_and_append(self, tmp_path: Path) -> None:
        path = tmp_path / "h.csv"
        write_history_csv(self.ROWS, path, extra={"cell": "agru", "trial": "0"}, append=True)
        write_history_csv(self.ROWS, path, extra={"cell": "gru", "trial": "0"}, append=True)
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["cell", "trial", *HISTORY_COLUMNS]
        assert len(rows) == 5
        assert rows[3][:2] == ["gru", "0"]

    def test_unwritable(self, tmp_path: Path) -> None:
        with pytest.raises(TrainingError, match="Cannot write"):
            write_history_csv(self.ROWS, tmp_path / "missing" / "h.csv")


class TestTrials:
    """Repeated trials and their summary."""

    def test_run_trials(self) -> None:
        data = _adding(32, n=6)
        cfg = TrainConfig(batch_size=16, epochs=1)
        results = run_trials(CellKind.AGNU, 3, data, data, cfg, 3)
        assert [t.trial for t in results] == [0, 1, 2]
        assert len({t.seed for t in results}) == 3
        again = run_trials(CellKind.AGNU, 3, data, data, cfg, 3)
        assert [t.test_metric for t in results] == [t.test_metric for t in again]

    def test_additive_training_recipe(self) -> None:
        data = _adding(32, n=6)
        cfg = TrainConfig(batch_size=16, epochs=1)
        agru = run_trials(CellKind.AGRU, 4, data, data, cfg, 1)[0].result.params
        assert agru.proposal_activation is ActivationKind.SIGMOID
        relu = run_trials(
            CellKind.AGRU, 4, data, data, cfg, 1, proposal_activation=ActivationKind.RELU
        )[0].result.params
        assert relu.proposal_activation is ActivationKind.RELU
        gru = run_trials(CellKind.GRU, 4, data, data, cfg, 1)[0].result.params
        assert gru.proposal_activation is ActivationKind.TANH

    @pytest.mark.parametrize("kind", [CellKind.AGNU, CellKind.AGRU])
    def test_additive_state_grows_by_at_most_one(self, kind: CellKind) -> None:
        """Long adding sequences keep the trained state and loss bounded."""
        data = _adding(64, n=60, seed=3)
        cfg = TrainConfig(batch_size=16, epochs=3, seed=2)
        for trial in run_trials(kind, 8, data, data, cfg, 2):
            assert all(np.isfinite(row.loss) for row in trial.result.history)
            assert np.isfinite(trial.test_loss)
            p = trial.result.params
            xs = [data.inputs[:, t, :] for t in range(data.length)]
            hs = run_sequence(p, initial_state(p, batch=len(data)), xs).hs
            prev = np.zeros_like(hs[0])
            for h in hs:
                assert np.all(h <= prev + 1.0 + 1e-12)
                prev = h

    def test_trial_streams_are_separate_from_data(self) -> None:
        data = _adding(16, n=4)
        cfg = TrainConfig(batch_size=16, epochs=1, lr=0.0, seed=5)
        W = run_trials(CellKind.GRU, 3, data, data, cfg, 1)[0].result.params.gates["update"].W
        expected = init_cell_params(CellKind.GRU, 2, 3, Rng(5).spawn(TRIAL_STREAM).spawn(0))
        assert np.array_equal(W, expected.gates["update"].W)
        for data_stream in (0, 1):
            shared = init_cell_params(CellKind.GRU, 2, 3, Rng(5).spawn(data_stream))
            assert not np.array_equal(W, shared.gates["update"].W)

    def test_zero_trials(self) -> None:
        data = _adding(8)
        with pytest.raises(ValueError, match="trials"):
            run_trials(CellKind.GRU, 2, data, data, TrainConfig(), 0)

    def _results(self, metrics: list[float]) -> list[TrialResult]:
        return [
            TrialResult(CellKind.GRU, k, k, m, m, None)  # type: ignore[arg-type]
            for k, m in enumerate(metrics)
        ]

    def test_summary_lower_is_better(self) -> None:
        summary = summarize_trials(self._results([0.17, 0.01, 0.2, 0.05]))
        assert summary.top == 0.01
        assert summary.median == pytest.approx(0.11)
        assert summary.successes == 2

    def test_summary_accuracy(self) -> None:
        summary = summarize_trials(self._results([0.8, 0.9, 0.85]), higher_is_better=True)
        assert summary.top == 0.9
        assert summary.mean == pytest.approx(0.85)
        assert summary.successes == 0

    def test_summary_quantile(self) -> None:
        summary = summarize_trials(self._results([0.0, 0.1, 0.2, 0.3, 0.4]), quantile=0.25)
        assert summary.top == pytest.approx(0.1)

    def test_summary_errors(self) -> None:
        with pytest.raises(ValueError, match="no trials"):
            summarize_trials([])
        with pytest.raises(ValueError, match="quantile"):
            summarize_trials(self._results([0.1]), quantile=1.5)
