"""Tests for the adding problem and its hand-crafted solver."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from addgate.cells import CellState, run_sequence, step
from addgate.tasks import (
    AddingTaskError,
    HandcraftedGNU,
    LoadError,
    adding_to_dataset,
    gen_adding,
    gen_adding_dataset,
    handcrafted_solver,
    load_adding_csv,
    make_instance,
    naive_baseline_mse,
    save_adding_csv,
    solve_instances,
)
from addgate.tensor import Rng


class TestGenerator:
    """Random adding instances."""

    def test_two_hot_one_per_half(self) -> None:
        rng = Rng(0)
        for _ in range(200):
            inst = gen_adding(rng, 20)
            assert inst.w.sum() == 2.0
            assert inst.w[:10].sum() == 1.0
            assert inst.w[10:].sum() == 1.0
            assert inst.w[inst.i] == 1.0
            assert inst.w[inst.j] == 1.0
            assert 0.0 <= inst.target <= 2.0

    def test_target_mean(self) -> None:
        targets = [inst.target for inst in gen_adding_dataset(Rng(1), 100_000, 2)]
        assert abs(float(np.mean(targets)) - 1.0) < 0.02

    def test_values_uniform(self) -> None:
        """v passes a Kolmogorov-Smirnov test against U[0, 1) at the 1% level."""
        v = np.concatenate([inst.v for inst in gen_adding_dataset(Rng(2), 100, 100)])
        assert v.size == 10_000
        assert stats.kstest(v, "uniform").pvalue > 0.01

    def test_deterministic(self) -> None:
        a = gen_adding_dataset(Rng(3), 5, 8)
        b = gen_adding_dataset(Rng(3), 5, 8)
        for x, y in zip(a, b):
            assert np.array_equal(x.v, y.v)
            assert (x.i, x.j) == (y.i, y.j)

    @pytest.mark.parametrize("n", [0, 3, 7])
    def test_bad_length(self, n: int) -> None:
        with pytest.raises(AddingTaskError, match="even"):
            gen_adding(Rng(0), n)

    def test_bad_count(self) -> None:
        with pytest.raises(AddingTaskError):
            gen_adding_dataset(Rng(0), 0, 4)

    def test_inputs_layout(self) -> None:
        inst = make_instance([0.1, 0.2, 0.3, 0.4], 1, 2)
        x = inst.inputs()
        assert x.shape == (4, 2)
        assert np.array_equal(x[:, 0], inst.v)
        assert np.array_equal(x[:, 1], [0.0, 1.0, 1.0, 0.0])

    def test_dataset(self) -> None:
        data = adding_to_dataset(gen_adding_dataset(Rng(4), 6, 10))
        assert data.inputs.shape == (6, 10, 2)
        assert data.targets.shape == (6, 1)


class TestMakeInstance:
    """Explicit instances."""

    def test_markers_must_split(self) -> None:
        with pytest.raises(AddingTaskError, match="one per half"):
            make_instance([0.1, 0.2, 0.3, 0.4], 2, 3)

    def test_shortest(self) -> None:
        inst = make_instance([0.25, 0.5], 0, 1)
        assert inst.target == 0.75

    @pytest.mark.parametrize(
        "v", [[3.0, 0.0, 5.0, 2.0], [0.5, -0.25, 0.5, 0.5], [0.5, 0.5, float("nan"), 0.5]]
    )
    def test_values_outside_unit_interval(self, v: list[float]) -> None:
        with pytest.raises(AddingTaskError, match=r"\[0, 1\]"):
            make_instance(v, 0, 3)

    def test_closed_interval_ends(self) -> None:
        assert make_instance([1.0, 0.0, 0.0, 1.0], 0, 3).target == 2.0


class TestNaiveBaseline:
    """Always predicting 1.0."""

    def test_large_sample(self) -> None:
        instances = gen_adding_dataset(Rng(5), 100_000, 2)
        assert abs(naive_baseline_mse(instances) - 1.0 / 6.0) < 0.01

    def test_exact_one(self) -> None:
        assert naive_baseline_mse([make_instance([0.25, 0.75], 0, 1)]) == 0.0

    def test_all_zero_targets(self) -> None:
        instances = [make_instance([0.0, 0.0, 0.5, 0.0], 0, 3) for _ in range(3)]
        assert naive_baseline_mse(instances) == 1.0

    def test_empty(self) -> None:
        with pytest.raises(AddingTaskError):
            naive_baseline_mse([])


class TestHandcraftedSolver:
    """The exact aGNU construction."""

    def test_hand_trace(self) -> None:
        inst = make_instance([0.1, 0.2, 0.3, 0.4], 1, 2)
        p = handcrafted_solver()
        res = run_sequence(p, CellState(np.zeros(1)), list(inst.inputs()))
        assert [float(s.h[0]) for s in res.states] == pytest.approx([0.0, 0.2, 0.5, 0.5])
        assert res.final.h[0] == pytest.approx(0.5, abs=1e-15)

    def test_both_marked(self) -> None:
        inst = make_instance([0.625, 0.25], 0, 1)
        assert solve_instances(handcrafted_solver(), [inst])[0] == 0.875

    @pytest.mark.parametrize("n", [10, 100, 1000])
    def test_exact_on_random_instances(self, n: int) -> None:
        instances = gen_adding_dataset(Rng(n), 1000, n)
        answers = solve_instances(handcrafted_solver(), instances)
        targets = np.array([inst.target for inst in instances])
        assert np.max(np.abs(answers - targets)) <= 1e-15
        assert np.array_equal(answers, np.array([inst.v @ inst.w for inst in instances]))

    def test_long_sequence(self) -> None:
        instances = gen_adding_dataset(Rng(6), 5, 10_000)
        answers = solve_instances(handcrafted_solver(3.0), instances)
        assert np.allclose(answers, [inst.target for inst in instances], rtol=0, atol=1e-15)

    def test_worst_case_needs_three(self) -> None:
        """With v at its maximum an a below 3 leaks; a = 3 does not."""
        v = [1.0 - 2**-52] * 4
        inst = make_instance(v, 0, 2)
        leaky = HandcraftedGNU.__new__(HandcraftedGNU)
        object.__setattr__(leaky, "a", 2.5)
        assert solve_instances(leaky.params, [inst])[0] > inst.target
        assert solve_instances(handcrafted_solver(3.0), [inst])[0] == inst.target

    def test_unmarked_steps_preserve_state(self) -> None:
        p = handcrafted_solver()
        rng = Rng(7)
        for _ in range(500):
            h = rng.uniform(1, 0.0, 2.0)
            x = np.array([rng.uniform(1)[0], 0.0])
            s, _ = step(p, CellState(h), x)
            assert s.h[0] == h[0]

    @pytest.mark.parametrize("a", [2.0, 2.99, -1.0])
    def test_rejects_small_a(self, a: float) -> None:
        with pytest.raises(AddingTaskError, match="a must be >= 3"):
            handcrafted_solver(a)

    def test_empty_batch(self) -> None:
        assert solve_instances(handcrafted_solver(), []).shape == (0,)


class TestAddingCsv:
    """Saving and loading adding datasets."""

    def test_roundtrip(self, tmp_path: Path) -> None:
        instances = gen_adding_dataset(Rng(8), 10, 6)
        path = tmp_path / "adding.csv"
        save_adding_csv(instances, path)
        loaded = load_adding_csv(path)
        assert len(loaded) == 10
        for a, b in zip(instances, loaded):
            assert np.array_equal(a.v, b.v)
            assert (a.i, a.j) == (b.i, b.j)

    def test_header(self, tmp_path: Path) -> None:
        path = tmp_path / "adding.csv"
        save_adding_csv([make_instance([0.1, 0.2], 0, 1)], path)
        assert path.read_text().splitlines()[0] == "n,v0,v1,i,j,target"

    def test_missing(self, tmp_path: Path) -> None:
        with pytest.raises(LoadError, match="Cannot read"):
            load_adding_csv(tmp_path / "none.csv")

    def test_empty_file(self, tmp_path: Path) -> None:
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(LoadError, match="Empty"):
            load_adding_csv(path)

    def test_bad_header(self, tmp_path: Path) -> None:
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c,d,e,f\n")
        with pytest.raises(LoadError, match="Unexpected header"):
            load_adding_csv(path)

    def test_wrong_target(self, tmp_path: Path) -> None:
        path = tmp_path / "bad.csv"
        path.write_text("n,v0,v1,i,j,target\n2,0.25,0.5,0,1,0.5\n")
        with pytest.raises(LoadError, match="v_i \\+ v_j"):
            load_adding_csv(path)

    def test_bad_markers(self, tmp_path: Path) -> None:
        path = tmp_path / "bad.csv"
        path.write_text("n,v0,v1,i,j,target\n2,0.25,0.5,1,1,1.0\n")
        with pytest.raises(LoadError, match="Invalid adding file"):
            load_adding_csv(path)

    def test_value_out_of_range(self, tmp_path: Path) -> None:
        path = tmp_path / "bad.csv"
        path.write_text("n,v0,v1,i,j,target\n2,3.0,0.5,0,1,3.5\n")
        with pytest.raises(LoadError, match="Invalid adding file"):
            load_adding_csv(path)

    def test_non_numeric(self, tmp_path: Path) -> None:
        path = tmp_path / "bad.csv"
        path.write_text("n,v0,v1,i,j,target\n2,abc,0.5,0,1,1.0\n")
        with pytest.raises(LoadError):
            load_adding_csv(path)
