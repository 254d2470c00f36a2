"""Tests for dense linear algebra, activations and the seeded generator."""

from __future__ import annotations

import math

import numpy as np
import pytest

from addgate.tensor import (
    ActivationKind,
    Rng,
    ShapeError,
    activation_grad,
    apply_activation,
    as_matrix,
    as_vector,
    matvec,
    relu_pos_neg,
    sigmoid,
    sigmoid_scalar,
    softmax,
    softmax_backward,
)


class TestMatvec:
    """Matrix-vector products, single and batched."""

    def test_identity(self) -> None:
        """The identity matrix leaves the vector unchanged."""
        v = np.array([1.0, -2.0, 3.5])
        assert np.array_equal(matvec(np.eye(3), v), v)

    def test_rectangular(self) -> None:
        """A 2x3 matrix maps a 3-vector to a 2-vector."""
        m = np.array([[1.0, 2.0, 3.0], [0.0, 1.0, 0.0]])
        assert np.array_equal(matvec(m, np.array([1.0, 1.0, 1.0])), np.array([6.0, 1.0]))

    def test_batched(self) -> None:
        """Each row of a batch is multiplied independently."""
        m = np.array([[2.0, 0.0], [0.0, 3.0]])
        batch = np.array([[1.0, 1.0], [2.0, -1.0]])
        assert np.array_equal(matvec(m, batch), np.array([[2.0, 3.0], [4.0, -3.0]]))

    def test_dimension_mismatch(self) -> None:
        """Mismatched inner dimensions raise ShapeError."""
        with pytest.raises(ShapeError, match="dimension mismatch"):
            matvec(np.eye(3), np.ones(2))

    def test_non_matrix(self) -> None:
        with pytest.raises(ShapeError):
            matvec(np.ones(3), np.ones(3))


class TestCoercion:
    """as_vector and as_matrix."""

    def test_as_vector_from_list(self) -> None:
        v = as_vector([1, 2, 3])
        assert v.dtype == np.float64
        assert v.shape == (3,)

    def test_as_vector_rejects_3d(self) -> None:
        with pytest.raises(ShapeError):
            as_vector(np.zeros((2, 2, 2)))

    def test_as_matrix_is_c_ordered(self) -> None:
        m = as_matrix(np.asfortranarray(np.ones((3, 2))))
        assert m.flags["C_CONTIGUOUS"]

    def test_as_matrix_rejects_vector(self) -> None:
        with pytest.raises(ShapeError):
            as_matrix([1.0, 2.0])


class TestActivations:
    """Elementwise activations and their derivatives."""

    def test_sigmoid_at_zero(self) -> None:
        assert apply_activation(ActivationKind.SIGMOID, np.array([0.0]))[0] == 0.5

    def test_relu(self) -> None:
        out = apply_activation(ActivationKind.RELU, np.array([-2.0, 0.0, 3.0]))
        assert np.array_equal(out, np.array([0.0, 0.0, 3.0]))

    def test_tanh(self) -> None:
        out = apply_activation(ActivationKind.TANH, np.array([0.5]))
        assert out[0] == pytest.approx(0.462117157, abs=1e-9)

    def test_identity(self) -> None:
        v = np.array([-1.5, 2.0])
        assert np.array_equal(apply_activation(ActivationKind.IDENTITY, v), v)

    def test_sigmoid_extremes_do_not_overflow(self) -> None:
        """The sign-branched form stays finite at +-1000."""
        with np.errstate(over="raise"):
            out = sigmoid(np.array([-1000.0, 1000.0]))
        assert out[0] == 0.0
        assert out[1] == 1.0

    def test_sigmoid_scalar_matches_vector(self) -> None:
        for x in (-30.0, -1.0, 0.0, 0.3, 25.0):
            assert sigmoid_scalar(x) == pytest.approx(sigmoid(np.array([x]))[0], rel=1e-15)

    def test_softmax_sums_to_one(self) -> None:
        out = softmax(np.array([[1.0, 2.0, 3.0], [1000.0, 1000.0, 0.0]]))
        assert np.allclose(out.sum(axis=-1), 1.0)
        assert out[1, 0] == pytest.approx(0.5)

    def test_relu_grad_at_zero_is_zero(self) -> None:
        pre = np.array([-1.0, 0.0, 2.0])
        grad = activation_grad(ActivationKind.RELU, pre, np.maximum(pre, 0))
        assert np.array_equal(grad, np.array([0.0, 0.0, 1.0]))

    def test_tanh_grad(self) -> None:
        pre = np.array([0.3])
        out = np.tanh(pre)
        assert activation_grad(ActivationKind.TANH, pre, out)[0] == pytest.approx(
            1.0 / math.cosh(0.3) ** 2
        )

    def test_softmax_has_no_elementwise_grad(self) -> None:
        with pytest.raises(ValueError, match="no elementwise derivative"):
            activation_grad(ActivationKind.SOFTMAX, np.zeros(2), np.zeros(2))

    def test_softmax_backward_matches_finite_difference(self) -> None:
        z = np.array([0.2, -0.4, 1.1])
        g = np.array([1.0, -2.0, 0.5])
        analytic = softmax_backward(softmax(z), g)
        eps = 1e-6
        numeric = np.array(
            [
                (g @ softmax(z + eps * e) - g @ softmax(z - eps * e)) / (2 * eps)
                for e in np.eye(3)
            ]
        )
        assert np.allclose(analytic, numeric, atol=1e-8)

    def test_nonnegative_kinds(self) -> None:
        assert ActivationKind.RELU.nonnegative
        assert ActivationKind.SIGMOID.nonnegative
        assert not ActivationKind.TANH.nonnegative
        assert not ActivationKind.IDENTITY.nonnegative


class TestReluPosNeg:
    """Splitting a vector into positive and negative parts."""

    def test_mixed(self) -> None:
        pos, neg = relu_pos_neg(np.array([-3.0, 5.0]))
        assert np.array_equal(pos, np.array([0.0, 5.0]))
        assert np.array_equal(neg, np.array([-3.0, 0.0]))

    def test_zero(self) -> None:
        pos, neg = relu_pos_neg(np.array([0.0]))
        assert pos[0] == 0.0
        assert neg[0] == 0.0

    def test_parts_sum_exactly(self) -> None:
        v = Rng(3).uniform(1000, -5.0, 5.0)
        pos, neg = relu_pos_neg(v)
        assert np.array_equal(pos + neg, v)
        assert np.all(pos >= 0)
        assert np.all(neg <= 0)


class TestRng:
    """The seeded Philox generator."""

    def test_same_seed_same_stream(self) -> None:
        assert np.array_equal(Rng(42).uniform(3), Rng(42).uniform(3))

    def test_different_seeds_differ(self) -> None:
        assert not np.array_equal(Rng(1).uniform(5), Rng(2).uniform(5))

    def test_single_value_in_range(self) -> None:
        v = Rng(0).uniform(1)
        assert v.shape == (1,)
        assert 0.0 <= v[0] < 1.0

    def test_mean_near_half(self) -> None:
        assert abs(float(np.mean(Rng(9).uniform(10_000))) - 0.5) < 0.02

    def test_zero_count_rejected(self) -> None:
        with pytest.raises(ValueError, match=">= 1"):
            Rng(0).uniform(0)

    def test_spawn_is_deterministic_and_independent(self) -> None:
        base = Rng(5)
        a = base.spawn(0).uniform(4)
        assert np.array_equal(a, Rng(5).spawn(0).uniform(4))
        assert not np.array_equal(a, Rng(5).spawn(1).uniform(4))
        assert not np.array_equal(a, Rng(5).uniform(4))

    def test_first_child_differs_from_parent(self) -> None:
        assert not np.array_equal(Rng(7).spawn(0).uniform(5), Rng(7).uniform(5))
        assert not np.array_equal(Rng(7).spawn(0).spawn(0).uniform(5), Rng(7).spawn(0).uniform(5))

    def test_nested_spawn_is_deterministic(self) -> None:
        a = Rng(3).spawn(2).spawn(1).uniform(4)
        assert np.array_equal(a, Rng(3).spawn(2).spawn(1).uniform(4))
        assert not np.array_equal(a, Rng(3).spawn(1).spawn(2).uniform(4))

    def test_repr_names_stream(self) -> None:
        assert repr(Rng(4).spawn(1).spawn(2)) == "Rng(seed=4, stream=(1, 2))"

    def test_spawn_does_not_advance_parent(self) -> None:
        parent = Rng(11)
        parent.spawn(3).uniform(10)
        assert np.array_equal(parent.uniform(2), Rng(11).uniform(2))

    def test_integers_range(self) -> None:
        rng = Rng(0)
        draws = [rng.integers(3, 7) for _ in range(200)]
        assert min(draws) >= 3
        assert max(draws) < 7
        assert set(draws) == {3, 4, 5, 6}
