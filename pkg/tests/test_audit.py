"""Tests for the instrumented scalar used in operation censuses."""

from __future__ import annotations

import numpy as np

from addgate.tensor.audit import OpCensus, Traced, traced_array, untrace


class TestTraced:
    """Per-operation tallies."""

    def test_variable_product(self) -> None:
        census = OpCensus()
        out = Traced(2.0, census) * Traced(3.0, census)
        assert out.value == 6.0
        assert census.var_var_mul == 1
        assert census.const_var_mul == 0

    def test_constant_product(self) -> None:
        census = OpCensus()
        out = 4.0 * Traced(0.5, census)
        assert out.value == 2.0
        assert census.const_var_mul == 1
        assert census.var_var_mul == 0

    def test_additions_and_comparisons(self) -> None:
        census = OpCensus()
        a = Traced(1, census)
        b = 5 - a + 2
        assert b.value == 6
        assert census.additions == 2
        assert a < b
        assert census.comparisons == 1

    def test_shift_is_free(self) -> None:
        census = OpCensus()
        out = Traced(37, census) >> 2
        assert out.value == 9
        assert census == OpCensus()

    def test_reset(self) -> None:
        census = OpCensus(var_var_mul=3, additions=4)
        census.reset()
        assert census == OpCensus()


class TestArrays:
    """Object arrays of Traced values."""

    def test_roundtrip(self) -> None:
        census = OpCensus()
        values = np.array([[0.5, -1.0], [2.0, 3.25]])
        assert np.array_equal(untrace(traced_array(values, census)), values)

    def test_elementwise_product_counted(self) -> None:
        census = OpCensus()
        a = traced_array([1.0, 2.0, 3.0], census)
        b = traced_array([4.0, 5.0, 6.0], census)
        assert np.array_equal(untrace(a * b), [4.0, 10.0, 18.0])
        assert census.var_var_mul == 3

    def test_matvec_counted_as_constant_products(self) -> None:
        census = OpCensus()
        m = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
        v = traced_array([1.0, -1.0], census)
        out = v @ m.T
        assert np.array_equal(untrace(out), [-1.0, -1.0, -1.0])
        assert census.const_var_mul == 6
        assert census.var_var_mul == 0

    def test_untrace_accepts_plain_numbers(self) -> None:
        arr = np.array([Traced(1.5, OpCensus()), 0], dtype=object)
        assert np.array_equal(untrace(arr), [1.5, 0.0])
