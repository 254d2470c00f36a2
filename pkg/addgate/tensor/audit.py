"""Instrumented scalars for operation censuses.

A :class:`Traced` wraps a number that is a *variable* of the computation
(state, input, anything derived from them).  Plain Python/numpy numbers are
*constants* (weights, biases, literals).  Every arithmetic operation on a
Traced is tallied in its :class:`OpCensus`, so running a step function on
object arrays of Traced values counts exactly how many variable-by-variable
products it performs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class OpCensus:
    """Operation tallies for one audited computation."""

    var_var_mul: int = 0
    const_var_mul: int = 0
    additions: int = 0
    comparisons: int = 0

    def reset(self) -> None:
        self.var_var_mul = 0
        self.const_var_mul = 0
        self.additions = 0
        self.comparisons = 0


def _value(x: object) -> object:
    return x.value if isinstance(x, Traced) else x


class Traced:
    """A variable scalar that reports its operations to a census."""

    __slots__ = ("value", "census")

    def __init__(self, value: float | int, census: OpCensus) -> None:
        self.value = value
        self.census = census

    def _new(self, value: object) -> Traced:
        return Traced(value, self.census)

    def __add__(self, other: object) -> Traced:
        self.census.additions += 1
        return self._new(self.value + _value(other))

    __radd__ = __add__

    def __sub__(self, other: object) -> Traced:
        self.census.additions += 1
        return self._new(self.value - _value(other))

    def __rsub__(self, other: object) -> Traced:
        self.census.additions += 1
        return self._new(_value(other) - self.value)

    def __neg__(self) -> Traced:
        return self._new(-self.value)

    def __mul__(self, other: object) -> Traced:
        if isinstance(other, Traced):
            self.census.var_var_mul += 1
        else:
            self.census.const_var_mul += 1
        return self._new(self.value * _value(other))

    __rmul__ = __mul__

    def __rshift__(self, bits: int) -> Traced:
        return self._new(self.value >> bits)

    def _compare(self, other: object) -> object:
        self.census.comparisons += 1
        return _value(other)

    def __lt__(self, other: object) -> bool:
        return self.value < self._compare(other)

    def __le__(self, other: object) -> bool:
        return self.value <= self._compare(other)

    def __gt__(self, other: object) -> bool:
        return self.value > self._compare(other)

    def __ge__(self, other: object) -> bool:
        return self.value >= self._compare(other)

    def __float__(self) -> float:
        return float(self.value)

    def __int__(self) -> int:
        return int(self.value)

    def __repr__(self) -> str:
        return f"Traced({self.value!r})"


def traced_array(values: object, census: OpCensus) -> np.ndarray:
    """Wrap every element of *values* as a Traced in an object array."""
    arr = np.asarray(values)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = Traced(v.item() if hasattr(v, "item") else v, census)
    return out


def untrace(arr: np.ndarray) -> np.ndarray:
    """Unwrap an object array of Traced (or plain numbers) to float64."""
    return np.vectorize(lambda x: float(_value(x)), otypes=[np.float64])(arr)
