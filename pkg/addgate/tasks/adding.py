"""The adding problem, its hand-crafted aGNU solution and the naive baseline.

An instance pairs random values ``v`` in [0, 1) with a two-hot marker
sequence ``w``: one marker in each half.  The target is the sum of the two
marked values.  Each step feeds ``x_t = (v_t, w_t)``.
"""

from __future__ import annotations

import csv
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from addgate.cells import (
    CellKind,
    CellParams,
    GateParams,
    initial_state,
    run_sequence,
)
from addgate.tensor import ActivationKind, Rng
from addgate.train import SequenceDataset

logger = logging.getLogger(__name__)

# Below this the proposal can leak into the state between markers
# (v_t + h <= 1 + 2 must stay under a).
MIN_GATE_MAGNITUDE = 3.0
DEFAULT_GATE_MAGNITUDE = 4.0
NAIVE_PREDICTION = 1.0


class AddingTaskError(ValueError):
    """Raised for invalid adding-problem parameters."""


class LoadError(Exception):
    """Raised when an adding-problem file cannot be read."""


@dataclass(frozen=True)
class AddingInstance:
    v: np.ndarray
    w: np.ndarray
    i: int
    j: int

    @property
    def n(self) -> int:
        return len(self.v)

    @property
    def target(self) -> float:
        return float(self.v[self.i] + self.v[self.j])

    def inputs(self) -> np.ndarray:
        """The (n, 2) input sequence ``x_t = (v_t, w_t)``."""
        return np.stack([self.v, self.w], axis=1)


def _two_hot(n: int, i: int, j: int) -> np.ndarray:
    w = np.zeros(n)
    w[i] = 1.0
    w[j] = 1.0
    return w


def make_instance(v: Sequence[float], i: int, j: int) -> AddingInstance:
    """Build an instance from explicit values and 0-based marker positions."""
    v = np.asarray(v, dtype=np.float64)
    n = len(v)
    if n < 2 or n % 2:
        raise AddingTaskError(f"sequence length must be even and >= 2, got {n}")
    if not (0 <= i < n // 2 <= j < n):
        raise AddingTaskError(
            f"markers must be one per half: need 0 <= i < {n // 2} <= j < {n}, got i={i}, j={j}"
        )
    outside = ~((v >= 0.0) & (v <= 1.0))
    if outside.any():
        t = int(np.argmax(outside))
        raise AddingTaskError(f"values must lie in [0, 1], got v[{t}]={float(v[t])!r}")
    return AddingInstance(v, _two_hot(n, i, j), i, j)


def gen_adding(rng: Rng, n: int) -> AddingInstance:
    """v ~ U[0,1)^n, i uniform on [0, n/2), j uniform on [n/2, n)."""
    if n < 2 or n % 2:
        raise AddingTaskError(f"sequence length must be even and >= 2, got {n}")
    v = rng.uniform(n)
    i = rng.integers(0, n // 2)
    j = rng.integers(n // 2, n)
    return AddingInstance(v, _two_hot(n, i, j), i, j)


def gen_adding_dataset(rng: Rng, count: int, n: int) -> list[AddingInstance]:
    if count < 1:
        raise AddingTaskError(f"instance count must be >= 1, got {count}")
    return [gen_adding(rng, n) for _ in range(count)]


def adding_to_dataset(instances: Sequence[AddingInstance]) -> SequenceDataset:
    """Stack instances into (N, n, 2) inputs and (N, 1) targets."""
    if not instances:
        raise AddingTaskError("no instances")
    inputs = np.stack([inst.inputs() for inst in instances])
    targets = np.array([[inst.target] for inst in instances])
    return SequenceDataset(inputs, targets)


def naive_baseline_mse(instances: Sequence[AddingInstance]) -> float:
    """MSE of always predicting 1.0, the expected target."""
    if not instances:
        raise AddingTaskError("naive baseline of an empty dataset")
    targets = np.array([inst.target for inst in instances])
    return float(np.mean((NAIVE_PREDICTION - targets) ** 2))


@dataclass(frozen=True)
class HandcraftedGNU:
    """Exact aGNU solution with gate magnitude *a*.

    The update pre-activation is ``u = a - 2a w_t`` and the proposal is
    ``(v_t + h)^+``: unmarked steps keep h, marked steps add v_t.
    """

    a: float = DEFAULT_GATE_MAGNITUDE

    def __post_init__(self) -> None:
        if not self.a >= MIN_GATE_MAGNITUDE:
            raise AddingTaskError(
                f"gate magnitude a must be >= {MIN_GATE_MAGNITUDE:g} so unmarked steps "
                f"keep the state exactly (v_t + h can reach 3); got a={self.a}"
            )

    @property
    def params(self) -> CellParams:
        a = float(self.a)
        gates = {
            "update": GateParams(
                np.array([[0.0, -2.0 * a]]), np.array([[0.0]]), np.array([a])
            ),
            "proposal": GateParams(
                np.array([[1.0, 0.0]]), np.array([[1.0]]), np.array([0.0])
            ),
        }
        return CellParams(CellKind.AGNU, 2, 1, gates, ActivationKind.RELU)


def handcrafted_solver(a: float = DEFAULT_GATE_MAGNITUDE) -> CellParams:
    return HandcraftedGNU(a).params


def solve_instances(p: CellParams, instances: Sequence[AddingInstance]) -> np.ndarray:
    """Final state h_n of *p* on every instance, in one batched run.

    Instances must share one length.
    """
    if not instances:
        return np.zeros(0)
    data = adding_to_dataset(instances)
    xs = [data.inputs[:, t, :] for t in range(data.length)]
    final = run_sequence(p, initial_state(p, batch=len(instances)), xs).final
    return final.h[:, 0]


def adding_csv_header(n: int) -> list[str]:
    return ["n", *(f"v{k}" for k in range(n)), "i", "j", "target"]


def save_adding_csv(instances: Sequence[AddingInstance], path: Path) -> None:
    """One row per instance: ``n, v0..v{n-1}, i, j, target``."""
    if not instances:
        raise AddingTaskError("nothing to save")
    n = instances[0].n
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(adding_csv_header(n))
            for inst in instances:
                if inst.n != n:
                    raise AddingTaskError(f"mixed sequence lengths {n} and {inst.n}")
                writer.writerow(
                    [n, *(repr(float(x)) for x in inst.v), inst.i, inst.j, repr(inst.target)]
                )
    except OSError as e:
        raise LoadError(f"Cannot write {path}: {e}") from e
    logger.debug("wrote %d adding instances to %s", len(instances), path)


def load_adding_csv(path: Path) -> list[AddingInstance]:
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
    except OSError as e:
        raise LoadError(f"Cannot read {path}: {e}") from e
    if not rows:
        raise LoadError(f"Empty adding file: {path}")
    header = [h.strip() for h in rows[0]]
    try:
        n = len(header) - 4
        if n < 2 or header != adding_csv_header(n):
            raise LoadError(f"Unexpected header in {path}: {','.join(header[:3])}...")
        out: list[AddingInstance] = []
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != len(header) or int(row[0]) != n:
                raise LoadError(f"{path}:{lineno}: expected {len(header)} fields for n={n}")
            values = [float(x) for x in row[1 : n + 1]]
            inst = make_instance(values, int(row[n + 1]), int(row[n + 2]))
            if inst.target != float(row[n + 3]):
                raise LoadError(f"{path}:{lineno}: target {row[n + 3]} != v_i + v_j")
            out.append(inst)
    except ValueError as e:
        raise LoadError(f"Invalid adding file {path}: {e}") from e
    return out
