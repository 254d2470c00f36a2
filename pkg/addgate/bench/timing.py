"""Plaintext CPU timing of the adding-task solvers.

Each solver is a plain scalar loop over pre-converted Python lists, so the
timed region is the step loop alone; instance generation and conversion
happen before measurement.  Measurements run on one thread with the garbage
collector paused; concurrent measurements are refused.
"""

from __future__ import annotations

import csv
import gc
import logging
import platform
import sys
import threading
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from addgate import config
from addgate.bench.cost import BenchError
from addgate.tasks import DEFAULT_GATE_MAGNITUDE, AddingInstance, gen_adding_dataset
from addgate.tensor import Rng, sigmoid_scalar

logger = logging.getLogger(__name__)

MIN_ITERATIONS = 30
# sigma(20) is within 2e-9 of 1, so the multiplicative gate nearly closes.
MUL_GATE_MAGNITUDE = 20.0
REPORT_COLUMNS = ("solver", "n", "iterations", "median_ns", "mean_ns", "std_ns", "min_ns")

_measure_lock = threading.Lock()


def dot_solver(v: list[float], w: list[float]) -> float:
    acc = 0.0
    for vt, wt in zip(v, w):
        acc += vt * wt
    return acc


def agnu_solver(v: list[float], w: list[float], a: float = DEFAULT_GATE_MAGNITUDE) -> float:
    """Hand-crafted aGNU: comparisons and additions only after the affine stage."""
    h = 0.0
    neg2a = -2.0 * a
    for vt, wt in zip(v, w):
        u = neg2a * wt + a
        hhat = vt + h
        if hhat < 0.0:
            hhat = 0.0
        if u > 0.0:
            keep = h
            take = hhat - u
        else:
            keep = h + u
            take = hhat
        h = (keep if keep > 0.0 else 0.0) + (take if take > 0.0 else 0.0)
    return h


def mulgnu_solver(v: list[float], w: list[float], a: float = MUL_GATE_MAGNITUDE) -> float:
    """Multiplicative GNU with a true sigmoid gate on the same construction."""
    h = 0.0
    neg2a = -2.0 * a
    for vt, wt in zip(v, w):
        z = sigmoid_scalar(neg2a * wt + a)
        hhat = vt + h
        if hhat < 0.0:
            hhat = 0.0
        h = z * h + (1.0 - z) * hhat
    return h


def noop_solver(v: list[float], w: list[float]) -> float:
    return 0.0


TIMED_SOLVERS: dict[str, Callable[[list[float], list[float]], float]] = {
    "dot": dot_solver,
    "agnu": agnu_solver,
    "mulgnu": mulgnu_solver,
    "noop": noop_solver,
}
DEFAULT_SOLVERS = ("dot", "agnu", "mulgnu")


@dataclass(frozen=True)
class TimingReport:
    solver: str
    n: int
    iterations: int
    median_ns: float
    mean_ns: float
    std_ns: float
    min_ns: float
    fingerprint: str = ""
    warnings: tuple[str, ...] = field(default_factory=tuple)


def fingerprint() -> str:
    return (
        f"{platform.python_implementation()} {platform.python_version()} "
        f"numpy {np.__version__} {platform.machine()} {platform.system()}"
    )


def misconfiguration_warnings() -> tuple[str, ...]:
    """Reasons the timings may not reflect an optimized run."""
    found = []
    if config.debug:
        found.append("ADDGATE_DEBUG is set")
    if sys.gettrace() is not None:
        found.append("a trace function (debugger or coverage) is active")
    if sys.flags.dev_mode:
        found.append("Python development mode is enabled")
    return tuple(found)


def _as_lists(instances: Sequence[AddingInstance]) -> list[tuple[list[float], list[float]]]:
    return [(inst.v.tolist(), inst.w.tolist()) for inst in instances]


def solver_error(name: str, instances: Sequence[AddingInstance]) -> float:
    """Max |solver output - target| over *instances*."""
    fn = _solver(name)
    pairs = zip(_as_lists(instances), instances)
    return max(abs(fn(v, w) - inst.target) for (v, w), inst in pairs)


def _solver(name: str) -> Callable[[list[float], list[float]], float]:
    try:
        return TIMED_SOLVERS[name]
    except KeyError:
        raise BenchError(
            f"unknown solver {name!r}; choose from {', '.join(TIMED_SOLVERS)}"
        ) from None


def time_solver(
    name: str,
    inputs: Sequence[tuple[list[float], list[float]]],
    iterations: int,
    warmup: int,
) -> list[int]:
    """Per-call wall times in nanoseconds, cycling through *inputs*."""
    fn = _solver(name)
    count = len(inputs)
    for k in range(warmup):
        fn(*inputs[k % count])
    times = []
    clock = time.perf_counter_ns
    for k in range(iterations):
        v, w = inputs[k % count]
        start = clock()
        fn(v, w)
        times.append(clock() - start)
    return times


def bench_solvers(
    n: int,
    iterations: int = 200,
    warmup: int = 20,
    *,
    seed: int = 0,
    solvers: Sequence[str] = DEFAULT_SOLVERS,
    pool: int = 16,
) -> list[TimingReport]:
    """Time each solver on the same *pool* pre-generated instances of length *n*."""
    if iterations < MIN_ITERATIONS:
        raise BenchError(f"iterations must be >= {MIN_ITERATIONS}, got {iterations}")
    if warmup < 0:
        raise BenchError(f"warmup must be >= 0, got {warmup}")
    for name in solvers:
        _solver(name)
    inputs = _as_lists(gen_adding_dataset(Rng(seed), pool, n))
    warnings = misconfiguration_warnings()
    for w in warnings:
        logger.warning("benchmark may be unrepresentative: %s", w)
    if not _measure_lock.acquire(blocking=False):
        raise BenchError("another measurement is already running")
    gc_was_enabled = gc.isenabled()
    try:
        gc.disable()
        reports = []
        for name in solvers:
            logger.debug("timing %s: %d warmup, %d measured calls", name, warmup, iterations)
            times = np.array(time_solver(name, inputs, iterations, warmup), dtype=np.float64)
            reports.append(
                TimingReport(
                    name,
                    n,
                    iterations,
                    float(np.median(times)),
                    float(np.mean(times)),
                    float(np.std(times)),
                    float(np.min(times)),
                    fingerprint(),
                    warnings,
                )
            )
    finally:
        if gc_was_enabled:
            gc.enable()
        _measure_lock.release()
    return reports


def median_ratio(reports: Sequence[TimingReport], num: str, den: str) -> float:
    by_name = {r.solver: r for r in reports}
    return by_name[num].median_ns / by_name[den].median_ns


def emit_report_csv(reports: Sequence[TimingReport], path: Path) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(REPORT_COLUMNS)
            for r in reports:
                writer.writerow(
                    [
                        r.solver,
                        r.n,
                        r.iterations,
                        repr(r.median_ns),
                        repr(r.mean_ns),
                        repr(r.std_ns),
                        repr(r.min_ns),
                    ]
                )
    except OSError as e:
        raise BenchError(f"Cannot write {path}: {e}") from e


def read_report_csv(path: Path) -> list[TimingReport]:
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
    except OSError as e:
        raise BenchError(f"Cannot read {path}: {e}") from e
    if not rows or tuple(rows[0]) != REPORT_COLUMNS:
        raise BenchError(f"{path}: expected header {','.join(REPORT_COLUMNS)}")
    try:
        return [
            TimingReport(
                row[0], int(row[1]), int(row[2]), *(float(x) for x in row[3:7])
            )
            for row in rows[1:]
        ]
    except (ValueError, TypeError) as e:
        raise BenchError(f"{path}: malformed row: {e}") from e
