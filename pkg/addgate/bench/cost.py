"""Programmable-bootstrap (PBS) cost model for encrypted execution.

Encrypted run time is proportional to the number of PBS operations, so the
three adding-task solvers are compared by their per-step PBS counts.
Latency projections are what-if numbers derived from a per-PBS latency the
caller supplies; they are never measurements.
"""

from __future__ import annotations

import csv
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

KEY_SIZES = (1024, 2048)


class BenchError(Exception):
    """Raised for invalid benchmark or cost-model requests."""


class Solver(Enum):
    DOT = "dot"
    AGNU = "agnu"
    MULGNU = "mulgnu"


PBS_PER_STEP: dict[Solver, int] = {
    Solver.DOT: 2,
    Solver.AGNU: 4,
    Solver.MULGNU: 6,
}


def projection_column(key_size: int | None) -> str:
    return "projected_s" if key_size is None else f"projected_s_{key_size}"


@dataclass(frozen=True)
class PbsCostReport:
    """PBS counts for one solver; ``projected_s`` maps column name to seconds."""

    solver: Solver
    n: int
    per_step: int
    total: int
    latency_ms: dict[int | None, float] = field(default_factory=dict)

    @property
    def projected_s(self) -> dict[str, float]:
        return {
            projection_column(key): self.total * ms / 1000.0
            for key, ms in self.latency_ms.items()
        }


def pbs_cost(
    solver: Solver, n: int, latency_ms: Mapping[int | None, float] | None = None
) -> PbsCostReport:
    """PBS total for *n* steps; *latency_ms* is keyed by key size (None = unlabeled)."""
    if n < 1:
        raise BenchError(f"sequence length must be >= 1, got {n}")
    latency = dict(latency_ms or {})
    for key, ms in latency.items():
        if ms < 0:
            raise BenchError(f"PBS latency must be >= 0 ms, got {ms} for key size {key}")
    per_step = PBS_PER_STEP[solver]
    return PbsCostReport(solver, n, per_step, per_step * n, latency)


def cost_table(
    n: int, latency_ms: Mapping[int | None, float] | None = None
) -> list[PbsCostReport]:
    return [pbs_cost(s, n, latency_ms) for s in Solver]


def parse_latency(spec: str) -> tuple[int | None, float]:
    """Parse ``MS`` or ``KEY:MS`` (e.g. ``2048:20``)."""
    key: int | None = None
    text = spec
    if ":" in spec:
        key_text, text = spec.split(":", 1)
        try:
            key = int(key_text)
        except ValueError as e:
            raise BenchError(f"invalid key size in {spec!r}") from e
        if key not in KEY_SIZES:
            raise BenchError(
                f"key size must be one of {', '.join(map(str, KEY_SIZES))}, got {key}"
            )
    try:
        ms = float(text)
    except ValueError as e:
        raise BenchError(f"invalid latency {spec!r}; expected MS or KEY:MS") from e
    if ms < 0:
        raise BenchError(f"PBS latency must be >= 0 ms, got {ms}")
    return key, ms


def emit_cost_csv(reports: Sequence[PbsCostReport], path: Path) -> None:
    """Header ``solver,n,pbs_per_step,pbs_total`` plus one column per projection."""
    columns: list[str] = []
    for r in reports:
        for name in r.projected_s:
            if name not in columns:
                columns.append(name)
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["solver", "n", "pbs_per_step", "pbs_total", *columns])
            for r in reports:
                projected = r.projected_s
                writer.writerow(
                    [r.solver.value, r.n, r.per_step, r.total]
                    + [repr(projected[c]) if c in projected else "" for c in columns]
                )
    except OSError as e:
        raise BenchError(f"Cannot write {path}: {e}") from e
