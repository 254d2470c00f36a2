"""PBS cost model and plaintext timing of the adding-task solvers."""

from addgate.bench.cost import (
    KEY_SIZES,
    PBS_PER_STEP,
    BenchError,
    PbsCostReport,
    Solver,
    cost_table,
    emit_cost_csv,
    parse_latency,
    pbs_cost,
    projection_column,
)
from addgate.bench.timing import (
    DEFAULT_SOLVERS,
    MIN_ITERATIONS,
    REPORT_COLUMNS,
    TIMED_SOLVERS,
    TimingReport,
    bench_solvers,
    emit_report_csv,
    median_ratio,
    misconfiguration_warnings,
    read_report_csv,
    solver_error,
    time_solver,
)

__all__ = [
    "DEFAULT_SOLVERS",
    "KEY_SIZES",
    "MIN_ITERATIONS",
    "PBS_PER_STEP",
    "REPORT_COLUMNS",
    "TIMED_SOLVERS",
    "BenchError",
    "PbsCostReport",
    "Solver",
    "TimingReport",
    "bench_solvers",
    "cost_table",
    "emit_cost_csv",
    "emit_report_csv",
    "median_ratio",
    "misconfiguration_warnings",
    "parse_latency",
    "pbs_cost",
    "projection_column",
    "read_report_csv",
    "solver_error",
    "time_solver",
]
