"""CLI entry point for addgate.

Exit codes: 0 success, 1 invalid arguments or inputs, 2 a run that failed
(inexact solver, error above bound, non-finite training loss).

CSV outputs:

\b
  train --history   cell,trial,epoch,split,loss,metric
                    (epoch 0 is the evaluation before any update; metric is
                    the MSE for the adding task, accuracy for MNIST)
  bench --out       solver,n,iterations,median_ns,mean_ns,std_ns,min_ns
  cost --out        solver,n,pbs_per_step,pbs_total[,projected_s[_<key>]...]
  gen --out         n,v0..v{n-1},i,j,target
"""

from __future__ import annotations

import logging
from pathlib import Path

import click
import numpy as np

from addgate import __version__, config
from addgate.bench import (
    BenchError,
    bench_solvers,
    cost_table,
    emit_cost_csv,
    emit_report_csv,
    median_ratio,
    parse_latency,
    solver_error,
)
from addgate.cells import CellKind, ParamsFileError, load_params, save_params
from addgate.cli.formatter import build_table, format_header
from addgate.quant import QuantError, quantize, run_handcrafted_int_batch, save_quant_params
from addgate.tasks import (
    DEFAULT_GATE_MAGNITUDE,
    AddingTaskError,
    IdxFormatError,
    LoadError,
    adding_to_dataset,
    find_mnist_files,
    gen_adding_dataset,
    handcrafted_solver,
    load_adding_csv,
    load_mnist_idx,
    mnist_subset,
    mnist_to_dataset,
    naive_baseline_mse,
    save_adding_csv,
    solve_instances,
)
from addgate.tasks.mnist import NUM_CLASSES
from addgate.tensor import Rng
from addgate.train import (
    ADDING_BASELINE_MSE,
    LossKind,
    SequenceDataset,
    TrainConfig,
    TrainingError,
    evaluate,
    run_trials,
    summarize_trials,
    write_history_csv,
)

logger = logging.getLogger(__name__)

EXACT_TOLERANCE = 1e-12

# (train, test, trials) per task and scale.
DESK_SIZES = {"adding": (4000, 1000, 5), "mnist": (2000, 500, 3)}
PAPER_SIZES = {"adding": (20000, 5000, 20), "mnist": (60000, 10000, 20)}
DEFAULT_UNITS = {"adding": 16, "mnist": 32}
DEFAULT_EPOCHS = {"adding": 30, "mnist": 5}

CELL_CHOICES = [k.value for k in CellKind]


class ValidationError(click.ClickException):
    """Bad arguments or unreadable inputs (exit 1)."""

    exit_code = 1


class RuntimeFailure(click.ClickException):
    """A run completed but failed its check, or could not proceed (exit 2)."""

    exit_code = 2


class _UsageExit1:
    """Report click usage errors with exit code 1 instead of 2."""

    def make_context(self, *args, **kwargs):  # type: ignore[no-untyped-def]
        try:
            return super().make_context(*args, **kwargs)  # type: ignore[misc]
        except click.UsageError as e:
            e.exit_code = 1
            raise

    def invoke(self, ctx):  # type: ignore[no-untyped-def]
        try:
            return super().invoke(ctx)  # type: ignore[misc]
        except click.UsageError as e:
            e.exit_code = 1
            raise


class AddgateGroup(_UsageExit1, click.Group):
    pass


@click.group(cls=AddgateGroup)
@click.version_option(version=__version__, prog_name="addgate")
@click.option("-v", "--verbose", count=True, help="INFO logging; repeat for DEBUG.")
def main(verbose: int) -> None:
    """Addition-based gated recurrent networks.

    \b
    Examples:
        addgate solve --n 100 --count 1000 --seed 7
        addgate quant --scale-bits 16 --dump agnu.agqp
        addgate train --task adding --cell agru --cell gru --history h.csv
        addgate train --task mnist --mnist-dir ./mnist --cell gru --cell agru
        addgate bench --n 100 --iters 200 --out bench.csv
        addgate cost --n 100 --pbs-latency-ms 1024:20 --pbs-latency-ms 2048:60
    """
    if verbose >= 2:
        config.configure_logging(logging.DEBUG)
    elif verbose == 1:
        config.configure_logging(logging.INFO)
    else:
        config.configure_logging()


def _adding_instances(n: int, count: int, seed: int, source: str | None):
    try:
        if source is not None:
            return load_adding_csv(Path(source))
        return gen_adding_dataset(Rng(seed), count, n)
    except (AddingTaskError, LoadError) as e:
        raise ValidationError(str(e)) from e


def _solver_params(a: float):
    try:
        return handcrafted_solver(a)
    except AddingTaskError as e:
        raise ValidationError(str(e)) from e


@main.command()
@click.option("--n", "n", default=100, show_default=True, help="Sequence length (even).")
@click.option("--count", default=1000, show_default=True, help="Number of instances.")
@click.option("--seed", default=0, show_default=True, help="Seed for generated instances.")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="CSV to write.")
def gen(n: int, count: int, seed: int, out: str) -> None:
    """Write an adding-problem dataset as CSV."""
    instances = _adding_instances(n, count, seed, None)
    try:
        save_adding_csv(instances, Path(out))
    except LoadError as e:
        raise RuntimeFailure(str(e)) from e
    click.echo(f"Wrote {len(instances)} instances (n={n}) to {out}")


@main.command()
@click.option("--n", "n", default=100, show_default=True, help="Sequence length (even).")
@click.option("--count", default=1000, show_default=True, help="Number of instances.")
@click.option(
    "--a", "a", default=DEFAULT_GATE_MAGNITUDE, show_default=True,
    help="Gate magnitude (must be >= 3).",
)
@click.option("--seed", default=0, show_default=True, help="Seed for generated instances.")
@click.option(
    "--input", "source", default=None, type=click.Path(exists=True, dir_okay=False),
    help="Solve instances from an adding CSV instead of generating them.",
)
def solve(n: int, count: int, a: float, seed: int, source: str | None) -> None:
    """Run the hand-crafted aGNU solver; fails unless every answer is exact."""
    params = _solver_params(a)
    instances = _adding_instances(n, count, seed, source)
    targets = np.array([inst.target for inst in instances])
    errors = np.abs(solve_instances(params, instances) - targets)
    max_err = float(errors.max())
    mse = float(np.mean(errors**2))
    click.echo(format_header({"n": instances[0].n, "count": len(instances), "a": a, "seed": seed}))
    click.echo(
        build_table(
            ["max_abs_error", "mse", "naive_baseline_mse"],
            [[max_err, mse, naive_baseline_mse(instances)]],
        )
    )
    if max_err > EXACT_TOLERANCE:
        raise RuntimeFailure(f"solver not exact: max error {max_err:g} > {EXACT_TOLERANCE:g}")


@main.command()
@click.option("--n", "n", default=100, show_default=True, help="Sequence length (even).")
@click.option("--count", default=1000, show_default=True, help="Number of instances.")
@click.option("--a", "a", default=DEFAULT_GATE_MAGNITUDE, show_default=True)
@click.option("--scale-bits", default=16, show_default=True, help="Scale S = 2**bits.")
@click.option("--seed", default=0, show_default=True, help="Seed for generated instances.")
@click.option(
    "--dump", default=None, type=click.Path(dir_okay=False),
    help="Write the quantized solver parameters (binary) here.",
)
def quant(n: int, count: int, a: float, scale_bits: int, seed: int, dump: str | None) -> None:
    """Run the hand-crafted solver on the integer path and check its error bound."""
    if not 0 <= scale_bits <= 40:
        raise ValidationError(f"--scale-bits must be in 0..40, got {scale_bits}")
    scale = 1 << scale_bits
    params = _solver_params(a)
    instances = _adding_instances(n, count, seed, None)
    try:
        answers = run_handcrafted_int_batch(a, instances, scale)
        if dump is not None:
            save_quant_params(Path(dump), quantize(params, scale))
    except QuantError as e:
        raise RuntimeFailure(str(e)) from e
    targets = np.array([inst.target for inst in instances])
    max_err = float(np.max(np.abs(answers - targets)))
    bound = n * 2.0 / scale
    click.echo(format_header({"n": n, "count": count, "a": a, "scale": scale, "seed": seed}))
    click.echo(
        build_table(
            ["max_abs_error", "bound_n*2/S", "within_bound"],
            [[max_err, bound, max_err <= bound]],
        )
    )
    if dump is not None:
        click.echo(f"Wrote quantized parameters to {dump}")
    if max_err > bound:
        raise RuntimeFailure(f"integer error {max_err:g} exceeds bound {bound:g}")


def _mnist_split(
    mnist_dir: str | None,
    split: str,
    count: int,
    rng: Rng,
    files: tuple[str, str] | None = None,
) -> SequenceDataset:
    """A seeded subset of *count* samples from one MNIST split."""
    try:
        if files is not None:
            images, labels = Path(files[0]), Path(files[1])
        else:
            directory = mnist_dir or config.mnist_dir
            if directory is None:
                raise ValidationError(
                    "MNIST needs --mnist-dir (or ADDGATE_MNIST_DIR) with the IDX files"
                )
            images, labels = find_mnist_files(Path(directory), split)
        samples = mnist_subset(load_mnist_idx(images, labels), count, rng)
    except (IdxFormatError, ValueError) as e:
        raise ValidationError(str(e)) from e
    return mnist_to_dataset(samples)


def _params_path(base: str, kind: CellKind, several: bool) -> Path:
    path = Path(base)
    if not several:
        return path
    return path.with_name(f"{path.stem}-{kind.value}{path.suffix}")


@main.command()
@click.option(
    "--task", type=click.Choice(["adding", "mnist"]), default="adding", show_default=True
)
@click.option(
    "--cell", "cells", multiple=True, type=click.Choice(CELL_CHOICES),
    help="Cell kind (repeatable for side-by-side runs; default agru).",
)
@click.option("--units", type=int, default=None, help="Hidden units [adding 16, mnist 32].")
@click.option("--n", "n", default=100, show_default=True, help="Adding sequence length.")
@click.option("--train-size", type=int, default=None, help="Training sequences.")
@click.option("--test-size", type=int, default=None, help="Test sequences.")
@click.option("--trials", type=int, default=None, help="Seeded trials per cell.")
@click.option("--epochs", type=int, default=None, help="Epochs [adding 30, mnist 5].")
@click.option("--batch-size", default=64, show_default=True, help="Sequences per Adam step.")
@click.option("--lr", default=1e-3, show_default=True, help="Adam learning rate.")
@click.option("--clip-norm", type=float, default=None, help="Clip gradients to this global norm.")
@click.option(
    "--seed", default=0, show_default=True, help="Seed for data, initialization and shuffling."
)
@click.option(
    "--paper-scale", "--full-scale", "paper_scale", is_flag=True, default=False,
    help="Use full-size datasets and 20 trials instead of desk scale.",
)
@click.option("--history", default=None, type=click.Path(dir_okay=False), help="History CSV.")
@click.option(
    "--save-params", "params_out", default=None, type=click.Path(dir_okay=False),
    help="Save the best trial's parameters (JSON).",
)
@click.option(
    "--mnist-dir", default=None, type=click.Path(file_okay=False),
    help="Directory of the MNIST IDX files [ADDGATE_MNIST_DIR].",
)
@click.option("--images", default=None, type=click.Path(dir_okay=False), help="Train images IDX.")
@click.option("--labels", default=None, type=click.Path(dir_okay=False), help="Train labels IDX.")
def train(
    task: str,
    cells: tuple[str, ...],
    units: int | None,
    n: int,
    train_size: int | None,
    test_size: int | None,
    trials: int | None,
    epochs: int | None,
    batch_size: int,
    lr: float,
    clip_norm: float | None,
    seed: int,
    paper_scale: bool,
    history: str | None,
    params_out: str | None,
    mnist_dir: str | None,
    images: str | None,
    labels: str | None,
) -> None:
    """Train cells on the adding problem or sequential MNIST."""
    sizes = (PAPER_SIZES if paper_scale else DESK_SIZES)[task]
    train_size = train_size if train_size is not None else sizes[0]
    test_size = test_size if test_size is not None else sizes[1]
    trials = trials if trials is not None else sizes[2]
    units = units if units is not None else DEFAULT_UNITS[task]
    epochs = epochs if epochs is not None else DEFAULT_EPOCHS[task]
    kinds = [CellKind(c) for c in (cells or ("agru",))]
    for name, value in (
        ("--units", units), ("--train-size", train_size), ("--test-size", test_size),
        ("--trials", trials),
    ):
        if value < 1:
            raise ValidationError(f"{name} must be >= 1, got {value}")
    if (images is None) != (labels is None):
        raise ValidationError("--images and --labels must be given together")

    loss_kind = LossKind.MSE if task == "adding" else LossKind.CROSS_ENTROPY
    try:
        cfg = TrainConfig(
            batch_size=batch_size, epochs=epochs, seed=seed, loss_kind=loss_kind,
            lr=lr, clip_norm=clip_norm,
        )
    except TrainingError as e:
        raise ValidationError(str(e)) from e

    rng = Rng(seed)
    if task == "adding":
        try:
            train_inst = gen_adding_dataset(rng.spawn(0), train_size, n)
            test_inst = gen_adding_dataset(rng.spawn(1), test_size, n)
        except AddingTaskError as e:
            raise ValidationError(str(e)) from e
        train_set, test_set = adding_to_dataset(train_inst), adding_to_dataset(test_inst)
        output_dim = 1
    else:
        files = (images, labels) if images is not None else None
        train_set = _mnist_split(mnist_dir, "train", train_size, rng.spawn(0), files)
        test_set = _mnist_split(mnist_dir, "test", test_size, rng.spawn(1))
        output_dim = NUM_CLASSES

    click.echo(
        format_header(
            {
                "task": task, "scale": "paper" if paper_scale else "desk",
                "train": train_size, "test": test_size, "trials": trials,
                "units": units, "epochs": epochs, "batch": batch_size, "lr": lr,
                "seed": seed,
            }
        )
    )

    rows = []
    if history is not None:
        Path(history).unlink(missing_ok=True)
    for kind in kinds:
        try:
            results = run_trials(
                kind, units, train_set, test_set, cfg, trials, output_dim=output_dim
            )
            if history is not None:
                for t in results:
                    write_history_csv(
                        t.result.history, Path(history),
                        extra={"cell": kind.value, "trial": str(t.trial)}, append=True,
                    )
        except TrainingError as e:
            raise RuntimeFailure(str(e)) from e
        higher = task == "mnist"
        summary = summarize_trials(results, higher_is_better=higher)
        if task == "adding":
            rows.append([kind.value, trials, summary.top, summary.median, summary.successes])
        else:
            rows.append([kind.value, trials, summary.mean, summary.top])
        if params_out is not None:
            best = (max if higher else min)(results, key=lambda t: t.test_metric)
            try:
                save_params(
                    _params_path(params_out, kind, len(kinds) > 1),
                    best.result.params, best.result.readout,
                )
            except ParamsFileError as e:
                raise RuntimeFailure(str(e)) from e

    if task == "adding":
        click.echo(
            build_table(["cell", "trials", "best_test_mse", "median_test_mse", "successes"], rows)
        )
        click.echo(
            f"naive baseline MSE: {ADDING_BASELINE_MSE:.4f} "
            f"(this test set: {naive_baseline_mse(test_inst):.4f})"
        )
    else:
        click.echo(build_table(["cell", "trials", "mean_accuracy", "best_accuracy"], rows))


@main.command("evaluate")
@click.option(
    "--params", "params_path", required=True, type=click.Path(exists=True, dir_okay=False),
    help="Parameter file written by train --save-params.",
)
@click.option(
    "--task", type=click.Choice(["adding", "mnist"]), default="adding", show_default=True
)
@click.option("--n", "n", default=100, show_default=True, help="Adding sequence length.")
@click.option("--count", default=1000, show_default=True, help="Test sequences.")
@click.option("--seed", default=0, show_default=True, help="Seed for generated test instances.")
@click.option(
    "--input", "source", default=None, type=click.Path(exists=True, dir_okay=False),
    help="Evaluate on an adding CSV instead of generated instances.",
)
@click.option(
    "--mnist-dir", default=None, type=click.Path(file_okay=False),
    help="Directory of the MNIST IDX files [ADDGATE_MNIST_DIR].",
)
def evaluate_cmd(
    params_path: str,
    task: str,
    n: int,
    count: int,
    seed: int,
    source: str | None,
    mnist_dir: str | None,
) -> None:
    """Re-evaluate saved parameters on a test set."""
    try:
        params, readout = load_params(Path(params_path))
    except ParamsFileError as e:
        raise ValidationError(str(e)) from e
    if readout is None:
        raise ValidationError(f"{params_path} has no readout; cannot evaluate")

    if task == "adding":
        instances = _adding_instances(n, count, seed, source)
        data = adding_to_dataset(instances)
        loss_kind = LossKind.MSE
    else:
        data = _mnist_split(mnist_dir, "test", count, Rng(seed).spawn(1))
        loss_kind = LossKind.CROSS_ENTROPY
    if data.inputs.shape[2] != params.input_dim:
        raise ValidationError(
            f"{params_path} expects input dimension {params.input_dim}, "
            f"the {task} task has {data.inputs.shape[2]}"
        )
    try:
        loss, metric = evaluate(params, readout, data, loss_kind)
    except (TrainingError, ValueError) as e:
        raise RuntimeFailure(str(e)) from e
    metric_name = "mse" if task == "adding" else "accuracy"
    click.echo(format_header({"cell": params.kind.value, "units": params.units, "task": task}))
    click.echo(build_table(["sequences", "loss", metric_name], [[len(data), loss, metric]]))


@main.command()
@click.option("--n", "n", default=100, show_default=True, help="Sequence length (even).")
@click.option("--iters", default=200, show_default=True, help="Measured calls per solver.")
@click.option("--warmup", default=20, show_default=True, help="Unmeasured calls per solver.")
@click.option("--repeats", default=1, show_default=True, help="Benchmark repetitions.")
@click.option("--seed", default=0, show_default=True, help="Seed for the timed inputs.")
@click.option("--out", default=None, type=click.Path(dir_okay=False), help="Timing CSV.")
def bench(n: int, iters: int, warmup: int, repeats: int, seed: int, out: str | None) -> None:
    """Time the dot-product, aGNU and multiplicative GNU solvers on the CPU."""
    if repeats < 1:
        raise ValidationError(f"--repeats must be >= 1, got {repeats}")
    try:
        instances = gen_adding_dataset(Rng(seed), 100, n)
    except AddingTaskError as e:
        raise ValidationError(str(e)) from e

    all_reports = []
    for k in range(repeats):
        try:
            reports = bench_solvers(n, iters, warmup, seed=seed)
        except BenchError as e:
            raise ValidationError(str(e)) from e
        all_reports.extend(reports)
        if repeats > 1:
            click.echo(f"run {k + 1}/{repeats}")
        click.echo(
            build_table(
                ["solver", "median_ns", "mean_ns", "std_ns", "min_ns", "max_abs_error"],
                [
                    [r.solver, r.median_ns, r.mean_ns, r.std_ns, r.min_ns,
                     solver_error(r.solver, instances)]
                    for r in reports
                ],
            )
        )
        click.echo(f"agnu/mulgnu median ratio: {median_ratio(reports, 'agnu', 'mulgnu'):.3f}")
    for warning in all_reports[0].warnings:
        click.echo(f"Warning: {warning}")
    if out is not None:
        try:
            emit_report_csv(all_reports, Path(out))
        except BenchError as e:
            raise RuntimeFailure(str(e)) from e
        click.echo(f"Wrote {len(all_reports)} rows to {out}")


@main.command()
@click.option("--n", "n", default=100, show_default=True, help="Sequence length.")
@click.option(
    "--pbs-latency-ms", "latencies", multiple=True,
    help="Per-PBS latency as MS or KEY:MS (KEY 1024 or 2048); repeatable.",
)
@click.option("--out", default=None, type=click.Path(dir_okay=False), help="Cost CSV.")
def cost(n: int, latencies: tuple[str, ...], out: str | None) -> None:
    """PBS counts per solver, with projected encrypted run times."""
    try:
        latency_ms = dict(parse_latency(spec) for spec in latencies)
        reports = cost_table(n, latency_ms)
    except BenchError as e:
        raise ValidationError(str(e)) from e
    columns = list(reports[0].projected_s)
    click.echo(
        build_table(
            ["solver", "pbs_per_step", "pbs_total", *columns],
            [
                [r.solver.value, r.per_step, r.total, *r.projected_s.values()]
                for r in reports
            ],
        )
    )
    by_solver = {r.solver.value: r.total for r in reports}
    click.echo(f"agnu/mulgnu PBS ratio: {by_solver['agnu'] / by_solver['mulgnu']:.3f}")
    if columns:
        click.echo("projected_s columns are projections from the given latency, not measurements")
    if out is not None:
        try:
            emit_cost_csv(reports, Path(out))
        except BenchError as e:
            raise RuntimeFailure(str(e)) from e
        click.echo(f"Wrote {len(reports)} rows to {out}")
