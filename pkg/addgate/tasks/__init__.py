"""Adding-problem and sequential-MNIST tasks."""

from addgate.tasks.adding import (
    DEFAULT_GATE_MAGNITUDE,
    MIN_GATE_MAGNITUDE,
    AddingInstance,
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
from addgate.tasks.mnist import (
    NUM_CLASSES,
    IdxFormatError,
    MnistSample,
    find_mnist_files,
    load_mnist_idx,
    mnist_as_sequence,
    mnist_subset,
    mnist_to_dataset,
    read_idx_images,
    read_idx_labels,
    write_mnist_idx,
)

__all__ = [
    "DEFAULT_GATE_MAGNITUDE",
    "MIN_GATE_MAGNITUDE",
    "NUM_CLASSES",
    "AddingInstance",
    "AddingTaskError",
    "HandcraftedGNU",
    "IdxFormatError",
    "LoadError",
    "MnistSample",
    "adding_to_dataset",
    "find_mnist_files",
    "gen_adding",
    "gen_adding_dataset",
    "handcrafted_solver",
    "load_adding_csv",
    "load_mnist_idx",
    "make_instance",
    "mnist_as_sequence",
    "mnist_subset",
    "mnist_to_dataset",
    "naive_baseline_mse",
    "read_idx_images",
    "read_idx_labels",
    "save_adding_csv",
    "solve_instances",
    "write_mnist_idx",
]
