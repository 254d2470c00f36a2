"""MNIST in IDX format, read row by row as a 28-step sequence.

IDX files are big-endian: a 4-byte magic (0x00000803 for images,
0x00000801 for labels), one 4-byte count, and for images two 4-byte
dimensions, followed by unsigned bytes.  Files ending in ``.gz`` are
decompressed transparently.
"""

from __future__ import annotations

import gzip
import logging
import os
import struct
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from addgate.tensor import Rng
from addgate.train import SequenceDataset

logger = logging.getLogger(__name__)

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
SIDE = 28
NUM_CLASSES = 10

TRAIN_FILES = ("train-images-idx3-ubyte", "train-labels-idx1-ubyte")
TEST_FILES = ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte")


class IdxFormatError(Exception):
    """Raised for malformed or mismatched IDX files."""


@dataclass(frozen=True)
class MnistSample:
    pixels: np.ndarray
    label: int

    def __post_init__(self) -> None:
        if self.pixels.shape != (SIDE, SIDE):
            raise IdxFormatError(f"image must be {SIDE}x{SIDE}, got {self.pixels.shape}")
        if not 0 <= self.label < NUM_CLASSES:
            raise IdxFormatError(f"label must be in 0..{NUM_CLASSES - 1}, got {self.label}")


def _read_bytes(path: Path) -> bytes:
    path = Path(path)
    try:
        if path.suffix == ".gz":
            with gzip.open(path, "rb") as f:
                return f.read()
        return path.read_bytes()
    except (OSError, EOFError) as e:
        raise IdxFormatError(f"Cannot read {path}: {e}") from e


def _parse_header(data: bytes, path: Path, magic: int, ndims: int) -> tuple[int, ...]:
    size = 4 * (1 + ndims)
    if len(data) < size:
        raise IdxFormatError(f"{path}: truncated IDX header")
    found, *dims = struct.unpack(f">{1 + ndims}I", data[:size])
    if found != magic:
        raise IdxFormatError(f"{path}: bad magic 0x{found:08x}, expected 0x{magic:08x}")
    return tuple(dims)


def read_idx_images(path: Path) -> np.ndarray:
    """Return a (count, 28, 28) uint8 array."""
    data = _read_bytes(path)
    count, rows, cols = _parse_header(data, path, IMAGE_MAGIC, 3)
    if (rows, cols) != (SIDE, SIDE):
        raise IdxFormatError(f"{path}: images are {rows}x{cols}, expected {SIDE}x{SIDE}")
    body = data[16:]
    if len(body) != count * rows * cols:
        raise IdxFormatError(
            f"{path}: header declares {count} images but body holds {len(body)} bytes"
        )
    return np.frombuffer(body, dtype=np.uint8).reshape(count, rows, cols)


def read_idx_labels(path: Path) -> np.ndarray:
    data = _read_bytes(path)
    (count,) = _parse_header(data, path, LABEL_MAGIC, 1)
    body = data[8:]
    if len(body) != count:
        raise IdxFormatError(f"{path}: header declares {count} labels but body holds {len(body)}")
    labels = np.frombuffer(body, dtype=np.uint8)
    if labels.size and labels.max() >= NUM_CLASSES:
        raise IdxFormatError(f"{path}: label {int(labels.max())} out of range")
    return labels


def load_mnist_idx(
    images_path: Path, labels_path: Path, limit: int | None = None
) -> list[MnistSample]:
    """Parse paired IDX files; pixels scaled to [0, 1], first *limit* samples kept."""
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if len(images) != len(labels):
        raise IdxFormatError(
            f"{images_path} holds {len(images)} images but {labels_path} holds {len(labels)} labels"
        )
    if limit is not None:
        if limit < 0:
            raise ValueError(f"limit must be >= 0, got {limit}")
        images, labels = images[:limit], labels[:limit]
    logger.debug("loaded %d MNIST samples from %s", len(images), images_path)
    return [
        MnistSample(img.astype(np.float64) / 255.0, int(label))
        for img, label in zip(images, labels)
    ]


def find_mnist_files(directory: Path, split: str = "train") -> tuple[Path, Path]:
    """Locate the (images, labels) pair for *split* in *directory*, plain or gzipped."""
    names = TRAIN_FILES if split == "train" else TEST_FILES
    found = []
    for name in names:
        for candidate in (Path(directory) / name, Path(directory) / f"{name}.gz"):
            if candidate.exists():
                found.append(candidate)
                break
        else:
            raise IdxFormatError(f"{name}[.gz] not found in {directory}")
    return found[0], found[1]


def mnist_as_sequence(s: MnistSample) -> list[np.ndarray]:
    """Row t of the image is the input at step t."""
    return [s.pixels[t] for t in range(SIDE)]


def mnist_subset(samples: Sequence[MnistSample], count: int, rng: Rng) -> list[MnistSample]:
    """A seeded random subset of *count* samples, in sampled order."""
    if count > len(samples):
        raise ValueError(f"subset of {count} requested from {len(samples)} samples")
    idx = rng.permutation(len(samples))[:count]
    return [samples[int(k)] for k in idx]


def mnist_to_dataset(samples: Sequence[MnistSample]) -> SequenceDataset:
    """(N, 28, 28) inputs and (N,) integer labels."""
    if not samples:
        raise ValueError("no MNIST samples")
    inputs = np.stack([s.pixels for s in samples])
    labels = np.array([s.label for s in samples], dtype=np.int64)
    return SequenceDataset(inputs, labels)


def write_mnist_idx(
    images: np.ndarray, labels: np.ndarray, images_path: Path, labels_path: Path
) -> None:
    """Write uint8 images (count, 28, 28) and labels (count,) as IDX files."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    if images.ndim != 3 or images.shape[1:] != (SIDE, SIDE):
        raise IdxFormatError(f"images must be (count, {SIDE}, {SIDE}), got {images.shape}")
    if len(images) != len(labels):
        raise IdxFormatError(f"{len(images)} images but {len(labels)} labels")
    image_bytes = struct.pack(">4I", IMAGE_MAGIC, len(images), SIDE, SIDE) + images.tobytes()
    label_bytes = struct.pack(">2I", LABEL_MAGIC, len(labels)) + labels.tobytes()
    for path, payload in ((images_path, image_bytes), (labels_path, label_bytes)):
        path = Path(path)
        opener = gzip.open if path.suffix == ".gz" else open
        try:
            with opener(os.fspath(path), "wb") as f:
                f.write(payload)
        except OSError as e:
            raise IdxFormatError(f"Cannot write {path}: {e}") from e
