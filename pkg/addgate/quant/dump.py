"""Binary dump of :class:`QuantParams`.

Layout, all big-endian::

    b"AGQP"                      magic
    >H   version (1)
    >q   scale
    >H n, n bytes                kind (UTF-8)
    >H n, n bytes                proposal activation (UTF-8)
    >I   input_dim
    >I   units
    >H   gate count
    per gate:
      >H n, n bytes              gate name (UTF-8)
      W, U, b                    >q integers, row-major
"""

from __future__ import annotations

import struct
from io import BytesIO
from pathlib import Path
from typing import BinaryIO

import numpy as np

from addgate.cells import GATE_NAMES, CellKind
from addgate.quant.fixed import IntGate, QuantError, QuantParams, check_scale
from addgate.tensor import ActivationKind

MAGIC = b"AGQP"
DUMP_VERSION = 1


class DumpFormatError(QuantError):
    """Raised for unreadable quantized parameter dumps."""


def _write_str(out: BinaryIO, s: str) -> None:
    data = s.encode("utf-8")
    out.write(struct.pack(">H", len(data)))
    out.write(data)


def _write_ints(out: BinaryIO, arr: np.ndarray) -> None:
    out.write(np.ascontiguousarray(arr, dtype=">i8").tobytes())


def dumps_quant_params(q: QuantParams) -> bytes:
    out = BytesIO()
    out.write(MAGIC)
    out.write(struct.pack(">Hq", DUMP_VERSION, q.scale))
    _write_str(out, q.kind.value)
    _write_str(out, q.proposal_activation.value)
    out.write(struct.pack(">IIH", q.input_dim, q.units, len(q.gates)))
    for name, gate in q.gates.items():
        _write_str(out, name)
        for arr in gate.arrays().values():
            _write_ints(out, arr)
    return out.getvalue()


class _Reader:
    def __init__(self, data: bytes, source: str) -> None:
        self.data = data
        self.pos = 0
        self.source = source

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise DumpFormatError(f"{self.source}: truncated at byte {self.pos}")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self) -> str:
        (n,) = self.unpack(">H")
        return self.take(n).decode("utf-8")

    def ints(self, shape: tuple[int, ...]) -> np.ndarray:
        count = int(np.prod(shape))
        raw = self.take(8 * count)
        return np.frombuffer(raw, dtype=">i8").astype(np.int64).reshape(shape)


def loads_quant_params(data: bytes, source: str = "<bytes>") -> QuantParams:
    r = _Reader(data, source)
    if r.take(4) != MAGIC:
        raise DumpFormatError(f"{source}: not a quantized parameter dump")
    version, scale = r.unpack(">Hq")
    if version != DUMP_VERSION:
        raise DumpFormatError(f"{source}: unsupported dump version {version}")
    try:
        check_scale(scale)
        kind = CellKind(r.string())
        activation = ActivationKind(r.string())
    except (ValueError, UnicodeDecodeError) as e:
        raise DumpFormatError(f"{source}: {e}") from e
    input_dim, units, count = r.unpack(">IIH")
    names = GATE_NAMES[kind]
    if count != len(names):
        raise DumpFormatError(f"{source}: {kind.value} has {len(names)} gates, dump has {count}")
    gates: dict[str, IntGate] = {}
    for expected in names:
        name = r.string()
        if name != expected:
            raise DumpFormatError(f"{source}: expected gate {expected!r}, found {name!r}")
        gates[name] = IntGate(
            r.ints((units, input_dim)), r.ints((units, units)), r.ints((units,))
        )
    if r.pos != len(data):
        raise DumpFormatError(f"{source}: {len(data) - r.pos} trailing bytes")
    return QuantParams(scale, kind, input_dim, units, gates, activation)


def save_quant_params(path: Path, q: QuantParams) -> None:
    try:
        Path(path).write_bytes(dumps_quant_params(q))
    except OSError as e:
        raise DumpFormatError(f"Cannot write {path}: {e}") from e


def load_quant_params(path: Path) -> QuantParams:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise DumpFormatError(f"Cannot read {path}: {e}") from e
    return loads_quant_params(data, str(path))
