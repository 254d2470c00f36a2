"""Parameter files: save and load cell (and readout) parameters as JSON.

Format (version 1)::

    {
      "version": 1,
      "kind": "agru",
      "input_dim": 2,
      "units": 16,
      "proposal_activation": "relu",
      "output_activation": "identity",
      "gates": [["update", {"W": [[...]], "U": [[...]], "b": [...]}], ...],
      "readout": {"W": [[...]], "b": [...], "activation": "identity"} | null
    }

Gates appear in the fixed per-kind order of ``GATE_NAMES``; matrices are
row-major nested lists.  Floats are written with Python's shortest
round-trip repr, so loading a saved file reproduces every float bit-exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from addgate.cells.params import (
    GATE_NAMES,
    CellKind,
    CellParams,
    GateParams,
    ReadoutParams,
)
from addgate.tensor import ActivationKind

PARAMS_VERSION = 1


class ParamsFileError(ValueError):
    """Raised for unreadable or malformed parameter files."""


def save_params(
    path: Path, params: CellParams, readout: ReadoutParams | None = None
) -> None:
    """Serialize *params* (and optionally *readout*) to a JSON file."""
    doc = {
        "version": PARAMS_VERSION,
        "kind": params.kind.value,
        "input_dim": params.input_dim,
        "units": params.units,
        "proposal_activation": params.proposal_activation.value,
        "output_activation": params.output_activation.value,
        "gates": [
            [name, _serialize_arrays(params.gates[name].arrays())]
            for name in GATE_NAMES[params.kind]
        ],
        "readout": None,
    }
    if readout is not None:
        doc["readout"] = {
            **_serialize_arrays(readout.arrays()),
            "activation": readout.activation.value,
        }
    try:
        Path(path).write_text(json.dumps(doc, allow_nan=False) + "\n")
    except OSError as e:
        raise ParamsFileError(f"Cannot write {path}: {e}") from e
    except ValueError as e:
        raise ParamsFileError(f"Cannot save non-finite parameters to {path}") from e


def load_params(path: Path) -> tuple[CellParams, ReadoutParams | None]:
    """Deserialize a parameter file into (CellParams, ReadoutParams or None)."""
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as e:
        raise ParamsFileError(f"Cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ParamsFileError(f"Invalid parameter file {path}: {e}") from e
    _validate_doc(doc, path)

    try:
        kind = CellKind(doc["kind"])
        gates = {name: GateParams(**_deserialize_arrays(arrs)) for name, arrs in doc["gates"]}
        params = CellParams(
            kind,
            int(doc["input_dim"]),
            int(doc["units"]),
            gates,
            ActivationKind(doc["proposal_activation"]),
            ActivationKind(doc["output_activation"]),
        )
        readout = None
        if doc.get("readout") is not None:
            r = dict(doc["readout"])
            activation = ActivationKind(r.pop("activation"))
            readout = ReadoutParams(**_deserialize_arrays(r), activation=activation)
    except (KeyError, TypeError, ValueError) as e:
        raise ParamsFileError(f"Invalid parameter file {path}: {e}") from e
    return params, readout


def is_params_file(path: Path) -> bool:
    """Sniff whether *path* holds a parameter file (JSON with version+kind+gates)."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError, UnicodeDecodeError):
        return False
    return isinstance(doc, dict) and {"version", "kind", "gates"} <= doc.keys()


def _validate_doc(doc: Any, path: Path) -> None:
    if not isinstance(doc, dict):
        raise ParamsFileError(f"Invalid parameter file: {path}")
    if doc.get("version") != PARAMS_VERSION:
        raise ParamsFileError(
            f"Unsupported parameter file version {doc.get('version')} in {path}"
        )
    if not isinstance(doc.get("gates"), list):
        raise ParamsFileError(f"Invalid parameter file (missing gates): {path}")


def _serialize_arrays(arrays: dict[str, np.ndarray]) -> dict[str, Any]:
    return {name: arr.tolist() for name, arr in arrays.items()}


def _deserialize_arrays(data: dict[str, Any]) -> dict[str, np.ndarray]:
    out: dict[str, np.ndarray] = {}
    for name, values in data.items():
        arr = np.array(values, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise ParamsFileError(f"non-finite values in array {name!r}")
        out[name] = arr
    return out
