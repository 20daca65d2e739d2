"""Matrix file formats, MMSet ingestion, and JSON-line run records.

Matrices are either headerless CSV or a binary format: magic ``AEM1``, two
little-endian uint64 dimensions, then row-major float64 values.
"""

from __future__ import annotations

import json
import struct
import time

import numpy as np

from .core import MMSet, rank_transform, validate_mmset
from .errors import ParseError

__all__ = [
    "MAGIC",
    "load_matrix",
    "save_matrix",
    "load_weights",
    "load_mmset",
    "run_record",
]

MAGIC = b"AEM1"
SCHEMA_VERSION = 1


def load_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(4)
        if head == MAGIC:
            return _read_binary(fh, path)
    return _read_csv(path)


def _read_binary(fh, path) -> np.ndarray:
    dims = fh.read(16)
    if len(dims) != 16:
        raise ParseError(f"{path}: truncated header", location=4 + len(dims))
    rows, cols = struct.unpack("<QQ", dims)
    payload = fh.read()
    expected = 8 * rows * cols
    if len(payload) != expected:
        raise ParseError(
            f"{path}: expected {expected} payload bytes, got {len(payload)}", location=20
        )
    return np.frombuffer(payload, dtype="<f8").reshape(rows, cols).astype(np.float64)


def _read_csv(path) -> np.ndarray:
    rows = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = [float(tok) for tok in line.split(",")]
            except ValueError as exc:
                raise ParseError(f"{path}: {exc}", location=lineno) from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ParseError(
                    f"{path}: row has {len(row)} columns, expected {width}", location=lineno
                )
            rows.append(row)
    if not rows:
        raise ParseError(f"{path}: empty matrix file")
    return np.array(rows, dtype=np.float64)


def save_matrix(path, matrix, fmt: str = "csv") -> None:
    matrix = np.asarray(matrix, dtype=np.float64)
    if fmt == "csv":
        np.savetxt(path, matrix, fmt="%.17g", delimiter=",")
    elif fmt == "binary":
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<QQ", *matrix.shape))
            fh.write(matrix.astype("<f8").tobytes(order="C"))
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")


def load_weights(path) -> np.ndarray:
    w = load_matrix(path)
    return w.reshape(-1)


def load_mmset(cost_path, weights_path=None, rank: bool = False) -> MMSet:
    """Load and validate an MMSet; with ``rank`` the costs are replaced by
    their normalized strict-less ranks before anything else sees them."""
    costs = load_matrix(cost_path)
    weights = load_weights(weights_path) if weights_path else None
    S = validate_mmset(costs, weights)
    if rank:
        S = validate_mmset(rank_transform(S.costs), S.weights)
    return S


def run_record(command: str, parameters: dict, seconds: float, results: dict) -> str:
    """One JSON line describing a CLI run."""
    record = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "parameters": parameters,
        "seconds": seconds,
        "results": results,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    return json.dumps(record, sort_keys=True)
