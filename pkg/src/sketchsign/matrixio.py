"""Minimal self-describing container for named float64 matrices.

Layout: the ASCII magic line ``SSMX1``, one JSON header line listing each
matrix as ``[name, rows, cols]`` plus a scalar dict, then the raw
little-endian float64 row-major blocks concatenated in listing order.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

__all__ = ["save_matrices", "load_matrices"]

MAGIC = b"SSMX1\n"


def save_matrices(
    path: str | Path,
    matrices: dict[str, np.ndarray],
    scalars: dict[str, float] | None = None,
) -> None:
    items = sorted(matrices.items())  # name order, so bytes ignore dict order
    header = {
        "matrices": [[name, int(m.shape[0]), int(m.shape[1])] for name, m in items],
        "scalars": dict(scalars or {}),
    }
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        for _, m in items:
            fh.write(np.ascontiguousarray(m, dtype="<f8").tobytes())


def load_matrices(
    path: str | Path,
) -> tuple[dict[str, np.ndarray], dict[str, float]]:
    with open(path, "rb") as fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise ValueError(f"{path} is not a SSMX1 container")
        header = json.loads(fh.readline().decode())
        matrices: dict[str, np.ndarray] = {}
        for name, rows, cols in header["matrices"]:
            buf = fh.read(rows * cols * 8)
            if len(buf) != rows * cols * 8:
                raise ValueError(f"{path} is truncated at matrix {name!r}")
            matrices[name] = np.frombuffer(buf, dtype="<f8").reshape(rows, cols).copy()
    return matrices, header["scalars"]
