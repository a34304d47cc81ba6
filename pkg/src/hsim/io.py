"""Result files: eigenvalue CSV, binary eigenvector blocks, traces and index lists."""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

VECTOR_MAGIC = b"HSEV"
_HEADER = struct.Struct("<4sQQ")

EIGEN_COLUMNS = ("index", "eigenvalue", "residual")
TRACE_COLUMNS = ("level", "iteration", "converged", "max_residual", "seconds")


def _fmt(x: float) -> str:
    return repr(float(x))


def write_eigen_csv(path, eigenvalues, residuals) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EIGEN_COLUMNS)
        for i, (lam, r) in enumerate(zip(eigenvalues, residuals)):
            w.writerow([i, _fmt(lam), _fmt(r)])


def read_eigen_csv(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    lam = np.array([float(r["eigenvalue"]) for r in rows])
    res = np.array([float(r["residual"]) for r in rows])
    return lam, res


def write_vectors(path, vectors: np.ndarray) -> None:
    """``HSEV`` magic, u64 rows, u64 columns, then column-major little-endian float64."""
    v = np.asarray(vectors, dtype="<f8")
    n, p = v.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(VECTOR_MAGIC, n, p))
        fh.write(np.asfortranarray(v).tobytes(order="F"))


def read_vectors(path) -> np.ndarray:
    data = Path(path).read_bytes()
    magic, n, p = _HEADER.unpack_from(data)
    if magic != VECTOR_MAGIC:
        raise ValueError(f"{path}: not an eigenvector file")
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    if body.size != n * p:
        raise ValueError(f"{path}: expected {n * p} values, found {body.size}")
    return body.reshape((n, p), order="F").astype(float)


def write_trace_csv(path, traces) -> None:
    """``traces`` is a list (one entry per solved level, coarse to fine) of trace rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        n_levels = len(traces)
        for k, rows in enumerate(traces):
            level = n_levels - 1 - k
            for r in rows:
                w.writerow([level, r.iteration, r.converged, _fmt(r.max_residual), f"{r.seconds:.6f}"])


def write_index_list(path, indices) -> None:
    with open(path, "w") as fh:
        fh.writelines(f"{int(i)}\n" for i in indices)


def read_index_list(path) -> np.ndarray:
    return np.array([int(x) for x in Path(path).read_text().split()], dtype=np.int64)
