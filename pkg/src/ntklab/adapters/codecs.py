"""File formats: dataset and trajectory CSV, Gram matrix CSV/binary and binary network checkpoints.

Floats are written with 17 significant digits so every value reads back bit for bit.
"""

import csv
import io
import json
import struct

import numpy as np

from ntklab.domain.errors import CodecError
from ntklab.domain.models.flow import Trajectory
from ntklab.domain.models.network import NetworkState
from ntklab.domain.models.sphere import Dataset
from ntklab.utils.formatting import format_float, parse_float

TRAJECTORY_COLUMNS = (
    "t",
    "empirical_risk",
    "excess_risk",
    "excess_risk_stderr",
    "estimation_gap",
    "estimation_gap_stderr",
    "max_move",
    "gram_min_eig",
)

CHECKPOINT_MAGIC = b"NTKW"
CHECKPOINT_VERSION = 1
CHECKPOINT_HEADER = struct.Struct("<4sIQQ")
GRAM_MAGIC = b"NTKG"
GRAM_HEADER = struct.Struct("<4sQ")


def _write_rows(header, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def encode_dataset(dataset: Dataset) -> str:
    """CSV with columns ``x_0 .. x_{d-1}, y, xi_star``."""
    header = [f"x_{k}" for k in range(dataset.d)] + ["y", "xi_star"]
    table = np.column_stack([dataset.X, dataset.y, dataset.noise])
    return _write_rows(header, ([format_float(value) for value in row] for row in table))


def decode_dataset(text: str) -> Dataset:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header[-2:] != ["y", "xi_star"] or header[:-2] != [f"x_{k}" for k in range(len(header) - 2)]:
        raise CodecError(f"unexpected dataset header {header}")
    table = np.array([[parse_float(field) for field in row] for row in reader], dtype=np.float64)
    return Dataset(X=table[:, :-2], y=table[:, -2], noise=table[:, -1])


def encode_trajectory_csv(trajectory: Trajectory) -> str:
    """The trajectory CSV; fields not computed by the run are left empty."""
    rows = ([format_float(getattr(point, column)) for column in TRAJECTORY_COLUMNS] for point in trajectory.points)
    return _write_rows(TRAJECTORY_COLUMNS, rows)


def encode_trajectory_json(trajectory: Trajectory) -> str:
    """All diagnostics of every checkpoint, including the ones the CSV schema leaves out."""
    payload = {"mode": trajectory.mode, "points": [point.model_dump() for point in trajectory.points]}
    return json.dumps(payload, indent=2) + "\n"


def encode_gram_csv(H: np.ndarray) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows([format_float(value) for value in row] for row in np.asarray(H))
    return buffer.getvalue()


def encode_gram_binary(H: np.ndarray) -> bytes:
    """Header (magic, n) followed by the row-major little-endian float64 entries."""
    H = np.asarray(H, dtype="<f8")
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise CodecError(f"Gram matrix must be square, got shape {H.shape}")
    return GRAM_HEADER.pack(GRAM_MAGIC, H.shape[0]) + np.ascontiguousarray(H).tobytes()


def decode_gram_binary(data: bytes) -> np.ndarray:
    magic, n = GRAM_HEADER.unpack_from(data)
    if magic != GRAM_MAGIC:
        raise CodecError("not a Gram matrix file")
    body = data[GRAM_HEADER.size :]
    if len(body) != 8 * n * n:
        raise CodecError(f"expected {n * n} entries, found {len(body) // 8}")
    return np.frombuffer(body, dtype="<f8").reshape(n, n).copy()


def encode_checkpoint(state: NetworkState) -> bytes:
    """Header (magic, version, m, d), row-major float64 weights, then one signed byte per output sign."""
    header = CHECKPOINT_HEADER.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, state.m, state.d)
    weights = np.ascontiguousarray(state.W, dtype="<f8").tobytes()
    return header + weights + state.a.astype(np.int8).tobytes()


def decode_checkpoint(data: bytes) -> NetworkState:
    magic, version, m, d = CHECKPOINT_HEADER.unpack_from(data)
    if magic != CHECKPOINT_MAGIC:
        raise CodecError("not a network checkpoint")
    if version != CHECKPOINT_VERSION:
        raise CodecError(f"unsupported checkpoint version {version}")
    offset = CHECKPOINT_HEADER.size
    expected = offset + 8 * m * d + m
    if len(data) != expected:
        raise CodecError(f"checkpoint should hold {expected} bytes, found {len(data)}")
    W = np.frombuffer(data, dtype="<f8", count=m * d, offset=offset).reshape(m, d)
    a = np.frombuffer(data, dtype=np.int8, count=m, offset=offset + 8 * m * d).astype(np.float64)
    return NetworkState(W=W, a=a)


def checkpoint_sidecar(seed: int, step: int, t: float) -> str:
    return json.dumps({"seed": seed, "step": step, "t": t}, indent=2, sort_keys=True) + "\n"
