"""Binary snapshot files.

Layout (little-endian, no padding)::

    b"BENJF01\\n"
    u64 snapshot_count, u64 n, f64 L
    per snapshot: f64 t, then n f64 samples
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .solver import Trajectory
from .spectral import Grid1D, RealField

MAGIC = b"BENJF01\n"
_HEADER = struct.Struct("<QQd")


class CheckpointFormatError(ValueError):
    pass


def checkpoint_write(traj: Trajectory, path) -> None:
    n = traj.grid.n
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(len(traj), n, traj.grid.length))
        for t, u in zip(traj.times, traj.states):
            fh.write(struct.pack("<d", float(t)))
            fh.write(np.ascontiguousarray(u.samples, dtype="<f8").tobytes())


def checkpoint_read(path) -> Trajectory:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[: len(MAGIC)] != MAGIC:
        raise CheckpointFormatError(f"{os.fspath(path)}: bad magic, not a BENJF01 checkpoint")
    off = len(MAGIC)
    if len(data) < off + _HEADER.size:
        raise CheckpointFormatError(f"{os.fspath(path)}: truncated header")
    count, n, length = _HEADER.unpack_from(data, off)
    off += _HEADER.size
    try:
        grid = Grid1D(int(n), float(length))
    except (ValueError, TypeError) as exc:
        raise CheckpointFormatError(f"{os.fspath(path)}: invalid grid in header ({exc})") from None
    record = 8 * (n + 1)
    expected = off + count * record
    if len(data) != expected:
        raise CheckpointFormatError(
            f"{os.fspath(path)}: payload has {len(data) - off} bytes, expected {count * record}"
        )
    payload = np.frombuffer(data, dtype="<f8", offset=off).reshape(count, n + 1)
    times = payload[:, 0].astype(float)
    states = tuple(RealField(grid, row[1:].astype(float)) for row in payload)
    return Trajectory(times, states, None, grid, {})
