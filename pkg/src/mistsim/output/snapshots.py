"""
Binary density-matrix snapshots.

Layout: uint64 subsystem count, one uint64 per subsystem dimension, then the matrix as
little-endian complex128 in row-major order. All integers are little-endian.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from mistsim.core.exceptions import BasisMismatchError
from mistsim.core.types import BasisTag
from mistsim.operators import DensityMatrix

_HEADER_DTYPE = np.dtype("<u8")
_DATA_DTYPE = np.dtype("<c16")


def dump_snapshot(path: str | Path, rho: DensityMatrix) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    dims = np.asarray([len(rho.dims), *rho.dims], dtype=_HEADER_DTYPE)
    with target.open("wb") as handle:
        handle.write(dims.tobytes())
        handle.write(np.ascontiguousarray(rho.matrix, dtype=_DATA_DTYPE).tobytes(order="C"))
    return target


def load_snapshot(path: str | Path, basis_tag: BasisTag) -> DensityMatrix:
    """
    Raises:
        BasisMismatchError: payload size does not match the dims header
    """
    raw = Path(path).read_bytes()
    count = int(np.frombuffer(raw, dtype=_HEADER_DTYPE, count=1)[0])
    dims = tuple(int(d) for d in np.frombuffer(raw, dtype=_HEADER_DTYPE, count=count, offset=8))
    size = int(np.prod(dims))
    payload = np.frombuffer(raw, dtype=_DATA_DTYPE, offset=8 * (count + 1))
    if payload.size != size * size:
        raise BasisMismatchError(
            "snapshot payload does not match its dims header",
            expected=size * size,
            actual=payload.size,
        )
    return DensityMatrix(payload.reshape(size, size).copy(), dims, basis_tag)
