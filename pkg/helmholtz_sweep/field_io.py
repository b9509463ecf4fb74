"""Raw binary field files.

Layout: 4-byte magic ``HSW1``, three little-endian uint64 dimensions, a
uint64 dtype tag (1 float64, 2 complex128), then the values in Fortran
order. Fields with fewer than three dimensions carry trailing 1s.
"""
from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from .const import HSW_MAGIC, HSW_TAG_COMPLEX128, HSW_TAG_FLOAT64
from .exceptions import FieldFormatError

_LOGGER = logging.getLogger(__name__)

_HEADER_WORDS = 4
_HEADER_SIZE = len(HSW_MAGIC) + 8 * _HEADER_WORDS

_DTYPES = {
    HSW_TAG_FLOAT64: np.dtype("<f8"),
    HSW_TAG_COMPLEX128: np.dtype("<c16"),
}


def save_field(path: str | Path, data: np.ndarray) -> Path:
    """Write a real or complex field of up to three dimensions."""
    array = np.asarray(data)
    if array.ndim == 0 or array.ndim > 3:
        raise FieldFormatError(f"cannot store a {array.ndim}-dimensional field")
    if np.iscomplexobj(array):
        tag = HSW_TAG_COMPLEX128
    else:
        tag = HSW_TAG_FLOAT64
    dims = tuple(array.shape) + (1,) * (3 - array.ndim)

    path = Path(path)
    header = np.array(dims + (tag,), dtype="<u8")
    with path.open("wb") as handle:
        handle.write(HSW_MAGIC)
        handle.write(header.tobytes())
        handle.write(array.astype(_DTYPES[tag]).ravel(order="F").tobytes())
    _LOGGER.debug("Wrote field %s with shape %s", path, dims)
    return path


def load_field(path: str | Path, ndim: int = 3) -> np.ndarray:
    """Read a field written by save_field.

    Trailing dimensions beyond ndim must be 1 and are dropped.
    """
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER_SIZE or raw[: len(HSW_MAGIC)] != HSW_MAGIC:
        raise FieldFormatError(f"{path} is not a field file")

    header = np.frombuffer(raw, dtype="<u8", count=_HEADER_WORDS, offset=len(HSW_MAGIC))
    dims = tuple(int(d) for d in header[:3])
    tag = int(header[3])
    if tag not in _DTYPES:
        raise FieldFormatError(f"{path} has unknown dtype tag {tag}")
    dtype = _DTYPES[tag]

    count = dims[0] * dims[1] * dims[2]
    if len(raw) - _HEADER_SIZE != count * dtype.itemsize:
        raise FieldFormatError(
            f"{path} holds {len(raw) - _HEADER_SIZE} data bytes, "
            f"expected {count * dtype.itemsize}"
        )
    if not 1 <= ndim <= 3 or any(d != 1 for d in dims[ndim:]):
        raise FieldFormatError(f"{path} with shape {dims} is not {ndim}-dimensional")

    data = np.frombuffer(raw, dtype=dtype, offset=_HEADER_SIZE).reshape(dims, order="F")
    return data.reshape(dims[:ndim], order="F").astype(dtype.newbyteorder("="))
