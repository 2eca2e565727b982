"""Binary tensor interchange format (.pbt files).

Layout: 4 magic bytes ``PBT1``, then rows and cols as little-endian uint32,
then rows*cols little-endian float32 values in row-major order. The format is
deliberately primitive so that posterior/feature exporters written in any
language can emit it without a serialization library.
"""

import struct

import numpy as np

MAGIC = b"PBT1"
_HEADER = struct.Struct("<4sII")


class TensorFormatError(Exception):
    """Raised when a .pbt payload violates the format contract."""


class Tensor2D:
    """Row-major float32 matrix with a validated shape header.

    Carrier type for model posteriors (frames x vocab) and frame features
    (frames x feature dim). Values must be finite and the matrix non-empty.
    """

    def __init__(self, data):
        arr = np.ascontiguousarray(data, dtype=np.float32)
        if arr.ndim != 2:
            raise TensorFormatError(f"expected 2-D data, got {arr.ndim}-D")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise TensorFormatError(f"degenerate shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise TensorFormatError("tensor payload contains non-finite values")
        self.data = arr

    @property
    def rows(self):
        return self.data.shape[0]

    @property
    def cols(self):
        return self.data.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Tensor2D):
            return NotImplemented
        return self.data.shape == other.data.shape and self.data.tobytes() == other.data.tobytes()

    def __repr__(self):
        return f"Tensor2D(rows={self.rows}, cols={self.cols})"


def write_tensor(t, path):
    """Write ``t`` to ``path`` in .pbt format."""
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, t.rows, t.cols))
        f.write(t.data.astype("<f4", copy=False).tobytes())


def read_tensor(path):
    """Read a .pbt file; the round trip through write_tensor is bit-exact."""
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < _HEADER.size:
        raise TensorFormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, rows, cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise TensorFormatError(f"{path}: bad magic {magic!r}")
    if rows < 1 or cols < 1:
        raise TensorFormatError(f"{path}: degenerate shape {rows}x{cols}")
    payload = raw[_HEADER.size:]
    expected = 4 * rows * cols
    if len(payload) != expected:
        raise TensorFormatError(
            f"{path}: declared {rows}x{cols} needs {expected} payload bytes, found {len(payload)}"
        )
    arr = np.frombuffer(payload, dtype="<f4").reshape(rows, cols)
    if not np.all(np.isfinite(arr)):
        raise TensorFormatError(f"{path}: payload contains non-finite values")
    return Tensor2D(arr)
