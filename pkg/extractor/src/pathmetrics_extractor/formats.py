"""Writers for the pathmetrics interchange formats.

The extractor talks to the metrics engine only through files, so the .pbt
layout (magic "PBT1", uint32 rows/cols little-endian, float32 row-major
payload) and the JSON schemas are re-implemented here from their
documentation rather than imported.
"""

import json
import os
import struct
import tempfile

import numpy as np

MAGIC = b"PBT1"


def write_pbt(array, path):
    """Atomically write a 2-D float32 array in .pbt layout."""
    arr = np.ascontiguousarray(array, dtype="<f4")
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"need a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite values in tensor payload")
    payload = struct.pack("<4sII", MAGIC, arr.shape[0], arr.shape[1]) + arr.tobytes()
    _atomic_write_bytes(path, payload)


def read_pbt(path):
    with open(path, "rb") as f:
        raw = f.read()
    magic, rows, cols = struct.unpack_from("<4sII", raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    return np.frombuffer(raw[12:], dtype="<f4").reshape(rows, cols)


def write_json(doc, path):
    _atomic_write_bytes(path, (json.dumps(doc, indent=1, ensure_ascii=False) + "\n").encode("utf-8"))


def _atomic_write_bytes(path, payload):
    path = os.fspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", prefix=".tmp_")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def vocab_doc(labels, blank_index, sil_index=None, word_delim_index=None):
    return {
        "schema_version": 1,
        "labels": list(labels),
        "blank_index": int(blank_index),
        "sil_index": sil_index,
        "word_delim_index": word_delim_index,
    }


def lexicon_doc(entries):
    return {"schema_version": 1, "entries": {w: list(p) for w, p in sorted(entries.items())}}
