"""Binary parameter checkpoints: versioned header, JSON metadata block,
then named float64 little-endian arrays."""

from __future__ import annotations

import io
import json
import struct
from pathlib import Path

import numpy as np

from ..errors import CheckpointError
from .tape import Parameter

_MAGIC = b"CCKP"
_VERSION = 1


def save_checkpoint(
    params: list[Parameter], path: str | Path, meta: dict | None = None
) -> None:
    path = Path(path)
    out = io.BytesIO()
    out.write(_MAGIC)
    out.write(struct.pack("<I", _VERSION))
    meta_raw = json.dumps(meta or {}, sort_keys=True, separators=(",", ":")).encode("utf-8")
    out.write(struct.pack("<I", len(meta_raw)))
    out.write(meta_raw)
    out.write(struct.pack("<I", len(params)))
    for p in params:
        name_raw = p.name.encode("utf-8")
        out.write(struct.pack("<H", len(name_raw)))
        out.write(name_raw)
        out.write(struct.pack("<B", p.data.ndim))
        for dim in p.data.shape:
            out.write(struct.pack("<I", dim))
        out.write(np.ascontiguousarray(p.data, dtype="<f8").tobytes())
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(out.getvalue())
    tmp.replace(path)


def load_checkpoint(path: str | Path) -> tuple[dict, dict[str, np.ndarray]]:
    path = Path(path)
    with path.open("rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise CheckpointError(f"{path}: not a checkpoint (magic {magic!r})")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != _VERSION:
            raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
        (meta_len,) = struct.unpack("<I", fh.read(4))
        meta = json.loads(fh.read(meta_len).decode("utf-8"))
        (count,) = struct.unpack("<I", fh.read(4))
        arrays: dict[str, np.ndarray] = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<H", fh.read(2))
            name = fh.read(name_len).decode("utf-8")
            (ndim,) = struct.unpack("<B", fh.read(1))
            shape = tuple(struct.unpack("<I", fh.read(4))[0] for _ in range(ndim))
            n_values = int(np.prod(shape)) if shape else 1
            raw = fh.read(8 * n_values)
            if len(raw) != 8 * n_values:
                raise CheckpointError(f"{path}: truncated array {name!r}")
            arrays[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
    return meta, arrays
