"""Record-mode cache writer, byte-compatible with the pipeline client.

The client's documented cache format: one JSON object per line with keys
{key, operation, payload}, sorted by key, payload arrays as base64
little-endian float32; the cache key is sha256 of the canonical JSON
array [operation, model_id, inputs]. A "model-ids" meta record maps the
client's three model roles.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
from pathlib import Path

import numpy as np


def encode_f32(array: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(array, dtype="<f4").tobytes()).decode("ascii")


def cache_key(operation: str, model_id: str, inputs: list[str]) -> str:
    canonical = json.dumps([operation, model_id, inputs], ensure_ascii=False,
                           separators=(",", ":"), sort_keys=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class RecordCache:
    def __init__(self, path: str | Path, model_ids: dict[str, str]):
        self.path = Path(path)
        self._entries: dict[str, dict] = {}
        if self.path.exists():
            with self.path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        rec = json.loads(line)
                        self._entries[rec["key"]] = rec
        self.put("model-ids", "meta", {
            "embed": model_ids["embed"],
            "pair": model_ids["encode"],
            "nli": model_ids["nli"],
        })

    def put(self, key: str, operation: str, payload: dict) -> None:
        self._entries[key] = {"key": key, "operation": operation, "payload": payload}
        tmp = self.path.with_suffix(self.path.suffix + f".tmp{os.getpid()}")
        with tmp.open("w", encoding="utf-8") as fh:
            for k in sorted(self._entries):
                fh.write(json.dumps(self._entries[k], ensure_ascii=False,
                                    separators=(",", ":")) + "\n")
        tmp.replace(self.path)
