"""Pipeline configuration: JSON file plus flag overrides, flags win.

Every emitted artifact embeds ``config_hash`` (sha256 of the effective
configuration) and the seed, so a rerun with the same configuration is
attributable and, in replay mode, bit-identical.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path


@dataclass
class PipelineConfig:
    claims: str | None = None
    docs: str | None = None
    index_dir: str = "work"
    cache: str | None = None
    mode: str = "live"  # live | record | replay
    encoder: str = "synthetic:0"  # synthetic:<seed> | service:<url>
    scorer: str = "synthetic:0"  # synthetic:<seed> | fixture:<path> | service:<url>
    seed: int = 0

    # retrieval
    k1: float = 0.9
    b: float = 0.4
    first_k: int = 100
    final_k: int = 10
    rm3_enabled: bool = False
    rm3_fb_docs: int = 10
    rm3_fb_terms: int = 10
    rm3_original_weight: float = 0.5
    max_paragraph_tokens: int = 300

    # dedup
    dedup_preset: str = "large"
    candidate_k: int = 20

    # evidence
    flat_n: int = 5
    per_doc: int = 3
    min_sentence_tokens: int = 3

    # verdict
    head: str = "nli-san"
    graph_threshold: float = 0.9
    epochs: int | None = None  # None: the head's published default
    batch_size: int = 30
    learning_rate: float | None = None
    hidden: int = 50

    def config_hash(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def load_config(path: str | Path | None, overrides: dict) -> PipelineConfig:
    """Build the effective config: file values, then non-None overrides."""
    base: dict = {}
    if path is not None:
        base = json.loads(Path(path).read_text("utf-8"))
        unknown = set(base) - set(PipelineConfig.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
    merged = {**base, **{k: v for k, v in overrides.items() if v is not None}}
    return PipelineConfig(**merged)
