"""Service configuration."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8320
    backend: str = "hash"  # "hash" (deterministic, dependency-free) | "transformers"
    embed_model: str = "MiniLM-L12-v2"
    encode_model: str = "roberta-large"
    nli_model: str = "roberta-large-mnli"
    rerank_model: str = "monot5-style"
    ner_model: str = "capitalization-heuristic"
    embed_dim: int = 384
    encode_dim: int = 1024
    max_sequence_length: int = 512
    max_batch: int = 32
    deterministic: bool = True
    record_cache: str | None = None  # cache file in the client's record format

    def model_ids(self) -> dict[str, str]:
        suffix = f"@{self.backend}"
        return {
            "embed": self.embed_model + suffix,
            "encode": self.encode_model + suffix,
            "nli": self.nli_model + suffix,
            "rerank": self.rerank_model + suffix,
            "ner": self.ner_model + suffix,
        }
