"""Model backends.

``HashModels`` is the default: fully deterministic vectors derived from
content hashes, no model downloads, stable across restarts. It exists so
the service contract (shapes, determinism, distribution constraints) can
run anywhere; swap in ``TransformersModels`` for real inference.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .config import ServiceConfig


class ModelNotLoaded(Exception):
    """Raised when a requested backend cannot serve (-> HTTP 503)."""


def _rng(*parts: str) -> np.random.Generator:
    digest = hashlib.sha256("\x1f".join(parts).encode("utf-8")).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


class HashModels:
    """Deterministic stand-ins with the same interface as real models."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self._memo: dict[tuple[str, str, int], np.ndarray] = {}

    def _token_vector(self, token: str, dim: int, space: str) -> np.ndarray:
        key = (space, token, dim)
        vec = self._memo.get(key)
        if vec is None:
            v = _rng(space, token).standard_normal(dim)
            vec = (v / np.linalg.norm(v)).astype(np.float32)
            self._memo[key] = vec
        return vec

    def _mean_vector(self, text: str, dim: int, space: str) -> np.ndarray:
        tokens = text.lower().split() or ["</s>"]
        acc = np.zeros(dim, dtype=np.float64)
        for tok in tokens:
            acc += self._token_vector(tok, dim, space)
        norm = np.linalg.norm(acc)
        if norm == 0.0:
            acc[0] = 1.0
            norm = 1.0
        return (acc / norm).astype(np.float32)

    def embed(self, texts: list[str]) -> np.ndarray:
        return np.stack([self._mean_vector(t, self.config.embed_dim, "embed") for t in texts])

    def _encode_tokens(self, tokens: list[str]) -> tuple[np.ndarray, np.ndarray]:
        dim = self.config.encode_dim
        body = np.stack([self._token_vector(t, dim, "encode") for t in tokens])
        pooled = body.mean(axis=0)
        pooled = (pooled / np.linalg.norm(pooled)).astype(np.float32)
        rows = np.vstack([pooled[None, :], body])[: self.config.max_sequence_length]
        return rows.astype(np.float32), pooled

    def encode_pair(self, claim: str, evidence: str) -> tuple[np.ndarray, np.ndarray]:
        limit = self.config.max_sequence_length - 1
        tokens = (claim.lower().split() + ["</s>"] + evidence.lower().split())[:limit]
        return self._encode_tokens(tokens)

    def encode_single(self, text: str) -> tuple[np.ndarray, np.ndarray]:
        limit = self.config.max_sequence_length - 1
        tokens = text.lower().split()[:limit] or ["</s>"]
        return self._encode_tokens(tokens)

    def nli(self, claim: str, evidence: str) -> np.ndarray:
        noise = _rng("nli", claim, evidence).random(3)
        c_tokens = set(claim.lower().split())
        e_tokens = set(evidence.lower().split())
        overlap = len(c_tokens & e_tokens) / max(1, len(c_tokens))
        weights = np.array(
            [
                0.15 * (1.0 - overlap) + 0.05 * noise[0],
                0.85 * (1.0 - overlap) + 0.05 * noise[1],
                overlap + 0.05 * noise[2],
            ]
        )
        probs = (weights / weights.sum()).astype(np.float32)
        probs[2] = np.float32(1.0) - probs[0] - probs[1]
        return probs

    def rerank(self, query: str, passage: str) -> float:
        q = set(query.lower().split())
        p = set(passage.lower().split())
        if not q or not p:
            return 0.0
        overlap = len(q & p) / len(q | p)
        noise = float(_rng("rerank", query, passage).random())
        return float(np.float32(min(1.0, 0.98 * overlap + 0.02 * noise)))

    KINDS = ("PERSON", "ORGANIZATION", "GPE", "FACILITY")

    def ner(self, text: str) -> list[dict]:
        entities = []
        for tok in text.split():
            word = tok.strip(".,!?;:\"'()")
            if len(word) > 1 and word[0].isupper() and word[1:].islower():
                pick = int.from_bytes(hashlib.sha256(word.encode()).digest()[:2], "little")
                entities.append({"span": word, "kind": self.KINDS[pick % 4]})
        return entities

    def tokenize_count(self, texts: list[str]) -> list[int]:
        # stands in for a subword tokenizer; whitespace tokens here
        return [len(t.split()) for t in texts]


class TransformersModels:
    """Real pretrained models behind the same interface.

    Heavy dependencies and weights load lazily on first use; any load
    failure surfaces as :class:`ModelNotLoaded` (HTTP 503). With the
    deterministic flag, inference runs single-threaded in eval mode.
    """

    def __init__(self, config: ServiceConfig):
        self.config = config
        try:
            import torch
            from sentence_transformers import SentenceTransformer
            from transformers import (
                AutoModel,
                AutoModelForSequenceClassification,
                AutoTokenizer,
            )
        except ImportError as exc:
            raise ModelNotLoaded(
                f"transformers backend requires optional dependencies: {exc}"
            ) from exc
        self._torch = torch
        if config.deterministic:
            torch.manual_seed(0)
            torch.set_num_threads(1)
        try:
            self._embedder = SentenceTransformer(config.embed_model)
            self._enc_tokenizer = AutoTokenizer.from_pretrained(config.encode_model)
            self._encoder = AutoModel.from_pretrained(config.encode_model).eval()
            self._nli_tokenizer = AutoTokenizer.from_pretrained(config.nli_model)
            self._nli = AutoModelForSequenceClassification.from_pretrained(
                config.nli_model
            ).eval()
            self._rerank_tokenizer = AutoTokenizer.from_pretrained(config.rerank_model)
            self._reranker = AutoModelForSequenceClassification.from_pretrained(
                config.rerank_model
            ).eval()
        except Exception as exc:  # missing weights, offline hub, bad names
            raise ModelNotLoaded(f"could not load model weights: {exc}") from exc

    def embed(self, texts: list[str]) -> np.ndarray:
        return np.asarray(self._embedder.encode(texts), dtype=np.float32)

    def _encode(self, **tokenizer_args) -> tuple[np.ndarray, np.ndarray]:
        torch = self._torch
        batch = self._enc_tokenizer(
            truncation=True, max_length=self.config.max_sequence_length,
            return_tensors="pt", **tokenizer_args,
        )
        with torch.no_grad():
            out = self._encoder(**batch)
        hidden = out.last_hidden_state[0].numpy().astype(np.float32)
        pooled = hidden[0].copy()  # first-token pooled representation
        return hidden, pooled

    def encode_pair(self, claim: str, evidence: str) -> tuple[np.ndarray, np.ndarray]:
        return self._encode(text=claim, text_pair=evidence)

    def encode_single(self, text: str) -> tuple[np.ndarray, np.ndarray]:
        return self._encode(text=text)

    def nli(self, claim: str, evidence: str) -> np.ndarray:
        torch = self._torch
        batch = self._nli_tokenizer(claim, evidence, truncation=True,
                                    max_length=self.config.max_sequence_length,
                                    return_tensors="pt")
        with torch.no_grad():
            logits = self._nli(**batch).logits[0]
        probs = torch.softmax(logits, dim=-1).numpy().astype(np.float32)
        return probs  # label order: contradiction, neutral, entailment

    def rerank(self, query: str, passage: str) -> float:
        torch = self._torch
        batch = self._rerank_tokenizer(query, passage, truncation=True,
                                       max_length=self.config.max_sequence_length,
                                       return_tensors="pt")
        with torch.no_grad():
            logits = self._reranker(**batch).logits[0]
        if logits.numel() == 1:
            prob = torch.sigmoid(logits)[0]
        else:
            prob = torch.softmax(logits, dim=-1)[-1]
        return float(prob)

    def ner(self, text: str) -> list[dict]:
        raise ModelNotLoaded("NER is not wired for the transformers backend")

    def tokenize_count(self, texts: list[str]) -> list[int]:
        return [len(self._enc_tokenizer.tokenize(t)) for t in texts]


def build_models(config: ServiceConfig):
    if config.backend == "hash":
        return HashModels(config)
    if config.backend == "transformers":
        return TransformersModels(config)
    raise ValueError(f"unknown backend {config.backend!r}")
