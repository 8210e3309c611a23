"""Boundary to all pretrained-model functionality.

Everything the pipeline needs from large models flows through
:class:`EncoderClient`: sentence embeddings, claim-evidence pair
encodings, NLI probability triplets. The client wraps a transport
backend and a content-addressed cache with three modes:

- ``live``:   call the backend, return its response
- ``record``: call the backend and persist every response to the cache
- ``replay``: serve exclusively from the cache; cache misses are errors
              and the backend is never touched

Two backends ship with the library: :class:`ServiceBackend` (HTTP
sidecar) and :class:`SyntheticBackend`, a fully deterministic stand-in
whose vectors derive from content hashes, so tests and demos run
hermetically. All numeric payloads are 32-bit floats at this boundary;
cache round-trips are therefore bit-exact.
"""

from __future__ import annotations

import base64
import hashlib
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CacheMissError, EncoderError, PayloadError

DEFAULT_EMBED_DIM = 384
DEFAULT_PAIR_DIM = 1024
DEFAULT_MAX_TOKENS = 512


@dataclass(frozen=True)
class SentenceEmbedding:
    vector: np.ndarray  # float32, shape (dim,)
    model_id: str

    def __post_init__(self):
        if not np.all(np.isfinite(self.vector)):
            raise PayloadError("embedding contains non-finite entries")


@dataclass(frozen=True)
class PairEncoding:
    token_vectors: np.ndarray  # float32, shape (n_tokens, dim)
    pooled: np.ndarray  # float32, shape (dim,)
    model_id: str

    def __post_init__(self):
        if self.token_vectors.ndim != 2 or self.token_vectors.shape[0] < 1:
            raise PayloadError("token_vectors must be a non-empty 2-d array")
        if self.pooled.shape != (self.token_vectors.shape[1],):
            raise PayloadError("pooled vector dimension mismatch")
        if not (np.all(np.isfinite(self.token_vectors)) and np.all(np.isfinite(self.pooled))):
            raise PayloadError("pair encoding contains non-finite entries")

    @property
    def dim(self) -> int:
        return self.token_vectors.shape[1]


@dataclass(frozen=True)
class NliTriplet:
    contradiction: float
    neutral: float
    entailment: float

    def __post_init__(self):
        vals = (self.contradiction, self.neutral, self.entailment)
        if not all(math.isfinite(v) and 0.0 <= v <= 1.0 for v in vals):
            raise PayloadError(f"NLI probabilities out of range: {vals}")
        if abs(sum(vals) - 1.0) > 1e-6:
            raise PayloadError(f"NLI probabilities sum to {sum(vals)}, not 1")

    def as_array(self) -> np.ndarray:
        return np.array([self.contradiction, self.neutral, self.entailment], dtype=np.float64)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Plain cosine; zero vectors and dimension mismatches are errors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity undefined for zero vectors")
    return float(np.dot(a, b) / (na * nb))


# ---------------------------------------------------------------------------
# backends


def _hash_rng(*parts: str) -> np.random.Generator:
    digest = hashlib.sha256("\x1f".join(parts).encode("utf-8")).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


class SyntheticBackend:
    """Deterministic content-hash backend.

    Every token maps to a fixed pseudo-random unit vector; texts embed as
    the normalized mean of their token vectors, so lexical overlap shows
    up as cosine similarity. NLI triplets lean toward entailment in
    proportion to token overlap between claim and evidence (with
    ``nli_mode="hash"`` they are overlap-independent). Great for fixtures,
    useless for real inference.
    """

    def __init__(
        self,
        seed: int = 0,
        embed_dim: int = DEFAULT_EMBED_DIM,
        pair_dim: int = DEFAULT_PAIR_DIM,
        max_tokens: int = DEFAULT_MAX_TOKENS,
        nli_mode: str = "overlap",  # "overlap" | "hash"
    ):
        if nli_mode not in ("overlap", "hash"):
            raise ValueError(f"unknown nli_mode {nli_mode!r}")
        self.seed = seed
        self.embed_dim = embed_dim
        self.pair_dim = pair_dim
        self.max_tokens = max_tokens
        self.nli_mode = nli_mode
        self.embed_model_id = f"synthetic-embed-{embed_dim}-s{seed}"
        self.pair_model_id = f"synthetic-pair-{pair_dim}-s{seed}"
        self.nli_model_id = f"synthetic-nli-{nli_mode}-s{seed}"
        self.rerank_model_id = f"synthetic-rerank-s{seed}"
        self._token_memo: dict[tuple[str, str, int], np.ndarray] = {}

    def _token_vector(self, token: str, dim: int, space: str) -> np.ndarray:
        key = (space, token, dim)
        cached = self._token_memo.get(key)
        if cached is None:
            rng = _hash_rng(f"s{self.seed}", space, token)
            v = rng.standard_normal(dim)
            cached = (v / np.linalg.norm(v)).astype(np.float32)
            self._token_memo[key] = cached
        return cached

    def _text_vector(self, text: str, dim: int, space: str) -> np.ndarray:
        tokens = text.lower().split() or [""]
        acc = np.zeros(dim, dtype=np.float64)
        for tok in tokens:
            acc += self._token_vector(tok, dim, space)
        norm = np.linalg.norm(acc)
        if norm == 0.0:
            acc[0] = 1.0
            norm = 1.0
        return (acc / norm).astype(np.float32)

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [self._text_vector(t, self.embed_dim, "embed") for t in texts]

    def _encode_tokens(self, tokens: list[str]) -> tuple[np.ndarray, np.ndarray]:
        # row 0 plays the aggregate first-token role of a real encoder:
        # the normalized mean of the content rows
        body = np.stack([self._token_vector(t, self.pair_dim, "pair") for t in tokens])
        pooled = body.mean(axis=0)
        pooled = (pooled / np.linalg.norm(pooled)).astype(np.float32)
        rows = np.vstack([pooled, body.astype(np.float32)])[: self.max_tokens]
        return rows.astype(np.float32), pooled

    def encode_pair(self, claim: str, evidence: str) -> tuple[np.ndarray, np.ndarray]:
        tokens = (claim.lower().split() + ["</s>"] + evidence.lower().split())[: self.max_tokens - 1]
        return self._encode_tokens(tokens)

    def encode_single(self, text: str) -> tuple[np.ndarray, np.ndarray]:
        tokens = text.lower().split()[: self.max_tokens - 1] or ["</s>"]
        return self._encode_tokens(tokens)

    def nli(self, claim: str, evidence: str) -> tuple[float, float, float]:
        rng = _hash_rng(f"s{self.seed}", "nli", claim, evidence)
        noise = rng.random(3)
        if self.nli_mode == "hash":
            weights = noise + 0.05
        else:
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
        # trim f32 rounding so the triplet sums to 1 exactly in f32
        probs[2] = np.float32(1.0) - probs[0] - probs[1]
        return float(probs[0]), float(probs[1]), float(probs[2])

    def rerank(self, query: str, passage: str) -> float:
        q_tokens = set(query.lower().split())
        p_tokens = set(passage.lower().split())
        if not q_tokens or not p_tokens:
            return 0.0
        overlap = len(q_tokens & p_tokens) / len(q_tokens | p_tokens)
        noise = float(_hash_rng(f"s{self.seed}", "rerank", query, passage).random())
        return float(np.float32(min(1.0, 0.98 * overlap + 0.02 * noise)))

    def ner(self, text: str) -> list[tuple[str, str]]:
        # capitalized-token heuristic; kind chosen by hash for determinism
        kinds = ("PERSON", "ORGANIZATION", "GPE", "FACILITY")
        out = []
        for tok in text.split():
            word = tok.strip(".,!?;:\"'")
            if len(word) > 1 and word[0].isupper() and word[1:].islower():
                kind = kinds[int.from_bytes(hashlib.sha256(word.encode()).digest()[:2], "little") % 4]
                out.append((word, kind))
        return out

    def tokenize_count(self, texts: Sequence[str]) -> list[int]:
        return [len(t.split()) for t in texts]


class ServiceBackend:
    """HTTP transport to the model sidecar."""

    def __init__(self, base_url: str, timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._session = None
        ids = self._get("/health")
        self.embed_model_id = ids["models"]["embed"]
        self.pair_model_id = ids["models"]["encode"]
        self.nli_model_id = ids["models"]["nli"]
        self.rerank_model_id = ids["models"]["rerank"]
        self._embed_dim = int(ids["dimensions"]["embed"])
        self._pair_dim = int(ids["dimensions"]["encode"])

    def _http(self):
        if self._session is None:
            import requests

            self._session = requests.Session()
        return self._session

    def _get(self, path: str) -> dict:
        resp = self._http().get(self.base_url + path, timeout=self.timeout)
        if resp.status_code != 200:
            raise EncoderError(f"GET {path} -> {resp.status_code}: {resp.text[:200]}")
        return resp.json()

    def _post(self, path: str, body: dict) -> dict:
        resp = self._http().post(self.base_url + path, json=body, timeout=self.timeout)
        if resp.status_code != 200:
            raise EncoderError(f"POST {path} -> {resp.status_code}: {resp.text[:200]}")
        return resp.json()

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        data = self._post("/embed", {"texts": list(texts)})
        return [decode_f32(v, self._embed_dim) for v in data["vectors"]]

    def encode_pair(self, claim: str, evidence: str) -> tuple[np.ndarray, np.ndarray]:
        data = self._post("/encode-pair", {"claim": claim, "evidence": evidence})
        n = int(data["token_count"])
        tokens = decode_f32(data["token_vectors"], n * self._pair_dim).reshape(n, self._pair_dim)
        pooled = decode_f32(data["pooled"], self._pair_dim)
        return tokens, pooled

    def encode_single(self, text: str) -> tuple[np.ndarray, np.ndarray]:
        data = self._post("/encode-single", {"text": text})
        n = int(data["token_count"])
        tokens = decode_f32(data["token_vectors"], n * self._pair_dim).reshape(n, self._pair_dim)
        pooled = decode_f32(data["pooled"], self._pair_dim)
        return tokens, pooled

    def nli(self, claim: str, evidence: str) -> tuple[float, float, float]:
        data = self._post("/nli", {"claim": claim, "evidence": evidence})
        probs = decode_f32(data["probabilities"], 3)
        return float(probs[0]), float(probs[1]), float(probs[2])

    def rerank(self, query: str, passage: str) -> float:
        data = self._post("/rerank", {"pairs": [{"query": query, "passage": passage}]})
        return float(decode_f32(data["scores"], 1)[0])

    def ner(self, text: str) -> list[tuple[str, str]]:
        data = self._post("/ner", {"text": text})
        return [(e["span"], e["kind"]) for e in data["entities"]]

    def tokenize_count(self, texts: Sequence[str]) -> list[int]:
        data = self._post("/tokenize-count", {"texts": list(texts)})
        return [int(c) for c in data["counts"]]


def encode_f32(array: np.ndarray) -> str:
    """Base64 little-endian float32, the wire/cache array format."""
    arr = np.ascontiguousarray(array, dtype="<f4")
    return base64.b64encode(arr.tobytes()).decode("ascii")


def decode_f32(payload: str, expected_size: int | None = None) -> np.ndarray:
    raw = base64.b64decode(payload.encode("ascii"))
    arr = np.frombuffer(raw, dtype="<f4").copy()
    if expected_size is not None and arr.size != expected_size:
        raise PayloadError(f"expected {expected_size} floats, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise PayloadError("payload contains non-finite values")
    return arr


# ---------------------------------------------------------------------------
# cache + client


def cache_key(operation: str, model_id: str, inputs: Sequence[str]) -> str:
    canonical = json.dumps([operation, model_id, list(inputs)], ensure_ascii=False,
                           separators=(",", ":"), sort_keys=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class EncoderCache:
    """Line-record store: one JSON object {key, operation, payload} per line.

    Writes go through a temp file and an atomic rename.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._entries: dict[str, dict] = {}
        if self.path.exists():
            with self.path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    rec = json.loads(line)
                    self._entries[rec["key"]] = rec

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, key: str) -> dict | None:
        rec = self._entries.get(key)
        return rec["payload"] if rec else None

    def put(self, key: str, operation: str, payload: dict) -> None:
        self._entries[key] = {"key": key, "operation": operation, "payload": payload}
        self._flush()

    def _flush(self) -> None:
        from .locking import file_lock

        tmp = self.path.with_suffix(self.path.suffix + f".tmp{os.getpid()}")
        with file_lock(self.path):
            with tmp.open("w", encoding="utf-8") as fh:
                for key in sorted(self._entries):
                    fh.write(json.dumps(self._entries[key], ensure_ascii=False,
                                        separators=(",", ":")) + "\n")
            tmp.replace(self.path)


class EncoderClient:
    """Cache-aware front to an encoder backend. See module docstring."""

    MODES = ("live", "record", "replay")

    def __init__(self, backend=None, cache_path: str | Path | None = None, mode: str = "live"):
        if mode not in self.MODES:
            raise ValueError(f"mode must be one of {self.MODES}")
        if mode in ("live", "record") and backend is None:
            raise ValueError(f"{mode} mode requires a backend")
        if mode in ("record", "replay") and cache_path is None:
            raise ValueError(f"{mode} mode requires a cache path")
        self.backend = backend
        self.mode = mode
        self.cache = EncoderCache(cache_path) if cache_path is not None else None
        if mode == "replay":
            ids = self.cache.get("model-ids")
            if ids is None:
                raise CacheMissError(f"{cache_path}: cache has no model-identity record")
            self.embed_model_id = ids["embed"]
            self.pair_model_id = ids["pair"]
            self.nli_model_id = ids["nli"]
        else:
            self.embed_model_id = backend.embed_model_id
            self.pair_model_id = backend.pair_model_id
            self.nli_model_id = backend.nli_model_id
            if mode == "record":
                self.cache.put("model-ids", "meta", {
                    "embed": self.embed_model_id,
                    "pair": self.pair_model_id,
                    "nli": self.nli_model_id,
                })

    def _lookup(self, key: str) -> dict | None:
        if self.mode == "live" or self.cache is None:
            return None
        return self.cache.get(key)

    def _settle(self, key: str, operation: str, payload: dict) -> None:
        if self.mode == "record":
            self.cache.put(key, operation, payload)

    def _miss(self, key: str, operation: str):
        raise CacheMissError(f"replay cache has no entry for {operation} key {key[:12]}...")

    def embed_sentences(self, texts: Sequence[str]) -> list[SentenceEmbedding]:
        """One embedding per input text, order preserved."""
        for t in texts:
            if not t:
                raise ValueError("texts must be non-empty strings")
        out: list[SentenceEmbedding | None] = [None] * len(texts)
        missing: list[int] = []
        for i, text in enumerate(texts):
            key = cache_key("embed", self.embed_model_id, [text])
            payload = self._lookup(key)
            if payload is not None:
                out[i] = SentenceEmbedding(decode_f32(payload["vector"], payload["dim"]),
                                           payload["model_id"])
            elif self.mode == "replay":
                self._miss(key, "embed")
            else:
                missing.append(i)
        if missing:
            vectors = self.backend.embed([texts[i] for i in missing])
            for i, vec in zip(missing, vectors):
                vec = np.asarray(vec, dtype=np.float32)
                if not np.all(np.isfinite(vec)):
                    raise PayloadError("backend returned non-finite embedding")
                key = cache_key("embed", self.embed_model_id, [texts[i]])
                self._settle(key, "embed", {
                    "model_id": self.embed_model_id,
                    "dim": int(vec.size),
                    "vector": encode_f32(vec),
                })
                out[i] = SentenceEmbedding(vec, self.embed_model_id)
        return out  # type: ignore[return-value]

    def _encode(self, operation: str, inputs: list[str]) -> PairEncoding:
        key = cache_key(operation, self.pair_model_id, inputs)
        payload = self._lookup(key)
        if payload is not None:
            n, dim = payload["token_count"], payload["dim"]
            tokens = decode_f32(payload["token_vectors"], n * dim).reshape(n, dim)
            return PairEncoding(tokens, decode_f32(payload["pooled"], dim), payload["model_id"])
        if self.mode == "replay":
            self._miss(key, operation)
        if operation == "encode-pair":
            tokens, pooled = self.backend.encode_pair(*inputs)
        else:
            tokens, pooled = self.backend.encode_single(inputs[0])
        tokens = np.asarray(tokens, dtype=np.float32)
        pooled = np.asarray(pooled, dtype=np.float32)
        enc = PairEncoding(tokens, pooled, self.pair_model_id)
        self._settle(key, operation, {
            "model_id": self.pair_model_id,
            "token_count": int(tokens.shape[0]),
            "dim": int(tokens.shape[1]),
            "token_vectors": encode_f32(tokens),
            "pooled": encode_f32(pooled),
        })
        return enc

    def encode_pair(self, claim: str, evidence: str) -> PairEncoding:
        if not claim or not evidence:
            raise ValueError("claim and evidence must be non-empty")
        return self._encode("encode-pair", [claim, evidence])

    def encode_single(self, text: str) -> PairEncoding:
        if not text:
            raise ValueError("text must be non-empty")
        return self._encode("encode-single", [text])

    def nli(self, claim: str, evidence: str) -> NliTriplet:
        if not claim or not evidence:
            raise ValueError("claim and evidence must be non-empty")
        key = cache_key("nli", self.nli_model_id, [claim, evidence])
        payload = self._lookup(key)
        if payload is not None:
            probs = decode_f32(payload["probabilities"], 3)
            return NliTriplet(float(probs[0]), float(probs[1]), float(probs[2]))
        if self.mode == "replay":
            self._miss(key, "nli")
        c, n, e = self.backend.nli(claim, evidence)
        triplet = NliTriplet(float(np.float32(c)), float(np.float32(n)), float(np.float32(e)))
        self._settle(key, "nli", {
            "model_id": self.nli_model_id,
            "probabilities": encode_f32(np.array([triplet.contradiction, triplet.neutral,
                                                  triplet.entailment])),
        })
        return triplet
