"""Second-stage retrieval: re-score BM25 candidates with a cross-encoder.

A :class:`RelevanceScorer` maps a (query text, passage text) pair to a
probability in [0, 1]. Scorers are resolved from identity strings:

- ``fixture:<path>``    local JSONL score table (exact pair lookup)
- ``service:<url>``     the sidecar's /rerank endpoint
- ``synthetic:<seed>``  deterministic lexical-overlap scorer

Re-ranking is a stable sort by the new score, so candidates with equal
probabilities keep their first-stage order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Protocol, Sequence

from .analysis import Analyzer
from .errors import RerankError, ScorerError
from .index import InvertedIndex, Query, ScoredDoc, bm25_search, rm3_expand


class RelevanceScorer(Protocol):
    identity: str

    def score(self, query: str, passage: str) -> float: ...


@dataclass
class CallableScorer:
    """Adapter for plain functions (used heavily by tests)."""

    fn: Callable[[str, str], float]
    identity: str = "callable"

    def score(self, query: str, passage: str) -> float:
        return self.fn(query, passage)


class TableScorer:
    """Score table loaded from a JSONL file of {query, passage, score} rows.

    Unknown pairs are scorer errors: a fixture that silently guesses would
    mask broken plumbing.
    """

    def __init__(self, path: str | Path):
        self.identity = f"fixture:{path}"
        self._table: dict[tuple[str, str], float] = {}
        with Path(path).open("r", encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                row = json.loads(line)
                self._table[(row["query"], row["passage"])] = float(row["score"])

    def score(self, query: str, passage: str) -> float:
        try:
            return self._table[(query, passage)]
        except KeyError:
            raise ScorerError(f"no fixture score for pair ({query!r}, {passage!r})") from None


class SyntheticScorer:
    """Deterministic token-overlap scorer backed by the synthetic encoder."""

    def __init__(self, seed: int = 0):
        from .encoder_client import SyntheticBackend

        self._backend = SyntheticBackend(seed=seed)
        self.identity = f"synthetic:{seed}"

    def score(self, query: str, passage: str) -> float:
        return self._backend.rerank(query, passage)


class ServiceScorer:
    """Scorer backed by the sidecar's /rerank endpoint."""

    def __init__(self, url: str):
        from .encoder_client import ServiceBackend

        self._backend = ServiceBackend(url)
        self.identity = f"service:{url}"

    def score(self, query: str, passage: str) -> float:
        return self._backend.rerank(query, passage)


def resolve_scorer(descriptor: str) -> RelevanceScorer:
    kind, _, arg = descriptor.partition(":")
    if kind == "fixture":
        return TableScorer(arg)
    if kind == "service":
        return ServiceScorer(arg)
    if kind == "synthetic":
        return SyntheticScorer(int(arg or "0"))
    raise ValueError(f"unknown scorer descriptor {descriptor!r}")


def rerank(
    scorer: RelevanceScorer,
    query: str,
    candidates: Sequence[ScoredDoc],
    texts: Mapping[str, str],
    max_workers: int = 1,
) -> list[ScoredDoc]:
    """Re-score candidates; any scorer failure aborts the whole call.

    With ``max_workers > 1`` scorer calls run concurrently; scores are
    gathered by candidate position before the final sort, so the output
    never depends on completion order.
    """
    for cand in candidates:
        if cand.paragraph_id not in texts:
            raise RerankError(
                f"no text for candidate paragraph {cand.paragraph_id!r}",
                query=query,
                paragraph_id=cand.paragraph_id,
            )

    def score_one(cand: ScoredDoc) -> float:
        try:
            prob = float(scorer.score(query, texts[cand.paragraph_id]))
        except Exception as exc:
            raise RerankError(
                f"scorer {getattr(scorer, 'identity', '?')} failed on "
                f"(query, {cand.paragraph_id!r}): {exc}",
                query=query,
                paragraph_id=cand.paragraph_id,
            ) from exc
        if not 0.0 <= prob <= 1.0:
            raise RerankError(
                f"scorer returned {prob} outside [0, 1] for {cand.paragraph_id!r}",
                query=query,
                paragraph_id=cand.paragraph_id,
            )
        return prob

    if max_workers > 1 and len(candidates) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            probs = list(pool.map(score_one, candidates))
    else:
        probs = [score_one(cand) for cand in candidates]
    rescored = [ScoredDoc(c.paragraph_id, p, "reranked") for c, p in zip(candidates, probs)]
    # stable: equal scores keep first-stage order
    return sorted(rescored, key=lambda d: -d.score)


def multistage_retrieve(
    index: InvertedIndex,
    scorer: RelevanceScorer,
    query_text: str,
    analyzer: Analyzer,
    texts: Mapping[str, str],
    first_k: int = 100,
    final_k: int = 10,
    k1: float = 0.9,
    b: float = 0.4,
    rm3: Mapping[str, float] | None = None,
) -> list[ScoredDoc]:
    """BM25 (optionally RM3-expanded) top ``first_k``, re-ranked, cut to ``final_k``.

    ``rm3`` carries fb_docs / fb_terms / original_weight overrides; query
    expansion runs between the two BM25 passes, before re-ranking.
    """
    if final_k > first_k:
        raise ValueError("final_k must be <= first_k")
    query = Query.from_text(query_text, analyzer)
    first = bm25_search(index, query, k=first_k, k1=k1, b=b)
    if rm3 is not None and first:
        expanded = rm3_expand(
            index,
            query,
            first,
            analyzer,
            fb_docs=int(rm3.get("fb_docs", 10)),
            fb_terms=int(rm3.get("fb_terms", 10)),
            original_weight=float(rm3.get("original_weight", 0.5)),
        )
        first = bm25_search(index, expanded, k=first_k, k1=k1, b=b)
    reranked = rerank(scorer, query_text, first, texts)
    return reranked[:final_k]


def max_pool_documents(scored: Sequence[ScoredDoc]) -> list[tuple[str, float]]:
    """Collapse paragraph hits to documents: doc score = max paragraph score.

    Paragraph ids follow the ``doc_id#ordinal`` convention; ids without a
    separator are treated as whole-document ids.
    """
    best: dict[str, float] = {}
    for hit in scored:
        doc_id = hit.paragraph_id.rsplit("#", 1)[0]
        if doc_id not in best or hit.score > best[doc_id]:
            best[doc_id] = hit.score
    return sorted(best.items(), key=lambda e: (-e[1], e[0]))
