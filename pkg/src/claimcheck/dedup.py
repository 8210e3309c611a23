"""Near-duplicate claim removal and collection uniqueness statistics.

Candidate pairs come from a BM25 sweep over the claim collection itself
(every claim is both query and document); a cross-encoder then assigns
each candidate pair a similarity probability. Pairs at or above the
removal threshold feed a greedy scan that keeps the first claim of each
duplicate group in canonical id order.

Two named presets exist: LARGE removes only pairs scored >= 0.99 (keeps
more claims), SMALL removes pairs scored >= 0.90 (keeps fewer). Since
every SMALL-threshold removal is also triggered at a lower bar, the
SMALL kept set is always a subset of the LARGE kept set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .analysis import Analyzer
from .corpus import ClaimRecord
from .errors import ClaimcheckError
from .index import IndexUnit, InvertedIndex, Query, bm25_search, build_index
from .rerank import RelevanceScorer

PRESETS: dict[str, float] = {"LARGE": 0.99, "SMALL": 0.90}


@dataclass(frozen=True)
class SimilarityPair:
    """Scored claim pair, stored once with claim_a < claim_b."""

    claim_a: str
    claim_b: str
    probability: float

    def __post_init__(self):
        if self.claim_a == self.claim_b:
            raise ValueError("a similarity pair needs two distinct claims")
        if self.claim_a > self.claim_b:
            raise ValueError("pair must be canonical: claim_a < claim_b")
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability {self.probability} outside [0, 1]")

    @classmethod
    def canonical(cls, id_a: str, id_b: str, probability: float) -> "SimilarityPair":
        a, b = sorted((id_a, id_b))
        return cls(a, b, probability)


@dataclass(frozen=True)
class DedupConfig:
    removal_threshold: float
    candidate_k: int = 20
    preset: str = "custom"

    def __post_init__(self):
        if not 0.0 < self.removal_threshold <= 1.0:
            raise ValueError("removal_threshold must be in (0, 1]")
        if self.candidate_k < 1:
            raise ValueError("candidate_k must be >= 1")

    @classmethod
    def from_preset(cls, name: str, candidate_k: int = 20) -> "DedupConfig":
        key = name.upper()
        if key not in PRESETS:
            raise ValueError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")
        return cls(PRESETS[key], candidate_k, key)


@dataclass(frozen=True)
class DedupReport:
    kept: tuple[str, ...]
    removed: tuple[tuple[str, SimilarityPair], ...]  # (claim_id, trigger pair)
    label_counts_before: dict[str, int]
    label_counts_after: dict[str, int]

    @property
    def removed_ids(self) -> tuple[str, ...]:
        return tuple(cid for cid, _ in self.removed)


def build_claim_index(claims: Sequence[ClaimRecord], analyzer: Analyzer) -> InvertedIndex:
    return build_index([IndexUnit(c.id, c.text) for c in claims], analyzer)


def score_candidate_pairs(
    claims: Sequence[ClaimRecord],
    index: InvertedIndex,
    scorer: RelevanceScorer,
    analyzer: Analyzer,
    candidate_k: int = 20,
    max_workers: int = 1,
) -> list[SimilarityPair]:
    """Score every BM25-candidate pair once, canonically.

    Returns all scored pairs regardless of threshold so callers can apply
    several thresholds to one scoring pass. Scorer failures propagate: no
    partial pair list is ever returned. Pair scoring may run concurrently
    (``max_workers``); the output order is by canonical pair regardless.
    """
    text_of = {c.id: c.text for c in claims}
    candidates: set[tuple[str, str]] = set()
    for claim in claims:
        try:
            query = Query.from_text(claim.text, analyzer)
        except ClaimcheckError:
            continue  # claim is all stopwords; no candidates from this side
        hits = bm25_search(index, query, k=candidate_k + 1)
        for hit in hits:
            if hit.paragraph_id == claim.id:
                continue
            if hit.paragraph_id not in text_of:
                raise ClaimcheckError(f"index returned unknown claim id {hit.paragraph_id!r}")
            a, b = sorted((claim.id, hit.paragraph_id))
            candidates.add((a, b))
    ordered = sorted(candidates)

    def score_one(key: tuple[str, str]) -> SimilarityPair:
        a, b = key
        return SimilarityPair(a, b, float(scorer.score(text_of[a], text_of[b])))

    if max_workers > 1 and len(ordered) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(score_one, ordered))
    return [score_one(key) for key in ordered]


def find_similar_pairs(
    claims: Sequence[ClaimRecord],
    index: InvertedIndex,
    scorer: RelevanceScorer,
    analyzer: Analyzer,
    candidate_k: int = 20,
    threshold: float = 0.9,
) -> list[SimilarityPair]:
    """Canonical, distinct pairs whose similarity probability >= threshold."""
    scored = score_candidate_pairs(claims, index, scorer, analyzer, candidate_k)
    return [p for p in scored if p.probability >= threshold]


def deduplicate(
    claims: Sequence[ClaimRecord],
    pairs: Sequence[SimilarityPair],
    policy: str = "greedy_first_kept",
) -> DedupReport:
    """Drop near-duplicates, keeping one representative per duplicate group.

    ``greedy_first_kept`` scans canonical id order and removes a claim
    iff it pairs with any earlier claim; the pair to the earliest such
    claim is the recorded trigger. Removal by *any* earlier claim (kept
    or not) is what makes the kept set monotone in the threshold:
    raising the threshold can only delete pairs, which can only rescue
    claims, never evict one.

    ``cluster_representative`` unions pairs into connected components and
    keeps each component's smallest id; every removed claim's trigger is
    its direct pair toward the component. Also threshold-monotone:
    deleting edges only splits components, and each fragment's new
    representative is its old one or a larger id set's minimum.
    """
    if policy not in ("greedy_first_kept", "cluster_representative"):
        raise ValueError(f"unknown policy {policy!r}")
    by_id = {c.id: c for c in claims}
    for pair in pairs:
        for cid in (pair.claim_a, pair.claim_b):
            if cid not in by_id:
                raise ClaimcheckError(f"pair references unknown claim id {cid!r}")

    kept: list[str] = []
    removed: list[tuple[str, SimilarityPair]] = []
    if policy == "greedy_first_kept":
        earlier: dict[str, list[tuple[str, SimilarityPair]]] = {}
        for pair in pairs:
            earlier.setdefault(pair.claim_b, []).append((pair.claim_a, pair))
        for cid in sorted(by_id):
            links = sorted(earlier.get(cid, ()), key=lambda e: e[0])
            if links:
                removed.append((cid, links[0][1]))
            else:
                kept.append(cid)
    else:
        parent: dict[str, str] = {cid: cid for cid in by_id}

        def find(cid: str) -> str:
            while parent[cid] != cid:
                parent[cid] = parent[parent[cid]]
                cid = parent[cid]
            return cid

        for pair in sorted(pairs, key=lambda p: (p.claim_a, p.claim_b)):
            ra, rb = find(pair.claim_a), find(pair.claim_b)
            if ra != rb:
                lo, hi = sorted((ra, rb))
                parent[hi] = lo
        trigger_of: dict[str, SimilarityPair] = {}
        for pair in sorted(pairs, key=lambda p: (p.claim_a, p.claim_b)):
            trigger_of.setdefault(pair.claim_b, pair)
            trigger_of.setdefault(pair.claim_a, pair)
        for cid in sorted(by_id):
            if find(cid) == cid:
                kept.append(cid)
            else:
                removed.append((cid, trigger_of[cid]))

    def label_counts(ids) -> dict[str, int]:
        counts = {"False": 0, "True": 0}
        for cid in ids:
            counts[by_id[cid].label] += 1
        return counts

    return DedupReport(
        kept=tuple(kept),
        removed=tuple(removed),
        label_counts_before=label_counts(by_id),
        label_counts_after=label_counts(kept),
    )


@dataclass(frozen=True)
class SimilarityStats:
    mean: float
    std: float
    p90: float


def nearest_rank_percentile(values: Sequence[float], pct: float) -> float:
    """Nearest-rank percentile: the ceil(pct*n)-th smallest value."""
    if not values:
        raise ValueError("no values")
    ordered = sorted(values)
    rank = math.ceil(pct * len(ordered))
    return ordered[max(rank, 1) - 1]


def similarity_stats(
    claims: Sequence[ClaimRecord],
    pair_scorer: Callable[[str, str], float],
) -> SimilarityStats:
    """Uniqueness statistics: per claim, the score of its most similar
    neighbour; reported as mean, sample std and nearest-rank p90."""
    if len(claims) < 2:
        raise ValueError("similarity statistics need at least 2 claims")
    maxima = []
    for i, claim in enumerate(claims):
        best = max(
            pair_scorer(claim.text, other.text)
            for j, other in enumerate(claims)
            if j != i
        )
        maxima.append(float(best))
    arr = np.asarray(maxima, dtype=np.float64)
    return SimilarityStats(
        mean=float(arr.mean()),
        std=float(arr.std(ddof=1)),
        p90=nearest_rank_percentile(maxima, 0.90),
    )


def bertscore_pair_scorer(client, baseline: float = 0.0) -> Callable[[str, str], float]:
    """Claim-vs-claim scorer: BERTScore F1 over encoder token vectors.

    Token vectors are fetched once per distinct text through the encoder
    boundary, so n^2 comparisons cost n encoder calls.
    """
    memo: dict[str, np.ndarray] = {}

    def vectors(text: str) -> np.ndarray:
        got = memo.get(text)
        if got is None:
            got = np.asarray(client.encode_single(text).token_vectors, dtype=np.float64)
            memo[text] = got
        return got

    def score(a: str, b: str) -> float:
        return bertscore_f1(vectors(a), vectors(b), baseline)

    return score


def bertscore_f1(
    candidate_token_vectors: np.ndarray,
    reference_token_vectors: np.ndarray,
    baseline: float = 0.0,
) -> float:
    """Greedy-matching token similarity with baseline rescaling.

    Precision: each candidate token takes its best cosine match among the
    reference tokens; recall symmetric; F1 harmonic mean; the result is
    rescaled to (f1 - baseline) / (1 - baseline).
    """
    cand = np.asarray(candidate_token_vectors, dtype=np.float64)
    ref = np.asarray(reference_token_vectors, dtype=np.float64)
    if cand.ndim != 2 or ref.ndim != 2 or cand.shape[0] == 0 or ref.shape[0] == 0:
        raise ValueError("token vector sequences must be non-empty 2-d arrays")
    if cand.shape[1] != ref.shape[1]:
        raise ValueError(f"dimension mismatch: {cand.shape[1]} vs {ref.shape[1]}")
    if not 0.0 <= baseline < 1.0:
        raise ValueError("baseline must be in [0, 1)")
    cand_norm = cand / np.linalg.norm(cand, axis=1, keepdims=True)
    ref_norm = ref / np.linalg.norm(ref, axis=1, keepdims=True)
    sim = cand_norm @ ref_norm.T
    precision = float(sim.max(axis=1).mean())
    recall = float(sim.max(axis=0).mean())
    f1 = 0.0 if precision + recall == 0.0 else 2.0 * precision * recall / (precision + recall)
    return (f1 - baseline) / (1.0 - baseline)
