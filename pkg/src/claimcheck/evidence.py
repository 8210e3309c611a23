"""Evidence sentence selection by embedding similarity.

Documents arrive ordered by retrieval rank; their sentences are embedded
alongside the claim and ranked by cosine similarity. Two policies:

- ``flat_top_n``: best n sentences over the pooled candidate set
- ``per_doc_top_m``: best m sentences from each document, pooled and
  re-sorted (what the graph-family heads consume: 10 docs x 3 = 30)

Similarity ties break by (document rank, sentence position). Sentences
shorter than ``min_tokens`` analyzer tokens are excluded up front:
fragments from scraped web text otherwise crowd out real sentences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .analysis import Analyzer
from .corpus import DocumentRecord, split_sentences
from .encoder_client import EncoderClient, cosine_similarity


@dataclass(frozen=True)
class EvidenceSentence:
    text: str
    source_doc_id: str
    similarity: float


@dataclass(frozen=True)
class EvidenceSet:
    claim_id: str
    sentences: tuple[EvidenceSentence, ...]
    selection_policy: str

    def texts(self) -> list[str]:
        return [s.text for s in self.sentences]


@dataclass(frozen=True)
class _Candidate:
    doc_rank: int
    position: int
    doc_id: str
    text: str


def _candidates(
    docs: Sequence[DocumentRecord], analyzer: Analyzer, min_tokens: int
) -> list[_Candidate]:
    out = []
    for rank, doc in enumerate(docs):
        for pos, sentence in enumerate(split_sentences(doc.text)):
            if len(analyzer.raw_tokens(sentence)) < min_tokens:
                continue
            out.append(_Candidate(rank, pos, doc.id, sentence))
    return out


def _scored(
    claim_text: str,
    cands: list[_Candidate],
    client: EncoderClient,
) -> list[tuple[float, _Candidate]]:
    if not cands:
        return []
    embeddings = client.embed_sentences([claim_text] + [c.text for c in cands])
    claim_vec = embeddings[0].vector
    return [
        (cosine_similarity(claim_vec, emb.vector), cand)
        for emb, cand in zip(embeddings[1:], cands)
    ]


def _sort_key(entry: tuple[float, _Candidate]):
    sim, cand = entry
    return (-sim, cand.doc_rank, cand.position)


def retrieve_evidence_flat(
    claim_id: str,
    claim_text: str,
    docs: Sequence[DocumentRecord],
    client: EncoderClient,
    analyzer: Analyzer,
    n: int = 5,
    min_tokens: int = 3,
) -> EvidenceSet:
    """Top-n sentences over all documents (fewer if the pool is smaller).

    Duplicate sentences appearing in several documents are all retained;
    de-duplication belongs to the claim collection, not the evidence pool.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    scored = sorted(_scored(claim_text, _candidates(docs, analyzer, min_tokens), client),
                    key=_sort_key)
    picked = scored[:n]
    return EvidenceSet(
        claim_id,
        tuple(EvidenceSentence(c.text, c.doc_id, float(sim)) for sim, c in picked),
        "flat_top_n",
    )


def retrieve_evidence_per_doc(
    claim_id: str,
    claim_text: str,
    docs: Sequence[DocumentRecord],
    client: EncoderClient,
    analyzer: Analyzer,
    per_doc: int = 3,
    min_tokens: int = 3,
) -> EvidenceSet:
    """The per_doc most similar sentences from each document, pooled."""
    if per_doc < 1:
        raise ValueError("per_doc must be >= 1")
    scored = _scored(claim_text, _candidates(docs, analyzer, min_tokens), client)
    by_doc: dict[int, list[tuple[float, _Candidate]]] = {}
    for sim, cand in scored:
        by_doc.setdefault(cand.doc_rank, []).append((sim, cand))
    pooled: list[tuple[float, _Candidate]] = []
    for rank in sorted(by_doc):
        pooled.extend(sorted(by_doc[rank], key=_sort_key)[:per_doc])
    pooled.sort(key=_sort_key)
    return EvidenceSet(
        claim_id,
        tuple(EvidenceSentence(c.text, c.doc_id, float(sim)) for sim, c in pooled),
        "per_doc_top_m",
    )
