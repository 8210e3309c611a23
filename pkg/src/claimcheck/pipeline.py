"""End-to-end wiring: retrieval -> evidence -> head inputs.

The CLI and tests compose the pipeline through these helpers rather than
re-plumbing modules each time. A :class:`PipelineContext` carries the
prepared corpus state (index, paragraph texts, documents, encoder client,
relevance scorer) plus the retrieval parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .analysis import Analyzer
from .corpus import ClaimRecord, DocumentRecord
from .encoder_client import EncoderClient
from .errors import ClaimcheckError
from .evidence import EvidenceSet, retrieve_evidence_flat, retrieve_evidence_per_doc
from .index import InvertedIndex
from .rerank import RelevanceScorer, max_pool_documents, multistage_retrieve
from .verdict import build_graph_from_texts, build_pair_bundle

SAN_FAMILY = ("nli-san", "nli", "nli-sent")
GRAPH_FAMILY = ("nli-graph", "nli-psent", "nli-graph-abl")


@dataclass
class PipelineContext:
    analyzer: Analyzer
    index: InvertedIndex
    paragraph_texts: Mapping[str, str]
    documents: Mapping[str, DocumentRecord]
    client: EncoderClient
    scorer: RelevanceScorer
    first_k: int = 100
    doc_k: int = 10
    k1: float = 0.9
    b: float = 0.4
    rm3: Mapping[str, float] | None = None
    flat_n: int = 5
    per_doc: int = 3
    graph_threshold: float = 0.9
    min_sentence_tokens: int = 3


def retrieve_documents(ctx: PipelineContext, claim_text: str) -> list[DocumentRecord]:
    """Multistage paragraph retrieval, max-pooled to the top documents."""
    hits = multistage_retrieve(
        ctx.index,
        ctx.scorer,
        claim_text,
        ctx.analyzer,
        ctx.paragraph_texts,
        first_k=ctx.first_k,
        final_k=ctx.first_k,  # keep all re-ranked hits; pooling truncates
        k1=ctx.k1,
        b=ctx.b,
        rm3=ctx.rm3,
    )
    docs = []
    for doc_id, _score in max_pool_documents(hits)[: ctx.doc_k]:
        doc = ctx.documents.get(doc_id)
        if doc is None:
            raise ClaimcheckError(f"retrieved unknown document id {doc_id!r}")
        docs.append(doc)
    return docs


def claim_evidence(ctx: PipelineContext, claim_id: str, claim_text: str,
                   policy: str) -> EvidenceSet:
    docs = retrieve_documents(ctx, claim_text)
    if policy == "flat_top_n":
        return retrieve_evidence_flat(claim_id, claim_text, docs, ctx.client, ctx.analyzer,
                                      n=ctx.flat_n, min_tokens=ctx.min_sentence_tokens)
    if policy == "per_doc_top_m":
        return retrieve_evidence_per_doc(claim_id, claim_text, docs, ctx.client, ctx.analyzer,
                                         per_doc=ctx.per_doc,
                                         min_tokens=ctx.min_sentence_tokens)
    raise ValueError(f"unknown evidence policy {policy!r}")


def evidence_policy_for(head_kind: str) -> str:
    if head_kind in SAN_FAMILY:
        return "flat_top_n"
    if head_kind in GRAPH_FAMILY:
        return "per_doc_top_m"
    raise ValueError(f"unknown head kind {head_kind!r}")


def claim_example(ctx: PipelineContext, claim_id: str, claim_text: str, head_kind: str):
    """Head input for one claim; returns (example, evidence_set)."""
    evidence = claim_evidence(ctx, claim_id, claim_text, evidence_policy_for(head_kind))
    texts = evidence.texts()
    if not texts:
        return None, evidence
    if head_kind in SAN_FAMILY or head_kind == "nli-psent":
        return build_pair_bundle(claim_text, texts, ctx.client), evidence
    include = head_kind != "nli-graph-abl"
    graph = build_graph_from_texts(claim_text, texts, ctx.client,
                                   threshold=ctx.graph_threshold,
                                   include_encodings=include)
    return graph, evidence


def build_dataset(
    ctx: PipelineContext, claims: Sequence[ClaimRecord], head_kind: str
) -> tuple[list[tuple[str, object, int]], list[str]]:
    """Head training rows for every claim with retrievable evidence.

    Returns (rows, skipped_ids): claims whose retrieval produced no
    evidence are skipped, never fabricated.
    """
    rows = []
    skipped = []
    for claim in claims:
        example, _ = claim_example(ctx, claim.id, claim.text, head_kind)
        if example is None:
            skipped.append(claim.id)
            continue
        rows.append((claim.id, example, claim.label_index))
    return rows, skipped
