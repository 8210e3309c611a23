"""Head input structures: claim-evidence pair bundles and evidence graphs.

The SAN-family heads consume a :class:`PairBundle` (token matrix, pooled
vector and NLI triplet per claim-evidence pair). The graph-family heads
consume an :class:`EvidenceGraph` whose first node is the claim and whose
edges join text pairs with embedding cosine similarity above a threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..encoder_client import EncoderClient, cosine_similarity
from ..errors import ShapeError

NEUTRAL_TRIPLET = np.array([0.0, 1.0, 0.0])
CLAIM_INFERENCE_FEATURE = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class PairBundle:
    """Per-pair encoder outputs for one claim.

    ``token_matrices[i]`` is the (n_tokens, d) encoding of pair i,
    ``pooled[i]`` its (d,) pooled vector, ``triplets[i]`` the (3,) NLI
    distribution (contradiction, neutral, entailment).
    """

    token_matrices: tuple[np.ndarray, ...]
    pooled: tuple[np.ndarray, ...]
    triplets: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not (len(self.token_matrices) == len(self.pooled) == len(self.triplets)):
            raise ShapeError("bundle components have mismatched lengths")
        if not self.token_matrices:
            raise ShapeError("bundle needs at least one pair")
        d = self.token_matrices[0].shape[1]
        for tm, pv, tr in zip(self.token_matrices, self.pooled, self.triplets):
            if tm.ndim != 2 or tm.shape[1] != d:
                raise ShapeError("token matrices must share one encoder dimension")
            if pv.shape != (d,):
                raise ShapeError("pooled vectors must match the encoder dimension")
            if tr.shape != (3,):
                raise ShapeError("triplets must have three entries")

    @property
    def dim(self) -> int:
        return self.token_matrices[0].shape[1]

    def __len__(self) -> int:
        return len(self.token_matrices)


def build_pair_bundle(
    claim_text: str,
    evidence_texts: Sequence[str],
    client: EncoderClient,
) -> PairBundle:
    """Encode every (claim, evidence) pair through the encoder boundary."""
    if not evidence_texts:
        raise ValueError("at least one evidence text required")
    tokens, pooled, triplets = [], [], []
    for text in evidence_texts:
        enc = client.encode_pair(claim_text, text)
        tokens.append(np.asarray(enc.token_vectors, dtype=np.float64))
        pooled.append(np.asarray(enc.pooled, dtype=np.float64))
        triplets.append(client.nli(claim_text, text).as_array())
    return PairBundle(tuple(tokens), tuple(pooled), tuple(triplets))


@dataclass(frozen=True)
class EvidenceGraph:
    """Claim node first, evidence nodes after; adjacency has no self-loops
    (the GCN layer inserts them)."""

    node_features: np.ndarray  # (n+1, f)
    adjacency: np.ndarray  # (n+1, n+1) symmetric 0/1, zero diagonal
    edge_provenance: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        feats = self.node_features
        adj = self.adjacency
        if feats.ndim != 2 or feats.shape[0] < 1:
            raise ShapeError("node features must be a non-empty 2-d array")
        if adj.shape != (feats.shape[0], feats.shape[0]):
            raise ShapeError(f"adjacency {adj.shape} does not match {feats.shape[0]} nodes")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(adj) != 0.0):
            raise ValueError("adjacency diagonal must be zero")

    @property
    def node_count(self) -> int:
        return self.node_features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.node_features.shape[1]


def build_evidence_graph(
    claim_embedding: np.ndarray,
    evidence_embeddings: Sequence[np.ndarray],
    claim_features: np.ndarray,
    evidence_features: Sequence[np.ndarray],
    threshold: float = 0.9,
) -> EvidenceGraph:
    """Link any two nodes whose embedding cosine similarity exceeds the
    threshold (claim-evidence and evidence-evidence alike)."""
    if len(evidence_embeddings) != len(evidence_features):
        raise ShapeError("one embedding per evidence feature row required")
    features = np.vstack([np.asarray(claim_features, dtype=np.float64)]
                         + [np.asarray(f, dtype=np.float64) for f in evidence_features])
    embeddings = [np.asarray(claim_embedding, dtype=np.float64)] + [
        np.asarray(e, dtype=np.float64) for e in evidence_embeddings
    ]
    n = len(embeddings)
    adjacency = np.zeros((n, n))
    provenance = []
    for i in range(n):
        for j in range(i + 1, n):
            sim = cosine_similarity(embeddings[i], embeddings[j])
            if sim > threshold:
                adjacency[i, j] = adjacency[j, i] = 1.0
                provenance.append((i, j, float(sim)))
    return EvidenceGraph(features, adjacency, tuple(provenance))


def claim_node_features(pooled_claim: np.ndarray) -> np.ndarray:
    """Claim node: pooled claim encoding plus the fixed (0, 0, 1) inference."""
    return np.concatenate([np.asarray(pooled_claim, dtype=np.float64),
                           CLAIM_INFERENCE_FEATURE])


def evidence_node_features(pooled_evidence: np.ndarray, triplet: np.ndarray) -> np.ndarray:
    return np.concatenate([np.asarray(pooled_evidence, dtype=np.float64),
                           np.asarray(triplet, dtype=np.float64)])


def build_graph_from_texts(
    claim_text: str,
    evidence_texts: Sequence[str],
    client: EncoderClient,
    threshold: float = 0.9,
    include_encodings: bool = True,
) -> EvidenceGraph:
    """Gather embeddings, encodings and NLI triplets, then build the graph.

    With ``include_encodings=False`` node features are the bare NLI
    triplets (claim node (0,0,1)): the text-free ablation.
    """
    if not evidence_texts:
        raise ValueError("at least one evidence text required")
    embeddings = [e.vector for e in client.embed_sentences([claim_text, *evidence_texts])]
    if include_encodings:
        claim_feat = claim_node_features(client.encode_single(claim_text).pooled)
        ev_feats = [
            evidence_node_features(
                client.encode_single(text).pooled,
                client.nli(claim_text, text).as_array(),
            )
            for text in evidence_texts
        ]
    else:
        claim_feat = CLAIM_INFERENCE_FEATURE.copy()
        ev_feats = [client.nli(claim_text, text).as_array() for text in evidence_texts]
    return build_evidence_graph(embeddings[0], embeddings[1:], claim_feat, ev_feats, threshold)
