"""Veracity heads: attention fusion, graph fusion, and their ablations.

Every head maps encoder outputs for one claim to a two-class probability
distribution (False, True). Forward passes are pure functions of the
parameter tensors and the example, exposed separately from the parameter
objects so gradient checks can treat parameters as ordinary leaves.

Head vocabulary (also the CLI's):

- ``nli-san``        per-pair attention with the NLI triplet as query,
                     outputs concatenated, MLP classifier
- ``nli-graph``      one normalized graph convolution over the evidence
                     graph, mean-pooled, MLP classifier
- ``nli``            concatenated NLI triplets only
- ``nli-sent``       first token row of each pair encoding next to its
                     triplet, concatenated
- ``nli-psent``      pooled pair vector next to its triplet, mean-pooled
                     over pairs
- ``nli-graph-abl``  graph head on triplet-only node features
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeError
from ..nn import (
    Parameter,
    Tape,
    Tensor,
    concat,
    gcn_layer,
    glorot_uniform,
    linear,
    mean_rows,
    relu,
    scaled_dot_attention,
    softmax,
)
from .features import NEUTRAL_TRIPLET, EvidenceGraph, PairBundle

HEAD_KINDS = ("nli-san", "nli-graph", "nli", "nli-sent", "nli-psent", "nli-graph-abl")


@dataclass(frozen=True)
class SanHeadConfig:
    pairs_per_claim: int = 5
    encoder_dim: int = 1024
    hidden: int = 50
    classes: int = 2
    apply_mask: bool = True


@dataclass(frozen=True)
class GraphHeadConfig:
    evidence_count: int = 30
    encoder_dim: int = 1024  # node feature dim is encoder_dim + 3
    similarity_threshold: float = 0.9
    channels: int = 50
    hidden: int = 50
    classes: int = 2
    relu_after_gcn: bool = True

    @property
    def feature_dim(self) -> int:
        return self.encoder_dim + 3


def _mlp_params(prefix: str, in_dim: int, hidden: int, classes: int, rng) -> list[Parameter]:
    return [
        Parameter(f"{prefix}.w1", glorot_uniform(rng, in_dim, hidden)),
        Parameter(f"{prefix}.b1", np.zeros((1, hidden))),
        Parameter(f"{prefix}.w2", glorot_uniform(rng, hidden, classes)),
        Parameter(f"{prefix}.b2", np.zeros((1, classes))),
    ]


def _mlp_forward(t: dict[str, Tensor], prefix: str, x: Tensor) -> Tensor:
    hidden = relu(linear(x, t[f"{prefix}.w1"], t[f"{prefix}.b1"]))
    return softmax(linear(hidden, t[f"{prefix}.w2"], t[f"{prefix}.b2"]), axis=-1)


def _pad_bundle(bundle: PairBundle, n_pairs: int, dim: int):
    """Pad to n_pairs with neutral pairs; returns (matrices, pooled,
    triplets, real_flags). Excess pairs beyond n_pairs are dropped."""
    if bundle.dim != dim:
        raise ShapeError(f"bundle encoder dim {bundle.dim} != head dim {dim}")
    mats = list(bundle.token_matrices[:n_pairs])
    pooled = list(bundle.pooled[:n_pairs])
    trips = list(bundle.triplets[:n_pairs])
    real = [True] * len(mats)
    while len(mats) < n_pairs:
        mats.append(np.zeros((1, dim)))
        pooled.append(np.zeros(dim))
        trips.append(NEUTRAL_TRIPLET.copy())
        real.append(False)
    return mats, pooled, trips, real


# --- attention-fusion head ---------------------------------------------------


def san_parameters(config: SanHeadConfig, rng) -> list[Parameter]:
    d = config.encoder_dim
    return [
        Parameter("san.wq", glorot_uniform(rng, 3, d)),
        Parameter("san.bq", np.zeros((1, d))),
        Parameter("san.wk", glorot_uniform(rng, d, d)),
        Parameter("san.bk", np.zeros((1, d))),
        Parameter("san.wv", glorot_uniform(rng, d, d)),
        Parameter("san.bv", np.zeros((1, d))),
        *_mlp_params("san.mlp", config.pairs_per_claim * d, config.hidden, config.classes, rng),
    ]


def san_forward(
    tape: Tape,
    tensors: dict[str, Tensor],
    bundle: PairBundle,
    config: SanHeadConfig,
    apply_mask: bool | None = None,
) -> Tensor:
    """Per pair: K and V from the pair encoding, Q from the NLI triplet,
    single-query attention; outputs concatenated across pairs, then the
    MLP classifier. Padding pairs attend to fully-masked keys and so
    contribute exact zeros (when the mask is applied)."""
    masked = config.apply_mask if apply_mask is None else apply_mask
    mats, _, trips, real = _pad_bundle(bundle, config.pairs_per_claim, config.encoder_dim)
    outputs = []
    for mat, trip, is_real in zip(mats, trips, real):
        s_i = tape.tensor(mat)
        i_i = tape.tensor(trip.reshape(1, 3))
        k = linear(s_i, tensors["san.wk"], tensors["san.bk"])
        v = linear(s_i, tensors["san.wv"], tensors["san.bv"])
        q = linear(i_i, tensors["san.wq"], tensors["san.bq"])
        mask = None
        if masked:
            mask = np.full(mat.shape[0], is_real, dtype=bool)
        outputs.append(scaled_dot_attention(q, k, v, mask=mask))
    o_san = concat(outputs, axis=1)
    return _mlp_forward(tensors, "san.mlp", o_san)


# --- graph-fusion head -------------------------------------------------------


def graph_parameters(config: GraphHeadConfig, rng, feature_dim: int | None = None) -> list[Parameter]:
    f = config.feature_dim if feature_dim is None else feature_dim
    return [
        Parameter("graph.wg", glorot_uniform(rng, f, config.channels)),
        *_mlp_params("graph.mlp", config.channels, config.hidden, config.classes, rng),
    ]


def graph_forward(
    tape: Tape,
    tensors: dict[str, Tensor],
    graph: EvidenceGraph,
    config: GraphHeadConfig,
) -> Tensor:
    """One self-looped normalized convolution, node-mean pooling (claim
    node included), then the MLP classifier."""
    expected = tensors["graph.wg"].data.shape[0]
    if graph.feature_dim != expected:
        raise ShapeError(f"graph features {graph.feature_dim}-d, head expects {expected}-d")
    x = tape.tensor(graph.node_features)
    h = gcn_layer(x, graph.adjacency, tensors["graph.wg"])
    if config.relu_after_gcn:
        h = relu(h)
    pooled = mean_rows(h)
    return _mlp_forward(tensors, "graph.mlp", pooled)


# --- ablation forwards -------------------------------------------------------


def nli_only_forward(tape, tensors, bundle: PairBundle, config: SanHeadConfig) -> Tensor:
    _, _, trips, _ = _pad_bundle(bundle, config.pairs_per_claim, bundle.dim)
    flat = np.concatenate(trips).reshape(1, -1)
    return _mlp_forward(tensors, "nli.mlp", tape.tensor(flat))


def nli_sent_forward(tape, tensors, bundle: PairBundle, config: SanHeadConfig) -> Tensor:
    """First token row of each pair encoding concatenated with its triplet."""
    mats, _, trips, _ = _pad_bundle(bundle, config.pairs_per_claim, config.encoder_dim)
    rows = [np.concatenate([mat[0], trip]) for mat, trip in zip(mats, trips)]
    flat = np.concatenate(rows).reshape(1, -1)
    return _mlp_forward(tensors, "nli_sent.mlp", tape.tensor(flat))


def nli_psent_forward(tape, tensors, bundle: PairBundle, config: GraphHeadConfig) -> Tensor:
    """Pooled pair vector concatenated with its triplet, averaged over the
    real pairs (padding would bias the mean), then classified."""
    take = min(len(bundle), config.evidence_count)
    rows = np.stack(
        [
            np.concatenate([bundle.pooled[i], bundle.triplets[i]])
            for i in range(take)
        ]
    )
    pooled = rows.mean(axis=0, keepdims=True)
    return _mlp_forward(tensors, "nli_psent.mlp", tape.tensor(pooled))


# --- head objects ------------------------------------------------------------


class _HeadBase:
    kind: str

    def __init__(self, params: list[Parameter]):
        self._params = params
        names = [p.name for p in params]
        if len(names) != len(set(names)):
            raise ValueError("parameter names must be unique")

    def parameters(self) -> list[Parameter]:
        return self._params

    def tensors(self, tape: Tape) -> dict[str, Tensor]:
        return {p.name: tape.param(p) for p in self._params}

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for p in self._params:
            if p.name not in arrays:
                raise KeyError(f"checkpoint missing parameter {p.name!r}")
            if arrays[p.name].shape != p.data.shape:
                raise ShapeError(
                    f"{p.name}: checkpoint shape {arrays[p.name].shape} != {p.data.shape}"
                )
            p.data[...] = arrays[p.name]

    def predict(self, example) -> int:
        probs = self.forward(Tape(), example)
        return int(np.argmax(probs.data))

    def probabilities(self, example) -> np.ndarray:
        return self.forward(Tape(), example).data.reshape(-1).copy()


class NliSanHead(_HeadBase):
    kind = "nli-san"

    def __init__(self, config: SanHeadConfig, seed: int = 0):
        self.config = config
        super().__init__(san_parameters(config, np.random.default_rng(seed)))

    def forward(self, tape: Tape, bundle: PairBundle) -> Tensor:
        return san_forward(tape, self.tensors(tape), bundle, self.config)

    def meta(self) -> dict:
        return {"kind": self.kind, "pairs": self.config.pairs_per_claim,
                "encoder_dim": self.config.encoder_dim, "hidden": self.config.hidden}


class NliGraphHead(_HeadBase):
    kind = "nli-graph"

    def __init__(self, config: GraphHeadConfig, seed: int = 0):
        self.config = config
        super().__init__(graph_parameters(config, np.random.default_rng(seed)))

    def forward(self, tape: Tape, graph: EvidenceGraph) -> Tensor:
        return graph_forward(tape, self.tensors(tape), graph, self.config)

    def meta(self) -> dict:
        return {"kind": self.kind, "encoder_dim": self.config.encoder_dim,
                "channels": self.config.channels, "hidden": self.config.hidden,
                "threshold": self.config.similarity_threshold,
                "evidence_count": self.config.evidence_count}


class NliOnlyHead(_HeadBase):
    kind = "nli"

    def __init__(self, config: SanHeadConfig, seed: int = 0):
        self.config = config
        rng = np.random.default_rng(seed)
        super().__init__(
            _mlp_params("nli.mlp", 3 * config.pairs_per_claim, config.hidden, config.classes, rng)
        )

    def forward(self, tape: Tape, bundle: PairBundle) -> Tensor:
        return nli_only_forward(tape, self.tensors(tape), bundle, self.config)

    def meta(self) -> dict:
        return {"kind": self.kind, "pairs": self.config.pairs_per_claim,
                "encoder_dim": self.config.encoder_dim, "hidden": self.config.hidden}


class NliSentHead(_HeadBase):
    kind = "nli-sent"

    def __init__(self, config: SanHeadConfig, seed: int = 0):
        self.config = config
        rng = np.random.default_rng(seed)
        in_dim = config.pairs_per_claim * (config.encoder_dim + 3)
        super().__init__(_mlp_params("nli_sent.mlp", in_dim, config.hidden, config.classes, rng))

    def forward(self, tape: Tape, bundle: PairBundle) -> Tensor:
        return nli_sent_forward(tape, self.tensors(tape), bundle, self.config)

    def meta(self) -> dict:
        return {"kind": self.kind, "pairs": self.config.pairs_per_claim,
                "encoder_dim": self.config.encoder_dim, "hidden": self.config.hidden}


class NliPSentHead(_HeadBase):
    kind = "nli-psent"

    def __init__(self, config: GraphHeadConfig, seed: int = 0):
        self.config = config
        rng = np.random.default_rng(seed)
        super().__init__(
            _mlp_params("nli_psent.mlp", config.encoder_dim + 3, config.hidden,
                        config.classes, rng)
        )

    def forward(self, tape: Tape, bundle: PairBundle) -> Tensor:
        return nli_psent_forward(tape, self.tensors(tape), bundle, self.config)

    def meta(self) -> dict:
        return {"kind": self.kind, "encoder_dim": self.config.encoder_dim,
                "hidden": self.config.hidden, "evidence_count": self.config.evidence_count}


class NliGraphAblHead(_HeadBase):
    kind = "nli-graph-abl"

    def __init__(self, config: GraphHeadConfig, seed: int = 0):
        self.config = config
        super().__init__(
            graph_parameters(config, np.random.default_rng(seed), feature_dim=3)
        )

    def forward(self, tape: Tape, graph: EvidenceGraph) -> Tensor:
        return graph_forward(tape, self.tensors(tape), graph, self.config)

    def meta(self) -> dict:
        return {"kind": self.kind, "channels": self.config.channels,
                "hidden": self.config.hidden,
                "threshold": self.config.similarity_threshold,
                "evidence_count": self.config.evidence_count}


def make_head(kind: str, encoder_dim: int, seed: int = 0, **overrides):
    """Factory keyed by the CLI head vocabulary."""
    if kind in ("nli-san", "nli", "nli-sent"):
        config = SanHeadConfig(
            pairs_per_claim=overrides.get("pairs_per_claim", 5),
            encoder_dim=encoder_dim,
            hidden=overrides.get("hidden", 50),
        )
        cls = {"nli-san": NliSanHead, "nli": NliOnlyHead, "nli-sent": NliSentHead}[kind]
        return cls(config, seed=seed)
    if kind in ("nli-graph", "nli-psent", "nli-graph-abl"):
        config = GraphHeadConfig(
            evidence_count=overrides.get("evidence_count", 30),
            encoder_dim=encoder_dim,
            similarity_threshold=overrides.get("threshold", 0.9),
            channels=overrides.get("channels", 50),
            hidden=overrides.get("hidden", 50),
        )
        cls = {
            "nli-graph": NliGraphHead,
            "nli-psent": NliPSentHead,
            "nli-graph-abl": NliGraphAblHead,
        }[kind]
        return cls(config, seed=seed)
    raise ValueError(f"unknown head kind {kind!r}; expected one of {HEAD_KINDS}")


def ablation_forward(variant: str, tape: Tape, tensors: dict, inputs, config) -> Tensor:
    """Dispatch over the four ablation variants by name."""
    if variant == "nli":
        return nli_only_forward(tape, tensors, inputs, config)
    if variant == "nli-sent":
        return nli_sent_forward(tape, tensors, inputs, config)
    if variant == "nli-psent":
        return nli_psent_forward(tape, tensors, inputs, config)
    if variant == "nli-graph-abl":
        return graph_forward(tape, tensors, inputs, config)
    raise ValueError(f"unknown ablation variant {variant!r}")
