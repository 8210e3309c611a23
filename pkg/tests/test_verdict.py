import numpy as np
import pytest

from claimcheck.encoder_client import EncoderClient, SyntheticBackend
from claimcheck.errors import ShapeError
from claimcheck.nn import Tape, cross_entropy, grad_check
from claimcheck.verdict import (
    CLAIM_INFERENCE_FEATURE,
    EvidenceGraph,
    GraphHeadConfig,
    NliGraphAblHead,
    NliGraphHead,
    NliOnlyHead,
    NliPSentHead,
    NliSanHead,
    NliSentHead,
    PairBundle,
    SanHeadConfig,
    build_evidence_graph,
    build_graph_from_texts,
    build_pair_bundle,
    claim_node_features,
    evidence_node_features,
    graph_forward,
    make_head,
    san_forward,
)

from oracles import dense_attention, dense_gcn, dense_mlp_softmax

RNG = np.random.default_rng(77)


def random_bundle(n_pairs, dim, tokens=3, rng=RNG):
    mats, pooled, trips = [], [], []
    for _ in range(n_pairs):
        mats.append(rng.standard_normal((tokens, dim)))
        pooled.append(rng.standard_normal(dim))
        raw = rng.random(3) + 0.05
        trips.append(raw / raw.sum())
    return PairBundle(tuple(mats), tuple(pooled), tuple(trips))


def dense_san_oracle(params, bundle, n_pairs, dim):
    """Straight-line reimplementation of the attention-fusion forward."""
    outs = []
    mats = list(bundle.token_matrices) + [np.zeros((1, dim))] * (n_pairs - len(bundle))
    trips = list(bundle.triplets) + [np.array([0.0, 1.0, 0.0])] * (n_pairs - len(bundle))
    for mat, trip in zip(mats, trips):
        k = mat @ params["san.wk"] + params["san.bk"]
        v = mat @ params["san.wv"] + params["san.bv"]
        q = trip.reshape(1, 3) @ params["san.wq"] + params["san.bq"]
        outs.append(dense_attention(q, k, v))
    o_san = np.concatenate(outs, axis=1)
    return dense_mlp_softmax(o_san, params["san.mlp.w1"], params["san.mlp.b1"],
                             params["san.mlp.w2"], params["san.mlp.b2"])


def dense_graph_oracle(params, graph, use_relu=True):
    h = dense_gcn(graph.node_features, graph.adjacency, params["graph.wg"])
    if use_relu:
        h = np.maximum(h, 0.0)
    pooled = h.mean(axis=0, keepdims=True)
    return dense_mlp_softmax(pooled, params["graph.mlp.w1"], params["graph.mlp.b1"],
                             params["graph.mlp.w2"], params["graph.mlp.b2"])


def params_of(head):
    return {p.name: p.data.copy() for p in head.parameters()}


class TestBuildGraph:
    def test_threshold_above_one_gives_no_edges(self):
        emb = [RNG.standard_normal(4) for _ in range(3)]
        feats = [RNG.standard_normal(5) for _ in range(3)]
        g = build_evidence_graph(emb[0], emb[1:], feats[0], feats[1:], threshold=1.1)
        assert np.all(g.adjacency == 0.0)
        assert g.node_count == 3

    def test_fixture_edges_enumerated(self):
        # claim ~ e1 (sim ~0.95), e1 ~ e2 (sim ~0.91), all else low
        def unit(v):
            return v / np.linalg.norm(v)

        base = np.array([1.0, 0.0, 0.0])
        mix = lambda target: unit(target * base + (1 - target**2) ** 0.5 * np.array([0.0, 1.0, 0.0]))
        claim_e = base
        e1 = mix(0.95)
        # e2 close to e1 but far from claim: rotate e1 within span orthogonalish
        e1_perp = unit(np.array([-e1[1], e1[0], 0.0]))
        e2 = unit(0.91 * e1 + (1 - 0.91**2) ** 0.5 * np.array([0.0, 0.0, 1.0]))
        e3 = np.array([0.0, 0.0, 1.0])
        feats = [np.zeros(2)] * 4
        g = build_evidence_graph(claim_e, [e1, e2, e3], feats[0], feats[1:], threshold=0.9)
        edges = {(i, j) for i, j, _ in g.edge_provenance}
        assert (0, 1) in edges  # claim-e1
        assert (1, 2) in edges  # e1-e2
        assert (0, 3) not in edges and (1, 3) not in edges and (2, 3) not in edges

    def test_adjacency_symmetric_random(self):
        for _ in range(10):
            emb = [RNG.standard_normal(6) for _ in range(5)]
            feats = [RNG.standard_normal(3) for _ in range(5)]
            g = build_evidence_graph(emb[0], emb[1:], feats[0], feats[1:], threshold=0.1)
            assert np.array_equal(g.adjacency, g.adjacency.T)
            assert np.all(np.diag(g.adjacency) == 0)

    def test_node_features_layout(self):
        pooled = RNG.standard_normal(4)
        cf = claim_node_features(pooled)
        assert np.array_equal(cf[:4], pooled)
        assert np.array_equal(cf[4:], CLAIM_INFERENCE_FEATURE)
        ef = evidence_node_features(pooled, np.array([0.2, 0.3, 0.5]))
        assert np.array_equal(ef[4:], [0.2, 0.3, 0.5])

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            EvidenceGraph(np.ones((2, 3)), np.zeros((3, 3)))


class TestSanHead:
    def make(self, d=4, n=2, seed=5):
        return NliSanHead(SanHeadConfig(pairs_per_claim=n, encoder_dim=d, hidden=6), seed=seed)

    def test_output_is_distribution(self):
        head = self.make()
        bundle = random_bundle(2, 4)
        probs = head.forward(Tape(), bundle)
        assert probs.data.shape == (1, 2)
        assert float(probs.data.sum()) == pytest.approx(1.0, abs=1e-9)

    def test_matches_dense_oracle_small_dims(self):
        head = self.make(d=4, n=2)
        bundle = random_bundle(2, 4, tokens=3)
        got = head.forward(Tape(), bundle).data
        want = dense_san_oracle(params_of(head), bundle, 2, 4)
        assert np.allclose(got, want, atol=1e-10)

    def test_token_permutation_invariance_within_pair(self):
        head = self.make(d=4, n=1)
        mat = RNG.standard_normal((5, 4))
        trip = np.array([0.2, 0.3, 0.5])
        b1 = PairBundle((mat,), (mat.mean(axis=0),), (trip,))
        perm = RNG.permutation(5)
        b2 = PairBundle((mat[perm],), (mat.mean(axis=0),), (trip,))
        p1 = head.forward(Tape(), b1).data
        p2 = head.forward(Tape(), b2).data
        assert np.allclose(p1, p2, atol=1e-12)

    def test_padding_with_mask_matches_zeroed_slice(self):
        # with the mask, a padding pair contributes exactly zero to O_SAN;
        # without it, the value-projection bias leaks through (biases are
        # zero at init, so give them values as a trained head would have)
        head = self.make(d=4, n=3)
        for p in head.parameters():
            if p.name.endswith((".bq", ".bk", ".bv")):
                p.data[...] = RNG.standard_normal(p.data.shape)
        bundle = random_bundle(2, 4)  # one pair short
        masked = head.forward(Tape(), bundle).data

        params = params_of(head)
        outs = []
        for mat, trip in zip(bundle.token_matrices, bundle.triplets):
            k = mat @ params["san.wk"] + params["san.bk"]
            v = mat @ params["san.wv"] + params["san.bv"]
            q = trip.reshape(1, 3) @ params["san.wq"] + params["san.bq"]
            outs.append(dense_attention(q, k, v))
        outs.append(np.zeros((1, 4)))  # masked padding slice is exactly zero
        o_san = np.concatenate(outs, axis=1)
        want = dense_mlp_softmax(o_san, params["san.mlp.w1"], params["san.mlp.b1"],
                                 params["san.mlp.w2"], params["san.mlp.b2"])
        assert np.allclose(masked, want, atol=1e-12)

        tape = Tape()
        unmasked = san_forward(tape, head.tensors(tape), bundle, head.config,
                               apply_mask=False)
        assert not np.allclose(unmasked.data, masked, atol=1e-12)

    def test_unmasked_padding_uses_value_bias(self):
        head = self.make(d=4, n=2)
        bundle = random_bundle(1, 4)
        tape = Tape()
        out = san_forward(tape, head.tensors(tape), bundle, head.config, apply_mask=False)
        params = params_of(head)
        # padding pair: K rows identical -> uniform attention over V = bias row
        outs = []
        mat, trip = bundle.token_matrices[0], bundle.triplets[0]
        k = mat @ params["san.wk"] + params["san.bk"]
        v = mat @ params["san.wv"] + params["san.bv"]
        q = trip.reshape(1, 3) @ params["san.wq"] + params["san.bq"]
        outs.append(dense_attention(q, k, v))
        outs.append(params["san.bv"].reshape(1, -1))
        o_san = np.concatenate(outs, axis=1)
        want = dense_mlp_softmax(o_san, params["san.mlp.w1"], params["san.mlp.b1"],
                                 params["san.mlp.w2"], params["san.mlp.b2"])
        assert np.allclose(out.data, want, atol=1e-12)

    def test_full_head_gradient_check(self):
        head = self.make(d=4, n=2, seed=11)
        bundle = random_bundle(2, 4, tokens=3)
        names = [p.name for p in head.parameters()]

        def fn(tape, leaves):
            tensors = dict(zip(names, leaves))
            probs = san_forward(tape, tensors, bundle, head.config)
            return cross_entropy(probs, 1)

        err = grad_check(fn, [p.data for p in head.parameters()], h=1e-5)
        assert err <= 1e-4


class TestGraphHead:
    def make(self, d=4, seed=3, relu_after=True):
        return NliGraphHead(
            GraphHeadConfig(encoder_dim=d, channels=5, hidden=6, relu_after_gcn=relu_after),
            seed=seed,
        )

    def random_graph(self, n_evidence, d):
        feats = np.vstack(
            [claim_node_features(RNG.standard_normal(d))]
            + [
                evidence_node_features(RNG.standard_normal(d), np.array([0.1, 0.2, 0.7]))
                for _ in range(n_evidence)
            ]
        )
        n = n_evidence + 1
        upper = np.triu((RNG.random((n, n)) < 0.3).astype(float), k=1)
        return EvidenceGraph(feats, upper + upper.T)

    def test_output_is_distribution(self):
        head = self.make()
        g = self.random_graph(4, 4)
        probs = head.forward(Tape(), g)
        assert float(probs.data.sum()) == pytest.approx(1.0, abs=1e-9)

    def test_edgeless_graph_matches_dense_oracle(self):
        head = self.make()
        feats = np.vstack([claim_node_features(RNG.standard_normal(4)) for _ in range(4)])
        g = EvidenceGraph(feats, np.zeros((4, 4)))
        got = head.forward(Tape(), g).data
        want = dense_graph_oracle(params_of(head), g)
        assert np.allclose(got, want, atol=1e-10)

    def test_random_graphs_match_dense_oracle(self):
        head = self.make()
        for _ in range(20):
            g = self.random_graph(int(RNG.integers(1, 7)), 4)
            got = head.forward(Tape(), g).data
            want = dense_graph_oracle(params_of(head), g)
            assert np.allclose(got, want, atol=1e-10)

    def test_evidence_permutation_invariance(self):
        head = self.make()
        g = self.random_graph(5, 4)
        perm = np.concatenate([[0], 1 + RNG.permutation(5)])
        permuted = EvidenceGraph(g.node_features[perm], g.adjacency[np.ix_(perm, perm)])
        p1 = head.forward(Tape(), g).data
        p2 = head.forward(Tape(), permuted).data
        assert np.allclose(p1, p2, atol=1e-12)

    def test_full_head_gradient_check(self):
        head = self.make(seed=9)
        g = self.random_graph(3, 4)
        names = [p.name for p in head.parameters()]

        def fn(tape, leaves):
            tensors = dict(zip(names, leaves))
            probs = graph_forward(tape, tensors, g, head.config)
            return cross_entropy(probs, 0)

        err = grad_check(fn, [p.data for p in head.parameters()], h=1e-5)
        assert err <= 1e-4

    def test_relu_flag_changes_output(self):
        g = self.random_graph(4, 4)
        with_relu = self.make(seed=3, relu_after=True).forward(Tape(), g).data
        without = self.make(seed=3, relu_after=False).forward(Tape(), g).data
        assert not np.allclose(with_relu, without)

    def test_feature_dim_mismatch_rejected(self):
        head = self.make(d=4)
        bad = self.random_graph(2, 6)
        with pytest.raises(ShapeError):
            head.forward(Tape(), bad)


class TestAblations:
    def test_all_variants_emit_distributions(self):
        bundle = random_bundle(3, 4)
        graph_feats = np.vstack(
            [CLAIM_INFERENCE_FEATURE] + [t.reshape(3) for t in bundle.triplets]
        )
        graph = EvidenceGraph(graph_feats, np.zeros((4, 4)))
        heads = [
            NliOnlyHead(SanHeadConfig(pairs_per_claim=3, encoder_dim=4, hidden=6), seed=1),
            NliSentHead(SanHeadConfig(pairs_per_claim=3, encoder_dim=4, hidden=6), seed=1),
            NliPSentHead(GraphHeadConfig(encoder_dim=4, hidden=6), seed=1),
            NliGraphAblHead(GraphHeadConfig(encoder_dim=4, channels=5, hidden=6), seed=1),
        ]
        for head in heads:
            example = graph if head.kind == "nli-graph-abl" else bundle
            probs = head.forward(Tape(), example)
            assert float(probs.data.sum()) == pytest.approx(1.0, abs=1e-9)

    def test_nli_variant_distinguishes_opposite_triplets(self):
        # two-point training fixture: all-entailment vs all-contradiction
        from claimcheck.verdict import TrainConfig, train

        head = NliOnlyHead(SanHeadConfig(pairs_per_claim=2, encoder_dim=4, hidden=8), seed=2)
        ent = PairBundle(
            (np.zeros((1, 4)), np.zeros((1, 4))),
            (np.zeros(4), np.zeros(4)),
            (np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, 1.0])),
        )
        con = PairBundle(
            (np.zeros((1, 4)), np.zeros((1, 4))),
            (np.zeros(4), np.zeros(4)),
            (np.array([1.0, 0.0, 0.0]), np.array([1.0, 0.0, 0.0])),
        )
        train(head, [(ent, 1), (con, 0)], TrainConfig(epochs=120, batch_size=2,
                                                      learning_rate=1e-2, seed=0))
        assert head.predict(ent) == 1
        assert head.predict(con) == 0

    def test_graph_abl_edgeless_matches_dense_oracle(self):
        head = NliGraphAblHead(GraphHeadConfig(channels=5, hidden=6), seed=4)
        feats = np.vstack([CLAIM_INFERENCE_FEATURE,
                           np.array([0.2, 0.3, 0.5]), np.array([0.6, 0.3, 0.1])])
        g = EvidenceGraph(feats, np.zeros((3, 3)))
        got = head.forward(Tape(), g).data
        want = dense_graph_oracle(params_of(head), g)
        assert np.allclose(got, want, atol=1e-10)

    def test_psent_uses_mean_of_pairs(self):
        head = NliPSentHead(GraphHeadConfig(encoder_dim=4, hidden=6, evidence_count=3), seed=7)
        bundle = random_bundle(3, 4)
        got = head.forward(Tape(), bundle).data
        params = params_of(head)
        rows = np.stack([np.concatenate([p, t]) for p, t in
                         zip(bundle.pooled, bundle.triplets)])
        want = dense_mlp_softmax(rows.mean(axis=0, keepdims=True),
                                 params["nli_psent.mlp.w1"], params["nli_psent.mlp.b1"],
                                 params["nli_psent.mlp.w2"], params["nli_psent.mlp.b2"])
        assert np.allclose(got, want, atol=1e-10)


class TestBuilders:
    def test_bundle_from_client(self):
        client = EncoderClient(backend=SyntheticBackend(seed=2, embed_dim=8, pair_dim=8),
                               mode="live")
        bundle = build_pair_bundle("claim words here", ["evidence one", "evidence two"], client)
        assert len(bundle) == 2
        assert bundle.dim == 8
        for trip in bundle.triplets:
            assert trip.sum() == pytest.approx(1.0, abs=1e-6)

    def test_graph_from_texts_shapes(self):
        client = EncoderClient(backend=SyntheticBackend(seed=2, embed_dim=8, pair_dim=8),
                               mode="live")
        g = build_graph_from_texts("claim words", ["ev one", "ev two", "ev three"], client,
                                   threshold=0.5)
        assert g.node_count == 4
        assert g.feature_dim == 8 + 3
        g_abl = build_graph_from_texts("claim words", ["ev one", "ev two"], client,
                                       threshold=0.5, include_encodings=False)
        assert g_abl.feature_dim == 3

    def test_identical_texts_link_to_claim(self):
        client = EncoderClient(backend=SyntheticBackend(seed=2, embed_dim=8, pair_dim=8),
                               mode="live")
        g = build_graph_from_texts("same words", ["same words"], client, threshold=0.99)
        assert g.adjacency[0, 1] == 1.0


def test_make_head_factory_covers_all_kinds():
    for kind in ("nli-san", "nli-graph", "nli", "nli-sent", "nli-psent", "nli-graph-abl"):
        head = make_head(kind, encoder_dim=8, seed=0)
        assert head.kind == kind
    with pytest.raises(ValueError):
        make_head("mystery", encoder_dim=8)


def test_ablation_forward_dispatch_matches_heads():
    from claimcheck.verdict import ablation_forward

    bundle = random_bundle(2, 4)
    for kind, head in [
        ("nli", NliOnlyHead(SanHeadConfig(pairs_per_claim=2, encoder_dim=4, hidden=6), seed=3)),
        ("nli-sent", NliSentHead(SanHeadConfig(pairs_per_claim=2, encoder_dim=4, hidden=6), seed=3)),
        ("nli-psent", NliPSentHead(GraphHeadConfig(encoder_dim=4, hidden=6), seed=3)),
    ]:
        tape = Tape()
        via_dispatch = ablation_forward(kind, tape, head.tensors(tape), bundle, head.config)
        direct = head.forward(Tape(), bundle)
        assert np.allclose(via_dispatch.data, direct.data, atol=1e-12)

    abl = NliGraphAblHead(GraphHeadConfig(channels=5, hidden=6), seed=3)
    feats = np.vstack([CLAIM_INFERENCE_FEATURE, np.array([0.5, 0.3, 0.2])])
    graph = EvidenceGraph(feats, np.zeros((2, 2)))
    tape = Tape()
    via_dispatch = ablation_forward("nli-graph-abl", tape, abl.tensors(tape), graph, abl.config)
    assert np.allclose(via_dispatch.data, abl.forward(Tape(), graph).data, atol=1e-12)
    with pytest.raises(ValueError):
        ablation_forward("mystery", Tape(), {}, bundle, None)
