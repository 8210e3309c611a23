import numpy as np
import pytest

from claimcheck.analysis import Analyzer, AnalyzerConfig
from claimcheck.corpus import DocumentRecord
from claimcheck.encoder_client import EncoderClient, SyntheticBackend, cosine_similarity
from claimcheck.evidence import retrieve_evidence_flat, retrieve_evidence_per_doc

PLAIN = Analyzer(AnalyzerConfig(stopword_list="none"))


class VectorBackend:
    """Embedding fixture: an explicit text -> vector table."""

    embed_model_id = "fixture-embed"
    pair_model_id = "fixture-pair"
    nli_model_id = "fixture-nli"

    def __init__(self, table):
        self.table = table

    def embed(self, texts):
        return [np.asarray(self.table[t], dtype=np.float32) for t in texts]


def doc(doc_id, sentences):
    return DocumentRecord(doc_id, f"http://{doc_id}", doc_id, " ".join(sentences))


def angled(theta):
    return [np.cos(theta), np.sin(theta)]


class TestFlat:
    def test_known_similarities_pick_top_two(self):
        # cosine to the claim: s1=0.9, s2=0.8, s3=0.3, s4=0.1
        sims = {"claim text here.": 0.0}
        sentences = {}
        for i, target in enumerate([0.9, 0.8, 0.3, 0.1], start=1):
            sentences[f"Sentence number {i} body."] = float(np.arccos(target))
        table = {"claim text here.": angled(0.0)}
        table.update({s: angled(theta) for s, theta in sentences.items()})
        client = EncoderClient(backend=VectorBackend(table), mode="live")
        docs = [doc("d1", list(sentences))]
        got = retrieve_evidence_flat("c1", "claim text here.", docs, client, PLAIN, n=2)
        assert [s.text for s in got.sentences] == [
            "Sentence number 1 body.",
            "Sentence number 2 body.",
        ]
        assert got.sentences[0].similarity == pytest.approx(0.9, abs=1e-6)
        assert got.selection_policy == "flat_top_n"

    def test_n_larger_than_pool_returns_all_sorted(self):
        backend = SyntheticBackend(seed=3, embed_dim=12)
        client = EncoderClient(backend=backend, mode="live")
        docs = [doc("d1", ["Alpha beta gamma.", "Delta epsilon zeta."])]
        got = retrieve_evidence_flat("c", "alpha beta claim", docs, client, PLAIN, n=50)
        assert len(got.sentences) == 2
        assert got.sentences[0].similarity >= got.sentences[1].similarity

    def test_duplicate_sentences_both_retained(self):
        backend = SyntheticBackend(seed=3, embed_dim=12)
        client = EncoderClient(backend=backend, mode="live")
        docs = [
            doc("d1", ["Masks reduce spread significantly."]),
            doc("d2", ["Masks reduce spread significantly."]),
        ]
        got = retrieve_evidence_flat("c", "masks reduce spread", docs, client, PLAIN, n=5)
        assert len(got.sentences) == 2
        assert {s.source_doc_id for s in got.sentences} == {"d1", "d2"}

    def test_matches_brute_force_argmax(self):
        backend = SyntheticBackend(seed=5, embed_dim=24)
        client = EncoderClient(backend=backend, mode="live")
        rng = np.random.default_rng(8)
        vocab = ["alpha", "beta", "gamma", "delta", "virus", "vaccine", "mask"]
        docs = []
        all_sentences = []
        for d in range(4):
            sents = []
            for s in range(5):
                words = [str(rng.choice(vocab)) for _ in range(4)]
                sents.append(" ".join(words) + ".")
            docs.append(doc(f"d{d}", sents))
            all_sentences.extend((f"d{d}", s) for s in sents)
        claim = "virus vaccine claim"
        got = retrieve_evidence_flat("c", claim, docs, client, PLAIN, n=6)

        claim_vec = backend.embed([claim])[0]
        brute = []
        for doc_id, s in all_sentences:
            sim = cosine_similarity(claim_vec, backend.embed([s])[0])
            brute.append((sim, doc_id, s))
        brute.sort(key=lambda e: -e[0])
        assert [s.text for s in got.sentences] == [s for _, _, s in brute[:6]]

    def test_short_fragments_excluded(self):
        backend = SyntheticBackend(seed=3, embed_dim=12)
        client = EncoderClient(backend=backend, mode="live")
        docs = [doc("d1", ["Ok.", "This sentence is long enough to count."])]
        got = retrieve_evidence_flat("c", "sentence long count", docs, client, PLAIN, n=5)
        assert [s.text for s in got.sentences] == ["This sentence is long enough to count."]


class TestPerDoc:
    def make_client(self):
        return EncoderClient(backend=SyntheticBackend(seed=9, embed_dim=16), mode="live")

    def test_ten_docs_times_three(self):
        client = self.make_client()
        docs = [
            doc(f"d{i}", [f"Document {i} sentence {j} filler words." for j in range(6)])
            for i in range(10)
        ]
        got = retrieve_evidence_per_doc("c", "filler words claim", docs, client, PLAIN, per_doc=3)
        assert len(got.sentences) == 30
        per_doc_counts = {}
        for s in got.sentences:
            per_doc_counts[s.source_doc_id] = per_doc_counts.get(s.source_doc_id, 0) + 1
        assert all(v == 3 for v in per_doc_counts.values())

    def test_short_doc_contributes_what_it_has(self):
        client = self.make_client()
        docs = [
            doc("d0", ["Only sentence one lives here.", "Second sentence stays here."]),
            doc("d1", [f"Doc one sentence {j} body text." for j in range(4)]),
        ]
        got = retrieve_evidence_per_doc("c", "sentence body", docs, client, PLAIN, per_doc=3)
        counts = {}
        for s in got.sentences:
            counts[s.source_doc_id] = counts.get(s.source_doc_id, 0) + 1
        assert counts == {"d0": 2, "d1": 3}

    def test_pooled_list_sorted_non_increasing(self):
        client = self.make_client()
        rng = np.random.default_rng(4)
        vocab = ["mask", "virus", "spread", "study", "data", "claim"]
        docs = []
        for d in range(5):
            sents = [
                " ".join(str(rng.choice(vocab)) for _ in range(5)) + f" tail{d}{j}."
                for j in range(4)
            ]
            docs.append(doc(f"d{d}", sents))
        got = retrieve_evidence_per_doc("c", "mask virus study", docs, client, PLAIN, per_doc=2)
        sims = [s.similarity for s in got.sentences]
        assert all(a >= b for a, b in zip(sims, sims[1:]))

    def test_subset_of_pool_with_cap(self):
        client = self.make_client()
        docs = [
            doc(f"d{i}", [f"Sentence {j} of doc {i} here now." for j in range(5)])
            for i in range(3)
        ]
        got = retrieve_evidence_per_doc("c", "sentence doc", docs, client, PLAIN, per_doc=2)
        counts = {}
        for s in got.sentences:
            counts[s.source_doc_id] = counts.get(s.source_doc_id, 0) + 1
        assert all(v <= 2 for v in counts.values())


def test_parameter_validation():
    client = EncoderClient(backend=SyntheticBackend(seed=0, embed_dim=8), mode="live")
    with pytest.raises(ValueError):
        retrieve_evidence_flat("c", "x", [], client, PLAIN, n=0)
    with pytest.raises(ValueError):
        retrieve_evidence_per_doc("c", "x", [], client, PLAIN, per_doc=0)
