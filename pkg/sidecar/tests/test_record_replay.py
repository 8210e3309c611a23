"""Cross-package contract: the pipeline's encoder client against a live
sidecar, covering record-then-replay byte identity and the sidecar's own
record-cache compatibility."""

import socket
import threading
import time

import numpy as np
import pytest
import uvicorn

from claimcheck.encoder_client import EncoderClient, ServiceBackend
from claimcheck_sidecar import ServiceConfig, create_app


def free_port() -> int:
    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()
    return port


@pytest.fixture(scope="module")
def sidecar(tmp_path_factory):
    record_path = tmp_path_factory.mktemp("sidecar") / "service_cache.jsonl"
    port = free_port()
    config = ServiceConfig(port=port, embed_dim=12, encode_dim=6,
                           record_cache=str(record_path))
    server = uvicorn.Server(uvicorn.Config(create_app(config), host="127.0.0.1",
                                           port=port, log_level="error"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    base_url = f"http://127.0.0.1:{port}"
    import requests

    for _ in range(100):
        try:
            if requests.get(base_url + "/health", timeout=1).status_code == 200:
                break
        except requests.ConnectionError:
            time.sleep(0.05)
    else:
        raise RuntimeError("sidecar did not come up")
    yield {"url": base_url, "record_path": record_path}
    server.should_exit = True
    thread.join(timeout=5)


class TestClientAgainstService:
    def test_health_negotiation(self, sidecar):
        backend = ServiceBackend(sidecar["url"])
        assert backend.embed_model_id.endswith("@hash")

    def test_record_then_replay_byte_identical(self, sidecar, tmp_path):
        cache = tmp_path / "client_cache.jsonl"
        backend = ServiceBackend(sidecar["url"])
        rec = EncoderClient(backend=backend, cache_path=cache, mode="record")
        emb1 = rec.embed_sentences(["first text", "second text"])
        pair1 = rec.encode_pair("claim body", "evidence body")
        nli1 = rec.nli("claim body", "evidence body")

        rep = EncoderClient(cache_path=cache, mode="replay")
        emb2 = rep.embed_sentences(["first text", "second text"])
        pair2 = rep.encode_pair("claim body", "evidence body")
        nli2 = rep.nli("claim body", "evidence body")

        for a, b in zip(emb1, emb2):
            assert a.vector.tobytes() == b.vector.tobytes()
        assert pair1.token_vectors.tobytes() == pair2.token_vectors.tobytes()
        assert pair1.pooled.tobytes() == pair2.pooled.tobytes()
        assert nli1 == nli2

    def test_live_calls_are_deterministic_across_requests(self, sidecar):
        backend = ServiceBackend(sidecar["url"])
        v1 = backend.embed(["stable text"])[0]
        v2 = backend.embed(["stable text"])[0]
        assert np.array_equal(v1, v2)

    def test_sidecar_record_cache_readable_by_client(self, sidecar):
        # the service wrote its own record cache in the client's format;
        # replaying from it must reproduce live responses byte for byte
        backend = ServiceBackend(sidecar["url"])
        live_vec = backend.embed(["first text"])[0]
        rep = EncoderClient(cache_path=sidecar["record_path"], mode="replay")
        (cached,) = rep.embed_sentences(["first text"])
        assert cached.vector.tobytes() == live_vec.tobytes()

    def test_nli_sums_through_client(self, sidecar):
        backend = ServiceBackend(sidecar["url"])
        client = EncoderClient(backend=backend, mode="live")
        t = client.nli("masks help", "masks definitely help")
        assert (t.contradiction + t.neutral + t.entailment) == pytest.approx(1.0, abs=1e-6)

    def test_rerank_scores_in_range(self, sidecar):
        backend = ServiceBackend(sidecar["url"])
        for passage in ("identical words here", "other content entirely"):
            score = backend.rerank("identical words here", passage)
            assert 0.0 <= score <= 1.0
