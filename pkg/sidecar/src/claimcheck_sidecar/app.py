"""FastAPI application exposing the encoder service contract.

Error mapping per the shared schema: 400 for schema violations (body
shape, types, oversized batches), 422 for semantically empty text, 503
when the model backend is unavailable. Responses never contain partial
arrays: a request either fully succeeds or returns an error body.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .cache import RecordCache, cache_key, encode_f32
from .config import ServiceConfig
from .models import ModelNotLoaded, build_models


class EmbedRequest(BaseModel):
    texts: list[str] = Field(min_length=1)


class PairRequest(BaseModel):
    claim: str
    evidence: str


class SingleTextRequest(BaseModel):
    text: str


class RerankPair(BaseModel):
    query: str
    passage: str


class RerankRequest(BaseModel):
    pairs: list[RerankPair] = Field(min_length=1)


class TokenizeCountRequest(BaseModel):
    texts: list[str] = Field(min_length=1)


def _empty(*texts: str) -> bool:
    return any(not t.strip() for t in texts)


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="claimcheck-sidecar", version="0.1.0")
    app.state.config = config
    app.state.models = None
    app.state.model_error = None
    app.state.cache = None
    ids = config.model_ids()

    try:
        app.state.models = build_models(config)
    except (ModelNotLoaded, ValueError) as exc:
        app.state.model_error = str(exc)
    if app.state.models is not None and config.record_cache:
        app.state.cache = RecordCache(config.record_cache, ids)

    @app.exception_handler(RequestValidationError)
    async def schema_violation(_req: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"error": "schema violation", "detail": exc.errors()})

    def models_or_503():
        if app.state.models is None:
            raise ModelNotLoaded(app.state.model_error or "model backend not loaded")
        return app.state.models

    @app.exception_handler(ModelNotLoaded)
    async def model_not_loaded(_req: Request, exc: ModelNotLoaded):
        return JSONResponse(status_code=503, content={"error": str(exc)})

    def err(status: int, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"error": message})

    def record(operation: str, model_id: str, inputs: list[str], payload: dict) -> None:
        if app.state.cache is not None:
            app.state.cache.put(cache_key(operation, model_id, inputs), operation, payload)

    @app.get("/health")
    def health():
        return {
            "status": "ok" if app.state.models is not None else "degraded",
            "backend": config.backend,
            "deterministic": config.deterministic,
            "models": ids,
            "dimensions": {"embed": config.embed_dim, "encode": config.encode_dim},
            "max_sequence_length": config.max_sequence_length,
            "max_batch": config.max_batch,
            "schema_version": schema()["schema_version"],
        }

    @app.get("/schema")
    def schema():
        raw = resources.files("claimcheck_sidecar").joinpath("schema.json").read_text("utf-8")
        return json.loads(raw)

    @app.post("/embed")
    def embed(body: EmbedRequest):
        if len(body.texts) > config.max_batch:
            return err(400, f"batch of {len(body.texts)} exceeds max_batch {config.max_batch}")
        if _empty(*body.texts):
            return err(422, "texts must be non-empty")
        vectors = models_or_503().embed(body.texts)
        response = {
            "model_id": ids["embed"],
            "dim": config.embed_dim,
            "vectors": [encode_f32(v) for v in vectors],
        }
        for text, vec in zip(body.texts, vectors):
            record("embed", ids["embed"], [text],
                   {"model_id": ids["embed"], "dim": config.embed_dim,
                    "vector": encode_f32(vec)})
        return response

    def _encode_response(operation: str, inputs: list[str],
                         tokens: np.ndarray, pooled: np.ndarray) -> dict:
        payload = {
            "model_id": ids["encode"],
            "dim": config.encode_dim,
            "token_count": int(tokens.shape[0]),
            "token_vectors": encode_f32(tokens),
            "pooled": encode_f32(pooled),
        }
        record(operation, ids["encode"], inputs, payload)
        return payload

    @app.post("/encode-pair")
    def encode_pair(body: PairRequest):
        if _empty(body.claim, body.evidence):
            return err(422, "claim and evidence must be non-empty")
        tokens, pooled = models_or_503().encode_pair(body.claim, body.evidence)
        return _encode_response("encode-pair", [body.claim, body.evidence], tokens, pooled)

    @app.post("/encode-single")
    def encode_single(body: SingleTextRequest):
        if _empty(body.text):
            return err(422, "text must be non-empty")
        tokens, pooled = models_or_503().encode_single(body.text)
        return _encode_response("encode-single", [body.text], tokens, pooled)

    @app.post("/nli")
    def nli(body: PairRequest):
        if _empty(body.claim, body.evidence):
            return err(422, "claim and evidence must be non-empty")
        probs = models_or_503().nli(body.claim, body.evidence)
        payload = {"model_id": ids["nli"], "probabilities": encode_f32(probs)}
        record("nli", ids["nli"], [body.claim, body.evidence], payload)
        return payload

    @app.post("/rerank")
    def rerank(body: RerankRequest):
        if len(body.pairs) > config.max_batch:
            return err(400, f"batch of {len(body.pairs)} exceeds max_batch {config.max_batch}")
        if _empty(*(p.query for p in body.pairs), *(p.passage for p in body.pairs)):
            return err(422, "queries and passages must be non-empty")
        models = models_or_503()
        scores = np.array([models.rerank(p.query, p.passage) for p in body.pairs],
                          dtype=np.float32)
        return {"model_id": ids["rerank"], "scores": encode_f32(scores)}

    @app.post("/ner")
    def ner(body: SingleTextRequest):
        if _empty(body.text):
            return err(422, "text must be non-empty")
        entities = models_or_503().ner(body.text)
        return {"model_id": ids["ner"], "entities": entities}

    @app.post("/tokenize-count")
    def tokenize_count(body: TokenizeCountRequest):
        if len(body.texts) > config.max_batch:
            return err(400, f"batch of {len(body.texts)} exceeds max_batch {config.max_batch}")
        counts = models_or_503().tokenize_count(body.texts)
        return {"model_id": ids["encode"], "counts": counts}

    return app
