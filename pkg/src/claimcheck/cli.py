"""Command-line surface wiring the pipeline end to end.

Commands: ingest, index, search, dedup, evidence, train, evaluate,
verify. Outputs are line-record JSONL files whose first record is a meta
line carrying the config hash and seed; ``--pretty`` additionally prints
human-readable tables. Report-producing commands (dedup, train,
evaluate) render matplotlib figures next to their record files.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import Analyzer
from .config import PipelineConfig, load_config
from .corpus import load_claims, load_documents, segment_paragraphs
from .dedup import PRESETS, build_claim_index, deduplicate, score_candidate_pairs
from .encoder_client import EncoderClient, ServiceBackend, SyntheticBackend
from .errors import ClaimcheckError
from .index import Query, bm25_search, build_index, load_index, rm3_expand, save_index
from .nn import load_checkpoint, save_checkpoint
from .pipeline import PipelineContext, build_dataset, claim_evidence, claim_example
from .rerank import multistage_retrieve, resolve_scorer
from .verdict import (
    HEAD_KINDS,
    MetricsReport,
    TrainConfig,
    ap_at_k,
    default_config,
    kfold_evaluate,
    make_head,
    train,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1 (argparse would use 2)
        raise UsageError(message)


def _meta_record(config: PipelineConfig) -> dict:
    return {
        "type": "meta",
        "tool": "claimcheck",
        "version": __version__,
        "config_hash": config.config_hash(),
        "seed": config.seed,
    }


def write_records(path: Path, config: PipelineConfig, records: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(_meta_record(config), sort_keys=True) + "\n")
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def build_client(config: PipelineConfig) -> EncoderClient:
    backend = None
    if config.mode in ("live", "record"):
        kind, _, arg = config.encoder.partition(":")
        if kind == "synthetic":
            backend = SyntheticBackend(seed=int(arg or "0"))
        elif kind == "service":
            backend = ServiceBackend(arg)
        else:
            raise UsageError(f"unknown encoder descriptor {config.encoder!r}")
    cache = config.cache
    if config.mode in ("record", "replay") and cache is None:
        raise UsageError(f"--cache is required in {config.mode} mode")
    return EncoderClient(backend=backend, cache_path=cache, mode=config.mode)


def _paragraph_units(path: Path):
    texts: dict[str, str] = {}
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec.get("type") == "meta":
                continue
            texts[rec["paragraph_id"]] = rec["text"]
    return texts


def _load_context(config: PipelineConfig) -> PipelineContext:
    index_dir = Path(config.index_dir)
    index_path = index_dir / "index.ccix"
    paragraphs_path = index_dir / "paragraphs.jsonl"
    for p in (index_path, paragraphs_path):
        if not p.exists():
            raise UsageError(f"missing {p}; run ingest and index first")
    if config.docs is None:
        raise UsageError("--docs is required for this command")
    documents = {d.id: d for d in load_documents(config.docs)}
    index = load_index(index_path)
    analyzer = Analyzer()
    if index.analyzer_id != analyzer.identity:
        raise ClaimcheckError(
            f"index was built with analyzer {index.analyzer_id!r}, "
            f"current is {analyzer.identity!r}"
        )
    rm3 = None
    if config.rm3_enabled:
        rm3 = {
            "fb_docs": config.rm3_fb_docs,
            "fb_terms": config.rm3_fb_terms,
            "original_weight": config.rm3_original_weight,
        }
    return PipelineContext(
        analyzer=analyzer,
        index=index,
        paragraph_texts=_paragraph_units(paragraphs_path),
        documents=documents,
        client=build_client(config),
        scorer=resolve_scorer(config.scorer),
        first_k=config.first_k,
        doc_k=10,
        k1=config.k1,
        b=config.b,
        rm3=rm3,
        flat_n=config.flat_n,
        per_doc=config.per_doc,
        graph_threshold=config.graph_threshold,
        min_sentence_tokens=config.min_sentence_tokens,
    )


def _train_config(config: PipelineConfig) -> TrainConfig:
    base = default_config(config.head)
    return TrainConfig(
        epochs=config.epochs if config.epochs is not None else base.epochs,
        batch_size=config.batch_size,
        learning_rate=(config.learning_rate if config.learning_rate is not None
                       else base.learning_rate),
        decay_boundary=base.decay_boundary,
        decay_factor=base.decay_factor,
        seed=config.seed,
    )


# --- commands ---------------------------------------------------------------


def cmd_ingest(config: PipelineConfig, args) -> int:
    if config.docs is None:
        raise UsageError("--docs is required")
    docs = load_documents(config.docs)
    out_dir = Path(config.index_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    counter = None
    if args.subword_count:
        # paragraph budgets counted by the encoder's tokenizer instead of
        # whitespace tokens
        if config.mode == "replay":
            raise UsageError("--subword-count needs a live/record encoder backend")
        backend = build_client(config).backend
        counter = lambda text: backend.tokenize_count([text])[0]
    records = []
    for doc in docs:
        for para in segment_paragraphs(doc, max_tokens=config.max_paragraph_tokens,
                                       counter=counter):
            records.append(
                {
                    "type": "paragraph",
                    "paragraph_id": para.paragraph_id,
                    "doc_id": para.doc_id,
                    "ordinal": para.ordinal,
                    "token_count": para.token_count,
                    "text": para.text,
                }
            )
    write_records(out_dir / "paragraphs.jsonl", config, records)
    print(f"ingested {len(docs)} documents -> {len(records)} paragraphs")
    return 0


def cmd_index(config: PipelineConfig, args) -> int:
    from .corpus import Paragraph

    out_dir = Path(config.index_dir)
    paragraphs_path = out_dir / "paragraphs.jsonl"
    if not paragraphs_path.exists():
        raise UsageError(f"missing {paragraphs_path}; run ingest first")
    paras = []
    with paragraphs_path.open("r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec.get("type") != "paragraph":
                continue
            paras.append(Paragraph(rec["doc_id"], rec["ordinal"], rec["text"],
                                   rec["token_count"]))
    index = build_index(paras, Analyzer())
    save_index(index, out_dir / "index.ccix")
    print(f"indexed {index.doc_count} paragraphs, {len(index.postings)} terms")
    return 0


def cmd_search(config: PipelineConfig, args) -> int:
    if not args.query or not args.query.strip():
        raise UsageError("--query must be a non-empty string")
    index_path = Path(config.index_dir) / "index.ccix"
    if not index_path.exists():
        raise UsageError(f"missing {index_path}; run index first")
    index = load_index(index_path)
    analyzer = Analyzer()
    query = Query.from_text(args.query, analyzer)
    if args.rerank:
        texts = _paragraph_units(Path(config.index_dir) / "paragraphs.jsonl")
        hits = multistage_retrieve(
            index, resolve_scorer(config.scorer), args.query, analyzer, texts,
            first_k=config.first_k, final_k=config.final_k, k1=config.k1, b=config.b,
            rm3=({"fb_docs": config.rm3_fb_docs, "fb_terms": config.rm3_fb_terms,
                  "original_weight": config.rm3_original_weight}
                 if config.rm3_enabled else None),
        )
    else:
        if config.rm3_enabled:
            first = bm25_search(index, query, k=config.first_k, k1=config.k1, b=config.b)
            if first:
                query = rm3_expand(index, query, first, analyzer,
                                   fb_docs=config.rm3_fb_docs,
                                   fb_terms=config.rm3_fb_terms,
                                   original_weight=config.rm3_original_weight)
        hits = bm25_search(index, query, k=config.final_k, k1=config.k1, b=config.b)
    records = [
        {"type": "hit", "rank": i + 1, "paragraph_id": h.paragraph_id,
         "score": h.score, "stage": h.stage}
        for i, h in enumerate(hits)
    ]
    out = Path(args.out) if args.out else Path(config.index_dir) / "search_results.jsonl"
    write_records(out, config, records)
    if args.pretty:
        print(f"{'rank':>4}  {'score':>10}  paragraph")
        for r in records:
            print(f"{r['rank']:>4}  {r['score']:>10.4f}  {r['paragraph_id']}")
    else:
        print(f"wrote {len(records)} hits -> {out}")
    return 0


def cmd_dedup(config: PipelineConfig, args) -> int:
    if config.claims is None:
        raise UsageError("--claims is required")
    preset = config.dedup_preset.upper()
    if preset not in PRESETS:
        raise UsageError(f"--preset must be one of {sorted(k.lower() for k in PRESETS)}")
    claims = load_claims(config.claims)
    analyzer = Analyzer()
    index = build_claim_index(claims, analyzer)
    scorer = resolve_scorer(config.scorer)
    scored = score_candidate_pairs(claims, index, scorer, analyzer,
                                   candidate_k=config.candidate_k)
    reports = {
        name: deduplicate(claims, [p for p in scored if p.probability >= tau])
        for name, tau in PRESETS.items()
    }
    chosen = reports[preset]

    stats = {}
    if args.stats:
        from .dedup import bertscore_pair_scorer, similarity_stats

        pair_scorer = bertscore_pair_scorer(build_client(config))
        collections = {"original": claims}
        for name, rep in reports.items():
            kept_ids = set(rep.kept)
            collections[name.lower()] = [c for c in claims if c.id in kept_ids]
        for name, collection in collections.items():
            if len(collection) >= 2:
                s = similarity_stats(collection, pair_scorer)
                stats[name] = {"mean": s.mean, "std": s.std, "p90": s.p90}
    records = [
        {"type": "kept", "id": cid} for cid in chosen.kept
    ] + [
        {"type": "removed", "id": cid,
         "trigger": {"a": pair.claim_a, "b": pair.claim_b,
                     "probability": pair.probability}}
        for cid, pair in chosen.removed
    ]
    summary = {
        "type": "summary",
        "preset": preset,
        "original": {"counts": chosen.label_counts_before,
                     "total": len(claims)},
    }
    for name, rep in reports.items():
        summary[name.lower()] = {
            "counts": rep.label_counts_after,
            "total": len(rep.kept),
            "threshold": PRESETS[name],
        }
    for name, values in stats.items():
        summary[name]["similarity"] = values
    records.append(summary)
    out = Path(args.out) if args.out else Path("dedup_report.jsonl")
    write_records(out, config, records)
    if args.figures:
        from .report import render_similarity_histogram

        fig = render_similarity_histogram(
            [p.probability for p in scored], out.with_suffix(".png"),
            threshold=PRESETS[preset],
        )
        print(f"figure -> {fig}")
    if args.pretty:
        print(f"{'set':<10} {'False':>7} {'True':>7} {'total':>7}")
        orig = summary["original"]
        print(f"{'original':<10} {orig['counts']['False']:>7} {orig['counts']['True']:>7} {orig['total']:>7}")
        for name in ("large", "small"):
            row = summary[name]
            print(f"{name:<10} {row['counts']['False']:>7} {row['counts']['True']:>7} {row['total']:>7}")
    print(f"kept {len(chosen.kept)} / removed {len(chosen.removed)} -> {out}")
    return 0


def cmd_evidence(config: PipelineConfig, args) -> int:
    if config.claims is None:
        raise UsageError("--claims is required")
    ctx = _load_context(config)
    claims = load_claims(config.claims)
    policy = "per_doc_top_m" if args.policy == "per-doc" else "flat_top_n"
    records = []
    for claim in claims:
        ev = claim_evidence(ctx, claim.id, claim.text, policy)
        records.append(
            {
                "type": "evidence",
                "claim_id": ev.claim_id,
                "policy": ev.selection_policy,
                "sentences": [
                    {"text": s.text, "source_doc_id": s.source_doc_id,
                     "similarity": s.similarity}
                    for s in ev.sentences
                ],
            }
        )
    out = Path(args.out) if args.out else Path(config.index_dir) / "evidence.jsonl"
    write_records(out, config, records)
    print(f"wrote evidence for {len(records)} claims -> {out}")
    return 0


def cmd_train(config: PipelineConfig, args) -> int:
    if config.claims is None:
        raise UsageError("--claims is required")
    if config.head not in HEAD_KINDS:
        raise UsageError(f"--head must be one of {HEAD_KINDS}")
    ctx = _load_context(config)
    claims = load_claims(config.claims)
    rows, skipped = build_dataset(ctx, claims, config.head)
    if not rows:
        raise ClaimcheckError("no claim produced evidence; nothing to train on")
    encoder_dim = _example_dim(rows[0][1], config.head)
    head = make_head(config.head, encoder_dim=encoder_dim, seed=config.seed,
                     hidden=config.hidden, threshold=config.graph_threshold)
    tconfig = _train_config(config)
    result = train(head, [(ex, y) for _, ex, y in rows], tconfig)
    out_dir = Path(config.index_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ckpt = out_dir / f"{config.head}.ckpt"
    save_checkpoint(head.parameters(), ckpt,
                    meta={**head.meta(), "config_hash": config.config_hash(),
                          "seed": tconfig.seed})
    curve_records = [
        {"type": "epoch", "epoch": i, "mean_loss": loss}
        for i, loss in enumerate(result.loss_curve)
    ]
    if skipped:
        curve_records.append({"type": "skipped_claims", "ids": skipped})
    curve_path = out_dir / f"{config.head}.losses.jsonl"
    write_records(curve_path, config, curve_records)
    if args.figures:
        from .report import render_loss_curve

        fig = render_loss_curve(result.loss_curve, out_dir / f"{config.head}.loss.png",
                                title=f"{config.head} training loss")
        print(f"figure -> {fig}")
    print(f"trained {config.head} for {tconfig.epochs} epochs "
          f"(final loss {result.final_loss:.4f}) -> {ckpt}")
    return 0


def _example_dim(example, head_kind: str) -> int:
    from .verdict import EvidenceGraph, PairBundle

    if isinstance(example, PairBundle):
        return example.dim
    if isinstance(example, EvidenceGraph):
        return max(example.feature_dim - 3, 1)
    raise ClaimcheckError(f"cannot infer encoder dim for {head_kind}")


def cmd_evaluate(config: PipelineConfig, args) -> int:
    if config.claims is None:
        raise UsageError("--claims is required")
    out_dir = Path(config.index_dir)
    if args.retrieval:
        return _evaluate_retrieval(config, args, out_dir)
    if config.head not in HEAD_KINDS:
        raise UsageError(f"--head must be one of {HEAD_KINDS}")
    ctx = _load_context(config)
    claims = load_claims(config.claims)
    rows, skipped = build_dataset(ctx, claims, config.head)
    if len(rows) < args.folds:
        raise ClaimcheckError(
            f"only {len(rows)} usable claims for {args.folds}-fold evaluation"
        )
    encoder_dim = _example_dim(rows[0][1], config.head)
    tconfig = _train_config(config)
    report, curves = kfold_evaluate(
        rows,
        lambda: make_head(config.head, encoder_dim=encoder_dim, seed=config.seed,
                          hidden=config.hidden, threshold=config.graph_threshold),
        tconfig,
        k=args.folds,
        seed=config.seed,
    )
    records = []
    for i, fold in enumerate(report.per_fold):
        records.append({"type": "fold", "fold": i, **fold.as_dict()})
    records.append({"type": "mean", **report.mean.as_dict()})
    if skipped:
        records.append({"type": "skipped_claims", "ids": skipped})
    out = Path(args.out) if args.out else out_dir / f"{config.head}.metrics.jsonl"
    write_records(out, config, records)
    if args.figures:
        from .report import render_metrics

        fig = render_metrics(report, out.with_suffix(".png"),
                             title=f"{config.head} {args.folds}-fold metrics")
        print(f"figure -> {fig}")
    if args.pretty:
        _print_metrics_table(config.head, report)
    print(f"evaluated {config.head} over {args.folds} folds -> {out}")
    return 0


def _print_metrics_table(head: str, report: MetricsReport) -> None:
    m = report.mean
    print(f"{'model':<14} {'P(False)':>9} {'R(False)':>9} {'F1(False)':>9} "
          f"{'P(True)':>9} {'R(True)':>9} {'F1(True)':>9} {'MacroF1':>9}")
    f, t = m.per_class
    print(f"{head:<14} {f.precision:>9.2f} {f.recall:>9.2f} {f.f1:>9.2f} "
          f"{t.precision:>9.2f} {t.recall:>9.2f} {t.f1:>9.2f} {m.macro_f1:>9.2f}")


def _evaluate_retrieval(config: PipelineConfig, args, out_dir: Path) -> int:
    if args.gold is None:
        raise UsageError("--gold is required with --retrieval")
    gold = {}
    with Path(args.gold).open("r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                gold[rec["claim_id"]] = rec["doc_id"]
    ctx = _load_context(config)
    claims = load_claims(config.claims)
    from .rerank import max_pool_documents

    ranks: list[int | None] = []
    for claim in claims:
        if claim.id not in gold:
            continue
        hits = multistage_retrieve(
            ctx.index, ctx.scorer, claim.text, ctx.analyzer, ctx.paragraph_texts,
            first_k=ctx.first_k, final_k=ctx.first_k, k1=ctx.k1, b=ctx.b, rm3=ctx.rm3,
        )
        docs = [doc_id for doc_id, _ in max_pool_documents(hits)]
        try:
            ranks.append(docs.index(gold[claim.id]) + 1)
        except ValueError:
            ranks.append(None)
    if not ranks:
        raise ClaimcheckError("no claims matched the gold file")
    ap = {k: ap_at_k(ranks, k) for k in (5, 10, 20, 100)}
    records = [{"type": "ap", "k": k, "value": v} for k, v in sorted(ap.items())]
    out = Path(args.out) if args.out else out_dir / "retrieval.metrics.jsonl"
    write_records(out, config, records)
    if args.figures:
        from .report import render_ap_table

        fig = render_ap_table(ap, out.with_suffix(".png"))
        print(f"figure -> {fig}")
    if args.pretty:
        print("  ".join(f"AP@{k}={v:.2f}" for k, v in sorted(ap.items())))
    print(f"retrieval evaluation over {len(ranks)} claims -> {out}")
    return 0


def cmd_verify(config: PipelineConfig, args) -> int:
    if not args.claim or not args.claim.strip():
        raise UsageError("--claim must be a non-empty string")
    ckpt_path = Path(args.checkpoint) if args.checkpoint else (
        Path(config.index_dir) / f"{config.head}.ckpt"
    )
    if not ckpt_path.exists():
        raise UsageError(f"missing model checkpoint {ckpt_path}; run train first")
    meta, arrays = load_checkpoint(ckpt_path)
    kind = meta.get("kind", config.head)
    ctx = _load_context(config)
    head = make_head(kind, encoder_dim=int(meta.get("encoder_dim", 1024)),
                     seed=config.seed, hidden=int(meta.get("hidden", 50)),
                     threshold=float(meta.get("threshold", config.graph_threshold)))
    head.load_arrays(arrays)
    example, evidence = claim_example(ctx, "query", args.claim.strip(), kind)
    if example is None:
        raise ClaimcheckError("no evidence retrieved for this claim")
    probs = head.probabilities(example)
    verdict = "True" if int(np.argmax(probs)) == 1 else "False"
    record = {
        "type": "verdict",
        "claim": args.claim.strip(),
        "head": kind,
        "verdict": verdict,
        "probabilities": {"False": float(probs[0]), "True": float(probs[1])},
        "evidence": [
            {
                "text": s.text,
                "source_doc_id": s.source_doc_id,
                "url": ctx.documents[s.source_doc_id].url,
                "similarity": s.similarity,
            }
            for s in evidence.sentences
        ],
    }
    out = Path(args.out) if args.out else Path(config.index_dir) / "verdict.jsonl"
    write_records(out, config, [record])
    if args.pretty:
        print(f"claim:   {record['claim']}")
        print(f"verdict: {verdict}  "
              f"(False={probs[0]:.3f}, True={probs[1]:.3f})")
        for s in record["evidence"]:
            print(f"  [{s['similarity']:.3f}] {s['source_doc_id']}: {s['text'][:80]}")
    else:
        print(f"verdict {verdict} -> {out}")
    return 0


# --- argument plumbing -------------------------------------------------------


def _add_common(p: _Parser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--claims", default=None)
    p.add_argument("--docs", default=None)
    p.add_argument("--index-dir", dest="index_dir", default=None)
    p.add_argument("--cache", default=None)
    p.add_argument("--mode", choices=["live", "record", "replay"], default=None)
    p.add_argument("--encoder", default=None, help="synthetic:<seed> | service:<url>")
    p.add_argument("--scorer", default=None,
                   help="synthetic:<seed> | fixture:<path> | service:<url>")
    p.add_argument("--k1", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--first-k", dest="first_k", type=int, default=None)
    p.add_argument("--final-k", dest="final_k", type=int, default=None)
    p.add_argument("--rm3", dest="rm3_enabled", action="store_const", const=True,
                   default=None)
    p.add_argument("--preset", dest="dedup_preset", choices=["large", "small"],
                   default=None)
    p.add_argument("--head", choices=list(HEAD_KINDS), default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--learning-rate", dest="learning_rate", type=float, default=None)
    p.add_argument("--pretty", action="store_true")
    p.add_argument("--figures", action="store_true")


_CONFIG_KEYS = (
    "seed", "claims", "docs", "index_dir", "cache", "mode", "encoder", "scorer",
    "k1", "b", "first_k", "final_k", "rm3_enabled", "dedup_preset", "head",
    "epochs", "learning_rate",
)


def make_parser() -> _Parser:
    parser = _Parser(prog="claimcheck", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    commands = {
        "ingest": (cmd_ingest, "segment documents into indexable paragraphs"),
        "index": (cmd_index, "build and persist the inverted index"),
        "search": (cmd_search, "BM25 (+RM3/re-rank) search over the index"),
        "dedup": (cmd_dedup, "remove near-duplicate claims"),
        "evidence": (cmd_evidence, "select evidence sentences per claim"),
        "train": (cmd_train, "train a veracity head"),
        "evaluate": (cmd_evaluate, "k-fold metrics or retrieval AP table"),
        "verify": (cmd_verify, "end-to-end verdict for one claim"),
    }
    for name, (fn, help_text) in commands.items():
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        p.set_defaults(fn=fn)
        if name == "ingest":
            p.add_argument("--subword-count", dest="subword_count", action="store_true")
        elif name == "search":
            p.add_argument("--query", required=False)
            p.add_argument("--rerank", action="store_true")
            p.add_argument("--out", default=None)
        elif name == "dedup":
            p.add_argument("--out", default=None)
            p.add_argument("--stats", action="store_true")
        elif name == "evidence":
            p.add_argument("--policy", choices=["flat", "per-doc"], default="flat")
            p.add_argument("--out", default=None)
        elif name == "evaluate":
            p.add_argument("--folds", type=int, default=5)
            p.add_argument("--retrieval", action="store_true")
            p.add_argument("--gold", default=None)
            p.add_argument("--out", default=None)
        elif name == "verify":
            p.add_argument("--claim", required=False)
            p.add_argument("--checkpoint", default=None)
            p.add_argument("--out", default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        overrides = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
        try:
            config = load_config(args.config, overrides)
        except (ValueError, TypeError, json.JSONDecodeError) as exc:
            raise UsageError(f"bad configuration: {exc}") from exc
        return args.fn(config, args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ClaimcheckError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
