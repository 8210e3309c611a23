"""Inverted index over paragraphs with BM25 scoring and RM3 expansion.

Scoring follows the Lucene-style BM25 variant with a non-negative IDF:

    score(d) = sum_t w(t) * idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len(d) / avg_len))
    idf(t)   = ln(1 + (N - df(t) + 0.5) / (df(t) + 0.5))

Defaults k1=0.9, b=0.4. Ties are broken by paragraph id ascending so the
same corpus, query and parameters always produce the same ranked list.
"""

from __future__ import annotations

import io
import math
import struct
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .analysis import Analyzer
from .corpus import Paragraph
from .errors import DuplicateIdError, EmptyQueryError, IndexFormatError


@dataclass(frozen=True)
class Query:
    """Weighted bag of analyzed terms. Plain text queries weight each
    occurrence 1.0; RM3 produces fractional weights summing to 1."""

    weights: Mapping[str, float]

    def __post_init__(self):
        if not self.weights:
            raise EmptyQueryError("query has no terms")
        for term, w in self.weights.items():
            if not math.isfinite(w) or w < 0:
                raise ValueError(f"weight for {term!r} must be finite and >= 0")

    @classmethod
    def from_text(cls, text: str, analyzer: Analyzer) -> "Query":
        terms = analyzer.tokens(text)
        if not terms:
            raise EmptyQueryError(f"no terms left after analysis of {text!r}")
        return cls(dict(Counter(terms)))


@dataclass(frozen=True)
class ScoredDoc:
    paragraph_id: str
    score: float
    stage: str = "bm25"  # "bm25" | "reranked"


@dataclass(frozen=True)
class IndexUnit:
    """Minimal indexable unit for corpora that are not segmented documents
    (e.g. claims indexed for de-duplication)."""

    paragraph_id: str
    text: str


@dataclass
class InvertedIndex:
    postings: dict[str, list[tuple[str, int]]]  # term -> [(paragraph_id, tf)] sorted by id
    doc_lengths: dict[str, int]
    avg_doc_length: float
    doc_count: int
    analyzer_id: str

    def df(self, term: str) -> int:
        return len(self.postings.get(term, ()))


def build_index(paragraphs: Sequence[Paragraph | IndexUnit], analyzer: Analyzer) -> InvertedIndex:
    """Index paragraphs (or any unit with paragraph_id/text); deterministic
    for a fixed input order."""
    postings: dict[str, list[tuple[str, int]]] = defaultdict(list)
    doc_lengths: dict[str, int] = {}
    for para in paragraphs:
        pid = para.paragraph_id
        if pid in doc_lengths:
            raise DuplicateIdError(f"duplicate paragraph id {pid!r}")
        terms = analyzer.tokens(para.text)
        doc_lengths[pid] = len(terms)
        for term, tf in Counter(terms).items():
            postings[term].append((pid, tf))
    for term in postings:
        postings[term].sort(key=lambda e: e[0])
    n = len(doc_lengths)
    avg = sum(doc_lengths.values()) / n if n else 0.0
    return InvertedIndex(dict(postings), doc_lengths, avg, n, analyzer.identity)


def bm25_idf(doc_count: int, df: int) -> float:
    return math.log(1.0 + (doc_count - df + 0.5) / (df + 0.5))


def bm25_search(
    index: InvertedIndex,
    query: Query,
    k: int = 10,
    k1: float = 0.9,
    b: float = 0.4,
) -> list[ScoredDoc]:
    """Top-k BM25 search; zero-scored documents are omitted."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k1 <= 0:
        raise ValueError("k1 must be > 0")
    if not 0.0 <= b <= 1.0:
        raise ValueError("b must be in [0, 1]")
    scores: dict[str, float] = defaultdict(float)
    avg = index.avg_doc_length
    for term, weight in query.weights.items():
        plist = index.postings.get(term)
        if not plist or weight == 0.0:
            continue
        idf = bm25_idf(index.doc_count, len(plist))
        for pid, tf in plist:
            length = index.doc_lengths[pid]
            norm = k1 * (1.0 - b + (b * length / avg if avg > 0 else 0.0))
            scores[pid] += weight * idf * tf * (k1 + 1.0) / (tf + norm)
    ranked = sorted(
        (ScoredDoc(pid, s, "bm25") for pid, s in scores.items() if s > 0.0),
        key=lambda d: (-d.score, d.paragraph_id),
    )
    return ranked[:k]


def rm3_expand(
    index: InvertedIndex,
    query: Query,
    feedback: Sequence[ScoredDoc],
    analyzer: Analyzer,
    fb_docs: int = 10,
    fb_terms: int = 10,
    original_weight: float = 0.5,
) -> Query:
    """Interpolate the query with a relevance model from feedback docs.

    The relevance model weights each of the top ``fb_docs`` feedback
    paragraphs by its exp-normalized retrieval score and accumulates
    P(term | doc) = tf / length. The ``fb_terms`` most probable
    non-stopword terms are kept and renormalized; the result is

        original_weight * normalized(query) + (1 - original_weight) * model

    whose weights always sum to 1.
    """
    if not feedback:
        raise ValueError("feedback must be non-empty")
    if fb_docs < 1 or fb_terms < 1:
        raise ValueError("fb_docs and fb_terms must be >= 1")
    if not 0.0 <= original_weight <= 1.0:
        raise ValueError("original_weight must be in [0, 1]")

    total_q = sum(query.weights.values())
    normalized_query = {t: w / total_q for t, w in query.weights.items()}
    if original_weight == 1.0:
        return Query(normalized_query)

    top = sorted(feedback, key=lambda d: (-d.score, d.paragraph_id))[:fb_docs]
    max_score = max(d.score for d in top)
    exp_weights = [math.exp(d.score - max_score) for d in top]
    z = sum(exp_weights)
    doc_weight = {d.paragraph_id: w / z for d, w in zip(top, exp_weights)}

    # term frequencies per feedback doc come from the postings lists
    wanted = set(doc_weight)
    tf_by_doc: dict[str, dict[str, int]] = {pid: {} for pid in wanted}
    for term, plist in index.postings.items():
        if analyzer.is_stopword(term):
            continue
        for pid, tf in plist:
            if pid in wanted:
                tf_by_doc[pid][term] = tf

    model: dict[str, float] = defaultdict(float)
    for pid, tfs in tf_by_doc.items():
        length = index.doc_lengths.get(pid, 0)
        if length == 0:
            continue
        for term, tf in tfs.items():
            model[term] += doc_weight[pid] * tf / length
    selected = sorted(model.items(), key=lambda e: (-e[1], e[0]))[:fb_terms]
    total_m = sum(p for _, p in selected)
    if total_m == 0.0:
        return Query(normalized_query)
    relevance = {t: p / total_m for t, p in selected}

    combined: dict[str, float] = defaultdict(float)
    for t, w in normalized_query.items():
        combined[t] += original_weight * w
    for t, p in relevance.items():
        combined[t] += (1.0 - original_weight) * p
    return Query(dict(combined))


# ---------------------------------------------------------------------------
# persistence
#
# Single binary file: header (magic, version, analyzer id, doc_count,
# avg_doc_length), doc-length table, term dictionary with offsets into a
# trailing postings blob. All integers little-endian.

_MAGIC = b"CCIX"
_VERSION = 1


def _write_str(buf: io.BytesIO, s: str) -> None:
    raw = s.encode("utf-8")
    buf.write(struct.pack("<H", len(raw)))
    buf.write(raw)


def _read_str(buf: io.BufferedReader) -> str:
    (n,) = struct.unpack("<H", buf.read(2))
    return buf.read(n).decode("utf-8")


def save_index(index: InvertedIndex, path: str | Path) -> None:
    path = Path(path)
    doc_ids = sorted(index.doc_lengths)
    doc_pos = {pid: i for i, pid in enumerate(doc_ids)}

    postings_blob = io.BytesIO()
    term_entries: list[tuple[str, int, int]] = []  # (term, df, offset)
    for term in sorted(index.postings):
        plist = index.postings[term]
        term_entries.append((term, len(plist), postings_blob.tell()))
        for pid, tf in plist:
            postings_blob.write(struct.pack("<II", doc_pos[pid], tf))

    out = io.BytesIO()
    out.write(_MAGIC)
    out.write(struct.pack("<I", _VERSION))
    _write_str(out, index.analyzer_id)
    out.write(struct.pack("<Id", index.doc_count, index.avg_doc_length))
    out.write(struct.pack("<I", len(doc_ids)))
    for pid in doc_ids:
        _write_str(out, pid)
        out.write(struct.pack("<I", index.doc_lengths[pid]))
    out.write(struct.pack("<I", len(term_entries)))
    for term, df, offset in term_entries:
        _write_str(out, term)
        out.write(struct.pack("<IQ", df, offset))
    out.write(postings_blob.getvalue())

    from .locking import file_lock

    tmp = path.with_suffix(path.suffix + ".tmp")
    with file_lock(path):
        tmp.write_bytes(out.getvalue())
        tmp.replace(path)


def load_index(path: str | Path) -> InvertedIndex:
    path = Path(path)
    with path.open("rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise IndexFormatError(f"{path}: not an index file (magic {magic!r})")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != _VERSION:
            raise IndexFormatError(f"{path}: unsupported index version {version}")
        analyzer_id = _read_str(fh)
        doc_count, avg = struct.unpack("<Id", fh.read(12))
        (n_docs,) = struct.unpack("<I", fh.read(4))
        doc_ids: list[str] = []
        doc_lengths: dict[str, int] = {}
        for _ in range(n_docs):
            pid = _read_str(fh)
            (length,) = struct.unpack("<I", fh.read(4))
            doc_ids.append(pid)
            doc_lengths[pid] = length
        (n_terms,) = struct.unpack("<I", fh.read(4))
        dictionary: list[tuple[str, int, int]] = []
        for _ in range(n_terms):
            term = _read_str(fh)
            df, offset = struct.unpack("<IQ", fh.read(12))
            dictionary.append((term, df, offset))
        blob = fh.read()
    postings: dict[str, list[tuple[str, int]]] = {}
    for term, df, offset in dictionary:
        plist = []
        for i in range(df):
            pos, tf = struct.unpack_from("<II", blob, offset + 8 * i)
            plist.append((doc_ids[pos], tf))
        plist.sort(key=lambda e: e[0])
        postings[term] = plist
    return InvertedIndex(postings, doc_lengths, avg, doc_count, analyzer_id)
