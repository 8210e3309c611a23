"""Claim and document corpus handling.

Loads claim and document files (JSONL or CSV), segments documents into
fixed-size token paragraphs for indexing, splits text into sentences for
evidence selection, and assigns category tags to claims.

Claim labels form a closed two-value vocabulary: ``"False"`` and
``"True"``. Anything else (including nuanced ratings such as
"Misleading" or "Mostly False") is a loader error; collapsing such
ratings is the caller's responsibility before ingest.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .analysis import _read_wordlist, whitespace_tokens
from .errors import MalformedInputError, SegmentationError

VALID_LABELS = ("False", "True")
ENTITY_KINDS = ("PERSON", "ORGANIZATION", "GPE", "FACILITY")

_TAG_NAMES = ("multimodal", "social_media", "question", "numerical", "named_entity")


@dataclass(frozen=True, order=True)
class ClaimTag:
    """One category tag; ``entity`` is set only for named_entity tags."""

    name: str
    entity: str | None = None

    def __post_init__(self):
        if self.name not in _TAG_NAMES:
            raise ValueError(f"unknown tag name {self.name!r}")
        if self.name == "named_entity":
            if self.entity not in ENTITY_KINDS:
                raise ValueError(f"named_entity kind must be one of {ENTITY_KINDS}")
        elif self.entity is not None:
            raise ValueError(f"tag {self.name!r} takes no entity kind")

    def __str__(self) -> str:
        return f"{self.name}:{self.entity}" if self.entity else self.name

    @classmethod
    def parse(cls, raw: str) -> "ClaimTag":
        name, _, entity = raw.partition(":")
        return cls(name, entity or None)


@dataclass(frozen=True)
class ClaimRecord:
    id: str
    text: str
    label: str
    claim_source: str = ""
    origin_dataset: str = ""
    types: frozenset[ClaimTag] = frozenset()

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("claim text empty after trimming")
        if self.label not in VALID_LABELS:
            raise ValueError(f"label must be one of {VALID_LABELS}, got {self.label!r}")

    @property
    def label_index(self) -> int:
        """Class index used by the veracity heads: False=0, True=1."""
        return VALID_LABELS.index(self.label)


@dataclass(frozen=True)
class DocumentRecord:
    id: str
    url: str
    domain: str
    text: str

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("document text empty")


@dataclass(frozen=True)
class Paragraph:
    doc_id: str
    ordinal: int
    text: str
    token_count: int

    @property
    def paragraph_id(self) -> str:
        return f"{self.doc_id}#{self.ordinal}"


# ---------------------------------------------------------------------------
# loaders

_CLAIM_FIELDS = ("id", "text", "label", "claim_source", "origin_dataset")
_DOC_FIELDS = ("id", "url", "domain", "text")


def _rows_from_file(path: Path, fmt: str) -> Iterable[tuple[int, dict | None, str | None]]:
    """Yield (row_number, row_dict, parse_error) triples."""
    if fmt == "jsonl":
        with path.open("r", encoding="utf-8") as fh:
            for n, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as exc:
                    yield n, None, f"invalid JSON: {exc.msg}"
                    continue
                if not isinstance(row, dict):
                    yield n, None, "row is not an object"
                    continue
                yield n, row, None
    elif fmt == "csv":
        with path.open("r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            for n, row in enumerate(reader, start=2):  # row 1 is the header
                yield n, dict(row), None
    else:
        raise ValueError(f"unknown format {fmt!r} (expected 'jsonl' or 'csv')")


def _infer_format(path: Path, fmt: str | None) -> str:
    if fmt:
        return fmt
    return "csv" if path.suffix.lower() == ".csv" else "jsonl"


def load_claims(path: str | Path, format: str | None = None) -> list[ClaimRecord]:
    """Load claim records, rejecting the whole file if any row is bad.

    Every failing row is collected into the raised
    :class:`MalformedInputError` as ``(row_number, field, message)``.
    """
    path = Path(path)
    fmt = _infer_format(path, format)
    records: list[ClaimRecord] = []
    bad: list[tuple[int, str, str]] = []
    seen_ids: dict[str, int] = {}
    for n, row, err in _rows_from_file(path, fmt):
        if err is not None:
            bad.append((n, "-", err))
            continue
        try:
            raw_types = row.get("types") or []
            if isinstance(raw_types, str):
                raw_types = [t for t in raw_types.split(";") if t]
            types = frozenset(ClaimTag.parse(t) for t in raw_types)
            rec = ClaimRecord(
                id=str(row["id"]),
                text=str(row["text"]),
                label=str(row["label"]),
                claim_source=str(row.get("claim_source") or ""),
                origin_dataset=str(row.get("origin_dataset") or ""),
                types=types,
            )
        except KeyError as exc:
            bad.append((n, exc.args[0], "missing field"))
            continue
        except ValueError as exc:
            msg = str(exc)
            fieldname = "label" if "label" in msg else ("types" if "tag" in msg or "entity" in msg else "text")
            bad.append((n, fieldname, msg))
            continue
        if rec.id in seen_ids:
            bad.append((n, "id", f"duplicate id {rec.id!r} (first seen row {seen_ids[rec.id]})"))
            continue
        seen_ids[rec.id] = n
        records.append(rec)
    if bad:
        raise MalformedInputError(str(path), bad)
    return records


def save_claims(records: Sequence[ClaimRecord], path: str | Path, format: str | None = None) -> None:
    path = Path(path)
    fmt = _infer_format(path, format)
    rows = []
    for rec in records:
        row = {f: getattr(rec, f) for f in _CLAIM_FIELDS}
        row["types"] = sorted(str(t) for t in rec.types)
        rows.append(row)
    if fmt == "jsonl":
        with path.open("w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    elif fmt == "csv":
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=[*_CLAIM_FIELDS, "types"])
            writer.writeheader()
            for row in rows:
                row = dict(row)
                row["types"] = ";".join(row["types"])
                writer.writerow(row)
    else:
        raise ValueError(f"unknown format {fmt!r}")


def load_documents(path: str | Path, format: str | None = None) -> list[DocumentRecord]:
    path = Path(path)
    fmt = _infer_format(path, format)
    records: list[DocumentRecord] = []
    bad: list[tuple[int, str, str]] = []
    seen_ids: dict[str, int] = {}
    for n, row, err in _rows_from_file(path, fmt):
        if err is not None:
            bad.append((n, "-", err))
            continue
        try:
            rec = DocumentRecord(
                id=str(row["id"]),
                url=str(row.get("url") or ""),
                domain=str(row.get("domain") or ""),
                text=str(row["text"]),
            )
        except KeyError as exc:
            bad.append((n, exc.args[0], "missing field"))
            continue
        except ValueError as exc:
            bad.append((n, "text", str(exc)))
            continue
        if rec.id in seen_ids:
            bad.append((n, "id", f"duplicate id {rec.id!r} (first seen row {seen_ids[rec.id]})"))
            continue
        seen_ids[rec.id] = n
        records.append(rec)
    if bad:
        raise MalformedInputError(str(path), bad)
    return records


# ---------------------------------------------------------------------------
# segmentation

def segment_paragraphs(
    doc: DocumentRecord,
    max_tokens: int = 300,
    counter: Callable[[str], int] | None = None,
) -> list[Paragraph]:
    """Greedily pack a document's tokens into paragraphs.

    With the default whitespace unit, every paragraph except possibly the
    last holds exactly ``max_tokens`` tokens and re-joining the paragraphs
    reproduces the document's token stream. When ``counter`` is given
    (e.g. a subword counter served by the sidecar), packing is greedy
    against that count and only the upper bound ``token_count <=
    max_tokens`` is guaranteed.
    """
    if max_tokens < 1:
        raise ValueError("max_tokens must be >= 1")
    words = whitespace_tokens(doc.text)
    if not words:
        return []
    paragraphs: list[Paragraph] = []
    if counter is None:
        for i in range(0, len(words), max_tokens):
            chunk = words[i : i + max_tokens]
            paragraphs.append(
                Paragraph(doc.id, len(paragraphs), " ".join(chunk), len(chunk))
            )
        return paragraphs

    start = 0
    while start < len(words):
        end = start + 1
        count = counter(" ".join(words[start:end]))
        if count > max_tokens:
            raise SegmentationError(
                f"{doc.id}: single token {words[start]!r} counts {count} > max_tokens={max_tokens}"
            )
        while end < len(words):
            nxt = counter(" ".join(words[start : end + 1]))
            if nxt > max_tokens:
                break
            end += 1
            count = nxt
        paragraphs.append(Paragraph(doc.id, len(paragraphs), " ".join(words[start:end]), count))
        start = end
    return paragraphs


# ---------------------------------------------------------------------------
# sentence splitting

@lru_cache(maxsize=None)
def _abbreviations() -> frozenset[str]:
    return _read_wordlist("abbreviations.txt")[1]


_TERMINAL_RE = re.compile(r"[.!?]+[\"')\]]*\s")


def split_sentences(text: str) -> list[str]:
    """Rule-based sentence splitting on terminal punctuation.

    Splits after ``.``, ``!`` or ``?`` (plus trailing quotes/brackets)
    followed by whitespace, unless the dotted token is on the
    abbreviation guard list or the period sits inside a number.
    Joining the result preserves every non-whitespace character.
    """
    guard = _abbreviations()
    sentences: list[str] = []
    start = 0
    for match in _TERMINAL_RE.finditer(text):
        end = match.end()
        # token containing the terminal punctuation, e.g. "Dr." or "3.5"
        token = text[start:end].rstrip().rsplit(None, 1)[-1].lower()
        if token in guard:
            continue
        # period between digits ("3.5 million") is not a boundary
        if match.group().startswith(".") and end < len(text):
            before = text[: match.start()].rstrip()
            after = text[end:].lstrip()
            if before and after and before[-1].isdigit() and after[0].isdigit():
                continue
        chunk = text[start:end].strip()
        if chunk:
            sentences.append(chunk)
        start = end
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


# ---------------------------------------------------------------------------
# categorization

@lru_cache(maxsize=None)
def _interrogatives() -> frozenset[str]:
    return _read_wordlist("interrogatives.txt")[1]


@lru_cache(maxsize=None)
def _media_keywords() -> tuple[tuple[str, str], ...]:
    text = resources.files("claimcheck.data").joinpath("media_keywords.txt").read_text("utf-8")
    pairs = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tag, _, phrase = line.partition("\t")
        pairs.append((tag, phrase.strip().lower()))
    return tuple(pairs)


# standalone numbers: digits not glued to letters or hyphens (so "COVID-19"
# and "B117" do not fire, "2019" and "3.5" do)
_NUMBER_RE = re.compile(r"(?<![\w-])\d+(?:[.,]\d+)*%?(?![\w-])")


@lru_cache(maxsize=None)
def _number_words() -> frozenset[str]:
    return _read_wordlist("number_words.txt")[1]


@dataclass(frozen=True)
class CategorizeResult:
    """Tag set plus a flag recording whether entity tagging was skipped."""

    types: frozenset[ClaimTag]
    partial: bool = False

    def __iter__(self):
        return iter(self.types)

    def __contains__(self, item) -> bool:
        return item in self.types

    def __len__(self) -> int:
        return len(self.types)

    def __eq__(self, other) -> bool:
        if isinstance(other, CategorizeResult):
            return self.types == other.types and self.partial == other.partial
        if isinstance(other, (set, frozenset)):
            return self.types == frozenset(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.types, self.partial))


def categorize_claim(
    claim: ClaimRecord,
    ner: Callable[[str], Iterable[tuple[str, str]]] | None = None,
) -> CategorizeResult:
    """Assign category tags to a claim.

    ``ner``, when provided, maps text to ``(span, kind)`` pairs; kinds
    outside PERSON/ORGANIZATION/GPE/FACILITY are dropped. If the entity
    tagger raises, the result is computed without named-entity tags and
    flagged partial.
    """
    text = claim.text
    lowered = text.lower()
    words = re.findall(r"[\w'-]+", lowered)
    tags: set[ClaimTag] = set()

    if "?" in text or (words and words[0] in _interrogatives()):
        tags.add(ClaimTag("question"))

    if _NUMBER_RE.search(text) or any(w in _number_words() for w in words):
        tags.add(ClaimTag("numerical"))

    wordset = set(words)
    for tag, phrase in _media_keywords():
        if " " in phrase:
            if re.search(rf"\b{re.escape(phrase)}\b", lowered):
                tags.add(ClaimTag(tag))
        elif phrase in wordset:
            tags.add(ClaimTag(tag))

    partial = False
    if ner is not None:
        try:
            for _span, kind in ner(text):
                if kind in ENTITY_KINDS:
                    tags.add(ClaimTag("named_entity", kind))
        except Exception:
            partial = True

    return CategorizeResult(frozenset(tags), partial)
