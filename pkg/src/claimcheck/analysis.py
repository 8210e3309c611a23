"""Text analysis shared by indexing, retrieval and evidence selection.

The analyzer chain is deliberately small: word tokenization on ``\\w+``
runs, lowercasing, stopword removal from a versioned word list, and an
optional English "s"-stemmer. Both sides of every retrieval operation
(index build and query analysis) must use the same configuration; the
configuration identity string is stored in persisted indexes so loaders
can detect a mismatch.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

_WORD_RE = re.compile(r"\w+", re.UNICODE)


def _read_wordlist(name: str) -> tuple[str, frozenset[str]]:
    """Load a bundled word list; returns (version tag, entries)."""
    text = resources.files("claimcheck.data").joinpath(name).read_text("utf-8")
    version = "v0"
    words = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            tail = line.lstrip("#").strip()
            if tail:
                version = tail.split()[-1]
            continue
        words.append(line)
    return version, frozenset(words)


@lru_cache(maxsize=None)
def default_stopwords() -> frozenset[str]:
    return _read_wordlist("stopwords_en.txt")[1]


def _s_stem(token: str) -> str:
    """English "s"-stemmer: ies->y, drop trailing s of -es/-s with the
    usual aes/ees/oes/us/ss exceptions."""
    if len(token) > 3 and token.endswith("ies") and not token.endswith(("eies", "aies")):
        return token[:-3] + "y"
    if len(token) > 2 and token.endswith("es") and not token.endswith(("aes", "ees", "oes")):
        return token[:-1]
    if len(token) > 2 and token.endswith("s") and not token.endswith(("us", "ss")):
        return token[:-1]
    return token


@dataclass(frozen=True)
class AnalyzerConfig:
    lowercase: bool = True
    stopword_list: str = "en-v1"  # "none" disables stopword removal
    stem: bool = False
    token_rule: str = "word"

    @property
    def identity(self) -> str:
        return "|".join(
            [
                self.token_rule,
                "lower" if self.lowercase else "case",
                f"stop:{self.stopword_list}",
                "stem:s" if self.stem else "stem:off",
            ]
        )


class Analyzer:
    """Turns raw text into index/query terms."""

    def __init__(self, config: AnalyzerConfig | None = None):
        self.config = config or AnalyzerConfig()
        if self.config.token_rule != "word":
            raise ValueError(f"unknown token rule {self.config.token_rule!r}")
        if self.config.stopword_list == "none":
            self._stopwords: frozenset[str] = frozenset()
        elif self.config.stopword_list == "en-v1":
            self._stopwords = default_stopwords()
        else:
            raise ValueError(f"unknown stopword list {self.config.stopword_list!r}")

    @property
    def identity(self) -> str:
        return self.config.identity

    def raw_tokens(self, text: str) -> list[str]:
        """Tokenize without stopword removal or stemming (casing still applied)."""
        tokens = _WORD_RE.findall(text)
        if self.config.lowercase:
            tokens = [t.lower() for t in tokens]
        return tokens

    def tokens(self, text: str) -> list[str]:
        """Full analysis chain; the terms BM25 sees."""
        out = []
        for tok in self.raw_tokens(text):
            if tok in self._stopwords:
                continue
            if self.config.stem:
                tok = _s_stem(tok)
            out.append(tok)
        return out

    def is_stopword(self, term: str) -> bool:
        return term in self._stopwords


def analyzer_from_identity(identity: str) -> Analyzer:
    """Rebuild an analyzer from its identity string (used by index loaders)."""
    parts = identity.split("|")
    if len(parts) != 4:
        raise ValueError(f"bad analyzer identity {identity!r}")
    rule, casing, stop, stem = parts
    return Analyzer(
        AnalyzerConfig(
            lowercase=(casing == "lower"),
            stopword_list=stop.removeprefix("stop:"),
            stem=(stem == "stem:s"),
            token_rule=rule,
        )
    )


def whitespace_tokens(text: str) -> list[str]:
    """Plain whitespace tokenization, the default paragraph segmentation unit."""
    return text.split()
