"""Legal reference corpus: loading, indexing, and BM25 retrieval.

Passages are stored whole — a retrieval result always refers to a complete
passage, never a fragment. Retrieval is a pure function of
(query, corpus, k): BM25 with k1=1.2, b=0.75 over lowercased,
punctuation-stripped tokens, ties broken by ascending passage id.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DuplicatePassageId, EmptyQuery, MalformedCorpus

PASSAGE_KINDS = ("statute", "regulation", "consideration", "caselaw", "example")

BM25_K1 = 1.2
BM25_B = 0.75

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase, strip punctuation, split on whitespace. No stemming."""
    return [t.lower() for t in _TOKEN_RE.findall(text)]


@dataclass(frozen=True)
class Passage:
    id: str
    kind: str
    citation: str
    title: str
    text: str
    source_doc: str

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "citation": self.citation,
            "title": self.title,
            "text": self.text,
            "source_doc": self.source_doc,
        }


@dataclass(frozen=True)
class RetrievalResult:
    passage_id: str
    score: float
    rank: int


_REQUIRED_FIELDS = ("id", "kind", "citation", "title", "text", "source_doc")


def _parse_passage(obj: dict, *, file: str, position: int) -> Passage:
    if not isinstance(obj, dict):
        raise MalformedCorpus("passage entry is not an object", file=file, position=position)
    unknown = set(obj) - set(_REQUIRED_FIELDS)
    if unknown:
        raise MalformedCorpus(
            f"unknown fields {sorted(unknown)}", file=file, position=position
        )
    for name in _REQUIRED_FIELDS:
        if name not in obj:
            raise MalformedCorpus(f"missing field {name!r}", file=file, position=position)
        if not isinstance(obj[name], str):
            raise MalformedCorpus(f"field {name!r} is not a string", file=file, position=position)
    if obj["kind"] not in PASSAGE_KINDS:
        raise MalformedCorpus(
            f"kind {obj['kind']!r} not one of {PASSAGE_KINDS}", file=file, position=position
        )
    if not obj["text"]:
        raise MalformedCorpus("empty passage text", file=file, position=position)
    if not obj["id"]:
        raise MalformedCorpus("empty passage id", file=file, position=position)
    return Passage(**obj)


class Corpus:
    """Immutable passage store with an inverted lexical index.

    Safe for concurrent reads after construction.
    """

    def __init__(self, passages: list[Passage]):
        self._passages: list[Passage] = list(passages)
        self._by_id: dict[str, Passage] = {}
        for p in self._passages:
            if p.id in self._by_id:
                raise DuplicatePassageId(p.id)
            self._by_id[p.id] = p
        # term -> {passage_id: term frequency}
        self._index: dict[str, dict[str, int]] = {}
        self._doc_len: dict[str, int] = {}
        for p in self._passages:
            toks = tokenize(p.text) + tokenize(p.title)
            self._doc_len[p.id] = len(toks)
            for term, tf in Counter(toks).items():
                self._index.setdefault(term, {})[p.id] = tf
        n = len(self._passages)
        self._avg_len = (sum(self._doc_len.values()) / n) if n else 0.0

    def __len__(self) -> int:
        return len(self._passages)

    @property
    def passages(self) -> list[Passage]:
        return list(self._passages)

    def get(self, passage_id: str) -> Passage:
        return self._by_id[passage_id]

    def __contains__(self, passage_id: str) -> bool:
        return passage_id in self._by_id

    def index_snapshot(self) -> dict[str, dict[str, int]]:
        """Deep copy of the inverted index, for consistency checks."""
        return {t: dict(m) for t, m in self._index.items()}

    def score(self, query_tokens: list[str], passage_id: str) -> float:
        """BM25 score of one passage against pre-tokenized query terms."""
        n = len(self._passages)
        dl = self._doc_len[passage_id]
        s = 0.0
        for term in query_tokens:
            postings = self._index.get(term)
            if not postings or passage_id not in postings:
                continue
            tf = postings[passage_id]
            df = len(postings)
            idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
            denom = tf + BM25_K1 * (1.0 - BM25_B + BM25_B * dl / self._avg_len)
            s += idf * tf * (BM25_K1 + 1.0) / denom
        return s


def load_corpus(path: str | Path) -> Corpus:
    """Load a corpus from a JSON file or a directory of JSON files.

    Directory files are read in sorted name order; within a file, passage
    order is preserved. Strict mode: unknown fields are rejected.
    """
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix == ".json")
    else:
        files = [path]
    passages: list[Passage] = []
    for f in files:
        try:
            data = json.loads(f.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise MalformedCorpus(f"cannot read corpus file: {exc}", file=str(f))
        if not isinstance(data, list):
            raise MalformedCorpus("top-level value is not an array", file=str(f))
        for i, obj in enumerate(data):
            passages.append(_parse_passage(obj, file=str(f), position=i))
    return Corpus(passages)


def retrieve(query_text: str, corpus: Corpus, k: int = 8) -> list[RetrievalResult]:
    """Top-k passages by BM25; deterministic, ties broken by ascending id."""
    if not query_text.strip():
        raise EmptyQuery("query text is empty")
    if k < 1:
        raise ValueError("k must be >= 1")
    qtoks = tokenize(query_text)
    scored = [(corpus.score(qtoks, p.id), p.id) for p in corpus.passages]
    scored.sort(key=lambda t: (-t[0], t[1]))
    return [
        RetrievalResult(passage_id=pid, score=s, rank=i + 1)
        for i, (s, pid) in enumerate(scored[: min(k, len(corpus))])
    ]
