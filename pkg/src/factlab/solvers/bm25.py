"""BM25 retrieval over a local JSON-lines corpus.

Scoring uses k1=1.5, b=0.75 and the non-negative idf variant
``log(1 + (N - df + 0.5) / (df + 0.5))``, so every score is >= 0 and
zero-overlap documents simply never enter the candidate set. Query tokens
are scored per occurrence, so repeated terms count repeatedly.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from ..errors import ManifestSchemaError

_TOKEN = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


@dataclass(frozen=True)
class CorpusDoc:
    id: str
    title: str
    text: str


def load_corpus(path) -> list[CorpusDoc]:
    """Read a JSON-lines corpus with ``id``, ``title`` and ``text`` fields."""
    docs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                docs.append(
                    CorpusDoc(
                        id=str(record["id"]),
                        title=str(record["title"]),
                        text=str(record["text"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ManifestSchemaError(
                    f"{path}:{lineno}: bad corpus record: {exc}"
                ) from exc
    return docs


class Bm25Index:
    """Inverted-index BM25 scorer over document passages."""

    def __init__(self, docs: list[CorpusDoc], k1: float = 1.5, b: float = 0.75):
        self.docs = list(docs)
        self.k1 = k1
        self.b = b
        self.doc_lens = []
        self.postings: dict[str, list[tuple[int, int]]] = {}
        for idx, doc in enumerate(self.docs):
            tokens = tokenize(doc.text)
            self.doc_lens.append(len(tokens))
            for term, tf in Counter(tokens).items():
                self.postings.setdefault(term, []).append((idx, tf))
        n = len(self.docs)
        self.avgdl = (sum(self.doc_lens) / n) if n else 0.0
        self.idf = {
            term: math.log(1.0 + (n - len(posting) + 0.5) / (len(posting) + 0.5))
            for term, posting in self.postings.items()
        }

    def search(self, query: str, top_k: int) -> list[tuple[CorpusDoc, float]]:
        """Top-k docs by BM25, ties broken by ascending doc id.

        Documents sharing no term with the query are omitted entirely, so a
        zero-overlap query returns an empty list.
        """
        if top_k < 1:
            raise ValueError("top_k must be >= 1")
        if not self.docs:
            return []
        scores: dict[int, float] = {}
        for term in tokenize(query):
            posting = self.postings.get(term)
            if not posting:
                continue
            idf = self.idf[term]
            for idx, tf in posting:
                norm = self.k1 * (
                    1.0 - self.b + self.b * self.doc_lens[idx] / self.avgdl
                )
                scores[idx] = scores.get(idx, 0.0) + idf * (
                    tf * (self.k1 + 1.0) / (tf + norm)
                )
        ranked = sorted(
            ((idx, score) for idx, score in scores.items() if score > 0.0),
            key=lambda pair: (-pair[1], self.docs[pair[0]].id),
        )
        return [(self.docs[idx], score) for idx, score in ranked[:top_k]]


_INDEX_CACHE: dict[tuple[str, float, float, float], Bm25Index] = {}


def index_for_corpus(path, k1: float = 1.5, b: float = 0.75) -> Bm25Index:
    """Build (or reuse) the immutable index for a corpus file.

    Keyed by path, mtime and parameters; safe to share across concurrent
    pipeline runs since the index is read-only after construction.
    """
    resolved = str(Path(path).resolve())
    mtime = Path(resolved).stat().st_mtime
    key = (resolved, mtime, k1, b)
    index = _INDEX_CACHE.get(key)
    if index is None:
        index = Bm25Index(load_corpus(resolved), k1=k1, b=b)
        _INDEX_CACHE[key] = index
    return index
