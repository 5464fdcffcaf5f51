"""Bag-of-words corpus model and I/O.

A corpus is an ordered list of documents over a shared vocabulary of
integer word ids.  Documents are sparse: each stores the ids of the
distinct words it contains and their positive counts.  The on-disk
format is one document per line:

    U id:count id:count ...

where U is the number of distinct words on the line.  Word ids are
0-based.  An optional sidecar vocabulary file holds one label per line;
when present it fixes the vocabulary size, otherwise the size is
1 + max id seen.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError
from ._rng import make_rng

__all__ = [
    "Vocabulary",
    "Document",
    "Corpus",
    "load_corpus",
    "save_corpus",
    "load_vocabulary",
    "save_vocabulary",
    "split_holdout",
]


@dataclass
class Vocabulary:
    """Word id space, optionally with human-readable labels."""

    size: int
    labels: list[str] | None = None

    def __post_init__(self) -> None:
        if self.size < 0:
            raise DataError("vocabulary size must be >= 0")
        if self.labels is not None and len(self.labels) != self.size:
            raise DataError("label count does not match vocabulary size")

    def label(self, word_id: int) -> str:
        if self.labels is None:
            return str(word_id)
        return self.labels[word_id]


@dataclass(frozen=True)
class Document:
    """Sparse word counts of one document.

    `words` are strictly increasing ids, `counts` the parallel positive
    counts.  `length` is the token count L_d.
    """

    words: np.ndarray
    counts: np.ndarray

    def __post_init__(self) -> None:
        words = np.asarray(self.words, dtype=np.int64)
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "counts", counts)
        if words.shape != counts.shape or words.ndim != 1:
            raise DataError("words and counts must be parallel 1-d arrays")
        if words.size and np.any(np.diff(words) <= 0):
            raise DataError("word ids must be strictly increasing")
        if words.size and words[0] < 0:
            raise DataError("word ids must be non-negative")
        if np.any(counts <= 0):
            raise DataError("word counts must be positive")

    @property
    def n_unique(self) -> int:
        return int(self.words.size)

    @property
    def length(self) -> int:
        return int(self.counts.sum())

    @staticmethod
    def from_pairs(pairs: Iterable[tuple[int, int]]) -> "Document":
        items = sorted(pairs)
        if not items:
            return Document(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))
        words, counts = zip(*items)
        return Document(np.array(words, dtype=np.int64), np.array(counts, dtype=np.int64))


class Corpus:
    """Document list plus cached corpus-wide totals."""

    def __init__(self, docs: Sequence[Document], vocab: Vocabulary):
        self.docs = list(docs)
        self.vocab = vocab
        for i, doc in enumerate(self.docs):
            if doc.words.size and doc.words[-1] >= vocab.size:
                raise DataError(f"document {i} uses word id >= vocabulary size")
        self.doc_lengths = np.array([d.length for d in self.docs], dtype=np.int64)
        self.word_totals = np.zeros(vocab.size, dtype=np.int64)
        for doc in self.docs:
            self.word_totals[doc.words] += doc.counts
        self.total_tokens = int(self.doc_lengths.sum())
        self._entry_cache = None

    @property
    def n_docs(self) -> int:
        return len(self.docs)

    @property
    def n_words(self) -> int:
        return self.vocab.size

    @classmethod
    def from_counts(
        cls, rows: Sequence[dict[int, int] | Iterable[tuple[int, int]]], n_words: int | None = None
    ) -> "Corpus":
        """Build a corpus from per-document {word: count} mappings."""
        docs = []
        for row in rows:
            pairs = row.items() if isinstance(row, dict) else row
            docs.append(Document.from_pairs(pairs))
        if n_words is None:
            n_words = 1 + max((int(d.words[-1]) for d in docs if d.words.size), default=-1)
        return cls(docs, Vocabulary(n_words))

    def entry_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Flatten to (doc_idx, word_idx, counts, doc_offsets).

        doc_offsets has n_docs + 1 entries; document d owns the slice
        [doc_offsets[d], doc_offsets[d + 1]).  Computed once and cached;
        callers must not mutate the returned arrays.
        """
        if self._entry_cache is not None:
            return self._entry_cache
        offsets = np.zeros(self.n_docs + 1, dtype=np.int64)
        for i, doc in enumerate(self.docs):
            offsets[i + 1] = offsets[i] + doc.n_unique
        total = int(offsets[-1])
        doc_idx = np.empty(total, dtype=np.int64)
        word_idx = np.empty(total, dtype=np.int64)
        counts = np.empty(total, dtype=np.int64)
        for i, doc in enumerate(self.docs):
            sl = slice(offsets[i], offsets[i + 1])
            doc_idx[sl] = i
            word_idx[sl] = doc.words
            counts[sl] = doc.counts
        self._entry_cache = (doc_idx, word_idx, counts, offsets)
        return self._entry_cache


def _parse_line(line: str, lineno: int) -> Document:
    parts = line.split()
    try:
        n_unique = int(parts[0])
    except (ValueError, IndexError):
        raise DataError(f"line {lineno}: missing or non-integer unique-word count")
    pairs = []
    for tok in parts[1:]:
        try:
            word_s, count_s = tok.split(":")
            word, count = int(word_s), int(count_s)
        except ValueError:
            raise DataError(f"line {lineno}: malformed entry {tok!r}")
        if word < 0:
            raise DataError(f"line {lineno}: negative word id")
        if count <= 0:
            raise DataError(f"line {lineno}: non-positive count")
        pairs.append((word, count))
    if len(pairs) != n_unique:
        raise DataError(f"line {lineno}: declared {n_unique} entries, found {len(pairs)}")
    if len(set(w for w, _ in pairs)) != len(pairs):
        raise DataError(f"line {lineno}: duplicate word id")
    return Document.from_pairs(pairs)


def load_corpus(path: str, vocab_path: str | None = None) -> Corpus:
    """Read a corpus file, optionally with a sidecar vocabulary."""
    vocab = load_vocabulary(vocab_path) if vocab_path is not None else None
    docs = []
    with io.open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            docs.append(_parse_line(line, lineno))
    if vocab is None:
        size = 1 + max((int(d.words[-1]) for d in docs if d.words.size), default=-1)
        vocab = Vocabulary(size)
    return Corpus(docs, vocab)


def save_corpus(corpus: Corpus, path: str) -> None:
    """Write the canonical form: ids ascending, single spaces, LF ends."""
    with io.open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc in corpus.docs:
            entries = " ".join(f"{w}:{c}" for w, c in zip(doc.words, doc.counts))
            fh.write(f"{doc.n_unique} {entries}\n" if entries else f"{doc.n_unique}\n")


def load_vocabulary(path: str) -> Vocabulary:
    with io.open(path, "r", encoding="utf-8") as fh:
        labels = [line.rstrip("\n") for line in fh]
    return Vocabulary(len(labels), labels)


def save_vocabulary(vocab: Vocabulary, path: str) -> None:
    if vocab.labels is None:
        raise DataError("vocabulary has no labels to save")
    with io.open(path, "w", encoding="utf-8", newline="\n") as fh:
        for label in vocab.labels:
            fh.write(label + "\n")


def split_holdout(corpus: Corpus, fraction: float, seed: int) -> tuple[Corpus, Corpus]:
    """Split into (train, test) by a seeded shuffle of document indices.

    The test set is the first round(fraction * n_docs) documents of the
    shuffled order; both sides keep the original document order.
    """
    if not 0.0 <= fraction <= 1.0:
        raise DataError("holdout fraction must be in [0, 1]")
    n_docs = corpus.n_docs
    n_test = int(round(fraction * n_docs))
    perm = make_rng(seed).permutation(n_docs)
    test_ids = np.sort(perm[:n_test])
    train_ids = np.sort(perm[n_test:])
    train = Corpus([corpus.docs[i] for i in train_ids], corpus.vocab)
    test = Corpus([corpus.docs[i] for i in test_ids], corpus.vocab)
    return train, test
