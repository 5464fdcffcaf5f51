"""Shared oracles for the test suite (independent reference routes)."""

import numpy as np
from scipy.special import gammaln

from topicatlas.corpus import Corpus, Document, Vocabulary


def poisson_pmf_grid(mean: float, hi: int) -> np.ndarray:
    """pmf values for k = 0..hi via logs (safe for large means)."""
    k = np.arange(hi + 1, dtype=float)
    if mean == 0.0:
        out = np.zeros(hi + 1)
        out[0] = 1.0
        return out
    return np.exp(-mean + k * np.log(mean) - gammaln(k + 1.0))


def poisson_quantile_by_summation(mean: float, p: float) -> int:
    """Largest x with P(X >= x) > p, by direct pmf summation."""
    if mean == 0.0:
        return 0
    hi = int(np.ceil(mean + 12.0 * np.sqrt(mean) + 60.0))
    pmf = poisson_pmf_grid(mean, hi)
    cdf = np.cumsum(pmf)
    x = 0
    while x + 1 <= hi and 1.0 - cdf[x] > p:  # tail(x+1) = 1 - cdf(x)
        x += 1
    return x


def shuffled_pair_cooccurrence(
    s_a: int, s_b: int, doc_lengths: np.ndarray, rng: np.random.Generator
) -> int:
    """Co-occurrence of two marked words under random token placement.

    Places s_a + s_b tokens on distinct slots of the concatenated
    documents (uniformly over slot subsets, via whole-sample rejection)
    and returns sum_d count_a(d) * count_b(d).
    """
    boundaries = np.cumsum(doc_lengths)
    total = int(boundaries[-1])
    m = s_a + s_b
    while True:
        slots = rng.integers(0, total, size=m)
        if np.unique(slots).size == m:
            break
    docs = np.searchsorted(boundaries, slots, side="right")
    n_docs = doc_lengths.size
    ca = np.bincount(docs[:s_a], minlength=n_docs)
    cb = np.bincount(docs[s_a:], minlength=n_docs)
    return int(np.dot(ca, cb))


def corpus_from_dense(rows: np.ndarray) -> Corpus:
    """Corpus from a dense (docs x words) count matrix."""
    rows = np.asarray(rows)
    docs = []
    for row in rows:
        ids = np.nonzero(row)[0]
        docs.append(Document(ids, row[ids]))
    return Corpus(docs, Vocabulary(rows.shape[1]))


def shuffled_corpus(word_totals: np.ndarray, doc_lengths: np.ndarray, rng) -> Corpus:
    """Distribute a fixed token multiset uniformly over document slots."""
    tokens = np.repeat(np.arange(word_totals.size), word_totals)
    assert tokens.size == int(np.sum(doc_lengths))
    rng.shuffle(tokens)
    docs = []
    start = 0
    for length in doc_lengths:
        chunk = tokens[start : start + int(length)]
        start += int(length)
        ids, counts = np.unique(chunk, return_counts=True)
        docs.append(Document(ids, counts))
    return Corpus(docs, Vocabulary(word_totals.size))


def set_partitions(items: list):
    """All set partitions of a list (Bell-number enumeration)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for sub in set_partitions(rest):
        for i in range(len(sub)):
            yield sub[:i] + [[first] + sub[i]] + sub[i + 1 :]
        yield [[first]] + sub
