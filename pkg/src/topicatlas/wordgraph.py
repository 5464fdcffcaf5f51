"""Significance-filtered word co-occurrence graph.

Two words are linked when their dot-product co-occurrence across
documents exceeds what a null model of token placement would produce.
The null mean for a pair with total counts s_a, s_b is
(s_a s_b / L_C^2) sum_d L_d^2, co-occurrence counts are compared
against a Poisson with that mean, and the edge keeps the excess over
the largest non-significant value at the chosen p-value.  Words whose
every pair fails the test come out isolated.

The Poisson upper tail is evaluated exactly through the regularized
incomplete gamma function P(X >= x) = gammainc(x, mean), valid at any
mean, so no normal approximation is involved at any scale.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.special import gammainc

from .corpus import Corpus
from .errors import ConfigError, DataError

__all__ = [
    "WordGraph",
    "dot_product_sim",
    "null_mean",
    "poisson_quantile",
    "build_graph",
    "save_graph",
    "load_graph",
]

DEFAULT_P_VALUE = 0.05


@dataclass(frozen=True)
class WordGraph:
    """Undirected weighted graph over vocabulary indices.

    Edges are stored once with edge_a < edge_b; weights are positive
    integers (stored as int64).  `isolated` lists every word with no
    surviving edge, including words absent from the corpus.
    """

    n_nodes: int
    edge_a: np.ndarray
    edge_b: np.ndarray
    edge_w: np.ndarray
    isolated: np.ndarray = field(default=None)

    def __post_init__(self):
        if np.any(self.edge_a >= self.edge_b):
            raise DataError("edges must satisfy a < b (no self-loops)")
        if np.any(self.edge_w <= 0):
            raise DataError("edge weights must be positive")
        if self.isolated is None:
            present = np.zeros(self.n_nodes, dtype=bool)
            present[self.edge_a] = True
            present[self.edge_b] = True
            object.__setattr__(self, "isolated", np.nonzero(~present)[0])

    @property
    def n_edges(self) -> int:
        return self.edge_a.size

    @property
    def total_weight(self) -> float:
        return float(self.edge_w.sum())

    def active_nodes(self) -> np.ndarray:
        """Sorted ids of nodes with at least one edge."""
        return np.setdiff1d(np.arange(self.n_nodes), self.isolated, assume_unique=True)

    def strengths(self) -> np.ndarray:
        """Per-node total incident weight (length n_nodes)."""
        s = np.zeros(self.n_nodes)
        np.add.at(s, self.edge_a, self.edge_w)
        np.add.at(s, self.edge_b, self.edge_w)
        return s

    def neighbor_csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Symmetric adjacency as (indptr, indices, weights) over all nodes."""
        rows = np.concatenate([self.edge_a, self.edge_b])
        cols = np.concatenate([self.edge_b, self.edge_a])
        wts = np.concatenate([self.edge_w, self.edge_w])
        order = np.lexsort((cols, rows))
        rows, cols, wts = rows[order], cols[order], wts[order]
        indptr = np.zeros(self.n_nodes + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        np.cumsum(indptr, out=indptr)
        return indptr, cols, wts


def dot_product_sim(corpus: Corpus, a: int, b: int) -> int:
    """Co-occurrence count z_ab = sum_d (count of a) * (count of b)."""
    if a == b:
        raise ConfigError("dot-product similarity needs two distinct words")
    total = 0
    for doc in corpus.docs:
        ia = np.searchsorted(doc.words, a)
        ib = np.searchsorted(doc.words, b)
        if (
            ia < doc.words.size
            and ib < doc.words.size
            and doc.words[ia] == a
            and doc.words[ib] == b
        ):
            total += int(doc.counts[ia]) * int(doc.counts[ib])
    return total


def null_mean(corpus: Corpus, s_a: int, s_b: int) -> float:
    """Expected co-occurrence for totals s_a, s_b under random placement."""
    lengths = corpus.doc_lengths.astype(float)
    total = lengths.sum()
    return float(s_a) * float(s_b) * float(np.dot(lengths, lengths)) / (total * total)


def _tail(x: np.ndarray, mean: np.ndarray) -> np.ndarray:
    """Poisson upper tail P(X >= x) for integer x >= 0, exactly."""
    out = np.ones_like(np.broadcast_arrays(x, mean)[0], dtype=float)
    pos = x > 0
    out[pos] = gammainc(np.broadcast_to(x, out.shape)[pos], np.broadcast_to(mean, out.shape)[pos])
    return out


def _quantile_vec(means: np.ndarray, p: float) -> np.ndarray:
    """Vectorized largest x with P(X >= x) > p, per mean."""
    means = np.asarray(means, dtype=float)
    lo = np.zeros(means.shape, dtype=np.int64)  # tail(lo) > p always
    hi = np.ceil(means + 10.0 * np.sqrt(means) + 30.0).astype(np.int64)
    for _ in range(64):
        bad = _tail(hi, means) > p
        if not bad.any():
            break
        hi[bad] *= 2
    while np.any(hi - lo > 1):
        mid = (lo + hi) // 2
        above = _tail(mid, means) > p
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return lo


def poisson_quantile(mean: float, p: float) -> int:
    """Largest count whose Poisson upper tail still exceeds p."""
    if not 0.0 < p < 1.0:
        raise ConfigError("p must lie strictly between 0 and 1")
    if mean < 0.0:
        raise ConfigError("mean must be nonnegative")
    if mean == 0.0:
        return 0
    return int(_quantile_vec(np.array([mean]), p)[0])


def build_graph(corpus: Corpus, p_value: float = DEFAULT_P_VALUE, progress_sink=None) -> WordGraph:
    """Assemble the significance-filtered co-occurrence graph.

    Every word pair sharing at least one document is tested; the edge
    weight is the co-occurrence count minus the largest non-significant
    count for that pair's totals, kept only when positive.
    """
    if not 0.0 < p_value < 1.0:
        raise ConfigError("p_value must lie strictly between 0 and 1")

    def report(msg: str):
        if progress_sink is not None:
            progress_sink(msg)

    n_words = corpus.n_words
    doc_idx, word_idx, counts, _ = corpus.entry_arrays()
    report("accumulating co-occurrence counts")
    x = sparse.csr_matrix(
        (counts, (doc_idx, word_idx)), shape=(corpus.n_docs, n_words), dtype=np.int64
    )
    z = sparse.triu(x.T @ x, k=1).tocoo()
    a, b, zw = z.row.astype(np.int64), z.col.astype(np.int64), z.data.astype(np.int64)

    report("computing significance thresholds")
    lengths = corpus.doc_lengths.astype(float)
    total = lengths.sum()
    factor = float(np.dot(lengths, lengths)) / (total * total)
    strengths = corpus.word_totals
    products = strengths[a] * strengths[b]
    unique_products, inverse = np.unique(products, return_inverse=True)
    thresholds = _quantile_vec(unique_products * factor, p_value)[inverse]

    report("filtering edges")
    keep = zw > thresholds
    graph = WordGraph(
        n_nodes=n_words,
        edge_a=a[keep],
        edge_b=b[keep],
        edge_w=(zw - thresholds)[keep],
    )
    report(f"kept {graph.n_edges} edges, {graph.isolated.size} isolated words")
    return graph


def save_graph(graph: WordGraph, path: str) -> None:
    """Dump as a text edge list plus isolated nodes."""
    with io.open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"nodes {graph.n_nodes}\n")
        for a, b, w in zip(graph.edge_a, graph.edge_b, graph.edge_w):
            fh.write(f"{a} {b} {w}\n")
        for i in graph.isolated:
            fh.write(f"isolated {i}\n")


def load_graph(path: str) -> WordGraph:
    n_nodes = None
    edges = []
    isolated = []
    with io.open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            try:
                if parts[0] == "nodes":
                    n_nodes = int(parts[1])
                elif parts[0] == "isolated":
                    isolated.append(int(parts[1]))
                else:
                    a, b, w = int(parts[0]), int(parts[1]), int(parts[2])
                    edges.append((a, b, w))
            except (ValueError, IndexError):
                raise DataError(f"{path}:{lineno}: malformed graph line")
    if n_nodes is None:
        raise DataError(f"{path}: missing 'nodes' header")
    arr = np.array(edges, dtype=np.int64).reshape(-1, 3)
    return WordGraph(
        n_nodes=n_nodes,
        edge_a=arr[:, 0],
        edge_b=arr[:, 1],
        edge_w=arr[:, 2],
        isolated=np.array(sorted(isolated), dtype=np.int64),
    )
