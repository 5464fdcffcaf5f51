"""Hard clustering of the word graph by two-level map-equation descent.

The objective is the expected per-step description length (in bits) of
an unrecorded random walk on the weighted undirected graph under a
two-level index code: one codebook for jumps between modules plus one
codebook per module.  Node visit rates are proportional to strength,
module exit rates to boundary weight.  Optimization is the usual greedy
scheme: start from singletons, sweep nodes in seeded random order
moving each to the neighboring module that most lowers the codelength
(strict improvements only), then aggregate modules into supernodes and
repeat until no aggregation is possible.  Several independent trials
run with separate RNG streams and the best codelength wins, earliest
trial breaking ties.

Moves only target modules that contain a neighbor, so disconnected
components are never merged and effectively cluster independently.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from ._rng import make_rng, DEFAULT_SEED
from .errors import ConfigError, DataError
from .wordgraph import WordGraph

__all__ = ["Partition", "codelength", "cluster", "save_partition", "load_partition"]

_IMPROVE_EPS = 1e-10
_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class Partition:
    """Cluster assignment over an explicit node list.

    nodes: sorted node ids covered by the partition.
    labels: dense cluster ids (0..C-1), aligned with nodes.
    """

    nodes: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if self.nodes.shape != self.labels.shape:
            raise DataError("nodes and labels must align")
        if self.nodes.size and np.any(np.diff(self.nodes) <= 0):
            raise DataError("nodes must be strictly increasing")
        if self.labels.size:
            present = np.unique(self.labels)
            if present[0] != 0 or present[-1] != present.size - 1:
                raise DataError("cluster ids must be dense 0..C-1")

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def clusters(self) -> list[np.ndarray]:
        return [self.nodes[self.labels == c] for c in range(self.n_clusters)]

    def label_of(self) -> dict[int, int]:
        return {int(n): int(c) for n, c in zip(self.nodes, self.labels)}


def _plogp_over(x: np.ndarray | float, two_w: float):
    """x/2W * log2(x/2W), elementwise, 0 at x=0."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0.0
    ratio = x[pos] / two_w
    out[pos] = ratio * np.log2(ratio)
    return out if out.ndim else float(out)


def codelength(graph: WordGraph, partition: Partition) -> float:
    """Two-level map-equation value of a partition, in bits."""
    if graph.n_edges == 0:
        raise DataError("codelength needs a graph with at least one edge")
    active = graph.active_nodes()
    if active.size != partition.nodes.size or np.any(active != partition.nodes):
        raise DataError("partition must cover exactly the non-isolated nodes")
    two_w = 2.0 * graph.total_weight
    strengths = graph.strengths()
    label_by_node = np.full(graph.n_nodes, -1, dtype=np.int64)
    label_by_node[partition.nodes] = partition.labels
    n_mod = partition.n_clusters
    s_mod = np.zeros(n_mod)
    np.add.at(s_mod, partition.labels, strengths[partition.nodes])
    cut = np.zeros(n_mod)
    la, lb = label_by_node[graph.edge_a], label_by_node[graph.edge_b]
    crossing = la != lb
    np.add.at(cut, la[crossing], graph.edge_w[crossing])
    np.add.at(cut, lb[crossing], graph.edge_w[crossing])
    return float(
        _plogp_over(np.array([cut.sum()]), two_w).sum()
        - 2.0 * _plogp_over(cut, two_w).sum()
        + _plogp_over(cut + s_mod, two_w).sum()
        - _plogp_over(strengths[partition.nodes], two_w).sum()
    )


class _Level:
    """Mutable graph view used during optimization (allows self-loops)."""

    def __init__(self, n, indptr, indices, weights, selfw):
        self.n = n
        self.indptr = indptr
        self.indices = indices
        self.weights = weights
        self.selfw = selfw  # per-node self-loop weight (counted twice in strength)
        self.strength = np.zeros(n)
        if n:
            row_of = np.repeat(np.arange(n), np.diff(indptr))
            np.add.at(self.strength, row_of, weights)
            self.strength += 2.0 * selfw

    @classmethod
    def from_graph(cls, graph: WordGraph, node_index: np.ndarray):
        a = node_index[graph.edge_a]
        b = node_index[graph.edge_b]
        n = int(node_index.max()) + 1 if node_index.size else 0
        rows = np.concatenate([a, b])
        cols = np.concatenate([b, a])
        wts = np.concatenate([graph.edge_w, graph.edge_w]).astype(float)
        order = np.lexsort((cols, rows))
        rows, cols, wts = rows[order], cols[order], wts[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(n, indptr, cols, wts, np.zeros(n))

    def aggregate(self, labels: np.ndarray) -> "_Level":
        n_mod = int(labels.max()) + 1
        selfw = np.zeros(n_mod)
        np.add.at(selfw, labels, self.selfw)
        la = labels[np.repeat(np.arange(self.n), np.diff(self.indptr))]
        lb = labels[self.indices]
        internal = la == lb
        # each internal undirected edge appears twice in the csr
        np.add.at(selfw, la[internal], 0.5 * self.weights[internal])
        ca, cb, cw = la[~internal], lb[~internal], self.weights[~internal]
        order = np.lexsort((cb, ca))
        ca, cb, cw = ca[order], cb[order], cw[order]
        # collapse duplicate (module, module) pairs
        if ca.size:
            key_change = np.empty(ca.size, dtype=bool)
            key_change[0] = True
            key_change[1:] = (ca[1:] != ca[:-1]) | (cb[1:] != cb[:-1])
            starts = np.nonzero(key_change)[0]
            sums = np.add.reduceat(cw, starts)
            ca, cb, cw = ca[starts], cb[starts], sums
        indptr = np.zeros(n_mod + 1, dtype=np.int64)
        np.add.at(indptr, ca + 1, 1)
        np.cumsum(indptr, out=indptr)
        return _Level(n_mod, indptr, cb, cw, selfw)


def _local_moves(level: _Level, rng: np.random.Generator, two_w: float) -> np.ndarray:
    """Greedy node sweeps; returns dense module labels."""
    n = level.n
    module_of = np.arange(n)
    s_mod = level.strength.copy()
    cut = level.strength - 2.0 * level.selfw  # singleton cut = external strength
    cut_total = cut.sum()
    log2_2w = math.log2(two_w)

    def f(x):
        # x*log2(x/2W) on scalars/arrays with f(0)=0
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        pos = x > 0.0
        out[pos] = x[pos] * (np.log2(x[pos]) - log2_2w)
        return out

    active = np.ones(n, dtype=bool)
    for _ in range(200):
        moved_any = False
        order = rng.permutation(n)
        next_active = np.zeros(n, dtype=bool)
        for i in order:
            if not active[i]:
                continue
            sl = slice(level.indptr[i], level.indptr[i + 1])
            nbr = level.indices[sl]
            if nbr.size == 0:
                continue
            wts = level.weights[sl]
            home = module_of[i]
            mods = module_of[nbr]
            uniq, inv = np.unique(mods, return_inverse=True)
            link = np.bincount(inv, weights=wts, minlength=uniq.size)
            home_pos = np.searchsorted(uniq, home)
            w_home = (
                link[home_pos] if home_pos < uniq.size and uniq[home_pos] == home else 0.0
            )
            cand = uniq != home
            if not cand.any():
                continue
            targets = uniq[cand]
            w_target = link[cand]
            k = level.strength[i]
            ext = k - 2.0 * level.selfw[i]
            cut_home_new = cut[home] - ext + 2.0 * w_home
            s_home_new = s_mod[home] - k
            cut_t_new = cut[targets] + ext - 2.0 * w_target
            s_t_new = s_mod[targets] + k
            d_total = (cut_home_new - cut[home]) + (cut_t_new - cut[targets])
            delta = (
                f(cut_total + d_total)
                - f(cut_total)
                - 2.0 * (f(cut_home_new) - f(cut[home]))
                - 2.0 * (f(cut_t_new) - f(cut[targets]))
                + (f(cut_home_new + s_home_new) - f(cut[home] + s_mod[home]))
                + (f(cut_t_new + s_t_new) - f(cut[targets] + s_mod[targets]))
            ) / two_w
            best = int(np.argmin(delta))
            if delta[best] < -_IMPROVE_EPS:
                target = int(targets[best])
                cut_total += float(d_total[best])
                cut[home] = cut_home_new
                s_mod[home] = s_home_new
                cut[target] = float(cut_t_new[best])
                s_mod[target] = float(s_t_new[best])
                module_of[i] = target
                moved_any = True
                next_active[nbr] = True
                next_active[i] = True
        if not moved_any:
            break
        active = next_active
    # dense relabel in first-appearance order
    uniq, dense = np.unique(module_of, return_inverse=True)
    return dense


def _optimize(level: _Level, rng: np.random.Generator, two_w: float) -> np.ndarray:
    node_map = np.arange(level.n)
    current = level
    while True:
        labels = _local_moves(current, rng, two_w)
        n_mod = int(labels.max()) + 1 if labels.size else 0
        if n_mod == current.n:
            break
        node_map = labels[node_map]
        current = current.aggregate(labels)
    return node_map


def cluster(graph: WordGraph, trials: int = 10, seed: int = DEFAULT_SEED) -> Partition:
    """Best partition over seeded optimization trials."""
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    active = graph.active_nodes()
    if active.size == 0:
        empty = np.array([], dtype=np.int64)
        return Partition(empty, empty)
    node_index = np.full(graph.n_nodes, -1, dtype=np.int64)
    node_index[active] = np.arange(active.size)
    level = _Level.from_graph(graph, node_index)
    two_w = 2.0 * graph.total_weight
    best_labels = None
    best_value = math.inf
    for trial in range(trials):
        rng = make_rng(seed, stream=trial)
        labels = _optimize(level, rng, two_w)
        value = codelength(graph, _as_partition(active, labels))
        if value < best_value - 1e-12:
            best_value = value
            best_labels = labels
    return _as_partition(active, best_labels)


def _as_partition(active: np.ndarray, labels: np.ndarray) -> Partition:
    # dense ids ordered by first appearance along ascending node id
    uniq, first_pos = np.unique(labels, return_index=True)
    order = np.argsort(first_pos, kind="stable")
    remap = np.empty(uniq.size, dtype=np.int64)
    remap[order] = np.arange(uniq.size)
    dense = remap[np.searchsorted(uniq, labels)]
    return Partition(active.copy(), dense)


def save_partition(partition: Partition, path: str) -> None:
    with io.open(path, "w", encoding="utf-8", newline="\n") as fh:
        for node, label in zip(partition.nodes, partition.labels):
            fh.write(f"{node} {label}\n")


def load_partition(path: str) -> Partition:
    nodes, labels = [], []
    with io.open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            try:
                nodes.append(int(parts[0]))
                labels.append(int(parts[1]))
            except (ValueError, IndexError):
                raise DataError(f"{path}:{lineno}: malformed partition line")
    order = np.argsort(nodes)
    return Partition(
        np.array(nodes, dtype=np.int64)[order], np.array(labels, dtype=np.int64)[order]
    )
