import numpy as np
import pytest

from support import set_partitions
from topicatlas._rng import make_rng
from topicatlas.errors import ConfigError, DataError
from topicatlas.mapclust import (
    Partition,
    cluster,
    codelength,
    load_partition,
    save_partition,
)
from topicatlas.syngen import LanguageSpec, gen_language_corpus
from topicatlas.wordgraph import WordGraph, build_graph


def make_graph(edges, n_nodes=None):
    arr = np.array(edges, dtype=np.int64)
    n = n_nodes if n_nodes is not None else int(arr[:, :2].max()) + 1
    return WordGraph(n, arr[:, 0], arr[:, 1], arr[:, 2])


def two_cliques(bridge_weight=None, clique_weight=1):
    edges = []
    for base in (0, 3):
        for i in range(3):
            for j in range(i + 1, 3):
                edges.append((base + i, base + j, clique_weight))
    if bridge_weight:
        edges.append((2, 3, bridge_weight))
    return make_graph(edges, n_nodes=6)


def partition_for(graph, groups):
    active = graph.active_nodes()
    label_by_node = {}
    for cid, group in enumerate(groups):
        for node in group:
            label_by_node[node] = cid
    labels = np.array([label_by_node[int(n)] for n in active], dtype=np.int64)
    # densify in first-appearance order
    seen = {}
    dense = np.empty_like(labels)
    for i, lab in enumerate(labels):
        dense[i] = seen.setdefault(int(lab), len(seen))
    return Partition(active, dense)


def exhaustive_minimum(graph):
    active = [int(n) for n in graph.active_nodes()]
    best = np.inf
    best_groups = None
    for groups in set_partitions(active):
        value = codelength(graph, partition_for(graph, groups))
        if value < best:
            best = value
            best_groups = groups
    return best, best_groups


def groups_as_sets(partition):
    return {frozenset(int(x) for x in c) for c in partition.clusters()}


class TestCodelength:
    def test_single_module_is_visit_rate_entropy(self):
        graph = two_cliques()
        part = partition_for(graph, [list(range(6))])
        p = graph.strengths()[graph.active_nodes()] / (2 * graph.total_weight)
        entropy = float(-(p * np.log2(p)).sum())
        assert codelength(graph, part) == pytest.approx(entropy, abs=1e-12)

    def test_two_cliques_prefer_two_modules(self):
        graph = two_cliques()
        one = codelength(graph, partition_for(graph, [list(range(6))]))
        two = codelength(graph, partition_for(graph, [[0, 1, 2], [3, 4, 5]]))
        assert two < one
        assert one - two > 0.5

    def test_exhaustive_check_on_two_cliques(self):
        graph = two_cliques()
        best, groups = exhaustive_minimum(graph)
        assert {frozenset(g) for g in groups} == {
            frozenset({0, 1, 2}),
            frozenset({3, 4, 5}),
        }
        assert best == pytest.approx(
            codelength(graph, partition_for(graph, [[0, 1, 2], [3, 4, 5]]))
        )

    def test_rejects_empty_graph_and_bad_cover(self):
        empty = np.array([], dtype=np.int64)
        graph = WordGraph(4, empty, empty, empty)
        with pytest.raises(DataError):
            codelength(graph, Partition(empty, empty))
        graph = two_cliques()
        with pytest.raises(DataError):
            codelength(
                graph,
                Partition(np.array([0, 1, 2]), np.array([0, 0, 0])),
            )


class TestClusterSmall:
    def test_matches_exhaustive_on_random_graphs(self):
        rng = make_rng(4, stream=21)
        for case in range(25):
            n = int(rng.integers(3, 7))
            edges = []
            for i in range(n):
                for j in range(i + 1, n):
                    if rng.random() < 0.55:
                        edges.append((i, j, int(rng.integers(1, 5))))
            if not edges:
                continue
            graph = make_graph(edges, n_nodes=n)
            best, _ = exhaustive_minimum(graph)
            found = codelength(graph, cluster(graph, trials=10, seed=case))
            assert found <= best + 1e-9, f"case {case}: {found} > {best}"

    def test_weak_bridge_keeps_two_clusters(self):
        graph = two_cliques(bridge_weight=1, clique_weight=100)
        part = cluster(graph, trials=10, seed=0)
        assert groups_as_sets(part) == {
            frozenset({0, 1, 2}),
            frozenset({3, 4, 5}),
        }

    def test_never_worse_than_single_module(self):
        rng = make_rng(5, stream=22)
        for case in range(10):
            n = int(rng.integers(4, 9))
            edges = [
                (i, j, int(rng.integers(1, 4)))
                for i in range(n)
                for j in range(i + 1, n)
                if rng.random() < 0.4
            ]
            if not edges:
                continue
            graph = make_graph(edges, n_nodes=n)
            active = graph.active_nodes()
            single = codelength(graph, partition_for(graph, [active.tolist()]))
            found = codelength(graph, cluster(graph, trials=5, seed=case))
            assert found <= single + 1e-12

    def test_deterministic(self):
        graph = two_cliques(bridge_weight=1, clique_weight=3)
        a = cluster(graph, trials=4, seed=7)
        b = cluster(graph, trials=4, seed=7)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_trials_validated(self):
        with pytest.raises(ConfigError):
            cluster(two_cliques(), trials=0)

    def test_empty_graph_gives_empty_partition(self):
        empty = np.array([], dtype=np.int64)
        graph = WordGraph(3, empty, empty, empty)
        part = cluster(graph, trials=2)
        assert part.nodes.size == 0 and part.n_clusters == 0


class TestClusterCorpus:
    def test_language_components_recovered_exactly(self):
        spec = LanguageSpec(n_langs=10, n_docs=400, doc_length=40, words_per_lang=50)
        corpus, _ = gen_language_corpus(spec, seed=41)
        graph = build_graph(corpus, 0.05)
        part = cluster(graph, trials=10, seed=2)
        assert part.n_clusters == 10
        for group in part.clusters():
            blocks = {int(w) // 50 for w in group}
            assert len(blocks) == 1
        # every block contributes exactly one cluster
        owners = {int(group[0]) // 50 for group in part.clusters()}
        assert owners == set(range(10))

    def test_more_trials_never_hurt(self):
        spec = LanguageSpec(n_langs=4, n_docs=200, doc_length=30, words_per_lang=40)
        corpus, _ = gen_language_corpus(spec, seed=42)
        graph = build_graph(corpus, 0.05)
        one = codelength(graph, cluster(graph, trials=1, seed=3))
        ten = codelength(graph, cluster(graph, trials=10, seed=3))
        assert ten <= one + 1e-12


class TestPartitionIO:
    def test_roundtrip(self, tmp_path):
        graph = two_cliques()
        part = cluster(graph, trials=2, seed=1)
        path = tmp_path / "partition.txt"
        save_partition(part, str(path))
        back = load_partition(str(path))
        np.testing.assert_array_equal(back.nodes, part.nodes)
        np.testing.assert_array_equal(back.labels, part.labels)

    def test_dense_label_validation(self):
        with pytest.raises(DataError):
            Partition(np.array([0, 1]), np.array([0, 2]))

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("0 zero\n")
        with pytest.raises(DataError, match=":1:"):
            load_partition(str(path))
