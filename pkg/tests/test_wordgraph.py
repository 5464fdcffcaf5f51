import numpy as np
import pytest

from support import (
    poisson_pmf_grid,
    poisson_quantile_by_summation,
    shuffled_corpus,
    shuffled_pair_cooccurrence,
)
from topicatlas._rng import make_rng
from topicatlas.corpus import Corpus, Document, Vocabulary
from topicatlas.errors import ConfigError, DataError
from topicatlas.syngen import LanguageSpec, gen_language_corpus
from topicatlas.wordgraph import (
    WordGraph,
    build_graph,
    dot_product_sim,
    load_graph,
    null_mean,
    poisson_quantile,
    save_graph,
)


def two_field_toy():
    """Six documents over two word fields plus two ubiquitous words.

    Words 0-3 and 4-7 are the two content blocks (count 2 each in their
    documents); words 8 and 9 appear once in every document.
    """
    docs = []
    for block in (0, 1):
        for _ in range(3):
            words = np.array([0, 1, 2, 3]) + 4 * block
            docs.append(
                Document(
                    np.concatenate([words, [8, 9]]),
                    np.array([2, 2, 2, 2, 1, 1]),
                )
            )
    return Corpus(docs, Vocabulary(10))


class TestDotProduct:
    def test_disjoint_words_give_zero(self):
        corpus = two_field_toy()
        assert dot_product_sim(corpus, 0, 4) == 0

    def test_hand_example(self):
        docs = [
            Document(np.array([0, 1]), np.array([1, 2])),
            Document(np.array([0, 1]), np.array([1, 1])),
        ]
        corpus = Corpus(docs, Vocabulary(2))
        assert dot_product_sim(corpus, 0, 1) == 3

    def test_symmetry_on_random_pairs(self):
        rng = make_rng(0, stream=3)
        rows = rng.integers(0, 4, size=(15, 12))
        from support import corpus_from_dense

        corpus = corpus_from_dense(rows)
        for _ in range(100):
            a, b = rng.choice(12, size=2, replace=False)
            assert dot_product_sim(corpus, int(a), int(b)) == dot_product_sim(
                corpus, int(b), int(a)
            )

    def test_same_word_rejected(self):
        with pytest.raises(ConfigError):
            dot_product_sim(two_field_toy(), 3, 3)


class TestNullMean:
    def test_uniform_lengths_example(self):
        docs = [Document(np.array([0]), np.array([50])) for _ in range(100)]
        corpus = Corpus(docs, Vocabulary(1))
        assert null_mean(corpus, 10, 200) == pytest.approx(20.0)

    def test_degenerate_single_token(self):
        corpus = Corpus([Document(np.array([0]), np.array([1]))], Vocabulary(1))
        assert null_mean(corpus, 1, 1) == pytest.approx(1.0)

    def test_linear_in_counts(self):
        corpus = two_field_toy()
        assert null_mean(corpus, 20, 7) == pytest.approx(2 * null_mean(corpus, 10, 7))


class TestPoissonQuantile:
    def test_zero_mean(self):
        assert poisson_quantile(0.0, 0.05) == 0

    def test_unit_mean_at_five_percent(self):
        assert poisson_quantile(1.0, 0.05) == 3

    def test_monotone_in_mean(self):
        previous = 0
        for mean in np.arange(0.1, 50.0, 0.1):
            q = poisson_quantile(float(mean), 0.05)
            assert q >= previous
            previous = q

    def test_against_summation_oracle(self):
        rng = make_rng(1, stream=5)
        means = 10.0 ** rng.uniform(-3, 3, size=1000)
        ps = rng.uniform(0.005, 0.5, size=1000)
        for mean, p in zip(means, ps):
            assert poisson_quantile(float(mean), float(p)) == poisson_quantile_by_summation(
                float(mean), float(p)
            )

    def test_bad_p_rejected(self):
        with pytest.raises(ConfigError):
            poisson_quantile(1.0, 0.0)
        with pytest.raises(ConfigError):
            poisson_quantile(1.0, 1.0)


class TestBuildGraph:
    def test_language_corpus_has_no_cross_block_edges(self):
        spec = LanguageSpec(n_langs=3, n_docs=120, doc_length=30, words_per_lang=40)
        corpus, _ = gen_language_corpus(spec, seed=31)
        graph = build_graph(corpus, 0.05)
        assert graph.n_edges > 0
        assert np.all(graph.edge_a // 40 == graph.edge_b // 40)

    def test_two_field_toy_structure(self):
        # content pairs co-occur z=12 against null mean 6 (threshold 10);
        # the ubiquitous pair reaches only z=6 and is filtered out
        graph = build_graph(two_field_toy(), 0.05)
        edges = set(zip(graph.edge_a.tolist(), graph.edge_b.tolist()))
        block0 = {(a, b) for a in range(4) for b in range(4) if a < b}
        block1 = {(a + 4, b + 4) for a, b in block0}
        assert edges == block0 | block1
        assert np.all(graph.edge_w == 2)
        assert graph.isolated.tolist() == [8, 9]

    def test_weights_are_positive_integers(self):
        spec = LanguageSpec(n_langs=2, n_docs=100, doc_length=40, words_per_lang=30)
        corpus, _ = gen_language_corpus(spec, seed=32)
        graph = build_graph(corpus)
        assert graph.edge_w.dtype == np.int64
        assert graph.edge_w.min() >= 1

    def test_document_order_is_irrelevant(self):
        corpus = two_field_toy()
        reversed_corpus = Corpus(list(reversed(corpus.docs)), corpus.vocab)
        g1 = build_graph(corpus)
        g2 = build_graph(reversed_corpus)
        np.testing.assert_array_equal(g1.edge_a, g2.edge_a)
        np.testing.assert_array_equal(g1.edge_b, g2.edge_b)
        np.testing.assert_array_equal(g1.edge_w, g2.edge_w)

    def test_shuffled_corpus_survival_is_bounded(self):
        # tokens placed with no structure: surviving fraction of tested
        # pairs stays in the vicinity of the p-value (one-sided bound)
        rng = make_rng(2, stream=9)
        n_words, per_word = 200, 60
        totals = np.full(n_words, per_word)
        lengths = np.full(1000, n_words * per_word // 1000)
        corpus = shuffled_corpus(totals, lengths, rng)
        tested = 0
        for doc in corpus.docs:
            tested += doc.n_unique * (doc.n_unique - 1) // 2
        graph = build_graph(corpus, 0.05)
        doc_idx, word_idx, counts, _ = corpus.entry_arrays()
        from scipy import sparse

        x = sparse.csr_matrix(
            (counts, (doc_idx, word_idx)), shape=(corpus.n_docs, corpus.n_words)
        )
        z = sparse.triu(x.T @ x, k=1)
        n_tested_pairs = z.nnz
        fraction = graph.n_edges / n_tested_pairs
        assert fraction <= 0.075

    def test_progress_sink_receives_messages(self):
        messages = []
        build_graph(two_field_toy(), 0.05, progress_sink=messages.append)
        assert any("edges" in m for m in messages)

    def test_bad_p_value(self):
        with pytest.raises(ConfigError):
            build_graph(two_field_toy(), 1.5)


class TestNullDistribution:
    def test_cooccurrence_matches_poisson_tv(self):
        # token-shuffle null at s_a=10, s_b=200 over 1000 docs with
        # lengths uniform in [10, 100]: empirical z against Pois(mean)
        rng = make_rng(3, stream=13)
        lengths = rng.integers(10, 101, size=1000)
        total = float(lengths.sum())
        mean = 10 * 200 * float(np.dot(lengths, lengths)) / total**2
        reps = 10_000
        draws = np.array(
            [shuffled_pair_cooccurrence(10, 200, lengths, rng) for _ in range(reps)]
        )
        hi = max(int(draws.max()), int(mean + 10 * np.sqrt(mean))) + 1
        empirical = np.bincount(draws, minlength=hi + 1) / reps
        pois = poisson_pmf_grid(mean, hi)
        tv = 0.5 * (np.abs(empirical - pois).sum() + (1.0 - pois.sum()))
        assert tv < 0.05


class TestGraphContainer:
    def test_rejects_self_loops_and_bad_weights(self):
        with pytest.raises(DataError):
            WordGraph(3, np.array([1]), np.array([1]), np.array([2]))
        with pytest.raises(DataError):
            WordGraph(3, np.array([0]), np.array([1]), np.array([0]))

    def test_isolated_derived_when_missing(self):
        graph = WordGraph(5, np.array([0]), np.array([2]), np.array([3]))
        assert graph.isolated.tolist() == [1, 3, 4]
        assert graph.active_nodes().tolist() == [0, 2]

    def test_strengths_and_csr_agree(self):
        graph = WordGraph(
            4, np.array([0, 0, 1]), np.array([1, 2, 2]), np.array([2, 1, 5])
        )
        np.testing.assert_array_equal(graph.strengths(), [3, 7, 6, 0])
        indptr, indices, weights = graph.neighbor_csr()
        for node in range(4):
            sl = slice(indptr[node], indptr[node + 1])
            assert weights[sl].sum() == graph.strengths()[node]
            assert node not in indices[sl]

    def test_save_load_roundtrip(self, tmp_path):
        graph = build_graph(two_field_toy(), 0.05)
        path = tmp_path / "graph.txt"
        save_graph(graph, str(path))
        back = load_graph(str(path))
        assert back.n_nodes == graph.n_nodes
        np.testing.assert_array_equal(back.edge_a, graph.edge_a)
        np.testing.assert_array_equal(back.edge_b, graph.edge_b)
        np.testing.assert_array_equal(back.edge_w, graph.edge_w)
        np.testing.assert_array_equal(back.isolated, graph.isolated)
