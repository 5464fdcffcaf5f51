"""Tests for the corpus model and its file format."""

import numpy as np
import pytest

from topicatlas import corpus as cp
from topicatlas._rng import make_rng
from topicatlas.errors import DataError


def random_corpus(seed, n_docs=30, n_words=50):
    rng = make_rng(seed)
    rows = []
    for _ in range(n_docs):
        n_unique = int(rng.integers(1, 12))
        words = rng.choice(n_words, size=n_unique, replace=False)
        rows.append({int(w): int(rng.integers(1, 6)) for w in words})
    return cp.Corpus.from_counts(rows, n_words=n_words)


class TestDocument:
    def test_parse_line(self):
        doc = cp._parse_line("2 0:1 3:2", 1)
        assert doc.n_unique == 2
        assert doc.length == 3
        assert list(doc.words) == [0, 3]
        assert list(doc.counts) == [1, 2]

    def test_malformed_lines_rejected(self):
        for line in ["x 0:1", "2 0:1", "1 0:1 3:2", "1 3:-2", "1 3:0", "1 3", "2 0:1 0:2"]:
            with pytest.raises(DataError):
                cp._parse_line(line, 1)

    def test_from_pairs_sorts(self):
        doc = cp.Document.from_pairs([(5, 1), (2, 3)])
        assert list(doc.words) == [2, 5]
        assert list(doc.counts) == [3, 1]


class TestCorpusTotals:
    def test_token_total_matches_both_margins(self):
        corpus = random_corpus(1)
        assert corpus.total_tokens == corpus.doc_lengths.sum()
        assert corpus.total_tokens == corpus.word_totals.sum()

    def test_vocab_bound_enforced(self):
        with pytest.raises(DataError):
            cp.Corpus([cp.Document.from_pairs([(9, 1)])], cp.Vocabulary(5))

    def test_entry_arrays_roundtrip(self):
        corpus = random_corpus(2)
        doc_idx, word_idx, counts, offsets = corpus.entry_arrays()
        assert counts.sum() == corpus.total_tokens
        for d, doc in enumerate(corpus.docs):
            sl = slice(offsets[d], offsets[d + 1])
            assert np.array_equal(word_idx[sl], doc.words)
            assert np.array_equal(counts[sl], doc.counts)
            assert np.all(doc_idx[sl] == d)


class TestFileFormat:
    def test_round_trip_bytes(self, tmp_path):
        corpus = random_corpus(3)
        p1 = tmp_path / "a.corpus"
        p2 = tmp_path / "b.corpus"
        cp.save_corpus(corpus, str(p1))
        loaded = cp.load_corpus(str(p1))
        cp.save_corpus(loaded, str(p2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_vocab_size_inferred_from_max_id(self, tmp_path):
        p = tmp_path / "c.corpus"
        p.write_text("1 7:2\n2 0:1 3:1\n", encoding="utf-8")
        corpus = cp.load_corpus(str(p))
        assert corpus.n_words == 8

    def test_sidecar_vocab_fixes_size_and_checks_ids(self, tmp_path):
        p = tmp_path / "c.corpus"
        v = tmp_path / "c.vocab"
        p.write_text("1 2:1\n", encoding="utf-8")
        v.write_text("apple\nbanana\ncherry\npear\n", encoding="utf-8")
        corpus = cp.load_corpus(str(p), str(v))
        assert corpus.n_words == 4
        assert corpus.vocab.label(2) == "cherry"
        p.write_text("1 9:1\n", encoding="utf-8")
        with pytest.raises(DataError):
            cp.load_corpus(str(p), str(v))

    def test_vocab_round_trip(self, tmp_path):
        v = tmp_path / "v.vocab"
        vocab = cp.Vocabulary(3, ["a", "b", "c"])
        cp.save_vocabulary(vocab, str(v))
        assert cp.load_vocabulary(str(v)).labels == ["a", "b", "c"]


class TestHoldoutSplit:
    def test_sizes_and_partition(self):
        corpus = random_corpus(4, n_docs=100)
        train, test = cp.split_holdout(corpus, 0.1, seed=9)
        assert test.n_docs == 10
        assert train.n_docs == 90
        key = lambda d: (tuple(d.words), tuple(d.counts))
        merged = sorted(map(key, train.docs + test.docs))
        assert merged == sorted(map(key, corpus.docs))

    def test_deterministic_given_seed(self):
        corpus = random_corpus(5, n_docs=40)
        a1, b1 = cp.split_holdout(corpus, 0.25, seed=3)
        a2, b2 = cp.split_holdout(corpus, 0.25, seed=3)
        assert [list(d.words) for d in b1.docs] == [list(d.words) for d in b2.docs]
        a3, b3 = cp.split_holdout(corpus, 0.25, seed=4)
        assert [list(d.words) for d in b1.docs] != [list(d.words) for d in b3.docs]

    def test_fraction_bounds(self):
        corpus = random_corpus(6)
        with pytest.raises(DataError):
            cp.split_holdout(corpus, 1.5, seed=0)
