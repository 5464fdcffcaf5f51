import numpy as np
import pytest

from topicatlas._rng import make_rng
from topicatlas.corpus import save_corpus
from topicatlas.errors import ConfigError, DataError
from topicatlas.syngen import (
    DirichletSpec,
    LanguageSpec,
    PRESETS,
    gen_dirichlet_corpus,
    gen_language_corpus,
    generate_preset,
    load_frequencies,
    parse_spec_file,
    sample_dirichlet,
)


class TestDirichletSampler:
    def test_k1_is_the_simplex_point(self):
        rng = make_rng(0)
        np.testing.assert_array_equal(sample_dirichlet(np.array([5.0]), rng), [1.0])

    def test_mean_matches_analytic(self):
        rng = make_rng(1)
        draws = np.array([sample_dirichlet(np.array([2.0, 2.0]), rng) for _ in range(10_000)])
        np.testing.assert_allclose(draws.mean(axis=0), [0.5, 0.5], atol=0.01)

    def test_variance_matches_analytic(self):
        rng = make_rng(2)
        alphas = np.array([0.5, 1.5, 3.0])
        total = alphas.sum()
        expected_var = alphas * (total - alphas) / (total**2 * (total + 1.0))
        draws = np.array([sample_dirichlet(alphas, rng) for _ in range(100_000)])
        # Monte Carlo error on a variance estimate is ~ var*sqrt(2/n)
        np.testing.assert_allclose(draws.var(axis=0), expected_var, rtol=0.05)

    def test_tiny_alpha_concentrates_on_one_topic(self):
        rng = make_rng(3)
        alphas = np.full(20, 1e-3)
        tops = [sample_dirichlet(alphas, rng).max() for _ in range(501)]
        assert np.median(tops) > 0.99

    def test_tiny_alpha_rows_still_normalized(self):
        rng = make_rng(4)
        for _ in range(200):
            x = sample_dirichlet(np.full(20, 1e-3), rng)
            assert abs(x.sum() - 1.0) <= 1e-12
            assert np.all(x >= 0.0)

    def test_rejects_nonpositive(self):
        rng = make_rng(5)
        with pytest.raises(ConfigError):
            sample_dirichlet(np.array([1.0, 0.0]), rng)


class TestLanguageCorpus:
    def test_documents_stay_in_one_block(self):
        spec = LanguageSpec(n_langs=3, n_docs=40, doc_length=10, words_per_lang=20)
        corpus, truth = gen_language_corpus(spec, seed=11)
        for doc, theta_row in zip(corpus.docs, truth.model.theta):
            lang = int(theta_row.argmax())
            assert np.all(doc.words // 20 == lang)
            assert doc.length == 10
        truth.model.validate()
        assert truth.language_blocks == [(0, 20), (20, 40), (40, 60)]

    def test_language_counts_near_multinomial_expectation(self):
        spec = PRESETS["egalitarian10"]
        corpus, truth = gen_language_corpus(spec, seed=12)
        counts = truth.model.theta.sum(axis=0)
        expect = spec.n_docs / spec.n_langs
        sigma = np.sqrt(spec.n_docs * 0.1 * 0.9)
        assert np.all(np.abs(counts - expect) <= 3 * sigma)

    def test_oligarchic_probabilities(self):
        spec = PRESETS["oligarchic10"]
        np.testing.assert_allclose(spec.p_lang[:2], 0.30)
        np.testing.assert_allclose(spec.p_lang[2:], 0.05)
        assert spec.p_lang.sum() == pytest.approx(1.0, abs=1e-12)

    def test_custom_frequencies_shape_beta(self):
        freq = np.array([0.7, 0.2, 0.1])
        spec = LanguageSpec(
            n_langs=2, n_docs=30, doc_length=50, words_per_lang=3,
            frequencies=[freq, freq],
        )
        corpus, truth = gen_language_corpus(spec, seed=13)
        np.testing.assert_allclose(truth.model.beta[0, :3], freq)
        np.testing.assert_allclose(truth.model.beta[1, 3:], freq)
        # heaviest word should dominate empirically
        totals = corpus.word_totals
        assert totals[0] > totals[1] > totals[2]

    def test_determinism_byte_level(self, tmp_path):
        spec = LanguageSpec(n_langs=2, n_docs=25, doc_length=15, words_per_lang=10)
        a, _ = gen_language_corpus(spec, seed=99)
        b, _ = gen_language_corpus(spec, seed=99)
        pa, pb = tmp_path / "a.txt", tmp_path / "b.txt"
        save_corpus(a, str(pa))
        save_corpus(b, str(pb))
        assert pa.read_bytes() == pb.read_bytes()

    def test_bad_specs_rejected(self):
        with pytest.raises(ConfigError):
            LanguageSpec(n_langs=0, n_docs=5, doc_length=5, words_per_lang=5)
        with pytest.raises(ConfigError):
            LanguageSpec(
                n_langs=2, n_docs=5, doc_length=5, words_per_lang=5,
                p_lang=np.array([0.6, 0.6]),
            )


class TestDirichletCorpus:
    def test_shapes_and_simplex(self):
        spec = DirichletSpec(
            n_docs=50, doc_length=30, n_words=200, n_topics=5, alpha=0.01,
            generic_fraction=0.2,
        )
        corpus, truth = gen_dirichlet_corpus(spec, seed=21)
        assert corpus.n_docs == 50 and corpus.n_words == 200
        assert np.all(corpus.doc_lengths == 30)
        truth.model.validate()
        assert truth.generic_words == 40

    def test_tiny_alpha_gives_single_topic_docs(self):
        spec = DirichletSpec(n_docs=201, doc_length=20, n_words=400, n_topics=20, alpha=1e-3)
        _, truth = gen_dirichlet_corpus(spec, seed=22)
        tops = truth.model.theta.max(axis=1)
        assert np.median(tops) > 0.99

    def test_theta_mean_approaches_p_topic(self):
        p_topic = np.array([0.5, 0.3, 0.2])
        spec = DirichletSpec(
            n_docs=10_000, doc_length=1, n_words=30, n_topics=3, alpha=1.0,
            p_topic=p_topic,
        )
        _, truth = gen_dirichlet_corpus(spec, seed=23)
        np.testing.assert_allclose(truth.model.theta.mean(axis=0), p_topic, atol=0.01)

    def test_preset_dimensions(self):
        spec = PRESETS["dirichlet-equal"]
        assert (spec.n_docs, spec.doc_length, spec.n_words, spec.n_topics) == (1000, 50, 2000, 20)
        assert spec.alpha == pytest.approx(1e-3)
        uneq = PRESETS["dirichlet-unequal"]
        np.testing.assert_allclose(uneq.p_topic[:4], 0.15)
        np.testing.assert_allclose(uneq.p_topic[4:], 0.025)

    def test_generate_preset_dispatch(self):
        corpus, truth = generate_preset("dirichlet-equal", seed=1)
        assert corpus.n_docs == 1000
        assert truth.generic_words == 500
        with pytest.raises(ConfigError):
            generate_preset("nope", seed=1)


class TestSpecFiles:
    def test_language_roundtrip(self, tmp_path):
        path = tmp_path / "lang.spec"
        path.write_text(
            "kind language\nK 3\nD 40\nL_d 10\nN_w 20\n"
            "p_lang 0.5 0.25 0.25\nseed 7\n"
        )
        spec, seed = parse_spec_file(str(path))
        assert isinstance(spec, LanguageSpec)
        assert seed == 7
        np.testing.assert_allclose(spec.p_lang, [0.5, 0.25, 0.25])

    def test_dirichlet_defaults(self, tmp_path):
        path = tmp_path / "dir.spec"
        path.write_text("kind dirichlet\nK 4\nD 10\nL_d 5\nN_w 50\nalpha 0.01\n")
        spec, seed = parse_spec_file(str(path))
        assert isinstance(spec, DirichletSpec)
        assert seed is None
        assert spec.generic_fraction == 0.0
        np.testing.assert_allclose(spec.p_topic, 0.25)

    def test_freq_file(self, tmp_path):
        freq_path = tmp_path / "freq.txt"
        freq_path.write_text("7\n2\n1\n")
        freq = load_frequencies(str(freq_path))
        np.testing.assert_allclose(freq, [0.7, 0.2, 0.1])
        spec_path = tmp_path / "lang.spec"
        spec_path.write_text(
            f"kind language\nK 2\nD 5\nL_d 4\nN_w 3\nfreq_file {freq_path}\n"
        )
        spec, _ = parse_spec_file(str(spec_path))
        np.testing.assert_allclose(spec.frequencies[0], [0.7, 0.2, 0.1])

    def test_malformed_rejected(self, tmp_path):
        path = tmp_path / "bad.spec"
        path.write_text("kind dirichlet\nK 4\n")
        with pytest.raises(DataError, match="missing required key"):
            parse_spec_file(str(path))
        path.write_text("kind mystery\nK 4\nD 1\nL_d 1\nN_w 1\n")
        with pytest.raises(DataError, match="unknown kind"):
            parse_spec_file(str(path))
        path.write_text("kind dirichlet\nK 4\nD 10\nL_d 5\nN_w 50\nwat 3\n")
        with pytest.raises(DataError, match="unknown keys"):
            parse_spec_file(str(path))
