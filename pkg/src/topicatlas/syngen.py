"""Synthetic corpora with known ground truth.

Two generators are provided.  The language generator builds fully
disambiguated corpora: the vocabulary is split into disjoint blocks,
each document picks one block and samples its words i.i.d. from that
block's frequency vector.  The Dirichlet generator builds mixed
corpora: each document draws a topic mixture from a Dirichlet prior,
each word draws its topic affinities from the same prior (generic
words use a flat prior instead), and tokens are emitted topic-first.

Both return the corpus together with the generative model that
produced it, so fitted models can be scored against the truth.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus, Document, Vocabulary
from .errors import ConfigError, DataError
from .infer import TopicModel, derive_p_topic
from ._rng import make_rng

__all__ = [
    "LanguageSpec",
    "DirichletSpec",
    "TrueModel",
    "sample_dirichlet",
    "gen_language_corpus",
    "gen_dirichlet_corpus",
    "PRESETS",
    "generate_preset",
    "parse_spec_file",
    "load_frequencies",
]

_SIMPLEX_TOL = 1e-12


def _check_simplex(vec: np.ndarray, name: str) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    if np.any(vec < 0.0):
        raise ConfigError(f"{name} has negative entries")
    if abs(vec.sum() - 1.0) > _SIMPLEX_TOL:
        raise ConfigError(f"{name} must sum to 1 (got {vec.sum()!r})")
    return vec


@dataclass
class LanguageSpec:
    """Corpus of single-language documents over disjoint vocabularies."""

    n_langs: int
    n_docs: int
    doc_length: int
    words_per_lang: int
    p_lang: np.ndarray | None = None
    frequencies: list[np.ndarray] | None = None  # per-language, uniform if None

    def __post_init__(self):
        if min(self.n_langs, self.n_docs, self.doc_length, self.words_per_lang) < 1:
            raise ConfigError("language spec sizes must be >= 1")
        if self.p_lang is None:
            self.p_lang = np.full(self.n_langs, 1.0 / self.n_langs)
        self.p_lang = _check_simplex(self.p_lang, "p_lang")
        if self.p_lang.size != self.n_langs:
            raise ConfigError("p_lang length must equal the number of languages")
        if self.frequencies is not None:
            if len(self.frequencies) != self.n_langs:
                raise ConfigError("need one frequency vector per language")
            checked = []
            for i, f in enumerate(self.frequencies):
                f = _check_simplex(f, f"frequencies[{i}]")
                if f.size != self.words_per_lang:
                    raise ConfigError("frequency vector length must equal words_per_lang")
                checked.append(f)
            self.frequencies = checked

    @property
    def n_words(self) -> int:
        return self.n_langs * self.words_per_lang

    def blocks(self) -> list[tuple[int, int]]:
        w = self.words_per_lang
        return [(k * w, (k + 1) * w) for k in range(self.n_langs)]


@dataclass
class DirichletSpec:
    """Corpus from a Dirichlet admixture with optional generic words."""

    n_docs: int
    doc_length: int
    n_words: int
    n_topics: int
    alpha: float = 1e-3
    generic_fraction: float = 0.0
    p_topic: np.ndarray | None = None
    p_word: np.ndarray | None = None

    def __post_init__(self):
        if min(self.n_docs, self.doc_length, self.n_words, self.n_topics) < 1:
            raise ConfigError("dirichlet spec sizes must be >= 1")
        if self.alpha <= 0.0:
            raise ConfigError("alpha must be positive")
        if not 0.0 <= self.generic_fraction <= 1.0:
            raise ConfigError("generic_fraction must lie in [0, 1]")
        if self.p_topic is None:
            self.p_topic = np.full(self.n_topics, 1.0 / self.n_topics)
        self.p_topic = _check_simplex(self.p_topic, "p_topic")
        if self.p_topic.size != self.n_topics or np.any(self.p_topic <= 0.0):
            raise ConfigError("p_topic must give positive mass to every topic")
        if self.p_word is None:
            self.p_word = np.full(self.n_words, 1.0 / self.n_words)
        self.p_word = _check_simplex(self.p_word, "p_word")
        if self.p_word.size != self.n_words:
            raise ConfigError("p_word length must equal n_words")

    @property
    def n_generic(self) -> int:
        return int(round(self.generic_fraction * self.n_words))

    def alpha_topic(self) -> np.ndarray:
        return self.n_topics * self.p_topic * self.alpha


@dataclass
class TrueModel:
    """Generative model behind a synthetic corpus.

    The metadata (generic-word prefix length, language blocks) lives in
    memory only; on disk a TrueModel is stored in the regular model file
    format.
    """

    model: TopicModel
    generic_words: int = 0
    language_blocks: list[tuple[int, int]] = field(default_factory=list)


def sample_dirichlet(alphas: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One Dirichlet draw via normalized Gamma variates.

    For small shape parameters plain Gamma draws underflow to exact
    zero, so below 0.1 the draw is assembled in log space from the
    boosted representation Gamma(a) = Gamma(a+1) * U^(1/a).
    """
    alphas = np.asarray(alphas, dtype=float)
    if alphas.ndim != 1 or alphas.size == 0:
        raise ConfigError("alphas must be a nonempty vector")
    if np.any(alphas <= 0.0):
        raise ConfigError("Dirichlet parameters must be positive")
    if alphas.min() >= 0.1:
        draws = rng.gamma(alphas)
        total = draws.sum()
        if total > 0.0:
            return draws / total
    boosted = rng.gamma(alphas + 1.0)
    uniforms = 1.0 - rng.random(alphas.size)  # in (0, 1]
    log_draws = np.log(boosted) + np.log(uniforms) / alphas
    weights = np.exp(log_draws - log_draws.max())
    return weights / weights.sum()


def gen_language_corpus(spec: LanguageSpec, seed: int) -> tuple[Corpus, TrueModel]:
    """Sample a fully disambiguated corpus: one language per document."""
    rng = make_rng(seed)
    langs = rng.choice(spec.n_langs, size=spec.n_docs, p=spec.p_lang)
    docs = []
    for lang in langs:
        if spec.frequencies is None:
            freq = np.full(spec.words_per_lang, 1.0 / spec.words_per_lang)
        else:
            freq = spec.frequencies[int(lang)]
        counts = rng.multinomial(spec.doc_length, freq)
        hit = np.nonzero(counts)[0]
        docs.append(Document(hit + int(lang) * spec.words_per_lang, counts[hit]))
    corpus = Corpus(docs, Vocabulary(spec.n_words))
    theta = np.zeros((spec.n_docs, spec.n_langs))
    theta[np.arange(spec.n_docs), langs] = 1.0
    beta = np.zeros((spec.n_langs, spec.n_words))
    for k, (lo, hi) in enumerate(spec.blocks()):
        if spec.frequencies is None:
            beta[k, lo:hi] = 1.0 / spec.words_per_lang
        else:
            beta[k, lo:hi] = spec.frequencies[k]
    model = TopicModel(
        theta, beta, np.ones(spec.n_langs), derive_p_topic(theta, corpus.doc_lengths)
    )
    return corpus, TrueModel(model, language_blocks=spec.blocks())


def gen_dirichlet_corpus(spec: DirichletSpec, seed: int) -> tuple[Corpus, TrueModel]:
    """Sample an admixture corpus with known topic mixtures.

    Per document a topic mixture is drawn from Dirichlet(K p(topic) a);
    per word its topic affinities come from the same prior, except the
    generic prefix of the vocabulary which uses a flat prior.  The
    word-topic table is the affinity table reweighted by the word
    marginals and normalized per topic; tokens then draw topic before
    word.
    """
    rng = make_rng(seed)
    alpha_topic = spec.alpha_topic()
    theta = np.empty((spec.n_docs, spec.n_topics))
    for d in range(spec.n_docs):
        theta[d] = sample_dirichlet(alpha_topic, rng)
    flat = np.ones(spec.n_topics)
    topic_given_word = np.empty((spec.n_words, spec.n_topics))
    n_generic = spec.n_generic
    for w in range(spec.n_words):
        topic_given_word[w] = sample_dirichlet(flat if w < n_generic else alpha_topic, rng)
    beta = (topic_given_word * spec.p_word[:, None]).T
    row_sums = beta.sum(axis=1, keepdims=True)
    beta = np.where(row_sums > 0.0, beta / np.maximum(row_sums, 1e-300), 1.0 / spec.n_words)
    docs = []
    for d in range(spec.n_docs):
        topic_counts = rng.multinomial(spec.doc_length, theta[d])
        counts = np.zeros(spec.n_words, dtype=np.int64)
        for t in np.nonzero(topic_counts)[0]:
            counts += rng.multinomial(int(topic_counts[t]), beta[t])
        hit = np.nonzero(counts)[0]
        docs.append(Document(hit, counts[hit]))
    corpus = Corpus(docs, Vocabulary(spec.n_words))
    model = TopicModel(theta, beta, alpha_topic, derive_p_topic(theta, corpus.doc_lengths))
    return corpus, TrueModel(model, generic_words=n_generic)


def _oligarchic(n: int, big: int, p_big: float) -> np.ndarray:
    small = (1.0 - big * p_big) / (n - big)
    return np.array([p_big] * big + [small] * (n - big))


PRESETS: dict[str, LanguageSpec | DirichletSpec] = {
    "egalitarian10": LanguageSpec(
        n_langs=10, n_docs=1000, doc_length=100, words_per_lang=1000
    ),
    "oligarchic10": LanguageSpec(
        n_langs=10,
        n_docs=1000,
        doc_length=100,
        words_per_lang=1000,
        p_lang=_oligarchic(10, 2, 0.30),
    ),
    "dirichlet-equal": DirichletSpec(
        n_docs=1000,
        doc_length=50,
        n_words=2000,
        n_topics=20,
        alpha=1e-3,
        generic_fraction=0.25,
    ),
    "dirichlet-unequal": DirichletSpec(
        n_docs=1000,
        doc_length=50,
        n_words=2000,
        n_topics=20,
        alpha=1e-3,
        generic_fraction=0.25,
        p_topic=_oligarchic(20, 4, 0.15),
    ),
}


def generate_preset(name: str, seed: int) -> tuple[Corpus, TrueModel]:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r} (have: {', '.join(sorted(PRESETS))})")
    spec = PRESETS[name]
    if isinstance(spec, LanguageSpec):
        return gen_language_corpus(spec, seed)
    return gen_dirichlet_corpus(spec, seed)


def load_frequencies(path: str) -> np.ndarray:
    """Read a word-frequency vector, one value per line; renormalizes."""
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                v = float(line)
            except ValueError:
                raise DataError(f"{path}:{lineno}: not a number: {line!r}")
            if v < 0.0:
                raise DataError(f"{path}:{lineno}: negative frequency")
            values.append(v)
    freq = np.array(values, dtype=float)
    if freq.size == 0 or freq.sum() <= 0.0:
        raise DataError(f"{path}: no usable frequencies")
    return freq / freq.sum()


def parse_spec_file(path: str) -> tuple[LanguageSpec | DirichletSpec, int | None]:
    """Parse a flat key/value generator spec.

    Lines are "key value..." pairs; '#' starts a comment.  The 'kind'
    key selects the generator ("language" or "dirichlet").  Shared keys:
    D (documents), L_d (words per document), K (topics or languages),
    seed (optional).  Language kind: N_w (words per language), p_lang
    (K probabilities), freq_file (frequency vector applied to every
    language).  Dirichlet kind: N_w (total vocabulary), alpha,
    generic_fraction, p_topic (K probabilities).

    Returns the spec and the seed if one was given.
    """
    pairs: dict[str, list[str]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) < 2:
                raise DataError(f"{path}:{lineno}: expected 'key value'")
            if parts[0] in pairs:
                raise DataError(f"{path}:{lineno}: duplicate key {parts[0]!r}")
            pairs[parts[0]] = parts[1:]

    def take(key: str, default=None):
        if key in pairs:
            return pairs.pop(key)
        if default is not None:
            return default
        raise DataError(f"{path}: missing required key {key!r}")

    def one(key: str, cast, default=None):
        raw = take(key, default)
        if isinstance(raw, list):
            if len(raw) != 1:
                raise DataError(f"{path}: key {key!r} takes a single value")
            raw = raw[0]
        try:
            return cast(raw)
        except ValueError:
            raise DataError(f"{path}: bad value for {key!r}")

    kind = one("kind", str)
    seed = one("seed", int) if "seed" in pairs else None
    try:
        if kind == "language":
            n_langs = one("K", int)
            freqs = None
            if "freq_file" in pairs:
                freq = load_frequencies(one("freq_file", str))
                freqs = [freq] * n_langs
            spec = LanguageSpec(
                n_langs=n_langs,
                n_docs=one("D", int),
                doc_length=one("L_d", int),
                words_per_lang=one("N_w", int),
                p_lang=np.array([float(x) for x in pairs.pop("p_lang")])
                if "p_lang" in pairs
                else None,
                frequencies=freqs,
            )
        elif kind == "dirichlet":
            spec = DirichletSpec(
                n_docs=one("D", int),
                doc_length=one("L_d", int),
                n_words=one("N_w", int),
                n_topics=one("K", int),
                alpha=one("alpha", float, "0.001"),
                generic_fraction=one("generic_fraction", float, "0"),
                p_topic=np.array([float(x) for x in pairs.pop("p_topic")])
                if "p_topic" in pairs
                else None,
            )
        else:
            raise DataError(f"{path}: unknown kind {kind!r}")
    except ValueError:
        raise DataError(f"{path}: malformed probability list")
    if pairs:
        raise DataError(f"{path}: unknown keys: {', '.join(sorted(pairs))}")
    return spec, seed
