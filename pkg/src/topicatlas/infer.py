"""Topic-model container, variational LDA, and PLSA EM.

The LDA fitter follows the classic variational treatment: each document
gets a Dirichlet posterior gamma over topics and per-word topic
responsibilities phi, alternated until the document converges; the
M-step re-estimates the topic-word table and optionally the Dirichlet
hyperparameters by safeguarded Newton steps.  The reported trace is the
variational lower bound on the corpus log-likelihood, which is
nondecreasing under these updates.

PLSA is the same mixture likelihood without the Dirichlet prior,
fitted by plain EM on p(topic|doc) and p(word|topic).

A fitted model stores dense theta (D x K), beta (K x N_w), the
hyperparameter vector alpha, and the topic marginal p_topic derived as
sum_d (L_d / L_C) theta_d.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammaln, psi, polygamma

from .corpus import Corpus
from .errors import ConfigError, DataError, NumericalError
from ._rng import make_rng, DEFAULT_SEED

__all__ = [
    "TopicModel",
    "FitOptions",
    "lda_fit",
    "plsa_fit",
    "seeded_init",
    "refine_with_lda",
    "save_model",
    "load_model",
    "save_trace",
]

BETA_SMOOTHING = 1e-9
THETA_FLOOR = 1e-10
ALPHA_MIN = 1e-6
ALPHA_MAX = 1e3


@dataclass
class TopicModel:
    """Fitted or generative topic model.

    Attributes
    ----------
    theta : ndarray (D, K)
        p(topic | doc), one row per document.
    beta : ndarray (K, N_w)
        p(word | topic), one row per topic.
    alpha : ndarray (K,)
        Per-topic Dirichlet hyperparameters (all positive).
    p_topic : ndarray (K,)
        Marginal topic probabilities.
    """

    theta: np.ndarray
    beta: np.ndarray
    alpha: np.ndarray
    p_topic: np.ndarray

    @property
    def n_topics(self) -> int:
        return self.beta.shape[0]

    @property
    def n_docs(self) -> int:
        return self.theta.shape[0]

    @property
    def n_words(self) -> int:
        return self.beta.shape[1]

    def validate(self, atol: float = 1e-9) -> None:
        if self.theta.shape[1] != self.n_topics or self.alpha.shape != (self.n_topics,):
            raise DataError("model table shapes disagree")
        for name, table in (("theta", self.theta), ("beta", self.beta)):
            if np.any(table < -atol):
                raise DataError(f"{name} has negative entries")
            sums = table.sum(axis=1)
            if np.any(np.abs(sums - 1.0) > atol):
                raise DataError(f"{name} rows do not sum to 1")
        if np.any(self.alpha <= 0.0):
            raise DataError("alpha must be positive elementwise")

    def copy(self) -> "TopicModel":
        return TopicModel(
            self.theta.copy(), self.beta.copy(), self.alpha.copy(), self.p_topic.copy()
        )


def derive_p_topic(theta: np.ndarray, doc_lengths: np.ndarray) -> np.ndarray:
    """Topic marginal sum_d (L_d / L_C) p(topic|doc)."""
    weights = doc_lengths / doc_lengths.sum()
    return weights @ theta


@dataclass
class FitOptions:
    """Knobs shared by both fitting engines.

    init is one of "random", "seeded", "from-model" (the latter reads
    init_model).  alpha_mode is "symmetric-fixed", "optimized-scalar"
    (scalar Newton update each M-step), or "asymmetric-from-init"
    (per-topic Newton update starting from the init's alpha).  The
    outer loop stops when the relative bound improvement drops below
    `tolerance`; each document's inner loop stops at `inner_tol`
    relative change of its posterior parameters.
    """

    init: str = "random"
    max_iters: int = 200
    tolerance: float = 1e-5
    alpha_mode: str = "optimized-scalar"
    alpha0: float = 1.0
    seed: int = DEFAULT_SEED
    min_topic_docs: int = 0
    inner_tol: float = 1e-6
    inner_max_iters: int = 100
    checkpoint_every: int = 5
    init_model: TopicModel | None = None

    def validate(self) -> None:
        if self.init not in ("random", "seeded", "from-model"):
            raise ConfigError(f"unknown init mode {self.init!r}")
        if self.alpha_mode not in ("symmetric-fixed", "optimized-scalar", "asymmetric-from-init"):
            raise ConfigError(f"unknown alpha mode {self.alpha_mode!r}")
        if self.tolerance <= 0.0 or self.inner_tol <= 0.0:
            raise ConfigError("tolerances must be positive")
        if self.max_iters < 1 or self.inner_max_iters < 1:
            raise ConfigError("iteration limits must be >= 1")
        if self.init == "from-model" and self.init_model is None:
            raise ConfigError("init='from-model' requires init_model")


class _Entries:
    """Flattened corpus views shared by both engines."""

    def __init__(self, corpus: Corpus):
        if corpus.n_docs == 0:
            raise DataError("corpus is empty")
        if np.any(corpus.doc_lengths == 0):
            raise DataError("corpus contains an empty document")
        doc_idx, word_idx, counts, offsets = corpus.entry_arrays()
        self.doc_idx = doc_idx
        self.word_idx = word_idx
        self.counts = counts.astype(float)
        self.doc_starts = offsets[:-1]
        self.doc_lengths = corpus.doc_lengths.astype(float)
        self.n_docs = corpus.n_docs
        self.n_words = corpus.n_words
        # word-major view for the beta scatter: a stable sort keeps the
        # reduction order fixed, which keeps results bit-identical
        self.word_perm = np.argsort(word_idx, kind="stable")
        sorted_words = word_idx[self.word_perm]
        present, starts = np.unique(sorted_words, return_index=True)
        self.word_present = present
        self.word_starts = starts

    def doc_sums(self, values: np.ndarray) -> np.ndarray:
        """Per-document sums of an (n_entries, K) array."""
        return np.add.reduceat(values, self.doc_starts, axis=0)

    def word_sums(self, values: np.ndarray, out_words: int) -> np.ndarray:
        """Per-word sums of an (n_entries, K) array -> (out_words, K)."""
        sums = np.add.reduceat(values[self.word_perm], self.word_starts, axis=0)
        full = np.zeros((out_words, values.shape[1]))
        full[self.word_present] = sums
        return full


def _smooth_beta(raw: np.ndarray) -> np.ndarray:
    """Row-normalize with the additive floor that keeps every entry > 0."""
    raw = raw + BETA_SMOOTHING / raw.shape[1]
    return raw / raw.sum(axis=1, keepdims=True)


def _init_beta(corpus: Corpus, n_topics: int, opts: FitOptions) -> np.ndarray:
    if opts.init == "random":
        if n_topics > corpus.n_words:
            warnings.warn("more topics than vocabulary words; model will be degenerate")
        rng = make_rng(opts.seed)
        raw = rng.random((n_topics, corpus.n_words)) + 1.0 / corpus.n_words
        return _smooth_beta(raw)
    if opts.init == "seeded":
        return seeded_init(corpus, n_topics, opts.seed).beta
    model = opts.init_model
    if model.beta.shape != (n_topics, corpus.n_words):
        raise ConfigError("init_model shape does not match corpus/K")
    return _smooth_beta(model.beta.copy())


def seeded_init(corpus: Corpus, n_topics: int, seed: int) -> TopicModel:
    """Initialize topics from K distinct randomly chosen documents.

    Each chosen document's smoothed word frequencies become one topic's
    word distribution; theta starts uniform.
    """
    if n_topics > corpus.n_docs:
        raise ConfigError("seeded init needs K <= number of documents")
    rng = make_rng(seed)
    chosen = rng.choice(corpus.n_docs, size=n_topics, replace=False)
    beta = np.zeros((n_topics, corpus.n_words))
    for t, d in enumerate(chosen):
        doc = corpus.docs[int(d)]
        beta[t, doc.words] = doc.counts
    beta = _smooth_beta(beta + 1.0 / corpus.n_words)
    theta = np.full((corpus.n_docs, n_topics), 1.0 / n_topics)
    alpha = np.ones(n_topics)
    return TopicModel(theta, beta, alpha, derive_p_topic(theta, corpus.doc_lengths))


def _init_alpha(n_topics: int, opts: FitOptions) -> np.ndarray:
    if opts.init == "from-model" and opts.alpha_mode == "asymmetric-from-init":
        alpha = np.asarray(opts.init_model.alpha, dtype=float).copy()
        if alpha.shape != (n_topics,):
            raise ConfigError("init_model alpha length does not match K")
        return alpha
    return np.full(n_topics, float(opts.alpha0))


def _init_gamma(
    entries: _Entries, alpha: np.ndarray, opts: FitOptions, n_topics: int
) -> np.ndarray:
    lengths = entries.doc_lengths[:, None]
    if opts.init == "from-model":
        theta = np.maximum(opts.init_model.theta, THETA_FLOOR)
        theta = theta / theta.sum(axis=1, keepdims=True)
        return alpha[None, :] + lengths * theta
    return alpha[None, :] + lengths / n_topics


def _e_step(
    entries: _Entries,
    beta: np.ndarray,
    alpha: np.ndarray,
    gamma: np.ndarray,
    opts: FitOptions,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Run per-document inner loops; return (gamma, wphi, norms, bound).

    All documents are swept together with vectorized updates; a document
    participates until its posterior parameters stop moving (relative L1
    change below opts.inner_tol).  phi is never materialized across
    iterations, only the final weighted responsibilities are returned.
    """
    beta_at = beta.T[entries.word_idx]  # (n_entries, K)
    counts = entries.counts[:, None]
    for _ in range(opts.inner_max_iters):
        elog = psi(gamma) - psi(gamma.sum(axis=1, keepdims=True))
        resp = beta_at * np.exp(elog)[entries.doc_idx]
        norms = resp.sum(axis=1, keepdims=True)
        if np.any(norms <= 0.0):
            raise NumericalError("zero responsibility mass for an observed word")
        gamma_new = alpha[None, :] + entries.doc_sums(counts * resp / norms)
        moved = np.abs(gamma_new - gamma).sum(axis=1) / gamma.sum(axis=1)
        gamma = gamma_new
        if float(moved.max()) <= opts.inner_tol:
            break
    elog = psi(gamma) - psi(gamma.sum(axis=1, keepdims=True))
    resp = beta_at * np.exp(elog)[entries.doc_idx]
    norms = resp.sum(axis=1)
    if np.any(norms <= 0.0):
        raise NumericalError("zero responsibility mass for an observed word")
    wphi = counts * resp / norms[:, None]
    # variational bound: the phi-dependent part collapses to the log
    # normalizers because phi is exactly optimal for this gamma
    alpha_sum = alpha.sum()
    bound = float(np.dot(entries.counts, np.log(norms)))
    bound += entries.n_docs * (gammaln(alpha_sum) - gammaln(alpha).sum())
    bound += float(((alpha[None, :] - gamma) * elog).sum())
    bound += float(gammaln(gamma).sum() - gammaln(gamma.sum(axis=1)).sum())
    return gamma, wphi, norms, bound


def _alpha_objective(alpha: np.ndarray, ss: np.ndarray, n_docs: int) -> float:
    return float(
        n_docs * (gammaln(alpha.sum()) - gammaln(alpha).sum()) + np.dot(alpha - 1.0, ss)
    )


def _update_alpha_scalar(alpha: np.ndarray, ss: np.ndarray, n_docs: int) -> np.ndarray:
    """Newton update of one shared alpha value, in log space."""
    n_topics = alpha.size
    a = float(alpha[0])
    ss_total = float(ss.sum())
    for _ in range(100):
        grad = n_docs * n_topics * (psi(n_topics * a) - psi(a)) + ss_total
        hess = n_docs * n_topics * (n_topics * polygamma(1, n_topics * a) - polygamma(1, a))
        denom = hess * a + grad
        if denom == 0.0 or not math.isfinite(denom):
            break
        step = grad / denom  # d/d(log a) Newton step
        if not math.isfinite(step):
            break
        log_a_new = math.log(a) - step
        a_new = min(max(math.exp(log_a_new), ALPHA_MIN), ALPHA_MAX)
        # halve in log space until the objective stops decreasing
        cur = _alpha_objective(np.full(n_topics, a), ss, n_docs)
        for _ in range(30):
            if _alpha_objective(np.full(n_topics, a_new), ss, n_docs) >= cur - 1e-12:
                break
            a_new = math.sqrt(a_new * a)
        if abs(a_new - a) <= 1e-10 * a:
            a = a_new
            break
        a = a_new
    return np.full(n_topics, a)


def _update_alpha_vector(alpha: np.ndarray, ss: np.ndarray, n_docs: int) -> np.ndarray:
    """Safeguarded Newton on the full alpha vector.

    The Hessian is diagonal plus rank one, so the Newton direction has a
    linear-time closed form.
    """
    alpha = alpha.copy()
    for _ in range(100):
        grad = n_docs * (psi(alpha.sum()) - psi(alpha)) + ss
        q = -n_docs * polygamma(1, alpha)
        c = n_docs * polygamma(1, alpha.sum())
        b = (grad / q).sum() / (1.0 / c + (1.0 / q).sum())
        direction = (grad - b) / q
        if not np.all(np.isfinite(direction)):
            break
        cur = _alpha_objective(alpha, ss, n_docs)
        step = 1.0
        new = alpha
        for _ in range(40):
            cand = np.clip(alpha - step * direction, ALPHA_MIN, ALPHA_MAX)
            if _alpha_objective(cand, ss, n_docs) >= cur - 1e-12:
                new = cand
                break
            step *= 0.5
        else:
            break
        if np.abs(new - alpha).max() <= 1e-10 * np.abs(alpha).max():
            alpha = new
            break
        alpha = new
    return alpha


def _finalize(
    entries: _Entries, gamma: np.ndarray, beta: np.ndarray, alpha: np.ndarray
) -> TopicModel:
    theta = gamma / gamma.sum(axis=1, keepdims=True)
    return TopicModel(theta, beta.copy(), alpha.copy(), derive_p_topic(theta, entries.doc_lengths))


def _lda_em(
    corpus: Corpus, n_topics: int, opts: FitOptions, collect_checkpoints: bool
) -> tuple[TopicModel, list[float], list[tuple[int, TopicModel]]]:
    opts.validate()
    if n_topics < 1:
        raise ConfigError("K must be >= 1")
    entries = _Entries(corpus)
    beta = _init_beta(corpus, n_topics, opts)
    alpha = _init_alpha(n_topics, opts)
    gamma = _init_gamma(entries, alpha, opts, n_topics)
    trace: list[float] = []
    checkpoints: list[tuple[int, TopicModel]] = []
    for iteration in range(1, opts.max_iters + 1):
        gamma, wphi, _, bound = _e_step(entries, beta, alpha, gamma, opts)
        if not math.isfinite(bound):
            raise NumericalError(f"non-finite bound at iteration {iteration}")
        trace.append(bound)
        # M-step
        beta = _smooth_beta(entries.word_sums(wphi, entries.n_words).T)
        if opts.alpha_mode != "symmetric-fixed":
            ss = (psi(gamma) - psi(gamma.sum(axis=1, keepdims=True))).sum(axis=0)
            if opts.alpha_mode == "optimized-scalar":
                alpha = _update_alpha_scalar(alpha, ss, entries.n_docs)
            else:
                alpha = _update_alpha_vector(alpha, ss, entries.n_docs)
        if collect_checkpoints and (
            iteration == 1 or iteration % opts.checkpoint_every == 0
        ):
            checkpoints.append((iteration, _finalize(entries, gamma, beta, alpha)))
        if len(trace) >= 2:
            prev = trace[-2]
            if abs(trace[-1] - prev) < opts.tolerance * abs(prev):
                break
    model = _finalize(entries, gamma, beta, alpha)
    return model, trace, checkpoints


def lda_fit(corpus: Corpus, n_topics: int, opts: FitOptions) -> tuple[TopicModel, list[float]]:
    """Variational LDA; returns the model and its bound trace."""
    model, trace, _ = _lda_em(corpus, n_topics, opts, collect_checkpoints=False)
    return model, trace


def refine_with_lda(
    guess, corpus: Corpus, opts: FitOptions | None = None
) -> tuple[TopicModel, list[float], list[tuple[int, TopicModel]]]:
    """LDA refinement of a guess (asymmetric prior, 0.01 per topic).

    `guess` is either a TopicModel or any object with a
    to_model(corpus) method (the guess module's state qualifies).
    Runs lda_fit initialized from it with per-topic alpha 0.01 and
    per-topic Newton updates, recording checkpoint models at iteration
    1 and every opts.checkpoint_every iterations thereafter.
    """
    base = opts or FitOptions()
    guess_model = guess.to_model(corpus) if hasattr(guess, "to_model") else guess
    init_model = guess_model.copy()
    init_model.alpha = np.full(init_model.n_topics, 0.01)
    run_opts = replace(
        base,
        init="from-model",
        alpha_mode="asymmetric-from-init",
        init_model=init_model,
    )
    return _lda_em(corpus, init_model.n_topics, run_opts, collect_checkpoints=True)


def plsa_fit(corpus: Corpus, n_topics: int, opts: FitOptions) -> tuple[TopicModel, list[float]]:
    """PLSA via EM; returns the model and its log-likelihood trace.

    The trace includes the document-choice term sum_d L_d log(L_d/L_C),
    so a K=1 fit reproduces the unigram likelihood exactly.
    """
    opts.validate()
    if n_topics < 1:
        raise ConfigError("K must be >= 1")
    entries = _Entries(corpus)
    if opts.init == "from-model":
        model = opts.init_model
        if model.beta.shape != (n_topics, corpus.n_words) or model.theta.shape[0] != corpus.n_docs:
            raise ConfigError("init_model shape does not match corpus/K")
        beta = model.beta.copy()
        theta = model.theta.copy()
    else:
        beta = _init_beta(corpus, n_topics, opts)
        rng = make_rng(opts.seed, stream=1)
        if opts.init == "seeded":
            theta = np.full((entries.n_docs, n_topics), 1.0 / n_topics)
        else:
            theta = rng.random((entries.n_docs, n_topics)) + 0.1
            theta /= theta.sum(axis=1, keepdims=True)
    doc_const = float(
        np.dot(entries.doc_lengths, np.log(entries.doc_lengths / entries.doc_lengths.sum()))
    )
    counts = entries.counts[:, None]
    trace: list[float] = []
    for iteration in range(1, opts.max_iters + 1):
        mix = theta[entries.doc_idx] * beta.T[entries.word_idx]
        norms = mix.sum(axis=1)
        if np.any(norms <= 0.0):
            raise NumericalError("zero mixture probability for an observed word")
        loglik = float(np.dot(entries.counts, np.log(norms))) + doc_const
        if not math.isfinite(loglik):
            raise NumericalError(f"non-finite log-likelihood at iteration {iteration}")
        trace.append(loglik)
        wphi = counts * mix / norms[:, None]
        theta = entries.doc_sums(wphi) / entries.doc_lengths[:, None]
        raw_beta = entries.word_sums(wphi, entries.n_words).T
        sums = raw_beta.sum(axis=1, keepdims=True)
        beta = np.where(sums > 0.0, raw_beta / np.maximum(sums, 1e-300), 1.0 / entries.n_words)
        if len(trace) >= 2 and abs(trace[-1] - trace[-2]) < opts.tolerance * abs(trace[-2]):
            break
    model = TopicModel(theta, beta, np.ones(n_topics), derive_p_topic(theta, entries.doc_lengths))
    return model, trace


# ---------------------------------------------------------------------------
# model file format
#
# line 1: "K D N_w"
# line 2: alpha, K floats
# line 3: p_topic, K floats
# next D lines: sparse theta rows, "m t:p t:p ..." (m nonzero entries)
# next K lines: dense beta rows, N_w floats
#
# Floats are written with repr-grade precision so that load followed by
# save is byte-identical.
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_model(model: TopicModel, path: str) -> None:
    with io.open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{model.n_topics} {model.n_docs} {model.n_words}\n")
        fh.write(" ".join(_fmt(a) for a in model.alpha) + "\n")
        fh.write(" ".join(_fmt(p) for p in model.p_topic) + "\n")
        for row in model.theta:
            nz = np.nonzero(row)[0]
            cells = " ".join(f"{t}:{_fmt(row[t])}" for t in nz)
            fh.write(f"{nz.size} {cells}\n" if nz.size else "0\n")
        for row in model.beta:
            fh.write(" ".join(_fmt(v) for v in row) + "\n")


def load_model(path: str) -> TopicModel:
    with io.open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()

    def fail(lineno: int, why: str):
        raise DataError(f"{path}:{lineno}: {why}")

    if not lines:
        fail(1, "empty model file")
    try:
        n_topics, n_docs, n_words = (int(x) for x in lines[0].split())
    except ValueError:
        fail(1, "header must be 'K D N_w'")
    expected = 3 + n_docs + n_topics
    if len(lines) != expected:
        fail(len(lines), f"expected {expected} lines, found {len(lines)}")

    def floats(lineno: int, n: int) -> np.ndarray:
        parts = lines[lineno - 1].split()
        if len(parts) != n:
            fail(lineno, f"expected {n} values, found {len(parts)}")
        try:
            return np.array([float(x) for x in parts])
        except ValueError:
            fail(lineno, "non-numeric value")

    alpha = floats(2, n_topics)
    p_topic = floats(3, n_topics)
    theta = np.zeros((n_docs, n_topics))
    for d in range(n_docs):
        lineno = 4 + d
        parts = lines[lineno - 1].split()
        try:
            m = int(parts[0])
        except (ValueError, IndexError):
            fail(lineno, "theta row must start with its entry count")
        if len(parts) != m + 1:
            fail(lineno, f"declared {m} entries, found {len(parts) - 1}")
        for cell in parts[1:]:
            try:
                t_s, p_s = cell.split(":")
                t, p = int(t_s), float(p_s)
            except ValueError:
                fail(lineno, f"malformed cell {cell!r}")
            if not 0 <= t < n_topics:
                fail(lineno, f"topic id {t} out of range")
            theta[d, t] = p
    beta = np.empty((n_topics, n_words))
    for t in range(n_topics):
        beta[t] = floats(4 + n_docs + t, n_words)
    return TopicModel(theta, beta, alpha, p_topic)


def save_trace(trace: list[float], path: str) -> None:
    """Write an iteration trace as CSV with header 'iter,value'."""
    with io.open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("iter,value\n")
        for i, v in enumerate(trace, start=1):
            fh.write(f"{i},{_fmt(v)}\n")
