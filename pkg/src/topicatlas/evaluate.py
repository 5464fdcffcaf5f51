"""Model comparison scores and held-out evaluation.

Two fitted models are compared through their per-topic document
distributions: each topic becomes a distribution over documents via
Bayes' rule (documents weighted by length share), topics are matched
greedily by total-variation similarity, and the resulting best-match
score is normalized against a label-shuffled baseline.  A word-side
variant does the same with the topics' word distributions.

Held-out quality uses fold-in: topic-word distributions stay frozen
while each unseen document's topic mixture is inferred, and perplexity
is the exponentiated per-token cross-entropy.
"""

from __future__ import annotations

import io
import time
from dataclasses import dataclass, fields

import numpy as np

from ._rng import DEFAULT_SEED, make_rng
from .corpus import Corpus, split_holdout
from .errors import ConfigError, DataError, NumericalError, TopicAtlasError
from .infer import (
    FitOptions,
    TopicModel,
    _Entries,
    _e_step,
    _smooth_beta,
    lda_fit,
    plsa_fit,
)

DEFAULT_SHUFFLES = 20
_DEGENERATE_TOL = 1e-12


def doc_given_topic(model: TopicModel, doc_lengths: np.ndarray) -> np.ndarray:
    """Per-topic document distributions, documents weighted by length.

    Returns a (K, D) matrix whose row t is p(doc|t) proportional to
    p(t|doc) * L_d.  A topic with no mass anywhere gets a uniform row.
    """
    lengths = np.asarray(doc_lengths, dtype=float)
    if lengths.shape != (model.n_docs,):
        raise DataError("doc_lengths does not match the model's document set")
    joint = model.theta.T * lengths[None, :]
    totals = joint.sum(axis=1, keepdims=True)
    safe = np.where(totals > 0.0, totals, 1.0)
    out = joint / safe
    out[totals[:, 0] <= 0.0] = 1.0 / model.n_docs
    return out


def _similarity_rows(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """S[i, j] = 1 - half the 1-norm between row i of P and row j of Q."""
    S = np.empty((P.shape[0], Q.shape[0]))
    for i in range(P.shape[0]):
        S[i] = 1.0 - 0.5 * np.abs(P[i][None, :] - Q).sum(axis=1)
    return S


def topic_similarity(
    pm: TopicModel,
    qm: TopicModel,
    topic_p: int,
    topic_q: int,
    doc_lengths: np.ndarray,
) -> float:
    """Overlap of one topic from each model on the shared documents."""
    if pm.n_docs != qm.n_docs:
        raise DataError("models describe different document sets")
    P = doc_given_topic(pm, doc_lengths)
    Q = doc_given_topic(qm, doc_lengths)
    return float(1.0 - 0.5 * np.abs(P[topic_p] - Q[topic_q]).sum())


def _directed(weights: np.ndarray, S: np.ndarray, axis: int) -> float:
    return float(np.dot(weights, S.max(axis=axis)))


def best_match(
    pm: TopicModel, qm: TopicModel, doc_lengths: np.ndarray
) -> tuple[float, float, float]:
    """(forward, backward, symmetric) best-match scores over documents."""
    if pm.n_docs != qm.n_docs:
        raise DataError("models describe different document sets")
    P = doc_given_topic(pm, doc_lengths)
    Q = doc_given_topic(qm, doc_lengths)
    S = _similarity_rows(P, Q)
    fwd = _directed(pm.p_topic, S, axis=1)
    bwd = _directed(qm.p_topic, S, axis=0)
    return fwd, bwd, 0.5 * (fwd + bwd)


@dataclass
class BmScore:
    """Best-match comparison with its shuffled baseline."""

    bm_fwd: float
    bm_bwd: float
    bm: float
    bm_rand: float
    bm_n: float
    degenerate: bool


def bm_normalized(
    pm: TopicModel,
    qm: TopicModel,
    doc_lengths: np.ndarray | None = None,
    shuffles: int = DEFAULT_SHUFFLES,
    seed: int = DEFAULT_SEED,
    side: str = "docs",
) -> BmScore:
    """Best match normalized by its expectation under label shuffles.

    side="docs" compares topics as document distributions (needs
    doc_lengths); side="words" compares them as word distributions.
    The baseline shuffles the label axis of one model per direction;
    when it saturates at 1 the score degenerates to 1 (identical) or 0.
    """
    if shuffles < 1:
        raise ConfigError("shuffles must be >= 1")
    if side == "docs":
        if doc_lengths is None:
            raise ConfigError("document-side comparison needs doc_lengths")
        if pm.n_docs != qm.n_docs:
            raise DataError("models describe different document sets")
        P = doc_given_topic(pm, doc_lengths)
        Q = doc_given_topic(qm, doc_lengths)
    elif side == "words":
        if pm.n_words != qm.n_words:
            raise DataError("models describe different vocabularies")
        P = pm.beta
        Q = qm.beta
    else:
        raise ConfigError(f"unknown comparison side {side!r}")

    S = _similarity_rows(P, Q)
    fwd = _directed(pm.p_topic, S, axis=1)
    bwd = _directed(qm.p_topic, S, axis=0)
    bm = 0.5 * (fwd + bwd)

    rng = make_rng(seed)
    n = P.shape[1]
    rand_total = 0.0
    for _ in range(shuffles):
        perm_q = rng.permutation(n)
        perm_p = rng.permutation(n)
        fwd_s = _directed(pm.p_topic, _similarity_rows(P, Q[:, perm_q]), axis=1)
        bwd_s = _directed(qm.p_topic, _similarity_rows(P[:, perm_p], Q), axis=0)
        rand_total += 0.5 * (fwd_s + bwd_s)
    bm_rand = rand_total / shuffles

    if 1.0 - bm_rand <= _DEGENERATE_TOL:
        bm_n = 1.0 if bm >= 1.0 - _DEGENERATE_TOL else 0.0
        return BmScore(fwd, bwd, bm, bm_rand, bm_n, True)
    bm_n = (bm - bm_rand) / (1.0 - bm_rand)
    return BmScore(fwd, bwd, bm, bm_rand, bm_n, False)


def _fold_in(
    model: TopicModel, heldout: Corpus, opts: FitOptions | None
) -> tuple[np.ndarray, float]:
    """Infer mixtures for unseen documents with topics frozen.

    Returns (theta over held-out docs, per-token natural-log likelihood).
    """
    if model.n_words != heldout.n_words:
        raise DataError("held-out corpus vocabulary does not match the model")
    opts = opts if opts is not None else FitOptions()
    entries = _Entries(heldout)
    beta = _smooth_beta(model.beta.copy())
    alpha = np.asarray(model.alpha, dtype=float)
    gamma = alpha[None, :] + entries.doc_lengths[:, None] / model.n_topics
    gamma, _, _, _ = _e_step(entries, beta, alpha, gamma, opts)
    theta = gamma / gamma.sum(axis=1, keepdims=True)
    mix = np.einsum(
        "et,et->e", theta[entries.doc_idx], beta.T[entries.word_idx]
    )
    if np.any(mix <= 0.0):
        raise NumericalError("held-out word has zero probability after smoothing")
    loglik = float(np.dot(entries.counts, np.log(mix)))
    return theta, loglik / float(entries.doc_lengths.sum())


def heldout_loglik(
    model: TopicModel, heldout: Corpus, opts: FitOptions | None = None
) -> float:
    """Per-token natural-log likelihood of held-out documents."""
    return _fold_in(model, heldout, opts)[1]


def perplexity(
    model: TopicModel, heldout: Corpus, opts: FitOptions | None = None
) -> float:
    """exp of the per-token cross-entropy on folded-in documents."""
    return float(np.exp(-_fold_in(model, heldout, opts)[1]))


def effective_topics(p_topic: np.ndarray) -> float:
    """2 to the entropy (bits) of the topic marginal."""
    p = np.asarray(p_topic, dtype=float)
    if p.ndim != 1 or p.size == 0 or np.any(p < 0.0):
        raise ConfigError("p_topic must be a nonnegative vector")
    if abs(p.sum() - 1.0) > 1e-6:
        raise ConfigError("p_topic must sum to 1")
    pos = p[p > 0.0]
    h = -float(np.dot(pos, np.log2(pos)))
    return float(2.0**h)


_FIT_ENGINES = {"lda": lda_fit, "plsa": plsa_fit}


def heldout_scan(
    corpus: Corpus,
    k_list: list[int],
    engine: str = "lda",
    opts: FitOptions | None = None,
    fraction: float = 0.1,
) -> list[dict]:
    """Fit at each K on a 90/10 split; score the held-out 10 percent.

    Returns one record per requested K with the held-out per-token
    loglik and the fitted model's effective topic count.  A failed fit
    is recorded in the entry's "error" field and the scan continues.
    """
    if not k_list:
        raise ConfigError("k_list must not be empty")
    if engine not in _FIT_ENGINES:
        raise ConfigError(f"unknown engine {engine!r}")
    opts = opts if opts is not None else FitOptions()
    fit = _FIT_ENGINES[engine]
    train, test = split_holdout(corpus, fraction, opts.seed)
    if train.n_docs == 0 or test.n_docs == 0:
        raise DataError("holdout split left one side empty")
    records = []
    for k in k_list:
        rec = {"k": int(k), "heldout_loglik": None, "effective_topics": None, "error": None}
        try:
            model, _ = fit(train, int(k), opts)
            rec["heldout_loglik"] = heldout_loglik(model, test, opts)
            rec["effective_topics"] = effective_topics(model.p_topic)
        except TopicAtlasError as exc:
            rec["error"] = str(exc)
        records.append(rec)
    return records


@dataclass
class EvalReport:
    """Flat bundle of comparison scores for one model pair."""

    bm_fwd: float | None = None
    bm_bwd: float | None = None
    bm: float | None = None
    bm_rand: float | None = None
    bm_n: float | None = None
    bm_degenerate: bool = False
    word_bm_n: float | None = None
    word_bm_degenerate: bool = False
    perplexity: float | None = None
    heldout_loglik: float | None = None
    effective_topics: float | None = None
    seconds: float | None = None

    def validate(self) -> None:
        for name in ("bm_fwd", "bm_bwd", "bm", "bm_rand"):
            value = getattr(self, name)
            if value is not None and not -1e-9 <= value <= 1.0 + 1e-9:
                raise DataError(f"{name} out of [0, 1]: {value}")
        for name in ("bm_n", "word_bm_n"):
            value = getattr(self, name)
            if value is not None and value > 1.0 + 1e-9:
                raise DataError(f"{name} exceeds 1: {value}")
        if self.effective_topics is not None and self.effective_topics < 1.0 - 1e-9:
            raise DataError("effective_topics below 1")
        if self.perplexity is not None and self.perplexity < 1.0 - 1e-9:
            raise DataError("perplexity below 1")


def evaluate_pair(
    pm: TopicModel,
    qm: TopicModel,
    corpus: Corpus,
    shuffles: int = DEFAULT_SHUFFLES,
    seed: int = DEFAULT_SEED,
    heldout: Corpus | None = None,
    opts: FitOptions | None = None,
) -> EvalReport:
    """Full comparison of two models fitted to the same corpus."""
    start = time.perf_counter()
    docs_score = bm_normalized(
        pm, qm, corpus.doc_lengths, shuffles=shuffles, seed=seed, side="docs"
    )
    words_score = bm_normalized(pm, qm, shuffles=shuffles, seed=seed, side="words")
    report = EvalReport(
        bm_fwd=docs_score.bm_fwd,
        bm_bwd=docs_score.bm_bwd,
        bm=docs_score.bm,
        bm_rand=docs_score.bm_rand,
        bm_n=docs_score.bm_n,
        bm_degenerate=docs_score.degenerate,
        word_bm_n=words_score.bm_n,
        word_bm_degenerate=words_score.degenerate,
        effective_topics=effective_topics(pm.p_topic),
    )
    if heldout is not None:
        report.perplexity = perplexity(pm, heldout, opts)
        report.heldout_loglik = heldout_loglik(pm, heldout, opts)
    report.seconds = time.perf_counter() - start
    report.validate()
    return report


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return format(float(value), ".17g")


def _parse_value(name: str, text: str):
    if text == "":
        return None
    if name.endswith("degenerate"):
        return text == "true"
    return float(text)


def report_fields() -> list[str]:
    return [f.name for f in fields(EvalReport)]


def save_report(report: EvalReport, path: str) -> None:
    """One key=value line per field."""
    with io.open(path, "w", encoding="utf-8", newline="\n") as fh:
        for name in report_fields():
            fh.write(f"{name}={_format_value(getattr(report, name))}\n")


def load_report(path: str) -> EvalReport:
    values = {}
    with io.open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected key=value")
            name, _, text = line.partition("=")
            if name not in report_fields():
                raise DataError(f"{path}:{lineno}: unknown field {name!r}")
            values[name] = _parse_value(name, text)
    report = EvalReport(**{k: v for k, v in values.items()})
    for name in ("bm_degenerate", "word_bm_degenerate"):
        if getattr(report, name) is None:
            setattr(report, name, False)
    return report


def report_csv_header() -> str:
    return ",".join(report_fields())


def report_csv_row(report: EvalReport) -> str:
    return ",".join(_format_value(getattr(report, name)) for name in report_fields())
