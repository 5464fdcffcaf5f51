"""Benchmark sweeps: accuracy, reproducibility, and runtime scaling.

Each sweep fits one or more engines on freshly generated corpora and
reports per-row scores.  Accuracy is the normalized best-match score of
a fitted model against the generating model; reproducibility is the
mean pairwise score among independently seeded fits of the same engine.
Timings wrap the compute stages only, never file handling, so writing
results cannot disturb the measurements.
"""

from __future__ import annotations

import io
import time

import numpy as np

from ._rng import DEFAULT_SEED
from .corpus import Corpus
from .errors import ConfigError
from .evaluate import bm_normalized, heldout_scan
from .infer import FitOptions, TopicModel, lda_fit, plsa_fit
from .landscape import overfit_gain
from .pipeline import PipelineOptions, topic_mapping
from .syngen import (
    DirichletSpec,
    LanguageSpec,
    TrueModel,
    gen_dirichlet_corpus,
    gen_language_corpus,
)

ENGINES = ("topicmap", "lda-random", "lda-seeded", "plsa")


def fit_engine(
    corpus: Corpus,
    engine: str,
    n_topics: int | None,
    seed: int,
    max_iters: int = 200,
    trials: int = 10,
    min_topic_docs: int = 0,
) -> tuple[TopicModel, float]:
    """Fit one engine; returns (model, compute seconds)."""
    if engine == "topicmap":
        opts = PipelineOptions(
            trials=trials,
            seed=seed,
            min_topic_docs=min_topic_docs,
            lda_opts=FitOptions(max_iters=max_iters, seed=seed),
        )
        start = time.perf_counter()
        result = topic_mapping(corpus, opts)
        return result.model, time.perf_counter() - start
    if engine not in ENGINES:
        raise ConfigError(f"unknown engine {engine!r} (have: {', '.join(ENGINES)})")
    if n_topics is None:
        raise ConfigError(f"engine {engine!r} needs a topic count")
    if engine == "plsa":
        fit, init = plsa_fit, "random"
    else:
        fit, init = lda_fit, ("seeded" if engine == "lda-seeded" else "random")
    opts = FitOptions(init=init, max_iters=max_iters, seed=seed)
    start = time.perf_counter()
    model, _ = fit(corpus, n_topics, opts)
    return model, time.perf_counter() - start


def accuracy(
    model: TopicModel,
    truth: TrueModel | TopicModel,
    corpus: Corpus,
    shuffles: int = 20,
    seed: int = DEFAULT_SEED,
) -> float:
    """Normalized best match of a fitted model against the truth."""
    true_model = truth.model if isinstance(truth, TrueModel) else truth
    score = bm_normalized(
        model, true_model, corpus.doc_lengths, shuffles=shuffles, seed=seed
    )
    return score.bm_n


def reproducibility(
    models: list[TopicModel],
    corpus: Corpus,
    shuffles: int = 20,
    seed: int = DEFAULT_SEED,
) -> float:
    """Mean pairwise normalized best match among repeated fits."""
    if len(models) < 2:
        raise ConfigError("reproducibility needs at least two fitted models")
    scores = []
    for i in range(len(models)):
        for j in range(i + 1, len(models)):
            score = bm_normalized(
                models[i], models[j], corpus.doc_lengths, shuffles=shuffles, seed=seed
            )
            scores.append(score.bm_n)
    return float(np.mean(scores))


def _run_engine_row(corpus, truth, engine, n_topics, runs, seed, max_iters, trials):
    models = []
    seconds = []
    for r in range(runs):
        model, secs = fit_engine(
            corpus, engine, n_topics, seed + r, max_iters=max_iters, trials=trials
        )
        models.append(model)
        seconds.append(secs)
    accs = [accuracy(m, truth, corpus, seed=seed) for m in models]
    row = {
        "engine": engine,
        "runs": runs,
        "accuracy_median": float(np.median(accs)),
        "accuracy_mean": float(np.mean(accs)),
        "reproducibility": reproducibility(models, corpus, seed=seed)
        if runs >= 2
        else "",
        "seconds_mean": float(np.mean(seconds)),
        "topics_found": int(models[0].n_topics),
    }
    return row


def language_sweep(
    d_values: list[int],
    engines: list[str] = list(ENGINES),
    runs: int = 5,
    seed: int = DEFAULT_SEED,
    n_langs: int = 10,
    doc_length: int = 100,
    words_per_lang: int = 1000,
    p_lang: list[float] | None = None,
    max_iters: int = 200,
    trials: int = 10,
) -> list[dict]:
    """Accuracy and reproducibility versus corpus size on language data."""
    if not d_values:
        raise ConfigError("d_values must not be empty")
    rows = []
    for i, n_docs in enumerate(d_values):
        spec = LanguageSpec(
            n_langs=n_langs,
            n_docs=int(n_docs),
            doc_length=doc_length,
            words_per_lang=words_per_lang,
            p_lang=p_lang,
        )
        corpus, truth = gen_language_corpus(spec, seed=seed + 1000 * i)
        for engine in engines:
            row = _run_engine_row(
                corpus, truth, engine, n_langs, runs, seed, max_iters, trials
            )
            rows.append({"n_docs": int(n_docs), **row})
    return rows


def dirichlet_grid(
    alphas: list[float],
    generic_fractions: list[float],
    engines: list[str] = list(ENGINES),
    runs: int = 5,
    seed: int = DEFAULT_SEED,
    n_docs: int = 1000,
    doc_length: int = 50,
    n_words: int = 2000,
    n_topics: int = 20,
    p_topic: list[float] | None = None,
    max_iters: int = 200,
    trials: int = 10,
) -> list[dict]:
    """Accuracy and reproducibility over the mixing-vs-generic grid."""
    if not alphas or not generic_fractions:
        raise ConfigError("alphas and generic_fractions must not be empty")
    rows = []
    cell = 0
    for alpha in alphas:
        for frac in generic_fractions:
            spec = DirichletSpec(
                n_docs=n_docs,
                doc_length=doc_length,
                n_words=n_words,
                n_topics=n_topics,
                alpha=float(alpha),
                generic_fraction=float(frac),
                p_topic=p_topic,
            )
            corpus, truth = gen_dirichlet_corpus(spec, seed=seed + 1000 * cell)
            cell += 1
            for engine in engines:
                row = _run_engine_row(
                    corpus, truth, engine, n_topics, runs, seed, max_iters, trials
                )
                rows.append({"alpha": float(alpha), "generic_fraction": float(frac), **row})
    return rows


def heldout_curve(
    corpus: Corpus,
    k_list: list[int],
    engine: str = "lda",
    opts: FitOptions | None = None,
    fraction: float = 0.1,
) -> list[dict]:
    """Held-out loglik and effective topics per candidate K."""
    return heldout_scan(corpus, k_list, engine=engine, opts=opts, fraction=fraction)


def gain_curve(pairs: list[tuple[int, int]]) -> list[dict]:
    """Best dialect-split gain for each (doc_length, n_words) pair."""
    if not pairs:
        raise ConfigError("need at least one (doc_length, n_words) pair")
    rows = []
    for doc_length, n_words in pairs:
        result = overfit_gain(int(doc_length), int(n_words))
        rows.append(
            {
                "doc_length": int(doc_length),
                "n_words": int(n_words),
                "ratio": doc_length / n_words,
                "gain": result.gain,
                "a_opt": result.a_opt,
                "threshold_opt": result.threshold_opt,
            }
        )
    return rows


def measure_scaling(
    d_values: list[int],
    k_values: list[int],
    engines: list[str] = ("topicmap", "lda-random"),
    seed: int = DEFAULT_SEED,
    doc_length: int = 50,
    n_words: int = 2000,
    alpha: float = 1e-3,
    generic_fraction: float = 0.3,
    max_iters: int = 20,
    trials: int = 1,
) -> dict:
    """Wall-clock versus corpus size and topic count.

    One corpus per (D, K) cell over a fixed vocabulary, so raising K
    makes topics smaller rather than the corpus larger.  Returns
    {"rows": [...], "slopes": {...}} where each slope is the
    least-squares runtime-vs-D slope for one (engine, K).
    """
    if not d_values or not k_values:
        raise ConfigError("d_values and k_values must not be empty")
    rows = []
    for k in k_values:
        for n_docs in d_values:
            spec = DirichletSpec(
                n_docs=int(n_docs),
                doc_length=doc_length,
                n_words=int(n_words),
                n_topics=int(k),
                alpha=alpha,
                generic_fraction=generic_fraction,
            )
            corpus, _ = gen_dirichlet_corpus(spec, seed=seed + n_docs + 7919 * k)
            for engine in engines:
                _, seconds = fit_engine(
                    corpus, engine, int(k), seed, max_iters=max_iters, trials=trials
                )
                rows.append(
                    {"engine": engine, "n_docs": int(n_docs), "k": int(k), "seconds": seconds}
                )
    slopes = {}
    for engine in engines:
        for k in k_values:
            pts = [
                (row["n_docs"], row["seconds"])
                for row in rows
                if row["engine"] == engine and row["k"] == k
            ]
            if len(pts) >= 2:
                xs, ys = zip(*pts)
                slope = float(np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)[0])
                slopes[f"{engine}@k={k}"] = slope
    return {"rows": rows, "slopes": slopes}


def write_rows(rows: list[dict], path: str, columns: list[str] | None = None) -> None:
    """CSV with a header row and a fixed column order."""
    if not rows:
        raise ConfigError("no rows to write")
    if columns is None:
        columns = []
        for row in rows:
            for key in row:
                if key not in columns:
                    columns.append(key)
    with io.open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_cell(row.get(name, "")) for name in columns) + "\n")


def _cell(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)
