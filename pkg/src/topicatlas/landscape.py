"""Analytical likelihood landscape of synthetic language corpora.

All quantities refer to a corpus whose documents were written in one of
several "languages", each language using its own block of equiprobable
words.  A document of length L_d written in a language with N_w words
has true per-document log-likelihood -L_d * ln(N_w) (nats).

An alternative model may split one language into two fake dialects:
pick a group of `a` marked words, call a document "dialect 1" when it
contains at least T marked tokens, and give each dialect its own word
distribution with the optimal mass f on the marked group.  Because the
split is tuned on the sample it always gains likelihood on the split
language while costing L_d * ln 2 per document on any pair of languages
it merges to keep the topic count fixed.  The functions below quantify
this competition exactly.

Everything here is closed form: the marked-token count n of a document
is Binomial(L_d, a / N_w), and expectations over n are finite sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln
from scipy.stats import binom, norm

from .errors import ConfigError

__all__ = [
    "true_loglik_per_doc",
    "split_stats",
    "enumerate_alt_likelihood",
    "overfit_gain",
    "overfit_gain_limit",
    "GainResult",
    "symmetric_gap",
    "symmetric_gap_root",
    "asymmetric_gap",
    "loglik_ratio",
    "count_alt_models",
    "hierarchy_competition",
    "HierarchyResult",
]

LN2 = math.log(2.0)

# Above this L_d * N_w product the exhaustive (a, T) scan is replaced by
# per-regime heuristics; both acceptance-scale cases stay exhaustive.
EXHAUSTIVE_LIMIT = 10**7


def _check_sizes(doc_length: int, n_words: int) -> None:
    if doc_length < 1:
        raise ConfigError("doc_length must be >= 1")
    if n_words < 2:
        raise ConfigError("n_words must be >= 2")


def true_loglik_per_doc(doc_length: int, n_words: int) -> float:
    """Log-likelihood of one document under its true language, nats."""
    _check_sizes(doc_length, n_words)
    return -doc_length * math.log(n_words)


def _binary_entropy(p):
    """h(p) = -p ln p - (1-p) ln(1-p), elementwise, with h(0) = h(1) = 0."""
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    inner = (p > 0.0) & (p < 1.0)
    q = p[inner]
    out[inner] = -q * np.log(q) - (1.0 - q) * np.log1p(-q)
    return out if out.ndim else float(out)


def split_stats(doc_length: int, n_words: int, a: int, threshold: int) -> tuple[float, float, float]:
    """Return (omega1, p1, p2) for the (a, threshold) dialect split.

    omega1 is the probability that a document holds >= threshold marked
    tokens; p1 and p2 are the mean marked-token fractions of documents
    above and below the threshold.  Degenerate sides get fraction 0.
    """
    _check_sizes(doc_length, n_words)
    if not 1 <= a <= n_words - 1:
        raise ConfigError("a must satisfy 1 <= a <= n_words - 1")
    if not 1 <= threshold <= doc_length:
        raise ConfigError("threshold must satisfy 1 <= threshold <= doc_length")
    p = a / n_words
    n = np.arange(doc_length + 1)
    pmf = binom.pmf(n, doc_length, p)
    omega1 = float(pmf[threshold:].sum())
    m1 = float((n[threshold:] * pmf[threshold:]).sum())
    mean = doc_length * p
    omega2 = 1.0 - omega1
    p1 = m1 / (doc_length * omega1) if omega1 > 0.0 else 0.0
    p2 = (mean - m1) / (doc_length * omega2) if omega2 > 0.0 else 0.0
    return omega1, p1, p2


def enumerate_alt_likelihood(doc_length: int, n_words: int, a: int, threshold: int) -> float:
    """Exact expected per-document log-likelihood of the (a, threshold) split.

    Each dialect uses the mass on the marked group that maximizes the
    expected likelihood of the documents assigned to it.  Computed as a
    direct sum over the binomial count of marked tokens, term by term;
    the entropy identity used by overfit_gain is deliberately not
    reused, so the two routes check each other.
    """
    _check_sizes(doc_length, n_words)
    if not 1 <= a <= n_words - 1:
        raise ConfigError("a must satisfy 1 <= a <= n_words - 1")
    if not 1 <= threshold <= doc_length:
        raise ConfigError("threshold must satisfy 1 <= threshold <= doc_length")
    omega1, p1, p2 = split_stats(doc_length, n_words, a, threshold)
    if omega1 in (0.0, 1.0):
        # no split realized: one dialect owns every document
        return true_loglik_per_doc(doc_length, n_words)
    b = n_words - a
    n = np.arange(doc_length + 1)
    pmf = binom.pmf(n, doc_length, a / n_words)
    total = 0.0
    for lo, hi, f in ((threshold, doc_length + 1, p1), (0, threshold, p2)):
        ns = n[lo:hi]
        ps = pmf[lo:hi]
        # n * ln(f/a) with 0 * ln 0 = 0 for the n = 0 term
        marked = np.where(ns > 0, ns * (np.log(np.maximum(f, 1e-300)) - math.log(a)), 0.0)
        rest = np.where(
            ns < doc_length,
            (doc_length - ns) * (np.log(np.maximum(1.0 - f, 1e-300)) - math.log(b)),
            0.0,
        )
        total += float((ps * (marked + rest)).sum())
    return total


@dataclass(frozen=True)
class GainResult:
    """Best overfit gain of a two-dialect split, nats per document."""

    gain: float
    a_opt: int
    threshold_opt: int
    exhaustive: bool


def _gain_profile(doc_length: int, n_words: int, a: int) -> np.ndarray:
    """Gain for every threshold 1..L_d at fixed group size a, vectorized."""
    p = a / n_words
    n = np.arange(doc_length + 1, dtype=float)
    pmf = binom.pmf(n, doc_length, p)
    # tail sums over n >= T for T = 1..L_d
    tail_w = np.cumsum(pmf[::-1])[::-1]
    tail_m = np.cumsum((n * pmf)[::-1])[::-1]
    omega1 = tail_w[1:]
    m1 = tail_m[1:]
    omega2 = 1.0 - omega1
    mean = doc_length * p
    with np.errstate(divide="ignore", invalid="ignore"):
        p1 = np.where(omega1 > 0.0, m1 / (doc_length * np.maximum(omega1, 1e-300)), 0.0)
        p2 = np.where(omega2 > 0.0, (mean - m1) / (doc_length * np.maximum(omega2, 1e-300)), 0.0)
    p1 = np.clip(p1, 0.0, 1.0)
    p2 = np.clip(p2, 0.0, 1.0)
    h = _binary_entropy
    return doc_length * (h(p) - omega1 * h(p1) - omega2 * h(p2))


def _gain_at_t1(doc_length: int, n_words: int, a: float) -> float:
    """Gain at threshold 1 in closed form (no tail sums needed)."""
    p = a / n_words
    omega2 = (1.0 - p) ** doc_length
    omega1 = -math.expm1(doc_length * math.log1p(-p))
    if omega1 <= 0.0:
        return 0.0
    p1 = min(p / omega1, 1.0)
    h = _binary_entropy
    return doc_length * (h(p) - omega1 * h(p1))


def _golden_max(fn, lo: float, hi: float, iters: int = 120) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def overfit_gain(doc_length: int, n_words: int) -> GainResult:
    """Maximum expected per-document log-likelihood gain of a dialect split.

    Scans group size a and threshold T in 1..L_d for the split that
    gains most over the true one-language model.  Marking a group and
    marking its complement describe the same split with the dialects
    relabeled, so only a <= N_w / 2 is scanned and reported.  The scan
    is exhaustive while L_d * N_w stays moderate; for larger problems
    the known asymptotic regimes fix T (T = 1 when the vocabulary
    outnumbers the document length, T near the mean marked count
    otherwise) and a golden-section search picks a.
    """
    _check_sizes(doc_length, n_words)
    a_max = n_words // 2
    if doc_length * n_words <= EXHAUSTIVE_LIMIT:
        best = (-1.0, 0, 0)
        for a in range(1, a_max + 1):
            gains = _gain_profile(doc_length, n_words, a)
            t_idx = int(np.argmax(gains))
            g = float(gains[t_idx])
            if g > best[0]:
                best = (g, a, t_idx + 1)
        return GainResult(best[0], best[1], best[2], exhaustive=True)

    if n_words >= doc_length:
        # bracket on the known optimum scale (mean marked count ~ ln 2)
        # so the search never starts on the flat zero plateau
        a_guess = n_words * LN2 / doc_length
        lo = max(a_guess / 20.0, 1.0)
        hi = min(max(a_guess * 20.0, 2.0), float(a_max))
        a_star = _golden_max(lambda x: _gain_at_t1(doc_length, n_words, x), lo, hi)
        cands = {max(1, min(a_max, int(math.floor(a_star)) + d)) for d in (-1, 0, 1, 2)}
        best = max((( _gain_at_t1(doc_length, n_words, a), a) for a in cands))
        return GainResult(best[0], best[1], 1, exhaustive=False)

    # long-document regime: threshold sits at the mean marked count and
    # the binomial is well approximated by a continuity-corrected normal
    def gain_mean_t(a: float) -> float:
        p = a / n_words
        mu = doc_length * p
        sigma = math.sqrt(doc_length * p * (1.0 - p))
        if sigma == 0.0:
            return 0.0
        t = max(1.0, round(mu))
        z = (t - 0.5 - mu) / sigma
        omega1 = float(norm.sf(z))
        if omega1 <= 0.0 or omega1 >= 1.0:
            return 0.0
        m1 = mu + sigma * float(norm.pdf(z)) / omega1
        p1 = min(m1 / doc_length, 1.0)
        p2 = max((mu - omega1 * m1) / (doc_length * (1.0 - omega1)), 0.0)
        h = _binary_entropy
        return doc_length * (h(p) - omega1 * h(p1) - (1.0 - omega1) * h(p2))

    a_star = _golden_max(gain_mean_t, 1.0, float(a_max))
    a_int = max(1, min(a_max, int(round(a_star))))
    t_opt = max(1, int(round(doc_length * a_int / n_words)))
    return GainResult(gain_mean_t(a_int), a_int, t_opt, exhaustive=False)


def overfit_gain_limit(doc_length: int, n_words: int) -> float:
    """Overfit gain with the group size relaxed to a real number.

    The discrete optimum is pinned to mean marked counts that are
    multiples of L_d / N_w; for N_w comparable to L_d that grid is too
    coarse to reach the asymptotic constants.  Relaxing a to a real
    number removes the size effect: for N_w >= L_d the threshold-1 gain
    is maximized over continuous a (approaching (ln 2)^2 for large
    sizes), otherwise the threshold sits at the mean marked count and a
    Gaussian approximation of the binomial applies (approaching 1/pi).
    """
    _check_sizes(doc_length, n_words)
    if n_words >= doc_length:
        # mean marked count ln 2 is optimal in the small-group limit;
        # bracket around it so the golden search never starts on the
        # flat zero-gain plateau at large a
        fn = lambda x: _gain_at_t1(doc_length, n_words, x)
        a_guess = n_words * LN2 / doc_length
        lo = max(a_guess / 20.0, 1e-9)
        hi = min(max(a_guess * 20.0, 1.0), n_words / 2.0)
        a_star = _golden_max(fn, lo, hi)
        return fn(a_star)

    def gain_gaussian(a: float) -> float:
        # threshold at the mean: omega1 = 1/2 and the upper conditional
        # mean exceeds it by sigma * sqrt(2 / pi)
        p = a / n_words
        sigma = math.sqrt(doc_length * p * (1.0 - p))
        excess = sigma * math.sqrt(2.0 / math.pi)
        p1 = min(p + excess / doc_length, 1.0)
        p2 = max(p - excess / doc_length, 0.0)
        h = _binary_entropy
        return doc_length * (h(p) - 0.5 * h(p1) - 0.5 * h(p2))

    # a >= 1 keeps the mean marked count >= L_d / N_w >> 1, where the
    # Gaussian approximation is sound; the value is nearly a-free there
    a_star = _golden_max(gain_gaussian, 1.0, n_words / 2.0)
    return gain_gaussian(a_star)


def symmetric_gap(doc_length: int, n_words: int, f_english: float) -> float:
    """Per-document log-likelihood gap, alternative minus true model.

    Three languages: "English" holds a fraction f_E of the documents and
    the other two share the rest equally.  The alternative model splits
    English into the optimal two dialects and merges the other two
    languages.  Under a symmetric topic prior the topic-choice terms
    cancel and the gap is f_E * C - (1 - f_E) * L_d * ln 2.
    """
    if not 0.0 <= f_english <= 1.0:
        raise ConfigError("f_english must be in [0, 1]")
    c = overfit_gain(doc_length, n_words).gain
    return f_english * c - (1.0 - f_english) * doc_length * LN2


def symmetric_gap_root(doc_length: int, n_words: int) -> float:
    """English fraction where the symmetric gap changes sign.

    The gap is linear in f_E, so the root is L_d ln 2 / (C + L_d ln 2).
    Above this fraction the spurious split beats the truth.
    """
    c = overfit_gain(doc_length, n_words).gain
    return doc_length * LN2 / (c + doc_length * LN2)


def asymmetric_gap(doc_length: int, n_words: int, f_english: float) -> float:
    """Gap under an asymmetric topic prior, balanced dialect split.

    Choosing among unequal topics is paid per document: splitting
    English in half costs ln 2 per English document while merging the
    two small languages refunds ln 2 of the L_d ln 2 word-level loss.
    The gap is -f_E (ln 2 - C) - (1 - f_E)(L_d - 1) ln 2.
    """
    if not 0.0 <= f_english <= 1.0:
        raise ConfigError("f_english must be in [0, 1]")
    c = overfit_gain(doc_length, n_words).gain
    return -f_english * (LN2 - c) - (1.0 - f_english) * (doc_length - 1) * LN2


def loglik_ratio(f_unpopular: float, n_words: int) -> float:
    """Leading-order ratio of alternative to true corpus log-likelihood.

    1 - f_U * ln 2 / ln N_w: the merged languages hold a fraction f_U of
    the documents and each merged document loses ln 2 per word out of a
    true cost of ln N_w per word.  The English-side gain is lower order
    and ignored.
    """
    if not 0.0 <= f_unpopular <= 1.0:
        raise ConfigError("f_unpopular must be in [0, 1]")
    if n_words < 2:
        raise ConfigError("n_words must be >= 2")
    return 1.0 - f_unpopular * LN2 / math.log(n_words)


def count_alt_models(n_words: int, a: int) -> float:
    """log10 of the number of ways to pick the marked group: C(N_w, a)."""
    if n_words < 1 or not 0 <= a <= n_words:
        raise ConfigError("need 0 <= a <= n_words")
    ln_c = gammaln(n_words + 1) - gammaln(a + 1) - gammaln(n_words - a + 1)
    return float(ln_c / math.log(10.0))


@dataclass(frozen=True)
class HierarchyResult:
    """Split-vs-merged competition for two sub-topics of a super-topic."""

    symmetric_margin: float
    asymmetric_margin: float
    symmetric_threshold: float
    asymmetric_threshold: float


def hierarchy_competition(
    p_english: float,
    p_subtopic: float,
    n_unique: int,
    n_common: int,
    doc_length: int,
) -> HierarchyResult:
    """Margins for keeping two sub-topics separate vs merged.

    Two sub-topics each hold a fraction p_k of the documents, share
    n_common words and own n_unique words each; a large unrelated topic
    holds a fraction p_E.  The margins are per-document log-likelihood
    advantages (nats) of the split model; the thresholds are the values
    of 2 p_k at which each margin crosses zero, e.g.
    symmetric: 2 p_k > p_E * U / (U + C).
    """
    if doc_length < 2:
        raise ConfigError("doc_length must be >= 2")
    if n_unique < 1 or n_common < 0:
        raise ConfigError("need n_unique >= 1 and n_common >= 0")
    if not 0.0 <= p_english <= 1.0 or not 0.0 <= p_subtopic <= 0.5:
        raise ConfigError("need p_english in [0, 1] and p_subtopic in [0, 0.5]")
    u_share = n_unique / (n_unique + n_common)
    sym_margin = doc_length * LN2 * (2.0 * p_subtopic - p_english * u_share)
    asym_margin = LN2 * (
        2.0 * p_subtopic * (doc_length - 1) - p_english * (doc_length * u_share - 1.0)
    )
    sym_thr = p_english * u_share
    asym_thr = p_english * (doc_length * u_share - 1.0) / (doc_length - 1)
    return HierarchyResult(sym_margin, asym_margin, sym_thr, asym_thr)
