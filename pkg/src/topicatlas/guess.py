"""From hard word clusters to an initial probabilistic topic model.

The cluster labels give every word one topic; a document's topic
mixture is then the share of its tokens in each cluster.  Words the
graph left isolated start out as their own singleton topics and are
absorbed into each document's dominant topic by assign_orphans.  The
guess is sharpened by sweeping a frequency threshold: topics holding
less than a fraction eta of a document are folded into the document's
most significant topic, the threshold maximizing a PLSA-style
likelihood wins.

A state tracks one topic per (document, word) pair, so all derived
tables are exact token counts and every operation conserves total
mass.  All operations are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import binom

from .corpus import Corpus
from .errors import ConfigError, DataError, NumericalError
from .infer import TopicModel, derive_p_topic
from .mapclust import Partition

__all__ = [
    "GuessState",
    "init_from_partition",
    "most_significant_topic",
    "eta_filter",
    "plsa_loglik",
    "eta_sweep",
    "assign_orphans",
    "prune_small_topics",
]

ETA_GRID = [round(0.01 * i, 2) for i in range(51)]


@dataclass
class GuessState:
    """Hard topic assignment for every (document, word) pair.

    entry_topic aligns with corpus.entry_arrays(); n_topics counts all
    topic ids in use (dense 0..K-1).  tau caches each document's most
    significant topic; it is filled lazily and carried through filter
    operations so a sweep judges every threshold against the same
    reference topics.
    """

    corpus: Corpus
    entry_topic: np.ndarray
    n_topics: int
    tau: np.ndarray | None = None
    chosen_eta: float | None = None
    # ids of provisional topics created for isolated words
    orphan_topics: np.ndarray = field(default_factory=lambda: np.array([], dtype=np.int64))

    def doc_topic_counts(self) -> np.ndarray:
        """Token counts per (document, topic); rows sum to L_d."""
        _, _, counts, offsets = self.corpus.entry_arrays()
        doc_idx = np.repeat(np.arange(self.corpus.n_docs), np.diff(offsets))
        table = np.zeros((self.corpus.n_docs, self.n_topics))
        np.add.at(table, (doc_idx, self.entry_topic), counts)
        return table

    def topic_word_counts(self) -> np.ndarray:
        """n(w,t) as a (n_topics, n_words) table; sums to L_C."""
        _, word_idx, counts, _ = self.corpus.entry_arrays()
        table = np.zeros((self.n_topics, self.corpus.n_words))
        np.add.at(table, (self.entry_topic, word_idx), counts)
        return table

    def p_topic_given_doc(self) -> np.ndarray:
        table = self.doc_topic_counts()
        return table / table.sum(axis=1, keepdims=True)

    def p_topic(self) -> np.ndarray:
        """Marginal n(t)/L_C."""
        _, _, counts, _ = self.corpus.entry_arrays()
        totals = np.zeros(self.n_topics)
        np.add.at(totals, self.entry_topic, counts)
        return totals / self.corpus.total_tokens

    def doc_active_topics(self, d: int) -> np.ndarray:
        _, _, counts, offsets = self.corpus.entry_arrays()
        sl = slice(offsets[d], offsets[d + 1])
        return np.unique(self.entry_topic[sl])

    def word_active_topics(self, w: int) -> np.ndarray:
        _, word_idx, _, _ = self.corpus.entry_arrays()
        return np.unique(self.entry_topic[word_idx == w])

    def with_tau(self) -> "GuessState":
        """Return self with tau filled (computed once)."""
        if self.tau is not None:
            return self
        p_topic = self.p_topic()
        tau = np.array(
            [most_significant_topic(d, self, p_topic) for d in range(self.corpus.n_docs)],
            dtype=np.int64,
        )
        return replace(self, tau=tau)

    def to_model(self, corpus: Corpus | None = None) -> TopicModel:
        """Dense TopicModel snapshot of the guess."""
        corpus = corpus or self.corpus
        theta = self.p_topic_given_doc()
        word_counts = self.topic_word_counts()
        sums = word_counts.sum(axis=1, keepdims=True)
        beta = np.where(
            sums > 0.0, word_counts / np.maximum(sums, 1e-300), 1.0 / corpus.n_words
        )
        return TopicModel(
            theta, beta, np.ones(self.n_topics), derive_p_topic(theta, corpus.doc_lengths)
        )


def init_from_partition(corpus: Corpus, partition: Partition) -> GuessState:
    """Seed a guess from cluster labels.

    Words outside the partition (isolated in the graph) each become a
    provisional singleton topic after the clustered ones; orphan
    assignment later folds them into real topics.
    """
    label_by_word = np.full(corpus.n_words, -1, dtype=np.int64)
    if partition.nodes.size:
        label_by_word[partition.nodes] = partition.labels
    n_clusters = partition.n_clusters
    orphan_words = np.nonzero(label_by_word < 0)[0]
    label_by_word[orphan_words] = n_clusters + np.arange(orphan_words.size)
    _, word_idx, _, _ = corpus.entry_arrays()
    entry_topic = label_by_word[word_idx].copy()
    state = GuessState(
        corpus=corpus,
        entry_topic=entry_topic,
        n_topics=n_clusters + orphan_words.size,
        orphan_topics=n_clusters + np.arange(orphan_words.size),
    )
    return _compact_topics(state)


def _compact_topics(state: GuessState, keep_always: np.ndarray | None = None) -> GuessState:
    """Drop empty topic ids, relabeling densely in id order."""
    used = np.zeros(state.n_topics, dtype=bool)
    used[state.entry_topic] = True
    if keep_always is not None:
        used[keep_always] = True
    remap = np.cumsum(used) - 1
    surviving_orphans = state.orphan_topics[used[state.orphan_topics]]
    new_state = replace(
        state,
        entry_topic=remap[state.entry_topic],
        n_topics=int(used.sum()),
        tau=None if state.tau is None else remap[state.tau],
        orphan_topics=remap[surviving_orphans],
    )
    return new_state


def most_significant_topic(doc: int, state: GuessState, p_topic: np.ndarray) -> int:
    """Topic whose share of the document is hardest to explain by chance.

    Significance is the binomial upper tail P(X >= x) at n = L_d and
    success probability p(topic), with x the document's (rounded) token
    count for the topic.  Smallest tail wins; ties prefer the larger
    count, then the lower topic id.
    """
    _, _, counts, offsets = state.corpus.entry_arrays()
    sl = slice(offsets[doc], offsets[doc + 1])
    topics = state.entry_topic[sl]
    if topics.size == 0:
        raise DataError(f"document {doc} has no assigned topics")
    length = int(state.corpus.doc_lengths[doc])
    totals = np.zeros(state.n_topics)
    np.add.at(totals, topics, counts[sl])
    cand = np.nonzero(totals)[0]
    x = np.floor(length * (totals[cand] / length) + 0.5)  # round half up
    tails = binom.sf(x - 1.0, length, p_topic[cand])
    best = min(zip(tails, -x, cand))
    return int(best[2])


def eta_filter(state: GuessState, eta: float) -> GuessState:
    """Fold topics holding less than a fraction eta of a document into
    that document's most significant topic."""
    if not 0.0 <= eta <= 0.5:
        raise ConfigError("eta must lie in [0, 0.5]")
    state = state.with_tau()
    if eta == 0.0:
        return state
    _, _, counts, offsets = state.corpus.entry_arrays()
    doc_idx = np.repeat(np.arange(state.corpus.n_docs), np.diff(offsets))
    shares = state.doc_topic_counts() / state.corpus.doc_lengths[:, None]
    infrequent = (shares > 0.0) & (shares < eta)
    infrequent[np.arange(state.corpus.n_docs), state.tau] = False
    move = infrequent[doc_idx, state.entry_topic]
    entry_topic = state.entry_topic.copy()
    entry_topic[move] = state.tau[doc_idx[move]]
    return replace(state, entry_topic=entry_topic)


def plsa_loglik(state: GuessState, corpus: Corpus) -> float:
    """Mixture log-likelihood of the corpus under the guess.

    sum_{d,w} count * ln sum_t p(w|t) p(t|d) plus the document-choice
    term sum_d L_d ln(L_d / L_C).
    """
    doc_idx, word_idx, counts, _ = corpus.entry_arrays()
    theta = state.p_topic_given_doc()
    word_counts = state.topic_word_counts()
    sums = word_counts.sum(axis=1, keepdims=True)
    beta = np.where(sums > 0.0, word_counts / np.maximum(sums, 1e-300), 0.0)
    mix = np.einsum("et,et->e", theta[doc_idx], beta.T[word_idx])
    if np.any(mix <= 0.0):
        raise NumericalError("zero modeled probability for an observed word")
    lengths = corpus.doc_lengths
    doc_term = float(np.dot(lengths, np.log(lengths / corpus.total_tokens)))
    return float(np.dot(counts, np.log(mix))) + doc_term


def eta_sweep(state0: GuessState, corpus: Corpus) -> GuessState:
    """Try every threshold on the pristine state, keep the best.

    Thresholds run 0.00..0.50 in steps of 0.01; each is applied to
    state0 independently with state0's tau held fixed, and the state
    with the highest plsa_loglik is returned (ties prefer the smaller
    eta).  The winner's threshold lands in chosen_eta.
    """
    state0 = state0.with_tau()
    best_state = None
    best_value = -math.inf
    for eta in ETA_GRID:
        candidate = eta_filter(state0, eta)
        value = plsa_loglik(candidate, corpus)
        if value > best_value:
            best_value = value
            best_state = replace(candidate, chosen_eta=eta)
    return best_state


def assign_orphans(state: GuessState, corpus: Corpus) -> GuessState:
    """Fold singleton orphan topics into each document's dominant topic.

    Orphan topics are those created for isolated words (one word each).
    In every document with at least one clustered word, orphan-word
    counts move to the document's most significant clustered topic.
    Documents made purely of orphan words are left as they are.
    """
    orphan_topics = np.zeros(state.n_topics, dtype=bool)
    orphan_topics[state.orphan_topics] = True
    if not orphan_topics.any():
        return state
    _, _, counts, offsets = corpus.entry_arrays()
    doc_idx = np.repeat(np.arange(corpus.n_docs), np.diff(offsets))
    entry_topic = state.entry_topic.copy()
    masked = GuessState(corpus, entry_topic, state.n_topics)
    # significance over clustered topics only
    doc_counts = masked.doc_topic_counts()
    doc_counts[:, orphan_topics] = 0.0
    p_topic = masked.p_topic()
    p_topic[orphan_topics] = 0.0
    lengths = corpus.doc_lengths
    for d in range(corpus.n_docs):
        cand = np.nonzero(doc_counts[d])[0]
        if cand.size == 0:
            continue  # document made purely of orphan words
        x = doc_counts[d, cand]
        tails = binom.sf(x - 1.0, int(lengths[d]), p_topic[cand])
        target = int(min(zip(tails, -x, cand))[2])
        sl = slice(offsets[d], offsets[d + 1])
        here = entry_topic[sl]
        here[orphan_topics[here]] = target
        entry_topic[sl] = here
    return _compact_topics(
        GuessState(corpus, entry_topic, state.n_topics, orphan_topics=state.orphan_topics)
    )


def prune_small_topics(state: GuessState, min_docs: int = 0) -> GuessState:
    """Remove topics chosen as tau by fewer than min_docs documents.

    Topics never selected as any document's most significant topic are
    removed regardless of min_docs.  Each affected document's mass in a
    removed topic goes to its most significant surviving topic; if none
    of the document's topics survive, the globally largest surviving
    topic takes it.  At least one topic is always kept.
    """
    if min_docs < 0:
        raise ConfigError("min_docs must be >= 0")
    state = state.with_tau()
    corpus = state.corpus
    selection_counts = np.bincount(state.tau, minlength=state.n_topics)
    keep = (selection_counts > 0) & (selection_counts >= min_docs)
    if not keep.any():
        keep[int(np.argmax(selection_counts))] = True
    if keep.all():
        return state
    _, _, counts, offsets = corpus.entry_arrays()
    entry_topic = state.entry_topic.copy()
    tau = state.tau.copy()
    doc_counts = state.doc_topic_counts()
    p_topic = state.p_topic()
    totals = doc_counts.sum(axis=0)
    global_fallback = int(np.argmax(np.where(keep, totals, -1.0)))
    lengths = corpus.doc_lengths
    for d in range(corpus.n_docs):
        active = np.nonzero(doc_counts[d])[0]
        doomed = active[~keep[active]]
        if doomed.size == 0:
            continue
        cand = active[keep[active]]
        if cand.size:
            x = doc_counts[d, cand]
            tails = binom.sf(x - 1.0, int(lengths[d]), p_topic[cand])
            target = int(min(zip(tails, -x, cand))[2])
        else:
            target = global_fallback
        sl = slice(offsets[d], offsets[d + 1])
        here = entry_topic[sl]
        here[~keep[here]] = target
        entry_topic[sl] = here
        tau[d] = target if not keep[tau[d]] else tau[d]
    pruned = GuessState(
        corpus, entry_topic, state.n_topics, tau=tau, orphan_topics=state.orphan_topics
    )
    return _compact_topics(pruned, keep_always=np.nonzero(keep)[0])
