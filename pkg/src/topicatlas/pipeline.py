"""End-to-end topic discovery: graph, clustering, guess, refinement.

The full run chains the stages in a fixed order.  Word pairs that
co-occur more than chance allows become a weighted graph; two-level
codelength clustering cuts it into hard word groups; the groups seed a
probabilistic model whose weak per-document topics are folded away by
the likelihood sweep; variational inference with a small asymmetric
prior polishes the result.  Words left out of the graph join each
document's dominant topic, and topics that no document considers
dominant are dropped before the sweep so the filter cannot starve them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ._rng import DEFAULT_SEED
from .corpus import Corpus
from .errors import ConfigError
from .guess import (
    GuessState,
    assign_orphans,
    eta_sweep,
    init_from_partition,
    prune_small_topics,
)
from .infer import FitOptions, TopicModel, refine_with_lda
from .mapclust import Partition, cluster, codelength
from .wordgraph import DEFAULT_P_VALUE, WordGraph, build_graph


@dataclass
class PipelineOptions:
    """Knobs for a full topic-discovery run."""

    p_value: float = DEFAULT_P_VALUE
    trials: int = 10
    min_topic_docs: int = 0
    seed: int = DEFAULT_SEED
    refine: bool = True
    lda_opts: FitOptions | None = None

    def validate(self) -> None:
        if not 0.0 < self.p_value < 1.0:
            raise ConfigError("p_value must be in (0, 1)")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.min_topic_docs < 0:
            raise ConfigError("min_topic_docs must be >= 0")


@dataclass
class PipelineResult:
    """Everything a run produced, stage by stage."""

    model: TopicModel
    guess_model: TopicModel
    graph: WordGraph
    partition: Partition
    state: GuessState
    chosen_eta: float
    codelength: float
    trace: list[float] = field(default_factory=list)
    checkpoints: list[tuple[int, TopicModel]] = field(default_factory=list)
    stage_seconds: dict[str, float] = field(default_factory=dict)

    @property
    def n_topics(self) -> int:
        return self.model.n_topics

    def summary(self) -> dict:
        """Flat JSON-friendly record of what happened."""
        return {
            "n_topics": int(self.model.n_topics),
            "n_clusters": int(self.partition.n_clusters),
            "graph_edges": int(self.graph.n_edges),
            "isolated_words": int(self.graph.isolated.size),
            "codelength_bits": float(self.codelength),
            "chosen_eta": float(self.chosen_eta),
            "refine_iterations": len(self.trace),
            "stage_seconds": {k: float(v) for k, v in self.stage_seconds.items()},
        }


def topic_mapping(
    corpus: Corpus,
    options: PipelineOptions | None = None,
    progress_sink=None,
) -> PipelineResult:
    """Discover topics without being told how many to look for."""
    opts = options if options is not None else PipelineOptions()
    opts.validate()
    say = progress_sink if progress_sink is not None else (lambda _msg: None)
    seconds: dict[str, float] = {}

    start = time.perf_counter()
    graph = build_graph(corpus, opts.p_value, progress_sink=progress_sink)
    seconds["graph"] = time.perf_counter() - start
    say(f"graph: {graph.n_edges} significant edges, "
        f"{graph.isolated.size} isolated words")

    start = time.perf_counter()
    partition = cluster(graph, trials=opts.trials, seed=opts.seed)
    bits = codelength(graph, partition) if graph.n_edges > 0 else 0.0
    seconds["cluster"] = time.perf_counter() - start
    say(f"clustering: {partition.n_clusters} word groups "
        f"({bits:.3f} bits, {opts.trials} trials)")

    start = time.perf_counter()
    state = init_from_partition(corpus, partition)
    state = assign_orphans(state, corpus)
    state = prune_small_topics(state, min_docs=opts.min_topic_docs)
    state = eta_sweep(state, corpus)
    guess_model = state.to_model(corpus)
    seconds["guess"] = time.perf_counter() - start
    say(f"guess: {state.n_topics} topics at filter {state.chosen_eta:.2f}")

    trace: list[float] = []
    checkpoints: list[tuple[int, TopicModel]] = []
    model = guess_model
    if opts.refine:
        start = time.perf_counter()
        model, trace, checkpoints = refine_with_lda(state, corpus, opts.lda_opts)
        seconds["refine"] = time.perf_counter() - start
        say(f"refinement: {len(trace)} iterations")

    return PipelineResult(
        model=model,
        guess_model=guess_model,
        graph=graph,
        partition=partition,
        state=state,
        chosen_eta=float(state.chosen_eta),
        codelength=float(bits),
        trace=trace,
        checkpoints=checkpoints,
        stage_seconds=seconds,
    )
