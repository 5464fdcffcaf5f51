"""Command-line interface: generate, fit, eval, landscape, benchmark.

Every subcommand that writes into an output directory also writes a
manifest.json recording the resolved configuration and every seed, so a
run can be repeated bit-identically from the manifest alone.  Manifests
carry no timestamps or timings; variable information (stage seconds,
iteration counts) goes to summary.json instead.

Exit codes: 0 success, 2 bad configuration, 3 bad data, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys

from . import __version__
from ._rng import DEFAULT_SEED
from .bench import (
    ENGINES,
    dirichlet_grid,
    gain_curve,
    heldout_curve,
    language_sweep,
    measure_scaling,
    write_rows,
)
from .corpus import load_corpus, save_corpus
from .errors import ConfigError, DataError, NumericalError
from .evaluate import (
    bm_normalized,
    evaluate_pair,
    report_csv_header,
    report_csv_row,
    save_report,
)
from .infer import FitOptions, load_model, save_model, save_trace
from .landscape import (
    count_alt_models,
    hierarchy_competition,
    loglik_ratio,
    overfit_gain,
    overfit_gain_limit,
    symmetric_gap_root,
)
from .pipeline import PipelineOptions, topic_mapping
from .syngen import PRESETS, generate_preset, parse_spec_file
from .wordgraph import DEFAULT_P_VALUE

THREADS_ENV = "TOPICATLAS_THREADS"


def _resolve_threads(value: int | None) -> int:
    if value is not None:
        threads = value
    else:
        raw = os.environ.get(THREADS_ENV, "1")
        try:
            threads = int(raw)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if threads < 1:
        raise ConfigError("thread count must be >= 1")
    return threads


def _ensure_outdir(path: str) -> str:
    if not path:
        raise ConfigError("--output is required")
    os.makedirs(path, exist_ok=True)
    return path


def _write_json(payload: dict, path: str) -> None:
    with io.open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _manifest(subcommand: str, config: dict, outputs: list[str]) -> dict:
    return {
        "tool": "topicatlas",
        "version": __version__,
        "subcommand": subcommand,
        "config": config,
        "outputs": sorted(outputs),
    }


def _load_input_corpus(path: str):
    if not path:
        raise ConfigError("--input is required")
    if os.path.isdir(path):
        path = os.path.join(path, "corpus.txt")
    if not os.path.exists(path):
        raise DataError(f"corpus file not found: {path}")
    return load_corpus(path)


def cmd_generate(args) -> int:
    threads = _resolve_threads(args.threads)
    if bool(args.preset) == bool(args.input):
        raise ConfigError("generate needs exactly one of --preset or --input")
    outdir = _ensure_outdir(args.output)
    if args.preset:
        seed = args.seed if args.seed is not None else DEFAULT_SEED
        corpus, truth = generate_preset(args.preset, seed)
        config_echo: dict = {"preset": args.preset}
        spec = PRESETS[args.preset]
    else:
        spec, file_seed = parse_spec_file(args.input)
        seed = args.seed if args.seed is not None else (
            file_seed if file_seed is not None else DEFAULT_SEED
        )
        from .syngen import DirichletSpec, gen_dirichlet_corpus, gen_language_corpus

        if isinstance(spec, DirichletSpec):
            corpus, truth = gen_dirichlet_corpus(spec, seed)
        else:
            corpus, truth = gen_language_corpus(spec, seed)
        config_echo = {"spec_file": os.path.abspath(args.input)}
    config_echo.update(
        {
            "seed": seed,
            "threads": threads,
            "spec": {k: _jsonable(v) for k, v in vars(spec).items()},
        }
    )

    corpus_path = os.path.join(outdir, "corpus.txt")
    truth_path = os.path.join(outdir, "truth.model")
    save_corpus(corpus, corpus_path)
    save_model(truth.model, truth_path)
    meta = {
        "generic_words": int(truth.generic_words),
        "language_blocks": [list(b) for b in truth.language_blocks],
        "n_docs": corpus.n_docs,
        "n_words": corpus.n_words,
        "total_tokens": int(corpus.total_tokens),
    }
    config_echo["truth_metadata"] = meta
    _write_json(
        _manifest("generate", config_echo, ["corpus.txt", "truth.model"]),
        os.path.join(outdir, "manifest.json"),
    )
    print(f"wrote {corpus.n_docs} documents over {corpus.n_words} words to {outdir}")
    return 0


def _jsonable(value):
    import numpy as np

    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    return value


def cmd_fit(args) -> int:
    threads = _resolve_threads(args.threads)
    corpus = _load_input_corpus(args.input)
    outdir = _ensure_outdir(args.output)
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    engine = args.engine
    outputs = ["model.txt", "manifest.json"]
    config = {
        "engine": engine,
        "input": os.path.abspath(args.input),
        "seed": seed,
        "threads": threads,
    }
    summary: dict = {}

    if engine == "topicmap":
        if args.k is not None:
            raise ConfigError("engine topicmap discovers K; drop --k")
        opts = PipelineOptions(
            p_value=args.p_value,
            trials=args.trials,
            min_topic_docs=args.min_topic_docs,
            seed=seed,
            lda_opts=FitOptions(seed=seed, checkpoint_every=args.checkpoint_every),
        )
        config.update(
            {
                "p_value": args.p_value,
                "trials": args.trials,
                "min_topic_docs": args.min_topic_docs,
                "checkpoint_every": args.checkpoint_every,
            }
        )
        result = topic_mapping(corpus, opts, progress_sink=lambda m: print(m))
        save_model(result.model, os.path.join(outdir, "model.txt"))
        save_model(result.guess_model, os.path.join(outdir, "guess.model"))
        outputs.append("guess.model")
        if result.trace:
            save_trace(result.trace, os.path.join(outdir, "trace.csv"))
            outputs.append("trace.csv")
        for iteration, checkpoint in result.checkpoints:
            name = f"checkpoint_{iteration:04d}.model"
            save_model(checkpoint, os.path.join(outdir, name))
            outputs.append(name)
        summary = result.summary()
    elif engine in ("lda", "plsa"):
        if args.k is None:
            raise ConfigError(f"engine {engine} needs --k")
        fit_opts = FitOptions(
            init=args.init,
            seed=seed,
            min_topic_docs=args.min_topic_docs,
            checkpoint_every=args.checkpoint_every,
        )
        config.update({"k": args.k, "init": args.init})
        if engine == "lda":
            from .infer import lda_fit

            model, trace = lda_fit(corpus, args.k, fit_opts)
        else:
            from .infer import plsa_fit

            model, trace = plsa_fit(corpus, args.k, fit_opts)
        save_model(model, os.path.join(outdir, "model.txt"))
        save_trace(trace, os.path.join(outdir, "trace.csv"))
        outputs.append("trace.csv")
        summary = {"n_topics": model.n_topics, "iterations": len(trace)}
    else:
        raise ConfigError(f"unknown engine {engine!r}")

    _write_json(_manifest("fit", config, outputs), os.path.join(outdir, "manifest.json"))
    _write_json(summary, os.path.join(outdir, "summary.json"))
    print(f"fit ({engine}): {summary.get('n_topics')} topics -> {outdir}")
    return 0


def _collect_model_paths(entries: list[str]) -> list[str]:
    paths = []
    for entry in entries:
        if os.path.isdir(entry):
            found = sorted(
                os.path.join(entry, name)
                for name in os.listdir(entry)
                if name.endswith(".model") or name == "model.txt"
            )
            if not found:
                raise DataError(f"no model files in directory {entry}")
            paths.extend(found)
        else:
            paths.append(entry)
    return paths


def cmd_eval(args) -> int:
    threads = _resolve_threads(args.threads)
    corpus = _load_input_corpus(args.input)
    outdir = _ensure_outdir(args.output)
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    model_paths = _collect_model_paths(args.models)
    if not model_paths:
        raise ConfigError("eval needs at least one model file")
    models = [load_model(path) for path in model_paths]
    for path, model in zip(model_paths, models):
        if model.n_docs != corpus.n_docs:
            raise DataError(f"{path}: model documents do not match the corpus")
    heldout = load_corpus(args.heldout) if args.heldout else None
    truth = load_model(args.truth) if args.truth else None

    lines = []
    outputs = ["eval.csv", "manifest.json"]
    rows = []
    if truth is not None:
        for i, (path, model) in enumerate(zip(model_paths, models)):
            report = evaluate_pair(
                model, truth, corpus, shuffles=args.shuffles, seed=seed, heldout=heldout
            )
            name = f"truth_{i}.txt"
            save_report(report, os.path.join(outdir, name))
            outputs.append(name)
            rows.append(("accuracy", os.path.basename(path), "truth", report))
    for i in range(len(models)):
        for j in range(i + 1, len(models)):
            report = evaluate_pair(
                models[i], models[j], corpus, shuffles=args.shuffles, seed=seed
            )
            name = f"pair_{i}_{j}.txt"
            save_report(report, os.path.join(outdir, name))
            outputs.append(name)
            rows.append(
                (
                    "reproducibility",
                    os.path.basename(model_paths[i]),
                    os.path.basename(model_paths[j]),
                    report,
                )
            )
    if not rows:
        raise ConfigError("nothing to evaluate: give two models or --truth")

    csv_path = os.path.join(outdir, "eval.csv")
    with io.open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("kind,model_a,model_b," + report_csv_header() + "\n")
        for kind, a, b, report in rows:
            fh.write(f"{kind},{a},{b}," + report_csv_row(report) + "\n")
            lines.append(f"{kind} {a} vs {b}: bm_n={report.bm_n:.4f}")

    config = {
        "input": os.path.abspath(args.input),
        "models": [os.path.abspath(p) for p in model_paths],
        "truth": os.path.abspath(args.truth) if args.truth else None,
        "heldout": os.path.abspath(args.heldout) if args.heldout else None,
        "shuffles": args.shuffles,
        "seed": seed,
        "threads": threads,
    }
    _write_json(_manifest("eval", config, outputs), os.path.join(outdir, "manifest.json"))
    for line in lines:
        print(line)
    return 0


def cmd_landscape(args) -> int:
    doc_length = args.doc_length
    n_words = args.n_words
    gain = overfit_gain(doc_length, n_words)
    panel = {
        "doc_length": doc_length,
        "n_words": n_words,
        "overfit_gain": {
            "gain": gain.gain,
            "a_opt": gain.a_opt,
            "threshold_opt": gain.threshold_opt,
        },
        "overfit_gain_limit": overfit_gain_limit(doc_length, n_words),
        "symmetric_gap_root": symmetric_gap_root(doc_length, n_words),
        "loglik_ratio_example": loglik_ratio(0.2, 1000),
        "alt_models_log10": {
            "n1000_a7": count_alt_models(1000, 7),
            "n1000_a500": count_alt_models(1000, 500),
        },
    }
    hier = hierarchy_competition(0.5, 0.01, 50, 900, doc_length=max(doc_length, 2))
    panel["hierarchy_thresholds"] = {
        "symmetric": hier.symmetric_threshold,
        "asymmetric": hier.asymmetric_threshold,
    }
    text = json.dumps(panel, indent=2, sort_keys=True) + "\n"
    if args.output:
        outdir = os.path.dirname(os.path.abspath(args.output))
        os.makedirs(outdir, exist_ok=True)
        with io.open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        print(f"wrote landscape panel to {args.output}")
    else:
        sys.stdout.write(text)
    return 0


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise ConfigError(f"{flag} expects a comma-separated integer list, got {text!r}")


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise ConfigError(f"{flag} expects a comma-separated number list, got {text!r}")


def cmd_benchmark(args) -> int:
    threads = _resolve_threads(args.threads)
    outdir = _ensure_outdir(args.output)
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    engines = args.engines.split(",") if args.engines else list(ENGINES)
    preset = args.preset
    config = {
        "preset": preset,
        "seed": seed,
        "threads": threads,
        "engines": engines,
        "runs": args.runs,
    }

    if preset == "language-sweep":
        d_values = _parse_int_list(args.d_values or "1000", "--d-values")
        rows = language_sweep(
            d_values,
            engines=engines,
            runs=args.runs,
            seed=seed,
            n_langs=args.n_langs,
            doc_length=args.doc_length,
            words_per_lang=args.words_per_lang,
            max_iters=args.max_iters,
            trials=args.trials,
        )
        config.update({"d_values": d_values, "n_langs": args.n_langs})
    elif preset == "dirichlet-grid":
        alphas = _parse_float_list(args.alphas or "0.001", "--alphas")
        fractions = _parse_float_list(args.generic_fractions or "0.25", "--generic-fractions")
        rows = dirichlet_grid(
            alphas,
            fractions,
            engines=engines,
            runs=args.runs,
            seed=seed,
            n_docs=args.n_docs,
            doc_length=args.doc_length,
            n_words=args.n_words,
            n_topics=args.k or 20,
            max_iters=args.max_iters,
            trials=args.trials,
        )
        config.update({"alphas": alphas, "generic_fractions": fractions})
    elif preset == "heldout-scan":
        corpus = _load_input_corpus(args.input)
        k_list = _parse_int_list(args.k_values or "5,10,15,20", "--k-values")
        rows = heldout_curve(
            corpus, k_list, opts=FitOptions(seed=seed, max_iters=args.max_iters)
        )
        config.update({"k_values": k_list, "input": os.path.abspath(args.input)})
    elif preset == "gain-curve":
        d_values = _parse_int_list(args.d_values or "5,10,20,40,80", "--d-values")
        n_words = args.n_words
        rows = gain_curve([(length, n_words) for length in d_values])
        config.update({"doc_lengths": d_values, "n_words": n_words})
    elif preset == "scaling":
        d_values = _parse_int_list(args.d_values or "200,400,800", "--d-values")
        k_list = _parse_int_list(args.k_values or "20", "--k-values")
        result = measure_scaling(
            d_values, k_list, engines=engines, seed=seed, max_iters=args.max_iters,
            trials=args.trials,
        )
        rows = result["rows"]
        config.update({"d_values": d_values, "k_values": k_list, "slopes": result["slopes"]})
    else:
        raise ConfigError(f"unknown benchmark preset {preset!r}")

    csv_path = os.path.join(outdir, "benchmark.csv")
    write_rows(rows, csv_path)
    _write_json(
        _manifest("benchmark", config, ["benchmark.csv", "manifest.json"]),
        os.path.join(outdir, "manifest.json"),
    )
    print(f"benchmark {preset}: {len(rows)} rows -> {csv_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topicatlas",
        description="Topic discovery via significant word co-occurrence clustering, with LDA/PLSA baselines.",
    )
    parser.add_argument("--version", action="version", version=f"topicatlas {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None, help="RNG seed (default 42)")
        p.add_argument(
            "--threads",
            type=int,
            default=None,
            help=f"worker threads (default ${THREADS_ENV} or 1); recorded for provenance",
        )

    gen = sub.add_parser("generate", help="write a synthetic corpus and its true model")
    gen.add_argument("--preset", choices=sorted(PRESETS), default=None)
    gen.add_argument("--input", default=None, help="'key value' spec file")
    gen.add_argument("--output", required=True, help="output directory")
    common(gen)
    gen.set_defaults(func=cmd_generate)

    fit = sub.add_parser("fit", help="fit a topic model to a corpus")
    fit.add_argument("--input", required=True, help="corpus file or directory")
    fit.add_argument("--output", required=True, help="output directory")
    fit.add_argument("--engine", choices=("topicmap", "lda", "plsa"), default="topicmap")
    fit.add_argument("--k", type=int, default=None, help="topic count (baselines only)")
    fit.add_argument("--init", choices=("random", "seeded"), default="random")
    fit.add_argument("--p-value", type=float, default=DEFAULT_P_VALUE)
    fit.add_argument("--min-topic-docs", type=int, default=0)
    fit.add_argument("--trials", type=int, default=10, help="clustering restarts")
    fit.add_argument("--checkpoint-every", type=int, default=5)
    common(fit)
    fit.set_defaults(func=cmd_fit)

    ev = sub.add_parser("eval", help="compare fitted models (and truth) on a corpus")
    ev.add_argument("models", nargs="+", help="model files or run directories")
    ev.add_argument("--input", required=True, help="corpus the models were fitted on")
    ev.add_argument("--output", required=True, help="output directory")
    ev.add_argument("--truth", default=None, help="true model file for accuracy rows")
    ev.add_argument("--heldout", default=None, help="held-out corpus for perplexity")
    ev.add_argument("--shuffles", type=int, default=20)
    common(ev)
    ev.set_defaults(func=cmd_eval)

    land = sub.add_parser("landscape", help="analytic likelihood-landscape panel")
    land.add_argument("--doc-length", type=int, default=10)
    land.add_argument("--n-words", type=int, default=20)
    land.add_argument("--output", default=None, help="JSON file (default stdout)")
    common(land)
    land.set_defaults(func=cmd_landscape)

    ben = sub.add_parser("benchmark", help="accuracy/runtime sweeps to CSV")
    ben.add_argument(
        "--preset",
        required=True,
        choices=("language-sweep", "dirichlet-grid", "heldout-scan", "gain-curve", "scaling"),
    )
    ben.add_argument("--output", required=True, help="output directory")
    ben.add_argument("--input", default=None, help="corpus (heldout-scan preset)")
    ben.add_argument("--engines", default=None, help="comma list; default all")
    ben.add_argument("--runs", type=int, default=5)
    ben.add_argument("--d-values", default=None, help="comma list of document counts")
    ben.add_argument("--k-values", default=None, help="comma list of topic counts")
    ben.add_argument("--alphas", default=None, help="comma list of mixing values")
    ben.add_argument("--generic-fractions", default=None, help="comma list")
    ben.add_argument("--n-langs", type=int, default=10)
    ben.add_argument("--doc-length", type=int, default=100)
    ben.add_argument("--words-per-lang", type=int, default=1000)
    ben.add_argument("--n-docs", type=int, default=1000)
    ben.add_argument("--n-words", type=int, default=2000)
    ben.add_argument("--k", type=int, default=None)
    ben.add_argument("--max-iters", type=int, default=200)
    ben.add_argument("--trials", type=int, default=10)
    common(ben)
    ben.set_defaults(func=cmd_benchmark)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
