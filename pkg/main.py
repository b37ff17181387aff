"""
Code Curator - instruction-data curation and padding-aware batch planning

This application:
1. Loads an instruction dataset and renders complete prompts
2. Embeds instructions and partitions them with K-Means
3. Scores instruction-following difficulty (IFD) per sample
4. Selects the top IFD share of every cluster (or a baseline strategy)
5. Plans training batches under three padding strategies and reports the waste

Usage:
    python main.py pipeline                     # All stages with defaults
    python main.py --config run.toml select     # One stage, reading earlier stage outputs
    python main.py bench-selectors --synthetic-points 5000 --dim 64
    python main.py sweep-m --m-values 10 20 30 40 50 60
    python scripts/run_once.py                  # Pipeline on the bundled toy corpus
    python scripts/validate_inputs.py data/toy_corpus.jsonl
"""

import argparse
import logging
import shutil
import statistics
import sys
from datetime import timedelta
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import ValidationError

from clustering.kmeans import ClusterModel, kmeans
from clustering.store import read_clusters, write_clusters
from common.config import (MAX_LEN_PRESETS, AppSettings, PipelineConfig, dump_pipeline_config,
                           get_settings, load_pipeline_config, reload_settings, validate_config)
from common.errors import EXIT_FAILURE, EXIT_OK, ConfigError, CuratorError, InputError, StageError
from common.logging_setup import StructuredLogger, setup_logging
from common.utils_time import Stopwatch, format_duration
from corpus.code_check import audit_code_blocks
from corpus.loader import Corpus, load_dataset
from corpus.render import PromptTemplate, TokenizerSpec, build_token_counter, render_corpus
from corpus.stats import corpus_stats
from embedding.hashed_tfidf import embed_hashed_tfidf
from embedding.store import EmbeddingMatrix, load_embeddings, normalize_rows, write_embeddings
from output.formatters import format_report
from packing.planner import plan, plan_dynamic, plan_traditional
from packing.plans import SampleLength
from packing.report import efficiency_report
from packing.store import write_manifest
from scoring.ngram import train_ngram
from scoring.perplexity import ScoreRecord, drop_ifd_above, score_samples
from scoring.store import load_logprob_file, write_scores
from selection.apportion import check_m_percent, target_size
from selection.baselines import run_strategy
from selection.cdas import SelectionResult, nesting_violations
from selection.store import read_selection, write_selection
from storage.artifacts import ArtifactStore, read_json, read_jsonl, write_json, write_jsonl

STAGES = ("ingest", "embed", "cluster", "score", "select", "pack", "report")
BENCH_STRATEGIES = ("kmeans-cdas", "kcenter", "graph-density", "random", "complexity", "diversity")


class CurationPipeline:
    """
    Runs the curation stages against one artifact directory.

    Each stage reads only the config and files written by earlier stages, so
    any stage can be re-run on its own.
    """

    def __init__(self, config: PipelineConfig, settings: Optional[AppSettings] = None):
        """Initialize the pipeline for a validated configuration."""
        self.logger = logging.getLogger(__name__)
        self.events = StructuredLogger(__name__)
        self.settings = settings or get_settings()
        self.config = config
        self.store = ArtifactStore(config.output_dir, self.settings.TZ)
        self.threads = self.settings.THREADS
        self.progress = not self.settings.QUIET
        self._corpus: Optional[Corpus] = None
        self.failure: Optional[StageError] = None

    # --- shared inputs -------------------------------------------------

    @property
    def template(self) -> PromptTemplate:
        section = self.config.dataset.template
        return PromptTemplate(section.prompt_input, section.prompt_no_input)

    def corpus(self) -> Corpus:
        """Dataset from the config, minus unparsable-code samples when configured."""
        if self._corpus is None:
            dataset = self.config.dataset
            corpus = load_dataset(dataset.path, dataset.schema_name)
            if dataset.drop_unparsable_code:
                bad = set(audit_code_blocks(corpus).unparsable_ids)
                if bad:
                    self.logger.warning(f"Dropping {len(bad)} samples with unparsable Python code")
                    corpus = corpus.subset(i for i in corpus.ids if i not in bad)
            self._corpus = corpus
        return self._corpus

    def resolve(self) -> PipelineConfig:
        """Fill data-dependent defaults and write resolved_config.toml."""
        self.config = self.config.resolved(len(self.corpus()))
        dump_pipeline_config(self.config, self.store.path(ArtifactStore.RESOLVED_CONFIG))
        return self.config

    def _embeddings(self, stage: str) -> EmbeddingMatrix:
        return load_embeddings(self.store.require(ArtifactStore.EMBEDDINGS, stage), self.corpus())

    def _clusters(self, emb: EmbeddingMatrix) -> ClusterModel:
        return read_clusters(self.store.require(ArtifactStore.CLUSTERS, "select"),
                             self.store.require(ArtifactStore.CENTROIDS, "select"), emb)

    def _scores(self) -> Dict[int, ScoreRecord]:
        return load_logprob_file(self.store.require(ArtifactStore.SCORES, "select"), self.corpus())

    def _sample_lengths(self) -> Dict[int, SampleLength]:
        _, records = read_jsonl(self.store.require(ArtifactStore.SAMPLES, "pack"))
        return {int(r["id"]): SampleLength(int(r["id"]), int(r["total_tokens"])) for r in records}

    def _selected_samples(self, stage: str) -> tuple:
        selection = read_selection(self.store.require(ArtifactStore.SELECTION, stage))
        lengths = self._sample_lengths()
        missing = [i for i in selection.selected_ids if i not in lengths]
        if missing:
            raise InputError(f"selection ids missing from {ArtifactStore.SAMPLES}: {missing[:10]}")
        return selection, [lengths[i] for i in selection.selected_ids]

    # --- stages ----------------------------------------------------------

    def ingest(self) -> int:
        corpus = self.corpus()
        tokenizer = self.config.dataset.tokenizer
        counter = build_token_counter(TokenizerSpec(tokenizer.kind, tokenizer.external_path), corpus)
        samples = render_corpus(corpus, self.template, counter)
        write_jsonl(self.store.path(ArtifactStore.SAMPLES), ({
            "id": s.id,
            "prompt_tokens": s.prompt_tokens,
            "response_tokens": s.response_tokens,
            "total_tokens": s.total_tokens,
        } for s in samples))
        write_json(self.store.path(ArtifactStore.CORPUS_STATS), corpus_stats(samples).to_dict())

        audit = audit_code_blocks(load_dataset(self.config.dataset.path, self.config.dataset.schema_name))
        write_json(self.store.path(ArtifactStore.CODE_AUDIT), audit.to_dict())
        if audit.unparsable_ids and not self.config.dataset.drop_unparsable_code:
            self.events.log_warning(f"{len(audit.unparsable_ids)} samples carry Python blocks that do not parse",
                                    {"unparsable": len(audit.unparsable_ids)})
        return len(samples)

    def embed(self) -> int:
        section = self.config.embedding
        if section.source == "file":
            emb = load_embeddings(section.path, self.corpus())
        else:
            emb = embed_hashed_tfidf(self.corpus(), dim=section.dim, seed=section.seed,
                                     template=self.template, threads=self.threads)
        write_embeddings(emb, self.store.path(ArtifactStore.EMBEDDINGS))
        return len(emb)

    def cluster(self) -> int:
        section = self.config.clustering
        emb = self._embeddings("cluster")
        model = kmeans(emb, section.k, seed=section.seed, max_iters=section.max_iters, tol=section.tol,
                       threads=self.threads)
        write_clusters(model, self.store.path(ArtifactStore.CLUSTERS), self.store.path(ArtifactStore.CENTROIDS))
        return model.k

    def score(self) -> int:
        section = self.config.scoring
        if section.provider == "file":
            scores = load_logprob_file(section.path, self.corpus())
        else:
            lm = train_ngram(self.corpus(), order=section.order, add_k=section.add_k, template=self.template)
            samples = render_corpus(self.corpus(), self.template)
            scores = score_samples(samples, lm, threads=self.threads, progress=self.progress)
        write_scores(scores, self.store.path(ArtifactStore.SCORES))
        return len(scores)

    def select(self) -> int:
        section = self.config.selection
        strategy = section.strategy
        corpus = self.corpus()

        needs_scores = strategy in ("cdas", "complexity") or self.config.scoring.drop_ifd_above is not None
        scores = self._scores() if needs_scores or self.store.has(ArtifactStore.SCORES) else None
        needs_emb = strategy in ("cdas", "diversity", "kcenter", "graph-density")
        emb = self._embeddings("select") if needs_emb or self.store.has(ArtifactStore.CLUSTERS) else None
        clusters = None
        if strategy in ("cdas", "diversity") or (emb is not None and self.store.has(ArtifactStore.CLUSTERS)):
            clusters = self._clusters(emb)

        pool, dropped = corpus.ids, []
        if self.config.scoring.drop_ifd_above is not None:
            pool, dropped = drop_ifd_above(scores, self.config.scoring.drop_ifd_above)

        result = run_strategy(strategy, m_percent=section.m_percent, seed=section.seed, corpus=corpus,
                              emb=emb, clusters=clusters, scores=scores, pool=pool, dropped=dropped,
                              knn=section.knn, gamma=section.gamma, progress=self.progress)
        write_selection(result, self.store.path(ArtifactStore.SELECTION))
        return len(result)

    def pack(self) -> int:
        section = self.config.packing
        _, samples = self._selected_samples("pack")
        packed = plan(section.strategy, samples, section.max_len, section.batch_size, section.separator_cost,
                      global_pack=section.global_pack, threads=self.threads, progress=self.progress)
        packed.validate(s.id for s in samples)
        write_manifest(packed, self.store.path(ArtifactStore.MANIFEST))
        return packed.total_sequences

    def report(self) -> int:
        section = self.config.packing
        selection, samples = self._selected_samples("report")
        plans = [
            plan_traditional(samples, section.max_len, section.batch_size),
            plan_dynamic(samples, section.max_len, section.batch_size),
            plan("dynamic-pack", samples, section.max_len, section.batch_size, section.separator_cost,
                 global_pack=section.global_pack, threads=self.threads),
        ]
        ids = [s.id for s in samples]
        for p in plans:
            p.validate(ids)
        report = efficiency_report(plans)

        stats = None
        if self.store.has(ArtifactStore.CORPUS_STATS):
            stats = _read_json_quiet(self.store.path(ArtifactStore.CORPUS_STATS))
        write_json(self.store.path(ArtifactStore.REPORT_JSON), {
            "selection": {
                "strategy": selection.strategy,
                "m_percent": selection.m_percent,
                "count": len(selection),
                "pool_size": selection.pool_size,
                "dropped": len(selection.dropped_ids),
                "per_cluster": {str(c): list(v) for c, v in sorted(selection.per_cluster_counts.items())},
            },
            "packing": {
                "max_len": section.max_len,
                "batch_size": section.batch_size,
                "separator_cost": section.separator_cost,
                "global": section.global_pack,
            },
            "padding": report.to_dict(),
        })
        with open(self.store.path(ArtifactStore.REPORT_TEXT), "w", encoding="utf-8", newline="\n") as f:
            f.write(format_report(report, selection, stats))
        return len(plans)

    # --- orchestration ---------------------------------------------------

    def run(self, stages: Sequence[str] = STAGES) -> int:
        """
        Run stages in order.

        Returns:
            int: process exit code (0 ok, 2 input error, 3 invariant violation)
        """
        unknown = [s for s in stages if s not in STAGES]
        if unknown:
            raise InputError(f"unknown stages: {unknown}")

        self.failure = None
        self.store.clear_failed()
        current = stages[0] if stages else "resolve"
        elapsed = 0.0
        try:
            self.resolve()
            for stage in stages:
                current = stage
                self.logger.info(f"Stage {stage} starting...")
                with Stopwatch() as watch:
                    produced = getattr(self, stage)()
                self.events.log_stage(stage, len(self.corpus()), produced, watch.elapsed)
                self.store.record_stage(stage, watch.elapsed, output_count=produced)
                elapsed += watch.elapsed
        except CuratorError as e:
            return self._fail(StageError(current, e))
        except Exception as e:
            self.logger.exception(f"Unexpected error in stage {current}")
            return self._fail(StageError(current, e))
        finally:
            self.store.write_metadata(output_dir=str(self.store.root))

        self.logger.info(f"Pipeline finished in {format_duration(timedelta(seconds=elapsed))}: "
                         f"{', '.join(stages)} -> {self.store.root}")
        return EXIT_OK

    def _fail(self, error: StageError) -> int:
        self.failure = error
        self.store.mark_failed(error.stage, str(error.cause))
        self.events.log_error(str(error), {"stage": error.stage})
        print(str(error), file=sys.stderr)
        return error.exit_code


def run_pipeline(config: PipelineConfig, settings: Optional[AppSettings] = None) -> Path:
    """
    Run every stage and return the artifact directory.

    Raises:
        StageError: naming the failed stage; its exit_code follows the cause
    """
    pipeline = CurationPipeline(config, settings)
    if pipeline.run(STAGES) != EXIT_OK:
        raise pipeline.failure
    return pipeline.store.root


def _read_json_quiet(path: Path) -> Optional[dict]:
    try:
        return read_json(path)
    except (InputError, ValueError):
        return None


# --- benchmarks ---------------------------------------------------------------


def synthetic_embeddings(n_points: int, dim: int, seed: int = 0, centers: int = 20) -> EmbeddingMatrix:
    """Unit-norm points drawn around `centers` random directions."""
    rng = np.random.default_rng(seed)
    means = rng.normal(size=(centers, dim))
    labels = rng.integers(centers, size=n_points)
    points = means[labels] + 0.35 * rng.normal(size=(n_points, dim))
    vectors, _ = normalize_rows(points)
    return EmbeddingMatrix(np.arange(n_points), vectors)


def synthetic_scores(ids: Sequence[int], seed: int = 0) -> Dict[int, ScoreRecord]:
    rng = np.random.default_rng(seed + 1)
    ratios = rng.lognormal(mean=-0.3, sigma=0.4, size=len(ids))
    return {int(i): ScoreRecord.from_perplexities(int(i), float(r) * 10.0, 10.0) for i, r in zip(ids, ratios)}


def bench_selectors(config: PipelineConfig, strategies: Sequence[str], repeats: int = 5,
                    synthetic_points: Optional[int] = None, dim: int = 64,
                    settings: Optional[AppSettings] = None) -> pd.DataFrame:
    """
    Time selection strategies and compare their subsets with kmeans-cdas.

    Returns:
        DataFrame: one row per requested strategy with count, jaccard_vs_cdas,
                   median_seconds and repeats
    """
    logger = logging.getLogger(__name__)
    unknown = [s for s in strategies if s not in BENCH_STRATEGIES]
    if unknown:
        raise InputError(f"unknown strategies {unknown}; choose from {', '.join(BENCH_STRATEGIES)}")
    if repeats < 1:
        raise InputError(f"repeats must be >= 1, got {repeats}")
    settings = settings or get_settings()
    selection = config.selection
    check_m_percent(selection.m_percent)

    corpus = None
    if synthetic_points is not None:
        emb = synthetic_embeddings(synthetic_points, dim, seed=config.embedding.seed)
        scores = synthetic_scores([int(i) for i in emb.ids], seed=config.embedding.seed)
    else:
        pipeline = CurationPipeline(config, settings)
        corpus = pipeline.corpus()
        emb = embed_hashed_tfidf(corpus, dim=config.embedding.dim, seed=config.embedding.seed,
                                 template=pipeline.template, threads=settings.THREADS)
        lm = train_ngram(corpus, config.scoring.order, config.scoring.add_k, pipeline.template)
        scores = score_samples(render_corpus(corpus, pipeline.template), lm, threads=settings.THREADS)
    pool = [int(i) for i in emb.ids]
    k = config.resolved(len(pool)).clustering.k
    cl = config.clustering

    def clustered() -> ClusterModel:
        return kmeans(emb, k, seed=cl.seed, max_iters=cl.max_iters, tol=cl.tol, threads=settings.THREADS)

    runners: Dict[str, Callable[[], SelectionResult]] = {
        "kmeans-cdas": lambda: run_strategy("cdas", m_percent=selection.m_percent, clusters=clustered(),
                                            scores=scores, pool=pool),
        "kcenter": lambda: run_strategy("kcenter", m_percent=selection.m_percent, seed=selection.seed,
                                        emb=emb, pool=pool),
        "graph-density": lambda: run_strategy("graph-density", m_percent=selection.m_percent, emb=emb,
                                              pool=pool, knn=selection.knn, gamma=selection.gamma),
        "random": lambda: run_strategy("random", m_percent=selection.m_percent, seed=selection.seed,
                                       pool=pool),
        "complexity": lambda: run_strategy("complexity", m_percent=selection.m_percent, scores=scores,
                                           pool=pool),
        "diversity": lambda: run_strategy("diversity", m_percent=selection.m_percent, seed=selection.seed,
                                          clusters=clustered(), pool=pool),
    }

    reference = runners["kmeans-cdas"]().id_set
    rows = []
    for strategy in strategies:
        times: List[float] = []
        result = None
        for _ in range(repeats):
            with Stopwatch() as watch:
                result = runners[strategy]()
            times.append(watch.elapsed)
        chosen = result.id_set
        jaccard = len(chosen & reference) / len(chosen | reference) if chosen | reference else 1.0
        rows.append({
            "strategy": strategy,
            "count": len(result),
            "jaccard_vs_cdas": jaccard,
            "median_seconds": statistics.median(times),
            "repeats": repeats,
        })
        logger.info(f"bench {strategy}: {len(result)} ids, median {statistics.median(times):.4f}s")

    table = pd.DataFrame(rows, columns=["strategy", "count", "jaccard_vs_cdas", "median_seconds", "repeats"])
    table.attrs["points"] = len(pool)
    return table


def _sweep_failure(message: str, code: int) -> CuratorError:
    error = CuratorError(message)
    error.exit_code = code
    return error


def sweep_m(config: PipelineConfig, m_values: Sequence[float], settings: Optional[AppSettings] = None) -> dict:
    """
    Run selection, packing and report once per sampling rate.

    Upstream stages run once in the output directory; each rate gets its own
    sub-directory m_<rate> seeded with copies of the upstream artifacts.

    Returns:
        dict: the sweep summary also written to sweep_summary.json
    """
    logger = logging.getLogger(__name__)
    if not m_values:
        raise InputError("sweep-m needs at least one m value")
    for m in m_values:
        check_m_percent(m)
    settings = settings or get_settings()

    base = CurationPipeline(config, settings)
    code = base.run(("ingest", "embed", "cluster", "score"))
    if code != EXIT_OK:
        raise _sweep_failure(f"upstream stages failed in {base.store.root}", code)

    upstream = (ArtifactStore.SAMPLES, ArtifactStore.CORPUS_STATS, ArtifactStore.CODE_AUDIT,
                ArtifactStore.EMBEDDINGS, ArtifactStore.CLUSTERS, ArtifactStore.CENTROIDS, ArtifactStore.SCORES)
    results: List[SelectionResult] = []
    entries = []
    for m in sorted(m_values, key=float):
        sub_dir = Path(config.output_dir) / f"m_{float(m):g}"
        sub_dir.mkdir(parents=True, exist_ok=True)
        for name in upstream:
            if base.store.has(name):
                shutil.copyfile(base.store.path(name), sub_dir / name)
        sub_config = base.config.model_copy(update={
            "output_dir": str(sub_dir),
            "selection": base.config.selection.model_copy(update={"m_percent": float(m)}),
        })
        sub = CurationPipeline(sub_config, settings)
        code = sub.run(("select", "pack", "report"))
        if code != EXIT_OK:
            raise _sweep_failure(f"m={float(m):g} failed, see {sub_dir / ArtifactStore.FAILED}", code)

        result = read_selection(sub.store.path(ArtifactStore.SELECTION))
        padding = _read_json_quiet(sub.store.path(ArtifactStore.REPORT_JSON)) or {}
        ratios = {name: row["padding_ratio"]
                  for name, row in padding.get("padding", {}).get("strategies", {}).items()}
        results.append(result)
        entries.append({
            "m_percent": float(m),
            "directory": sub_dir.name,
            "count": len(result),
            "expected_count": target_size(result.pool_size, m),
            "padding_ratio": ratios,
        })

    violations = []
    for smaller, larger in zip(results, results[1:]):
        broken = nesting_violations(smaller, larger)
        if broken:
            violations.append({
                "from_m": smaller.m_percent,
                "to_m": larger.m_percent,
                "clusters": {str(c): ids for c, ids in sorted(broken.items())},
            })
    summary = {
        "strategy": base.config.selection.strategy,
        "runs": entries,
        "nesting_violations": sum(len(ids) for v in violations for ids in v["clusters"].values()),
        "violations": violations,
    }
    write_json(Path(config.output_dir) / "sweep_summary.json", summary)
    logger.info(f"sweep-m over {len(entries)} rates: {summary['nesting_violations']} nesting violations")
    return summary


# --- command line ---------------------------------------------------------------


def _global_options(parser: argparse.ArgumentParser) -> None:
    # SUPPRESS lets the flags appear before or after the subcommand
    parser.add_argument("--config", default=argparse.SUPPRESS, help="Pipeline config (TOML)")
    parser.add_argument("--output", default=argparse.SUPPRESS, help="Artifact directory")
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="Seed for every stage")
    parser.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="Worker threads")
    parser.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="Warnings only on the console, no progress bars")


def _override_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("config overrides")
    group.add_argument("--dataset", help="Dataset path")
    group.add_argument("--schema", choices=["alpaca", "prompt-response"], help="Dataset schema")
    group.add_argument("--drop-unparsable-code", action="store_true", default=None,
                       help="Drop samples whose fenced Python code does not parse")
    group.add_argument("--k", type=int, help="Number of clusters")
    group.add_argument("--strategy", help="Selection strategy")
    group.add_argument("--m-percent", type=float, help="Sampling rate in (0, 100]")
    group.add_argument("--drop-ifd-above", type=float, help="Exclude samples with IFD above this value")
    group.add_argument("--pack-strategy", choices=["traditional", "dynamic", "dynamic-pack"],
                       help="Padding strategy for the pack stage")
    group.add_argument("--max-len", type=int, help="Model maximum input length")
    group.add_argument("--max-len-preset", choices=sorted(MAX_LEN_PRESETS), help="Maximum length preset")
    group.add_argument("--batch-size", type=int, help="Samples per batch")
    group.add_argument("--separator-cost", type=int, help="Tokens between packed samples")
    group.add_argument("--global", dest="global_pack", action="store_true", default=None,
                       help="Pack across the whole dataset, then re-batch")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curator", description="Instruction-data curation toolkit")
    _global_options(parser)
    commands = parser.add_subparsers(dest="command", required=True)

    for stage in STAGES + ("pipeline",):
        sub = commands.add_parser(stage, help=f"Run the {stage} stage" if stage != "pipeline" else "Run all stages")
        _global_options(sub)
        _override_options(sub)

    bench = commands.add_parser("bench-selectors", help="Time and compare selection strategies")
    _global_options(bench)
    _override_options(bench)
    bench.add_argument("--strategies", nargs="+", default=list(BENCH_STRATEGIES[:3]),
                       help=f"Any of {', '.join(BENCH_STRATEGIES)}")
    bench.add_argument("--repeats", type=int, default=5)
    bench.add_argument("--synthetic-points", type=int, help="Benchmark on N synthetic points instead of the dataset")
    bench.add_argument("--dim", type=int, default=64, help="Dimension of synthetic points")

    sweep = commands.add_parser("sweep-m", help="Select and report at several sampling rates")
    _global_options(sweep)
    _override_options(sweep)
    sweep.add_argument("--m-values", type=float, nargs="+", default=[10, 20, 30, 40, 50, 60])
    return parser


def apply_overrides(config: PipelineConfig, args: argparse.Namespace) -> PipelineConfig:
    """Apply command-line overrides, re-validating the result."""
    data = config.model_dump(mode="json", by_alias=True)

    def put(section: str, key: str, value) -> None:
        if value is not None:
            data[section][key] = value

    put("dataset", "path", getattr(args, "dataset", None))
    put("dataset", "schema", getattr(args, "schema", None))
    put("dataset", "drop_unparsable_code", getattr(args, "drop_unparsable_code", None))
    put("clustering", "k", getattr(args, "k", None))
    put("selection", "strategy", getattr(args, "strategy", None))
    put("selection", "m_percent", getattr(args, "m_percent", None))
    put("scoring", "drop_ifd_above", getattr(args, "drop_ifd_above", None))
    put("packing", "strategy", getattr(args, "pack_strategy", None))
    preset = getattr(args, "max_len_preset", None)
    put("packing", "max_len", MAX_LEN_PRESETS[preset] if preset else getattr(args, "max_len", None))
    put("packing", "batch_size", getattr(args, "batch_size", None))
    put("packing", "separator_cost", getattr(args, "separator_cost", None))
    put("packing", "global_pack", getattr(args, "global_pack", None))
    if getattr(args, "output", None):
        data["output_dir"] = args.output

    updated = validate_config(data)
    seed = getattr(args, "seed", None)
    return updated.with_seed(seed) if seed is not None else updated


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Command-line entry point.

    Returns:
        int: exit code (0 ok, 2 input error, 3 invariant violation)
    """
    args = build_parser().parse_args(argv)

    try:
        overrides = {}
        if getattr(args, "threads", None) is not None:
            overrides["THREADS"] = args.threads
        if getattr(args, "quiet", False):
            overrides["QUIET"] = True
        settings = get_settings()
        if overrides:
            try:
                settings = reload_settings(**{**settings.model_dump(), **overrides})
            except ValidationError as e:
                raise ConfigError(f"invalid settings: {e.errors()[0].get('msg')}") from e
        setup_logging(settings=settings)

        config = apply_overrides(load_pipeline_config(getattr(args, "config", None)), args)

        if args.command == "pipeline":
            return CurationPipeline(config, settings).run(STAGES)
        if args.command in STAGES:
            return CurationPipeline(config, settings).run((args.command,))

        if args.command == "bench-selectors":
            table = bench_selectors(config, args.strategies, args.repeats, args.synthetic_points, args.dim,
                                    settings)
            out = Path(config.output_dir)
            out.mkdir(parents=True, exist_ok=True)
            table.to_csv(out / "bench_selectors.csv", index=False)
            table.to_json(out / "bench_selectors.json", orient="records", indent=2)
            print(table.to_string(index=False))
            return EXIT_OK

        if args.command == "sweep-m":
            summary = sweep_m(config, args.m_values, settings)
            for run in summary["runs"]:
                print(f"m={run['m_percent']:g}%: {run['count']} selected -> {run['directory']}")
            print(f"nesting violations: {summary['nesting_violations']}")
            return EXIT_OK

    except CuratorError as e:
        logging.getLogger(__name__).error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code

    return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
