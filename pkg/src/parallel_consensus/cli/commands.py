"""Implementations of the ``parsac`` subcommands. Every command takes the
resolved ``Config`` and the parsed arguments and returns an exit status."""
from __future__ import annotations

import argparse
import logging
import time
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from parallel_consensus.config import Config
from parallel_consensus.datagen import (
    generate_scenes,
    robustness_sweep,
    write_sweep_csv,
)
from parallel_consensus.exceptions import (
    ConfigurationError,
    SceneFormatError,
    TaskMismatchError,
)
from parallel_consensus.io import load_scene_set, write_json, write_scene_set
from parallel_consensus.io.results import (
    ResultsFile,
    build_results,
    write_recall_csv,
)
from parallel_consensus.metrics import check_metrics, evaluate_scene
from parallel_consensus.pipeline import FitResult, ParallelConsensus
from parallel_consensus.scene import Scene
from parallel_consensus.training import Trainer, run_gradcheck
from parallel_consensus.training.trainer import is_better
from parallel_consensus.weights import init_params

logger = logging.getLogger(__name__)


def _scene_task(scenes: Sequence[Scene], config: Config) -> str:
    if not scenes:
        raise SceneFormatError("No scenes to process.")
    task = scenes[0].task
    if any(s.task != task for s in scenes):
        raise TaskMismatchError("Scenes of different tasks cannot be mixed.")
    configured = config.get_value("task")
    if configured is not None and configured != task:
        raise TaskMismatchError(
            f"Scenes are {task!r}, the configuration asks for "
            f"{configured!r}."
        )
    return task


def _fit_all(
    scenes: Sequence[Scene], pipeline: ParallelConsensus, seed: int
) -> list[FitResult]:
    return [pipeline.fit(s, seed, stream=(i,)) for i, s in enumerate(scenes)]


def _print_aggregate(results: ResultsFile) -> None:
    agg = results.aggregate
    print(f"task      {results.task}")
    print(f"scenes    {agg['scenes']}")
    for key in ("me", "se", "se_px", "te", "te_px"):
        if key in agg:
            print(f"{key:<9} {agg[key]:.6f}")
    for cutoff, value in agg.get("auc", {}).items():
        print(f"auc@{cutoff:<5} {value:.6f}")


def cmd_generate(config: Config, args: argparse.Namespace) -> int:
    """Writes ``scene_count`` synthetic scenes and a manifest."""
    cfg = config.gen_config()
    scenes = generate_scenes(cfg, config.threads)
    write_scene_set(
        scenes,
        args.out,
        config=cfg.to_dict(),
        seed=cfg.seed,
        compress=args.compress,
    )
    print(f"wrote {len(scenes)} {cfg.task} scenes to {args.out}")
    return 0


def cmd_fit(config: Config, args: argparse.Namespace) -> int:
    """Fits every scene and writes a results file."""
    scenes = load_scene_set(args.scenes)
    task = _scene_task(scenes, config)
    pipeline = ParallelConsensus.from_config(config, task)
    params = pipeline.params
    provider_name = config.get_value("provider", "uniform")
    results = _fit_all(scenes, pipeline, config.seed)
    blocks = [evaluate_scene(s, r) for s, r in zip(scenes, results)]
    out = build_results(
        task,
        [str(i) for i in range(len(scenes))],
        [config.seed] * len(scenes),
        results,
        blocks,
        params.to_dict(),
        config.seed,
        provider_name,
        config.auc_cutoffs,
    )
    out.save(args.out, timing=not args.no_timing)
    _print_aggregate(out)
    return 0


def cmd_train(config: Config, args: argparse.Namespace) -> int:
    """Trains ``runs`` networks from different seeds and reports the one
    with the best validation score."""
    train_set = load_scene_set(args.train)
    val_set = load_scene_set(args.val) if args.val else None
    task = _scene_task(train_set, config)
    train_pipeline = config.pipeline_params(task, train=True)
    eval_pipeline = config.pipeline_params(task)
    train_params = config.train_params(task)
    channels, blocks = config.network_shape()
    runs = int(config.get_value("runs", 1))
    out_dir = Path(args.out)

    reports: list[dict[str, Any]] = []
    best_run, best_score = None, None
    for run in range(runs):
        seed = config.seed + run
        params = init_params(
            train_pipeline.max_instances,
            seed,
            channels=channels,
            blocks=blocks,
            task=task,
        )
        trainer = Trainer(
            params,
            train_pipeline,
            train_params,
            eval_params=eval_pipeline,
            seed=seed,
            threads=config.threads,
            out_dir=out_dir / f"run_{run}",
        )
        report = trainer.fit(train_set, val_set, epochs=args.epochs)
        reports.append({"run": run, "seed": seed, **report.to_dict()})
        score = report.best_score
        if score is not None and is_better(task, score, best_score):
            best_run, best_score = run, score
    write_json(
        {
            "task": task,
            "train_params": train_params.to_dict(),
            "pipeline_params": train_pipeline.to_dict(),
            "best_run": best_run,
            "best_score": best_score,
            "runs": reports,
        },
        out_dir / "training_report.json",
    )
    print(f"trained {runs} run(s); best run {best_run}, score {best_score}")
    return 0


def cmd_eval(config: Config, args: argparse.Namespace) -> int:
    """Checks a results file, optionally re-scoring it against scenes, and
    writes a metric report plus recall-curve plot data."""
    results = ResultsFile.load(args.results)
    metrics = args.metrics or []
    check_metrics(results.task, metrics)
    cutoffs = tuple(args.cutoffs) if args.cutoffs else config.auc_cutoffs
    if args.scenes:
        scenes = load_scene_set(args.scenes)
        if len(scenes) != len(results.entries):
            raise SceneFormatError(
                f"{len(scenes)} scenes but {len(results.entries)} results."
            )
        blocks = [
            evaluate_scene(s, r) for s, r in zip(scenes, results.results)
        ]
    else:
        blocks = results.blocks
    results = build_results(
        results.task,
        [e.name for e in results.entries],
        [e.seed for e in results.entries],
        results.results,
        blocks,
        results.params,
        results.seed,
        results.provider,
        cutoffs,
    )
    _print_aggregate(results)
    if args.out:
        report = Path(args.out)
        write_json(
            {"task": results.task, "aggregate": results.aggregate}, report
        )
        write_recall_csv(results, report.with_suffix(".csv"))
    return 0


def cmd_gradcheck(config: Config, args: argparse.Namespace) -> int:
    """Finite-difference checks; exit status 1 when one fails."""
    reports = run_gradcheck(config.seed)
    ok = True
    for report in reports:
        worst = max(report.errors, key=report.errors.get, default="-")
        status = "pass" if report.passed else "FAIL"
        print(
            f"{report.name:<10} {status}  max rel err "
            f"{report.max_error:.3e} (tol {report.tolerance:.0e}, worst "
            f"{worst})"
        )
        ok &= report.passed
    if args.out:
        write_json([r.to_dict() for r in reports], args.out)
    return 0 if ok else 1


def _parse_threads(value: str) -> list[int]:
    try:
        counts = sorted({int(v) for v in value.split(",") if v.strip()})
    except ValueError:
        raise ConfigurationError(
            f"threads_list: expected integers, got {value!r}"
        ) from None
    if not counts or counts[0] < 1:
        raise ConfigurationError("threads_list: counts must be positive")
    return counts if counts[0] == 1 else [1, *counts]


def cmd_bench(config: Config, args: argparse.Namespace) -> int:
    """Times the pipeline across thread counts."""
    scenes = load_scene_set(args.scenes)
    task = _scene_task(scenes, config)
    params = config.pipeline_params(task)
    provider = config.provider(params.max_instances)
    rows = []
    for threads in _parse_threads(args.threads_list):
        pipeline = ParallelConsensus(params, provider, threads)
        times = []
        for i, scene in enumerate(scenes):
            start = time.perf_counter()
            pipeline.fit(scene, config.seed, stream=(i,))
            times.append(time.perf_counter() - start)
        rows.append(
            {
                "threads": threads,
                "mean": float(np.mean(times)),
                "median": float(np.median(times)),
            }
        )
    base = rows[0]["mean"]
    print(f"{'threads':>7} {'mean_s':>10} {'median_s':>10} {'speedup':>8}")
    for row in rows:
        row["speedup"] = base / row["mean"] if row["mean"] > 0 else 1.0
        if row["threads"] > 1 and row["speedup"] < 1.0:
            logger.warning(
                "No speedup with %d threads on these scenes.", row["threads"]
            )
        print(
            f"{row['threads']:>7} {row['mean']:>10.5f} "
            f"{row['median']:>10.5f} {row['speedup']:>8.2f}"
        )
    if args.out:
        write_json({"task": task, "rows": rows}, args.out)
    return 0


def cmd_sweep(config: Config, args: argparse.Namespace) -> int:
    """Noise and outlier robustness sweep, written as CSV plot data."""
    task = config.task
    params = config.pipeline_params(task)
    rows = robustness_sweep(
        task,
        args.sigmas,
        args.rates,
        args.seeds,
        config.provider(params.max_instances),
        params=params,
        base=config.gen_config(task),
        threads=config.threads,
    )
    write_sweep_csv(rows, args.out)
    for row in rows:
        print(
            f"{row.kind:<9} {row.value:>6g}  ME {row.mean_me:.4f} +- "
            f"{row.std_me:.4f} ({row.scenes} scenes)"
        )
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "fit": cmd_fit,
    "train": cmd_train,
    "eval": cmd_eval,
    "gradcheck": cmd_gradcheck,
    "bench": cmd_bench,
    "sweep": cmd_sweep,
}
