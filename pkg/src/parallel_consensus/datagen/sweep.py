from __future__ import annotations

import csv
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from parallel_consensus.datagen.config import GenConfig
from parallel_consensus.datagen.generators import generate_scenes
from parallel_consensus.metrics.classification import misclassification_error
from parallel_consensus.pipeline.fit import ParallelConsensus
from parallel_consensus.pipeline.params import PipelineParams
from parallel_consensus.weights.providers import WeightProvider

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ("kind", "value", "mean_me", "std_me", "scenes")


@dataclass(frozen=True)
class SweepRow:
    """Misclassification error of one noise or outlier setting.

    Attributes:
        kind (str): ``noise`` (value in pixels) or ``outliers`` (value is
            the rate).
        value (float): The setting.
        mean_me (float): Mean over the scenes.
        std_me (float): Standard deviation over the scenes.
        scenes (int): Number of scenes.
    """

    kind: str
    value: float
    mean_me: float
    std_me: float
    scenes: int


def _setting_me(
    cfg: GenConfig,
    pipeline: ParallelConsensus,
    threads: int,
) -> list[float]:
    errors = []
    for scene in generate_scenes(cfg, threads):
        if len(scene) == 0:
            continue
        result = pipeline.fit(scene, seed=scene.seed or 0)
        errors.append(misclassification_error(result.labels, scene.gt_labels))
    return errors


def robustness_sweep(
    task: str,
    sigmas: Sequence[float],
    rates: Sequence[float],
    seeds: int,
    provider: WeightProvider,
    params: PipelineParams | None = None,
    base: GenConfig | None = None,
    threads: int = 1,
) -> list[SweepRow]:
    """Mean and spread of the misclassification error under growing noise
    (outlier rate of ``base``) and growing outlier rates (noise-free).

    Every setting is evaluated on ``seeds`` scenes drawn from the same root
    seed, so settings differ only in the perturbation.

    Args:
        task (str): The task.
        sigmas (Sequence[float]): Noise levels in pixels.
        rates (Sequence[float]): Outlier rates.
        seeds (int): Scenes per setting.
        provider (WeightProvider): Source of the sample and inlier weights.
        params (PipelineParams | None): Pipeline parameters, the task
            defaults if omitted.
        base (GenConfig | None): Generator settings the sweep varies, the
            task defaults if omitted.
        threads (int): Worker threads.

    Returns:
        list[SweepRow]: Noise rows first, then outlier rows.
    """
    params = params or PipelineParams.for_task(task)
    base = (base or GenConfig.for_task(task)).replace(scene_count=seeds)
    pipeline = ParallelConsensus(params, provider, threads)
    settings = [("noise", s, base.replace(noise=s)) for s in sigmas] + [
        ("outliers", r, base.replace(noise=0.0, outlier_rate=r))
        for r in rates
    ]
    rows = []
    for kind, value, cfg in settings:
        errors = _setting_me(cfg, pipeline, threads)
        row = SweepRow(
            kind=kind,
            value=float(value),
            mean_me=float(np.mean(errors)) if errors else float("nan"),
            std_me=float(np.std(errors)) if errors else float("nan"),
            scenes=len(errors),
        )
        logger.info(
            "Sweep %s=%g: ME %.4f +- %.4f over %d scenes.",
            kind,
            value,
            row.mean_me,
            row.std_me,
            row.scenes,
        )
        rows.append(row)
    return rows


def write_sweep_csv(rows: Sequence[SweepRow], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(asdict(row))
