from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from parallel_consensus.constants import TASKS
from parallel_consensus.exceptions import (
    ConfigurationError,
    TaskMismatchError,
    TrainingDivergedError,
)
from parallel_consensus.metrics.evaluation import aggregate, evaluate_scene
from parallel_consensus.pipeline.fit import ParallelConsensus
from parallel_consensus.pipeline.params import PipelineParams
from parallel_consensus.scene import Scene
from parallel_consensus.training.estimator import reinforce_upstream
from parallel_consensus.training.losses import make_task_loss
from parallel_consensus.training.optimizer import (
    AdamState,
    adam_step,
    lr_for_epoch,
    save_adam_state,
)
from parallel_consensus.training.params import TrainParams
from parallel_consensus.utils.streams import substream
from parallel_consensus.weights.network import (
    apply_running_stats,
    network_backward,
    network_forward,
)
from parallel_consensus.weights.padding import pad_or_subsample
from parallel_consensus.weights.params import NetworkParams, save_params
from parallel_consensus.weights.providers import NeuralProvider

logger = logging.getLogger(__name__)

VALIDATION_AUC_CUTOFF = 5.0
# Per-scene substream counters after (epoch, scene index).
PAD_STREAM = 0
ESTIMATOR_STREAM = 1


@dataclass(frozen=True)
class EpochStats:
    """Summary of one epoch.

    Attributes:
        epoch (int): 1-based epoch number.
        mean_loss (float): Mean task loss over all scenes.
        steps (int): Optimizer steps applied.
        skipped (int): Optimizer steps skipped on non-finite gradients.
        lr (float): Learning rate used.
        validation (float | None): AUC at 5 degrees for vanishing points,
            misclassification error otherwise; None without a validation
            set.
        elapsed (float): Wall time in seconds.
    """

    epoch: int
    mean_loss: float
    steps: int
    skipped: int
    lr: float
    validation: float | None = None
    elapsed: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "epoch": self.epoch,
            "mean_loss": self.mean_loss,
            "steps": self.steps,
            "skipped": self.skipped,
            "lr": self.lr,
            "validation": self.validation,
            "elapsed": self.elapsed,
        }


def _batch_upstream(
    batch: list[tuple[int, Scene]],
    log_p: np.ndarray,
    log_q: np.ndarray,
    pipeline_params: PipelineParams,
    train_params: TrainParams,
    epoch: int,
    seed: int,
    threads: int,
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    def run(b: int) -> tuple[np.ndarray, np.ndarray, float]:
        index, scene = batch[b]
        loss_fn = make_task_loss(
            train_params.loss, scene, pipeline_params, train_params.gamma
        )
        gp, gq, trace = reinforce_upstream(
            scene,
            log_p[b],
            log_q[b],
            loss_fn,
            pipeline_params,
            train_params,
            seed,
            (epoch, index, ESTIMATOR_STREAM),
        )
        return gp, gq, trace.mean_loss

    if threads > 1 and len(batch) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(len(batch))))
    else:
        results = [run(b) for b in range(len(batch))]
    grad_p = np.stack([r[0] for r in results])
    grad_q = np.stack([r[1] for r in results])
    return grad_p, grad_q, [r[2] for r in results]


def train_epoch(
    dataset: Sequence[Scene],
    params: NetworkParams,
    state: AdamState,
    pipeline_params: PipelineParams,
    train_params: TrainParams,
    epoch: int,
    seed: int,
    threads: int = 1,
) -> tuple[NetworkParams, AdamState, EpochStats]:
    """One pass over the training scenes.

    Scenes are shuffled with substream ``(seed, epoch)``, padded or
    subsampled to ``max_observations`` and processed in batches: one stacked
    forward pass with batch statistics, the estimator per scene (possibly on
    several threads, reduced in batch order), one backward pass on the batch
    mean and one Adam step.

    Args:
        dataset (Sequence[Scene]): Training scenes.
        params (NetworkParams): Current weights.
        state (AdamState): Current optimizer state.
        pipeline_params (PipelineParams): Training pipeline parameters.
        train_params (TrainParams): Training parameters.
        epoch (int): 1-based epoch number.
        seed (int): Root seed of the run.
        threads (int): Worker threads for the scenes of a batch.

    Raises:
        ConfigurationError: If the dataset is empty.
        TrainingDivergedError: If a loss is not finite.

    Returns:
        tuple[NetworkParams, AdamState, EpochStats]: Updated weights and
            state, and the epoch summary.
    """
    if not dataset:
        raise ConfigurationError("dataset: no training scenes")
    start = time.perf_counter()
    lr = lr_for_epoch(
        epoch, train_params.learning_rate, train_params.lr_drop_epoch
    )
    order = substream(seed, epoch).permutation(len(dataset))
    losses: list[float] = []
    steps = skipped = 0
    size = train_params.batch_size
    for first in range(0, len(order), size):
        batch = [
            (
                int(i),
                pad_or_subsample(
                    dataset[int(i)],
                    substream(seed, epoch, int(i), PAD_STREAM),
                    train_params.max_observations,
                ),
            )
            for i in order[first : first + size]
        ]
        stacked = np.stack([scene.observations for _, scene in batch])
        log_p, log_q, cache = network_forward(params, stacked, mode="train")
        grad_p, grad_q, batch_losses = _batch_upstream(
            batch,
            log_p,
            log_q,
            pipeline_params,
            train_params,
            epoch,
            seed,
            threads,
        )
        if not np.all(np.isfinite(batch_losses)):
            raise TrainingDivergedError(
                f"Non-finite loss in epoch {epoch}, batch starting at "
                f"scene {batch[0][0]}."
            )
        losses.extend(batch_losses)
        bundle = network_backward(cache, grad_p, grad_q).scale(1 / len(batch))
        params, state, applied = adam_step(params, bundle, lr, state)
        params = apply_running_stats(params, cache)
        steps += int(applied)
        skipped += int(not applied)
        logger.debug(
            "Epoch %d batch of %d: mean loss %.6f, gradient norm %.3e.",
            epoch,
            len(batch),
            float(np.mean(batch_losses)),
            bundle.global_norm(),
        )
    stats = EpochStats(
        epoch=epoch,
        mean_loss=float(np.mean(losses)),
        steps=steps,
        skipped=skipped,
        lr=lr,
        elapsed=time.perf_counter() - start,
    )
    return params, state, stats


def validation_score(
    dataset: Sequence[Scene],
    params: NetworkParams,
    pipeline_params: PipelineParams,
    seed: int,
    threads: int = 1,
) -> float:
    """AUC at 5 degrees for vanishing points, misclassification error for
    the other tasks.

    Args:
        dataset (Sequence[Scene]): Labelled validation scenes.
        params (NetworkParams): The weights.
        pipeline_params (PipelineParams): Inference parameters.
        seed (int): Seed of the pipeline runs.
        threads (int): Worker threads of the pipeline.

    Returns:
        float: The score.
    """
    provider = NeuralProvider(params)
    pipeline = ParallelConsensus(pipeline_params, provider, threads)
    blocks = [
        evaluate_scene(scene, pipeline.fit(scene, seed, (i,)))
        for i, scene in enumerate(dataset)
    ]
    summary = aggregate(blocks, (VALIDATION_AUC_CUTOFF,))
    if pipeline_params.task == TASKS.VP:
        return float(summary.get("auc", {}).get("5", 0.0))
    return float(summary.get("me", 1.0))


def is_better(task: str, score: float, best: float | None) -> bool:
    if best is None:
        return True
    return score > best if task == TASKS.VP else score < best


@dataclass
class TrainingReport:
    """History of a training run."""

    epochs: list[EpochStats] = field(default_factory=list)
    best_epoch: int | None = None
    best_score: float | None = None
    diverged: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "epochs": [e.to_dict() for e in self.epochs],
            "best_epoch": self.best_epoch,
            "best_score": self.best_score,
            "diverged": self.diverged,
        }


class Trainer:
    """Runs the epoch loop, tracks the best validation checkpoint and writes
    checkpoints (a weights file plus an optimizer-state file).

    Args:
        params (NetworkParams): Initial weights.
        pipeline_params (PipelineParams): Training pipeline parameters.
        train_params (TrainParams): Training parameters.
        eval_params (PipelineParams | None): Inference parameters used for
            validation; the training ones if None.
        seed (int): Root seed of the run.
        threads (int): Worker threads.
        out_dir (str | Path | None): Checkpoint directory; nothing is written
            if None.
        state (AdamState | None): Optimizer state to resume from.
    """

    def __init__(
        self,
        params: NetworkParams,
        pipeline_params: PipelineParams,
        train_params: TrainParams,
        eval_params: PipelineParams | None = None,
        seed: int = 0,
        threads: int = 1,
        out_dir: str | Path | None = None,
        state: AdamState | None = None,
    ) -> None:
        if params.task is not None and params.task != pipeline_params.task:
            raise TaskMismatchError(
                f"Weights are for {params.task!r}, training task is "
                f"{pipeline_params.task!r}."
            )
        if params.m_star != pipeline_params.max_instances:
            raise ConfigurationError(
                f"max_instances: weights emit {params.m_star} putative "
                f"models, parameters ask for {pipeline_params.max_instances}"
            )
        self.params = params
        self.pipeline_params = pipeline_params
        self.train_params = train_params
        self.eval_params = eval_params or pipeline_params
        self.seed = seed
        self.threads = threads
        self.out_dir = None if out_dir is None else Path(out_dir)
        self.state = state or AdamState.zeros(params)
        self.best_params: NetworkParams | None = None
        self.logger = logging.getLogger(__name__)

    def save_checkpoint(
        self, name: str, params: NetworkParams, state: AdamState
    ) -> None:
        if self.out_dir is None:
            return
        self.out_dir.mkdir(parents=True, exist_ok=True)
        save_params(params, self.out_dir / f"{name}.weights")
        save_adam_state(state, self.out_dir / f"{name}.adam")
        self.logger.info("Saved %s checkpoint to %s.", name, self.out_dir)

    def fit(
        self,
        train_set: Sequence[Scene],
        val_set: Sequence[Scene] | None = None,
        epochs: int | None = None,
    ) -> TrainingReport:
        """Trains for ``epochs`` (default ``train_params.epochs``) epochs.

        Args:
            train_set (Sequence[Scene]): Training scenes.
            val_set (Sequence[Scene] | None): Validation scenes.
            epochs (int | None): Epoch count override.

        Raises:
            TrainingDivergedError: If a loss became non-finite; the last good
                weights are saved as the final checkpoint first.

        Returns:
            TrainingReport: The history.
        """
        report = TrainingReport()
        total = epochs if epochs is not None else self.train_params.epochs
        task = self.pipeline_params.task
        for epoch in range(1, total + 1):
            try:
                params, state, stats = train_epoch(
                    train_set,
                    self.params,
                    self.state,
                    self.pipeline_params,
                    self.train_params,
                    epoch,
                    self.seed,
                    self.threads,
                )
            except TrainingDivergedError:
                report.diverged = True
                self.logger.error(
                    "Training diverged in epoch %d, keeping the weights of "
                    "epoch %d.",
                    epoch,
                    epoch - 1,
                )
                self.save_checkpoint("final", self.params, self.state)
                raise
            self.params, self.state = params, state
            if val_set:
                score = validation_score(
                    val_set,
                    self.params,
                    self.eval_params,
                    self.seed,
                    self.threads,
                )
                stats = EpochStats(**{**stats.to_dict(), "validation": score})
                if is_better(task, score, report.best_score):
                    report.best_score, report.best_epoch = score, epoch
                    self.best_params = self.params.copy()
                    self.save_checkpoint("best", self.params, self.state)
            report.epochs.append(stats)
            self.logger.info(
                "Epoch %d/%d: loss %.6f, lr %.1e, validation %s, %.2fs.",
                epoch,
                total,
                stats.mean_loss,
                stats.lr,
                "n/a"
                if stats.validation is None
                else f"{stats.validation:.4f}",
                stats.elapsed,
            )
        self.save_checkpoint("final", self.params, self.state)
        return report
