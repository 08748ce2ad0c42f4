from __future__ import annotations

from typing import Any, Sequence

import numpy as np

from parallel_consensus.constants import DEFAULT_AUC_CUTOFFS, TASKS
from parallel_consensus.exceptions import TaskMismatchError
from parallel_consensus.metrics.classification import misclassification_error
from parallel_consensus.metrics.residual_metrics import (
    min_residual_error,
    to_pixels,
)
from parallel_consensus.metrics.vanishing import ErrorPool, vp_angle_errors
from parallel_consensus.pipeline.params import FitResult
from parallel_consensus.scene import Scene

METRIC_NAMES: tuple[str, ...] = ("me", "auc", "se", "te")
RESIDUAL_METRIC = {TASKS.FMAT: "se", TASKS.HOMOGRAPHY: "te"}


def vp_frame_intrinsics(scene: Scene) -> np.ndarray:
    """Intrinsics of the normalized frame, identity when none are known."""
    K = scene.normalized_intrinsics
    return np.eye(3) if K is None else K


def check_metrics(task: str, metrics: Sequence[str]) -> None:
    """Rejects metrics that do not apply to a task.

    Args:
        task (str): The task.
        metrics (Sequence[str]): Requested metric names.

    Raises:
        TaskMismatchError: If a metric does not apply.
    """
    for name in metrics:
        if name not in METRIC_NAMES:
            raise TaskMismatchError(f"Unknown metric {name!r}.")
        if name == "auc" and task != TASKS.VP:
            raise TaskMismatchError("AUC applies to vanishing points only.")
        if name in ("se", "te") and RESIDUAL_METRIC.get(task) != name:
            raise TaskMismatchError(
                f"Metric {name!r} does not apply to task {task!r}."
            )


def evaluate_scene(scene: Scene, result: FitResult) -> dict[str, Any]:
    """Metrics of one scene.

    Args:
        scene (Scene): The labelled scene.
        result (FitResult): The pipeline output for it.

    Returns:
        dict[str, Any]: ``me`` when labels exist, ``vp_errors`` for vanishing
            points with ground truth, ``se``/``te`` (normalized) and
            ``se_px``/``te_px`` for the other tasks.
    """
    if result.task != scene.task:
        raise TaskMismatchError(
            f"Result task {result.task!r} differs from scene task "
            f"{scene.task!r}."
        )
    block: dict[str, Any] = {}
    if scene.gt_labels is not None:
        block["me"] = misclassification_error(result.labels, scene.gt_labels)
    if scene.task == TASKS.VP:
        if scene.gt_models:
            block["vp_errors"] = vp_angle_errors(
                result.models, scene.gt_models, vp_frame_intrinsics(scene)
            ).tolist()
    elif scene.gt_labels is not None:
        name = RESIDUAL_METRIC[scene.task]
        value = min_residual_error(scene, result.models)
        block[name] = value
        block[f"{name}_px"] = to_pixels(value, scene)
    return block


def aggregate(
    blocks: Sequence[dict[str, Any]],
    cutoffs: Sequence[float] = DEFAULT_AUC_CUTOFFS,
) -> dict[str, Any]:
    """Reduces per-scene metric blocks in their given order.

    Args:
        blocks (Sequence[dict[str, Any]]): Per-scene blocks from
            ``evaluate_scene``.
        cutoffs (Sequence[float]): AUC cutoffs in degrees.

    Returns:
        dict[str, Any]: Mean ME/SE/TE over the scenes that have them and AUC
            at every cutoff over the pooled vanishing point errors.
    """
    out: dict[str, Any] = {"scenes": len(blocks)}
    for key in ("me", "se", "se_px", "te", "te_px"):
        values = [b[key] for b in blocks if b.get(key) is not None]
        if values:
            out[key] = float(np.mean(values))
    pool = pooled_errors(blocks)
    if len(pool):
        out["auc"] = pool.aucs(cutoffs)
    return out


def pooled_errors(blocks: Sequence[dict[str, Any]]) -> ErrorPool:
    """Vanishing point errors of all blocks, in block order."""
    pool = ErrorPool()
    for b in blocks:
        pool.add(b.get("vp_errors", []))
    return pool
