from typing import Sequence

import numpy as np

from parallel_consensus.constants import TASKS
from parallel_consensus.exceptions import SceneFormatError, TaskMismatchError
from parallel_consensus.geometry.registry import get_geometry, residual_matrix
from parallel_consensus.scene import ModelInstance, Scene

# Normalized equivalent of max(W, H) pixels.
CLIP_VALUE = 1.0


def min_residual_error(
    scene: Scene, models: Sequence[ModelInstance]
) -> float | None:
    """Mean over ground-truth inliers of the smallest residual to the first
    ``min(len(gt), len(models))`` ranked models, each clipped to
    ``CLIP_VALUE``. An empty prediction falls back to the identity matrix.

    Args:
        scene (Scene): A labelled scene.
        models (Sequence[ModelInstance]): Ranked predictions.

    Raises:
        SceneFormatError: If the scene has no labels.

    Returns:
        float | None: The error in normalized units, None if the scene has no
            ground-truth inliers.
    """
    if scene.gt_labels is None:
        raise SceneFormatError("Residual metrics need gt_labels.")
    inliers = scene.gt_labels > 0
    if not inliers.any():
        return None
    num_gt = scene.num_models or int(scene.gt_labels.max())
    used = list(models)[:num_gt]
    if not used:
        used = [get_geometry(scene.task).identity_model()]
    residuals = residual_matrix(scene.subset(np.flatnonzero(inliers)), used)
    errors = np.minimum(residuals.min(axis=0), CLIP_VALUE)
    return float(errors.mean())


def sampson_error_metric(
    scene: Scene, models: Sequence[ModelInstance]
) -> float | None:
    """Sampson error metric for fundamental matrix scenes, see
    ``min_residual_error``."""
    if scene.task != TASKS.FMAT:
        raise TaskMismatchError(
            f"The Sampson error applies to fundamental matrices, not "
            f"{scene.task!r}."
        )
    return min_residual_error(scene, models)


def transfer_error_metric(
    scene: Scene, models: Sequence[ModelInstance]
) -> float | None:
    """Transfer error metric for homography scenes, see
    ``min_residual_error``."""
    if scene.task != TASKS.HOMOGRAPHY:
        raise TaskMismatchError(
            f"The transfer error applies to homographies, not "
            f"{scene.task!r}."
        )
    return min_residual_error(scene, models)


def to_pixels(value: float | None, scene: Scene) -> float | None:
    return None if value is None else value * scene.scale
