from typing import Callable, Sequence

import numpy as np
import numpy.typing as npt

from parallel_consensus.constants import SELF_SUPERVISED_GAMMA, TASKS
from parallel_consensus.consensus.scoring import soft_inlier_score
from parallel_consensus.exceptions import ConfigurationError, SceneFormatError
from parallel_consensus.geometry.registry import residual_matrix
from parallel_consensus.metrics.classification import misclassification_error
from parallel_consensus.metrics.evaluation import vp_frame_intrinsics
from parallel_consensus.metrics.hungarian import hungarian_assign
from parallel_consensus.metrics.residual_metrics import CLIP_VALUE
from parallel_consensus.metrics.vanishing import vp_angle_matrix
from parallel_consensus.pipeline.params import PipelineParams
from parallel_consensus.scene import ModelInstance, Scene
from parallel_consensus.training.params import LOSS_KINDS

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

# Cost matrix of predictions (rows) against the ground truth (columns).
PairwiseLoss = Callable[[Sequence[ModelInstance]], FloatArray]
TaskLoss = Callable[[Sequence[ModelInstance], IntArray], float]

VP_MAX_LOSS = 90.0
RESIDUAL_MAX_LOSS = CLIP_VALUE


def task_loss_hungarian(
    models: Sequence[ModelInstance],
    num_gt: int,
    pairwise: PairwiseLoss,
    max_loss: float,
) -> float:
    """Minimal assignment cost between the first ``num_gt`` predictions and
    the ground truth. Every ground-truth model left unmatched adds
    ``max_loss``.

    Args:
        models (Sequence[ModelInstance]): Ranked predictions.
        num_gt (int): Number of ground-truth models.
        pairwise (PairwiseLoss): Cost matrix of predictions against the
            ground truth.
        max_loss (float): The largest pairwise loss of the task.

    Returns:
        float: The loss, non-negative.
    """
    used = list(models)[:num_gt]
    if num_gt == 0:
        return 0.0
    if not used:
        return num_gt * max_loss
    _, total = hungarian_assign(pairwise(used))
    return total + (num_gt - len(used)) * max_loss


def vp_pairwise_loss(scene: Scene) -> PairwiseLoss:
    """Angles in degrees between predicted and ground-truth vanishing
    directions."""
    gt = np.stack([g.params for g in scene.gt_models])
    K = vp_frame_intrinsics(scene)

    def pairwise(models: Sequence[ModelInstance]) -> FloatArray:
        return vp_angle_matrix(np.stack([m.params for m in models]), gt, K)

    return pairwise


def residual_pairwise_loss(scene: Scene) -> PairwiseLoss:
    """Mean clipped residual of each ground-truth model's inliers under each
    prediction; ground-truth models without inliers cost the maximum."""
    if scene.gt_labels is None:
        raise SceneFormatError("The residual pairwise loss needs gt_labels.")
    members = scene.gt_labels[None, :] == np.arange(
        1, len(scene.gt_models) + 1
    )[:, None]
    sizes = members.sum(axis=1)

    def pairwise(models: Sequence[ModelInstance]) -> FloatArray:
        clipped = np.minimum(residual_matrix(scene, models), CLIP_VALUE)
        sums = clipped @ members.T.astype(np.float64)
        return np.where(
            sizes > 0, sums / np.maximum(sizes, 1), RESIDUAL_MAX_LOSS
        )

    return pairwise


def pairwise_loss_for(scene: Scene) -> tuple[PairwiseLoss, float]:
    """The pairwise loss of the scene's task and its maximum value."""
    if not scene.gt_models:
        raise SceneFormatError("The Hungarian loss needs gt_models.")
    if scene.task == TASKS.VP:
        return vp_pairwise_loss(scene), VP_MAX_LOSS
    return residual_pairwise_loss(scene), RESIDUAL_MAX_LOSS


def task_loss_me(labels: npt.ArrayLike, gt_labels: npt.ArrayLike) -> float:
    return misclassification_error(labels, gt_labels)


def self_supervised_weighted_loss(
    models: Sequence[ModelInstance],
    scene: Scene,
    tau: float,
    beta: float,
    gamma: float = SELF_SUPERVISED_GAMMA,
) -> float:
    """Negative soft inlier coverage of the ranked models, discounted by
    ``gamma`` per rank. The coverage of an observation at rank ``j`` is its
    best soft inlier score among the first ``j`` models.

    Args:
        models (Sequence[ModelInstance]): Ranked models.
        scene (Scene): The scene.
        tau (float): Inlier threshold.
        beta (float): Softness.
        gamma (float): Decay per rank, in ``(0, 1)``.

    Returns:
        float: The loss, 0 for no models or observations.
    """
    if not models or len(scene) == 0:
        return 0.0
    scores = soft_inlier_score(residual_matrix(scene, models), tau, beta)
    coverage = np.maximum.accumulate(scores, axis=0)
    decay = gamma ** np.arange(1, len(models) + 1)
    return -float(np.sum(decay[:, None] * coverage))


def self_supervised_plain_loss(
    models: Sequence[ModelInstance], scene: Scene, tau: float
) -> float:
    """Negative size of the union of the hard inlier sets."""
    if not models or len(scene) == 0:
        return 0.0
    covered = np.any(residual_matrix(scene, models) < tau, axis=0)
    return -float(np.count_nonzero(covered))


def make_task_loss(
    kind: str,
    scene: Scene,
    params: PipelineParams,
    gamma: float = SELF_SUPERVISED_GAMMA,
) -> TaskLoss:
    """Binds a loss to a scene.

    Args:
        kind (str): One of ``LOSS_KINDS``.
        scene (Scene): The training scene.
        params (PipelineParams): Supplies threshold and softness for the
            self-supervised losses.
        gamma (float): Decay of the weighted self-supervised loss.

    Raises:
        ConfigurationError: If the kind is unknown.
        SceneFormatError: If the scene lacks the ground truth the loss needs.

    Returns:
        TaskLoss: ``loss(ranked_models, labels) -> float``.
    """
    if kind == "hungarian":
        pairwise, max_loss = pairwise_loss_for(scene)
        num_gt = len(scene.gt_models)
        return lambda models, labels: task_loss_hungarian(
            models, num_gt, pairwise, max_loss
        )
    if kind == "me":
        if scene.gt_labels is None:
            raise SceneFormatError("The misclassification loss needs labels.")
        gt_labels = scene.gt_labels
        return lambda models, labels: task_loss_me(labels, gt_labels)
    tau, beta = params.tau, params.consensus.beta
    if kind == "self_weighted":
        return lambda models, labels: self_supervised_weighted_loss(
            models, scene, tau, beta, gamma
        )
    if kind == "self_plain":
        return lambda models, labels: self_supervised_plain_loss(
            models, scene, tau
        )
    raise ConfigurationError(
        f"loss: must be one of {LOSS_KINDS}, got {kind!r}"
    )
