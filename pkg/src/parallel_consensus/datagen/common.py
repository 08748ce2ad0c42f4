from __future__ import annotations

import logging

import numpy as np
import numpy.typing as npt
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from parallel_consensus.constants import (
    FMAT_LABEL_THRESHOLD_PX,
    HOMOGRAPHY_LABEL_THRESHOLD_PX,
    MINIMAL_SET_SIZES,
    PLANE_MERGE_ANGLE_DEG,
    PLANE_MERGE_OFFSET,
    TASK_DEFAULTS,
    TASKS,
    VP_LABEL_ANGLE_DEG,
    VP_OUTLIER_SQUARE_PX,
)
from parallel_consensus.datagen.config import DEFAULT_OUTLIER_CAP
from parallel_consensus.exceptions import GenerationError
from parallel_consensus.geometry.registry import residual_matrix
from parallel_consensus.geometry.vanishing import observations_from_segments
from parallel_consensus.pipeline.assignment import assign_labels
from parallel_consensus.pipeline.ranking import rank_inlier_sets
from parallel_consensus.scene import Scene

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]


def label_threshold(task: str, scale: float) -> float:
    """Largest residual of a generated inlier.

    Args:
        task (str): The task.
        scale (float): ``max(width, height)`` in pixels.

    Returns:
        float: The bound on the task's residual in the normalized frame.
    """
    if task == TASKS.VP:
        return float(1.0 - np.cos(np.deg2rad(VP_LABEL_ANGLE_DEG)))
    if task == TASKS.FMAT:
        return FMAT_LABEL_THRESHOLD_PX / scale
    return HOMOGRAPHY_LABEL_THRESHOLD_PX / scale


def frame_extent(width: float, height: float) -> FloatArray:
    """Half sizes of the image in the normalized frame."""
    scale = max(width, height)
    return np.array([width / 2.0, height / 2.0]) / scale


def uniform_frame_points(
    count: int, width: float, height: float, rng: np.random.Generator
) -> FloatArray:
    half = frame_extent(width, height)
    return rng.uniform(-half, half, size=(count, 2))


def outlier_correspondences(
    count: int, width: float, height: float, rng: np.random.Generator
) -> FloatArray:
    """Points drawn uniformly and independently in both images."""
    first = uniform_frame_points(count, width, height, rng)
    second = uniform_frame_points(count, width, height, rng)
    return np.hstack([first, second])


def outlier_segments(
    count: int, width: float, height: float, rng: np.random.Generator
) -> FloatArray:
    """Segments with both endpoints uniform in a square of
    ``VP_OUTLIER_SQUARE_PX`` pixels around a uniform point of the image."""
    centers = uniform_frame_points(count, width, height, rng)
    half = VP_OUTLIER_SQUARE_PX / 2.0 / max(width, height)
    start = centers + rng.uniform(-half, half, size=(count, 2))
    end = centers + rng.uniform(-half, half, size=(count, 2))
    return np.hstack([start, end])


def _with_rows(
    scene: Scene,
    rows: FloatArray,
    labels: IntArray,
) -> Scene:
    if scene.task == TASKS.VP:
        return scene.replace(
            observations=observations_from_segments(rows),
            segments=rows,
            gt_labels=labels,
        )
    return scene.replace(observations=rows, gt_labels=labels)


def _rows(scene: Scene) -> FloatArray:
    return scene.segments if scene.task == TASKS.VP else scene.observations


def _require_labels(scene: Scene) -> IntArray:
    if scene.gt_labels is None or scene.gt_models is None:
        raise GenerationError("The scene carries no ground truth.")
    return scene.gt_labels


def inject_noise(
    scene: Scene, sigma_px: float, rng: np.random.Generator
) -> Scene:
    """Adds zero-mean Gaussian noise to segment endpoints or correspondence
    coordinates. Ground truth is left untouched.

    Args:
        scene (Scene): The scene.
        sigma_px (float): Standard deviation in pixels.
        rng (np.random.Generator): Random source.

    Raises:
        GenerationError: If ``sigma_px`` is negative.

    Returns:
        Scene: The perturbed scene, ``scene`` itself when ``sigma_px`` is 0.
    """
    if sigma_px < 0:
        raise GenerationError(f"Noise must be non-negative, got {sigma_px}.")
    if sigma_px == 0:
        return scene
    rows = _rows(scene)
    noisy = rows + rng.normal(0.0, sigma_px / scene.scale, size=rows.shape)
    if scene.task == TASKS.VP:
        return scene.replace(
            observations=observations_from_segments(noisy), segments=noisy
        )
    return scene.replace(observations=noisy)


def outlier_count(inliers: int, rate: float) -> int:
    """Number of outliers that makes ``outliers / total`` closest to
    ``rate``."""
    if rate <= 0:
        return 0
    return int(round(rate * inliers / (1.0 - rate)))


def inject_outliers(
    scene: Scene,
    rate: float,
    rng: np.random.Generator,
    cap: int = DEFAULT_OUTLIER_CAP,
) -> Scene:
    """Replaces the outliers of a scene with synthetic ones at the given
    rate. Synthetic outliers that happen to satisfy a ground-truth model are
    labeled as its inliers.

    Args:
        scene (Scene): A scene with ground truth.
        rate (float): Outlier fraction in ``[0, 1)``.
        rng (np.random.Generator): Random source.
        cap (int): Largest number of synthetic outliers.

    Raises:
        GenerationError: If the rate is out of range, the count exceeds the
            cap or the scene has no ground truth.

    Returns:
        Scene: Inliers first, then the synthetic outliers.
    """
    if not 0 <= rate < 1:
        raise GenerationError(f"Outlier rate must be in [0, 1), got {rate}.")
    labels = _require_labels(scene)
    keep = labels > 0
    inliers = int(np.count_nonzero(keep))
    count = outlier_count(inliers, rate)
    if count > cap:
        raise GenerationError(
            f"Outlier rate {rate} needs {count} outliers, more than the cap "
            f"of {cap}."
        )
    sample = outlier_segments if scene.task == TASKS.VP else (
        outlier_correspondences
    )
    extra = sample(count, scene.width, scene.height, rng)
    rows = np.vstack([_rows(scene)[keep], extra])
    new_labels = np.concatenate([labels[keep], np.zeros(count, np.int64)])
    logger.debug(
        "Replaced %d outliers with %d synthetic ones.",
        len(labels) - inliers,
        count,
    )
    return relabel_collisions(_with_rows(scene, rows, new_labels))


def relabel_collisions(scene: Scene) -> Scene:
    """Labels every outlier that lies within the generation threshold of a
    ground-truth model as an inlier of the closest such model."""
    labels = _require_labels(scene)
    outliers = np.flatnonzero(labels == 0)
    if outliers.size == 0 or not scene.gt_models:
        return scene
    residuals = residual_matrix(scene.subset(outliers), scene.gt_models)
    best = np.argmin(residuals, axis=0)
    hit = residuals[best, np.arange(outliers.size)] <= label_threshold(
        scene.task, scene.scale
    )
    if not hit.any():
        return scene
    new_labels = labels.copy()
    new_labels[outliers[hit]] = best[hit] + 1
    logger.debug("Relabeled %d colliding outliers.", int(hit.sum()))
    return scene.replace(gt_labels=new_labels)


def label_by_residual(scene: Scene, candidates: IntArray) -> IntArray:
    """Assigns each candidate observation to its closest ground-truth model
    when the residual is within the generation threshold; 0 otherwise.

    Args:
        scene (Scene): A scene with ground-truth models.
        candidates (IntArray): Indices of the observations to label.

    Returns:
        IntArray: Labels of all observations; non-candidates are 0.
    """
    labels = np.zeros(len(scene), dtype=np.int64)
    if candidates.size == 0 or not scene.gt_models:
        return labels
    residuals = residual_matrix(scene.subset(candidates), scene.gt_models)
    best = np.argmin(residuals, axis=0)
    ok = residuals[best, np.arange(candidates.size)] <= label_threshold(
        scene.task, scene.scale
    )
    labels[candidates[ok]] = best[ok] + 1
    return labels


def relabel_by_significance(
    scene: Scene,
    tau: float | None = None,
    tau_a: float | None = None,
) -> Scene:
    """Orders the ground-truth models the way fitted models are ranked.

    Models are picked greedily by their inliers under ``tau`` that no earlier
    model explains minus those that one does, lowest index on ties. A model
    whose gain falls below the minimal set size would never survive ranking:
    it is dropped and its observations are labeled the way the fitted
    models would label them, by the nearest remaining model under ``tau``,
    then the first one under ``tau_a``, else as outliers.

    Args:
        scene (Scene): A scene with ground truth.
        tau (float | None): Inlier threshold, the task's inference default
            if None.
        tau_a (float | None): Assignment threshold, the task's inference
            default if None.

    Returns:
        Scene: The scene with models in rank order and labels to match.
    """
    labels = _require_labels(scene)
    models = scene.gt_models
    if not models:
        return scene
    defaults = TASK_DEFAULTS[scene.task]
    if tau is None:
        tau = float(defaults["inlier_threshold"])
    if tau_a is None and defaults["assignment_threshold"] is not None:
        tau_a = float(defaults["assignment_threshold"])

    residuals = residual_matrix(scene, list(models))
    steps = rank_inlier_sets(
        residuals < tau, MINIMAL_SET_SIZES[scene.task]
    )
    order = np.array([s.index for s in steps], dtype=np.int64)
    mapping = np.zeros(len(models) + 1, dtype=np.int64)
    mapping[order + 1] = np.arange(1, order.size + 1)
    new_labels = mapping[labels]

    orphans = np.flatnonzero((labels > 0) & (new_labels == 0))
    if orphans.size:
        logger.debug(
            "Dropped %d ground-truth model(s) that ranking cannot separate, "
            "relabeled %d observations.",
            len(models) - order.size,
            orphans.size,
        )
        kept = residuals[order][:, orphans]
        new_labels[orphans] = assign_labels(kept, tau, tau_a)
    return scene.replace(
        gt_labels=new_labels,
        gt_models=tuple(models[i] for i in order),
    )


def prune_small_clusters(scene: Scene, min_size: int) -> Scene:
    """Turns the inliers of every model with fewer than ``min_size`` of them
    into outliers, drops those models and compacts the labels.

    Args:
        scene (Scene): A scene with ground truth.
        min_size (int): Smallest cluster kept.

    Returns:
        Scene: The pruned scene.
    """
    labels = _require_labels(scene)
    models = scene.gt_models
    counts = np.bincount(labels, minlength=len(models) + 1)[1:]
    keep = counts >= min_size
    if keep.all():
        return scene
    for k in np.flatnonzero(~keep):
        logger.warning(
            "Dropping ground-truth model %d with %d of %d required inliers.",
            k + 1,
            counts[k],
            min_size,
        )
    mapping = np.zeros(len(models) + 1, dtype=np.int64)
    mapping[np.flatnonzero(keep) + 1] = np.arange(1, int(keep.sum()) + 1)
    return scene.replace(
        gt_labels=mapping[labels],
        gt_models=tuple(m for m, k in zip(models, keep) if k),
    )


def merge_coplanar_planes(
    normals: npt.ArrayLike,
    offsets: npt.ArrayLike,
    max_angle_deg: float = PLANE_MERGE_ANGLE_DEG,
    max_offset: float = PLANE_MERGE_OFFSET,
) -> IntArray:
    """Groups planes ``n^T X + d = 0`` whose normals differ by at most
    ``max_angle_deg`` and whose offsets differ by at most ``max_offset``.
    Grouping is transitive.

    Args:
        normals (npt.ArrayLike): Plane normals, shape ``(M, 3)``.
        offsets (npt.ArrayLike): Plane offsets, shape ``(M,)``.
        max_angle_deg (float): Largest angle between merged normals.
        max_offset (float): Largest offset difference of merged planes.

    Returns:
        IntArray: Group index of every plane, numbered by first appearance.
    """
    n = np.array(normals, dtype=np.float64).reshape(-1, 3)
    d = np.array(offsets, dtype=np.float64).reshape(-1)
    norms = np.linalg.norm(n, axis=1)
    n, d = n / norms[:, None], d / norms
    flip = d < 0
    n[flip], d[flip] = -n[flip], -d[flip]
    cos = np.clip(n @ n.T, -1.0, 1.0)
    close = (cos >= np.cos(np.deg2rad(max_angle_deg))) & (
        np.abs(d[:, None] - d[None, :]) <= max_offset
    )
    _, components = connected_components(csr_matrix(close), directed=False)
    _, first, inverse = np.unique(
        components, return_index=True, return_inverse=True
    )
    rank = np.argsort(np.argsort(first))
    return rank[inverse].astype(np.int64)


def shuffle_observations(scene: Scene, rng: np.random.Generator) -> Scene:
    return scene.subset(rng.permutation(len(scene)))
