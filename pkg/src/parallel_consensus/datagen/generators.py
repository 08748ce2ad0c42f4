"""Analytic synthetic scenes.

Fundamental matrix scenes hold several independently moving objects seen by
two views, homography scenes hold several planes seen by two views and
vanishing point scenes hold line segments converging to a few vanishing
directions. Observations live in the normalized image frame; intrinsics are
kept in pixels.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
import numpy.typing as npt
from scipy.spatial.transform import Rotation

from parallel_consensus.constants import (
    MIN_PLANE_CORRESPONDENCES,
    MINIMAL_SET_SIZES,
    TASKS,
    VP_LABEL_ANGLE_DEG,
    VP_MIN_SEPARATION_DEG,
)
from parallel_consensus.datagen.common import (
    frame_extent,
    inject_noise,
    inject_outliers,
    label_by_residual,
    merge_coplanar_planes,
    prune_small_clusters,
    relabel_by_significance,
    shuffle_observations,
    uniform_frame_points,
)
from parallel_consensus.datagen.config import SENSOR_WIDTH_MM, GenConfig
from parallel_consensus.exceptions import InsufficientInliersError
from parallel_consensus.geometry.normalization import normalization_matrix
from parallel_consensus.geometry.poses import (
    gt_fmat_from_pose,
    gt_homography_from_plane,
)
from parallel_consensus.geometry.vanishing import observations_from_segments
from parallel_consensus.scene import CameraIntrinsics, ModelInstance, Scene
from parallel_consensus.utils import retry, substream

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

DEPTH_RANGE = (4.0, 8.0)
OBJECT_RADIUS_RANGE = (0.5, 1.5)
BASELINE_RANGE = (0.3, 1.0)
MAX_ROTATION_DEG = 10.0
MAX_PLANE_TILT_DEG = 60.0
SEGMENT_LENGTH_PX = (20.0, 150.0)


@dataclass(frozen=True)
class Camera:
    """Intrinsics in pixels and their normalized-frame counterpart."""

    intrinsics: CameraIntrinsics
    K_n: FloatArray

    @staticmethod
    def sample(cfg: GenConfig, rng: np.random.Generator) -> Camera:
        focal_mm = rng.uniform(*cfg.focal_range_mm)
        focal_px = focal_mm / SENSOR_WIDTH_MM * cfg.width
        intrinsics = CameraIntrinsics.from_focal(
            focal_px, cfg.width, cfg.height
        )
        K_n = normalization_matrix(cfg.width, cfg.height) @ intrinsics.K
        return Camera(intrinsics, K_n)

    def project(self, points: FloatArray) -> FloatArray:
        image = points @ self.K_n.T
        return image[:, :2] / image[:, 2:]

    def rays(self, image: FloatArray) -> FloatArray:
        homogeneous = np.column_stack([image, np.ones(len(image))])
        return homogeneous @ np.linalg.inv(self.K_n).T


def _small_rotation(rng: np.random.Generator) -> FloatArray:
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = np.deg2rad(rng.uniform(-MAX_ROTATION_DEG, MAX_ROTATION_DEG))
    return Rotation.from_rotvec(angle * axis).as_matrix()


def _random_translation(rng: np.random.Generator) -> FloatArray:
    t = rng.normal(size=3)
    return t / np.linalg.norm(t) * rng.uniform(*BASELINE_RANGE)


def _visible(
    camera: Camera, points: FloatArray, cfg: GenConfig
) -> npt.NDArray[np.bool_]:
    half = frame_extent(cfg.width, cfg.height)
    image = camera.project(points)
    inside = np.all(np.abs(image) <= half, axis=1)
    return inside & (points[:, 2] > 0)


def _model_counts(
    cfg: GenConfig, rng: np.random.Generator
) -> tuple[int, IntArray]:
    models = int(rng.integers(cfg.model_range[0], cfg.model_range[1] + 1))
    points = rng.integers(
        cfg.points_range[0], cfg.points_range[1] + 1, size=models
    )
    return models, points


def _finalize(scene: Scene, cfg: GenConfig, rng: np.random.Generator) -> Scene:
    scene = prune_small_clusters(scene, MINIMAL_SET_SIZES[cfg.task] + 1)
    scene = inject_outliers(scene, cfg.outlier_rate, rng, cfg.outlier_cap)
    scene = relabel_by_significance(scene)
    scene = inject_noise(scene, cfg.noise, rng)
    return shuffle_observations(scene, rng)


def _sample_moving_object(
    camera: Camera, count: int, cfg: GenConfig, rng: np.random.Generator
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """A point cloud in front of the first view and the relative motion
    ``X2 = R @ X1 + t`` under which the second view sees it.

    Raises:
        InsufficientInliersError: If fewer than a minimal set plus one of
            the points are visible in both views.
    """
    center_image = uniform_frame_points(1, cfg.width, cfg.height, rng)[0]
    ray = camera.rays(center_image[None])[0]
    center = ray / ray[2] * rng.uniform(*DEPTH_RANGE)
    radius = rng.uniform(*OBJECT_RADIUS_RANGE)
    cloud = center + rng.uniform(-radius, radius, size=(count, 3))
    R = _small_rotation(rng)
    t = _random_translation(rng)
    moved = cloud @ R.T + t
    visible = _visible(camera, cloud, cfg) & _visible(camera, moved, cfg)
    needed = MINIMAL_SET_SIZES[TASKS.FMAT] + 1
    if visible.sum() < needed:
        raise InsufficientInliersError(
            f"{int(visible.sum())} of {count} object points visible, "
            f"{needed} needed."
        )
    return cloud[visible], R, t


def gen_fmat_scene(cfg: GenConfig, rng: np.random.Generator) -> Scene:
    """Two views of several rigid objects, each moving on its own.

    Args:
        cfg (GenConfig): Generator settings.
        rng (np.random.Generator): Random source.

    Returns:
        Scene: The scene, models ordered by descending inlier count.
    """
    camera = Camera.sample(cfg, rng)
    sample = retry(cfg.max_retries, InsufficientInliersError)(
        _sample_moving_object
    )
    models, counts = _model_counts(cfg, rng)
    rows, truth = [], []
    for k in range(models):
        try:
            cloud, R, t = sample(camera, int(counts[k]), cfg, rng)
        except InsufficientInliersError as e:
            logger.warning("Dropping object %d: %s", k, e)
            continue
        moved = cloud @ R.T + t
        rows.append(
            np.hstack([camera.project(cloud), camera.project(moved)])
        )
        truth.append(gt_fmat_from_pose(camera.K_n, R, t))
    observations = np.vstack(rows) if rows else np.zeros((0, 4))
    scene = Scene(
        task=TASKS.FMAT,
        observations=observations,
        width=cfg.width,
        height=cfg.height,
        gt_labels=np.zeros(len(observations), dtype=np.int64),
        gt_models=tuple(truth),
        intrinsics=camera.intrinsics,
    )
    labels = label_by_residual(scene, np.arange(len(scene)))
    return _finalize(scene.replace(gt_labels=labels), cfg, rng)


def _sample_plane(
    camera: Camera, count: int, cfg: GenConfig, rng: np.random.Generator
) -> tuple[FloatArray, float, FloatArray]:
    """A plane ``n^T X + d = 0`` facing the first view and points on it
    hit by rays through uniform image positions.

    Raises:
        InsufficientInliersError: If too few points land in front of the
            camera.
    """
    tilt = np.deg2rad(rng.uniform(0.0, MAX_PLANE_TILT_DEG))
    azimuth = rng.uniform(0.0, 2 * np.pi)
    normal = -np.array(
        [
            np.sin(tilt) * np.cos(azimuth),
            np.sin(tilt) * np.sin(azimuth),
            np.cos(tilt),
        ]
    )
    anchor_ray = camera.rays(
        uniform_frame_points(1, cfg.width, cfg.height, rng)
    )[0]
    anchor = anchor_ray / anchor_ray[2] * rng.uniform(*DEPTH_RANGE)
    offset = float(-normal @ anchor)
    rays = camera.rays(uniform_frame_points(count, cfg.width, cfg.height, rng))
    denom = rays @ normal
    with np.errstate(divide="ignore", invalid="ignore"):
        depth = -offset / denom
    ahead = np.isfinite(depth) & (depth > 0)
    points = rays[ahead] * depth[ahead, None]
    needed = MINIMAL_SET_SIZES[TASKS.HOMOGRAPHY] + 1
    if len(points) < needed:
        raise InsufficientInliersError(
            f"{len(points)} of {count} plane points ahead of the camera, "
            f"{needed} needed."
        )
    return normal, offset, points


def gen_homography_scene(cfg: GenConfig, rng: np.random.Generator) -> Scene:
    """Two views of several planes. Nearly coplanar planes are merged and
    clusters of fewer than ``MIN_PLANE_CORRESPONDENCES`` points become
    outliers.

    Args:
        cfg (GenConfig): Generator settings.
        rng (np.random.Generator): Random source.

    Returns:
        Scene: The scene, models ordered by descending inlier count.
    """
    camera = Camera.sample(cfg, rng)
    R = _small_rotation(rng)
    t = _random_translation(rng)
    sample = retry(cfg.max_retries, InsufficientInliersError)(_sample_plane)
    models, counts = _model_counts(cfg, rng)
    normals, offsets, clouds = [], [], []
    for k in range(models):
        try:
            normal, offset, points = sample(camera, int(counts[k]), cfg, rng)
        except InsufficientInliersError as e:
            logger.warning("Dropping plane %d: %s", k, e)
            continue
        normals.append(normal)
        offsets.append(offset)
        clouds.append(points)

    groups = (
        merge_coplanar_planes(normals, offsets)
        if normals
        else np.zeros(0, dtype=np.int64)
    )
    truth = []
    for g in range(int(groups.max()) + 1 if groups.size else 0):
        members = np.flatnonzero(groups == g)
        largest = members[np.argmax([len(clouds[i]) for i in members])]
        truth.append(
            gt_homography_from_plane(
                camera.K_n, R, t, normals[largest], offsets[largest]
            )
        )

    rows = []
    for points in clouds:
        moved = points @ R.T + t
        seen = _visible(camera, moved, cfg)
        rows.append(
            np.hstack(
                [camera.project(points[seen]), camera.project(moved[seen])]
            )
        )
    observations = np.vstack(rows) if rows else np.zeros((0, 4))
    scene = Scene(
        task=TASKS.HOMOGRAPHY,
        observations=observations,
        width=cfg.width,
        height=cfg.height,
        gt_labels=np.zeros(len(observations), dtype=np.int64),
        gt_models=tuple(truth),
        intrinsics=camera.intrinsics,
    )
    labels = label_by_residual(scene, np.arange(len(scene)))
    scene = prune_small_clusters(
        scene.replace(gt_labels=labels), MIN_PLANE_CORRESPONDENCES
    )
    return _finalize(scene, cfg, rng)


def sample_directions(
    count: int,
    rng: np.random.Generator,
    manhattan: bool = False,
    min_separation_deg: float = VP_MIN_SEPARATION_DEG,
    attempts: int = 1000,
) -> FloatArray:
    """Unit vanishing directions, pairwise at least ``min_separation_deg``
    apart as lines.

    Args:
        count (int): Requested directions; Manhattan scenes always have 3.
        rng (np.random.Generator): Random source.
        manhattan (bool): Use the columns of a random rotation.
        min_separation_deg (float): Smallest angle between two directions.
        attempts (int): Candidate draws before settling for fewer
            directions.

    Returns:
        FloatArray: Directions, shape ``(count, 3)`` or fewer.
    """
    if manhattan:
        quaternion = rng.normal(size=4)
        return Rotation.from_quat(quaternion).as_matrix().T
    limit = np.cos(np.deg2rad(min_separation_deg))
    directions: list[FloatArray] = []
    for _ in range(attempts):
        if len(directions) == count:
            break
        candidate = rng.normal(size=3)
        candidate /= np.linalg.norm(candidate)
        if all(abs(candidate @ d) <= limit for d in directions):
            directions.append(candidate)
    if len(directions) < count:
        logger.warning(
            "Placed %d of %d vanishing directions.", len(directions), count
        )
    return np.array(directions).reshape(-1, 3)


def segments_towards(
    vp: FloatArray,
    count: int,
    cfg: GenConfig,
    rng: np.random.Generator,
    max_deviation_deg: float = VP_LABEL_ANGLE_DEG,
) -> FloatArray:
    """Segments around uniform midpoints, aimed at a vanishing point up to
    an angular deviation.

    Args:
        vp (FloatArray): Homogeneous vanishing point, normalized frame.
        count (int): Number of segments.
        cfg (GenConfig): Generator settings.
        rng (np.random.Generator): Random source.
        max_deviation_deg (float): Largest deviation from the exact line.

    Returns:
        FloatArray: Endpoints, shape ``(count, 4)``.
    """
    mids = uniform_frame_points(count, cfg.width, cfg.height, rng)
    direction = vp[None, :2] - vp[2] * mids
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    deviation = np.deg2rad(
        rng.uniform(-max_deviation_deg, max_deviation_deg, size=count)
    )
    cos, sin = np.cos(deviation), np.sin(deviation)
    rotated = np.column_stack(
        [
            cos * direction[:, 0] - sin * direction[:, 1],
            sin * direction[:, 0] + cos * direction[:, 1],
        ]
    )
    half = rng.uniform(*SEGMENT_LENGTH_PX, size=count) / cfg.scale / 2.0
    offset = rotated * half[:, None]
    return np.hstack([mids - offset, mids + offset])


def gen_vp_scene(cfg: GenConfig, rng: np.random.Generator) -> Scene:
    """Line segments converging to a few vanishing points.

    Args:
        cfg (GenConfig): Generator settings.
        rng (np.random.Generator): Random source.

    Returns:
        Scene: The scene, models ordered by descending inlier count.
    """
    camera = Camera.sample(cfg, rng)
    models, counts = _model_counts(cfg, rng)
    directions = sample_directions(models, rng, manhattan=cfg.manhattan)
    if cfg.manhattan:
        counts = rng.integers(
            cfg.points_range[0], cfg.points_range[1] + 1, size=3
        )
    truth, rows, labels = [], [], []
    for k, direction in enumerate(directions):
        vp = camera.K_n @ direction
        truth.append(ModelInstance(TASKS.VP, vp))
        rows.append(segments_towards(vp, int(counts[k]), cfg, rng))
        labels.append(np.full(int(counts[k]), k + 1, dtype=np.int64))
    segments = np.vstack(rows) if rows else np.zeros((0, 4))
    scene = Scene(
        task=TASKS.VP,
        observations=observations_from_segments(segments),
        width=cfg.width,
        height=cfg.height,
        segments=segments,
        gt_labels=(
            np.concatenate(labels) if labels else np.zeros(0, np.int64)
        ),
        gt_models=tuple(truth),
        intrinsics=camera.intrinsics,
    )
    return _finalize(scene, cfg, rng)


GENERATORS: dict[str, Callable[[GenConfig, np.random.Generator], Scene]] = {
    TASKS.VP: gen_vp_scene,
    TASKS.FMAT: gen_fmat_scene,
    TASKS.HOMOGRAPHY: gen_homography_scene,
}


def scene_seed(cfg: GenConfig, index: int) -> int:
    """Seed of the ``index``-th scene of a configuration."""
    return int(substream(cfg.seed, index).integers(2**31))


def generate_scene(cfg: GenConfig, seed: int) -> Scene:
    """One scene, a pure function of ``(cfg, seed)``."""
    scene = GENERATORS[cfg.task](cfg, np.random.default_rng(seed))
    return scene.replace(seed=seed)


def generate_scenes(cfg: GenConfig, threads: int = 1) -> list[Scene]:
    """All ``cfg.scene_count`` scenes of a configuration, in index order.

    Args:
        cfg (GenConfig): Generator settings.
        threads (int): Worker threads.

    Returns:
        list[Scene]: The scenes.
    """
    seeds = [scene_seed(cfg, i) for i in range(cfg.scene_count)]
    logger.info(
        "Generating %d %s scenes from seed %d.",
        cfg.scene_count,
        cfg.task,
        cfg.seed,
    )
    if threads <= 1:
        return [generate_scene(cfg, s) for s in seeds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda s: generate_scene(cfg, s), seeds))
