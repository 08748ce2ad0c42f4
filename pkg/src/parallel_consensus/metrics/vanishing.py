from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
import numpy.typing as npt

from parallel_consensus.constants import (
    DEFAULT_AUC_CUTOFFS,
    DEGENERACY_TOL,
    VP_MAX_ANGLE_DEG,
)
from parallel_consensus.metrics.hungarian import hungarian_assign
from parallel_consensus.scene import ModelInstance

FloatArray = npt.NDArray[np.float64]


def vp_directions(vps: npt.ArrayLike, K: npt.ArrayLike) -> FloatArray:
    """Unit 3D directions ``K^-1 v`` of homogeneous vanishing points; rows of
    zero norm stay zero."""
    points = np.atleast_2d(np.asarray(vps, dtype=np.float64))
    dirs = points @ np.linalg.inv(np.asarray(K, dtype=np.float64)).T
    norms = np.linalg.norm(dirs, axis=1, keepdims=True)
    safe = np.where(norms > DEGENERACY_TOL, norms, 1.0)
    return np.where(norms > DEGENERACY_TOL, dirs / safe, 0.0)


def vp_angle_matrix(
    predicted: npt.ArrayLike, ground_truth: npt.ArrayLike, K: npt.ArrayLike
) -> FloatArray:
    """Angles in degrees between predicted and ground-truth directions, sign
    ignored. Pairs with a zero direction get the maximum angle.

    Args:
        predicted (npt.ArrayLike): Vanishing points, shape ``(m, 3)``.
        ground_truth (npt.ArrayLike): Vanishing points, shape ``(g, 3)``.
        K (npt.ArrayLike): Intrinsics of the frame the points live in.

    Returns:
        FloatArray: Angles, shape ``(m, g)``.
    """
    a = vp_directions(predicted, K)
    b = vp_directions(ground_truth, K)
    cos = np.clip(np.abs(a @ b.T), 0.0, 1.0)
    angles = np.degrees(np.arccos(cos))
    zero = (np.linalg.norm(a, axis=1)[:, None] == 0) | (
        np.linalg.norm(b, axis=1)[None, :] == 0
    )
    angles[zero] = VP_MAX_ANGLE_DEG
    return angles


def vp_angle_errors(
    models: Sequence[ModelInstance],
    gt_models: Sequence[ModelInstance],
    K: npt.ArrayLike,
) -> FloatArray:
    """Per ground-truth vanishing point error in degrees after Hungarian
    matching with the top ``min(len(gt), len(models))`` predictions.
    Unmatched ground truth gets 90 degrees.

    Args:
        models (Sequence[ModelInstance]): Ranked predictions.
        gt_models (Sequence[ModelInstance]): Ground truth.
        K (npt.ArrayLike): Intrinsics of the frame the points live in.

    Returns:
        FloatArray: Errors, shape ``(len(gt_models),)``.
    """
    errors = np.full(len(gt_models), VP_MAX_ANGLE_DEG)
    used = list(models)[: len(gt_models)]
    if not used or not gt_models:
        return errors
    cost = vp_angle_matrix(
        np.stack([m.params for m in used]),
        np.stack([g.params for g in gt_models]),
        K,
    )
    pairs, _ = hungarian_assign(cost)
    for r, c in pairs:
        errors[c] = cost[r, c]
    return errors


def auc_at(errors: npt.ArrayLike, theta_c: float) -> float:
    """Area under the recall curve up to ``theta_c``, relative to
    ``theta_c``, integrated exactly over the step function.

    Args:
        errors (npt.ArrayLike): Pooled errors in degrees.
        theta_c (float): Cutoff in degrees, positive.

    Raises:
        ValueError: If the cutoff is not positive.

    Returns:
        float: The AUC in ``[0, 1]``; 0 for an empty pool.
    """
    if not theta_c > 0:
        raise ValueError(f"AUC cutoff must be positive, got {theta_c}.")
    e = np.asarray(errors, dtype=np.float64).ravel()
    if e.size == 0:
        return 0.0
    below = e[e <= theta_c]
    return float(np.sum(theta_c - below) / (e.size * theta_c))


class ErrorPool:
    """Per ground-truth errors pooled across a dataset."""

    def __init__(self, errors: Iterable[float] | None = None) -> None:
        self._errors: list[float] = [] if errors is None else list(errors)

    def add(self, errors: Iterable[float]) -> None:
        self._errors.extend(float(e) for e in errors)

    @property
    def errors(self) -> FloatArray:
        return np.asarray(self._errors, dtype=np.float64)

    def __len__(self) -> int:
        return len(self._errors)

    def auc(self, theta_c: float) -> float:
        return auc_at(self.errors, theta_c)

    def aucs(
        self, cutoffs: Sequence[float] = DEFAULT_AUC_CUTOFFS
    ) -> dict[str, float]:
        return {f"{c:g}": self.auc(c) for c in cutoffs}

    def recall_curve(
        self, theta_c: float, points: int = 101
    ) -> tuple[FloatArray, FloatArray]:
        """Recall at evenly spaced thresholds, for plot data."""
        thetas = np.linspace(0.0, theta_c, points)
        e = np.sort(self.errors)
        if e.size == 0:
            return thetas, np.zeros_like(thetas)
        recall = np.searchsorted(e, thetas, side="right") / e.size
        return thetas, recall
