import numpy as np
import numpy.typing as npt

from parallel_consensus.constants import DEGENERACY_TOL, TASKS
from parallel_consensus.scene import ModelInstance

FloatArray = npt.NDArray[np.float64]


def lines_from_segments(segments: npt.ArrayLike) -> FloatArray:
    """Homogeneous lines through segment endpoints, scaled to normal form
    (``a**2 + b**2 == 1``). Zero-length segments give the zero vector.

    Args:
        segments (npt.ArrayLike): Endpoints ``(x1, y1, x2, y2)``, shape
            ``(n, 4)``.

    Returns:
        FloatArray: Lines, shape ``(n, 3)``.
    """
    seg = np.asarray(segments, dtype=np.float64).reshape(-1, 4)
    ones = np.ones((seg.shape[0], 1))
    p1 = np.hstack([seg[:, :2], ones])
    p2 = np.hstack([seg[:, 2:], ones])
    lines = np.cross(p1, p2)
    norms = np.linalg.norm(lines[:, :2], axis=1, keepdims=True)
    safe = np.where(norms > DEGENERACY_TOL, norms, 1.0)
    return np.where(norms > DEGENERACY_TOL, lines / safe, 0.0)


def observations_from_segments(segments: npt.ArrayLike) -> FloatArray:
    """Feature vectors ``(mid_x, mid_y, length, angle)`` of line segments, the
    angle in radians from ``atan2``.

    Args:
        segments (npt.ArrayLike): Endpoints, shape ``(n, 4)``.

    Returns:
        FloatArray: Observations, shape ``(n, 4)``.
    """
    seg = np.asarray(segments, dtype=np.float64).reshape(-1, 4)
    mid = (seg[:, :2] + seg[:, 2:]) / 2.0
    delta = seg[:, 2:] - seg[:, :2]
    length = np.linalg.norm(delta, axis=1)
    angle = np.arctan2(delta[:, 1], delta[:, 0])
    return np.column_stack([mid, length, angle])


def vp_from_lines(lines: FloatArray) -> ModelInstance | None:
    """Intersects two homogeneous lines.

    Args:
        lines (FloatArray): Two lines, shape ``(2, 3)``.

    Returns:
        ModelInstance | None: The vanishing point, or None if the lines
            coincide.
    """
    point = np.cross(lines[0], lines[1])
    if np.linalg.norm(point) < DEGENERACY_TOL:
        return None
    return ModelInstance(TASKS.VP, point)


def vp_from_segments(segments: npt.ArrayLike) -> ModelInstance | None:
    """Minimal solver for the vanishing point task: the cross product of the
    lines through two segments.

    Args:
        segments (npt.ArrayLike): Two segments, shape ``(2, 4)``.

    Returns:
        ModelInstance | None: The vanishing point or None when degenerate.
    """
    lines = lines_from_segments(segments)
    if np.any(np.linalg.norm(lines, axis=1) == 0.0):
        return None
    return vp_from_lines(lines)


def residual_vp(segments: npt.ArrayLike, vp: FloatArray) -> FloatArray:
    """``1 - |cos(theta)|`` between each segment and the line joining its
    midpoint to the vanishing point.

    Segments whose midpoint coincides with the vanishing point get 0; zero
    length segments get 1.

    Args:
        segments (npt.ArrayLike): Endpoints, shape ``(n, 4)``.
        vp (FloatArray): Homogeneous vanishing point, shape ``(3,)``.

    Returns:
        FloatArray: Residuals in ``[0, 1]``, shape ``(n,)``.
    """
    seg = np.asarray(segments, dtype=np.float64).reshape(-1, 4)
    mid = np.column_stack(
        [(seg[:, :2] + seg[:, 2:]) / 2.0, np.ones(seg.shape[0])]
    )
    constrained = np.cross(mid, np.asarray(vp, dtype=np.float64))
    direction = np.column_stack([constrained[:, 1], -constrained[:, 0]])
    delta = seg[:, 2:] - seg[:, :2]

    dir_norm = np.linalg.norm(direction, axis=1)
    seg_norm = np.linalg.norm(delta, axis=1)
    denom = dir_norm * seg_norm
    valid = denom > DEGENERACY_TOL
    cos = np.zeros(seg.shape[0])
    cos[valid] = np.abs(np.sum(direction[valid] * delta[valid], axis=1)) / (
        denom[valid]
    )
    residual = np.clip(1.0 - cos, 0.0, 1.0)
    residual[dir_norm <= DEGENERACY_TOL] = 0.0
    residual[seg_norm <= DEGENERACY_TOL] = 1.0
    return residual


def refine_vp_weighted(
    vp: ModelInstance, segments: npt.ArrayLike, weights: npt.ArrayLike
) -> ModelInstance:
    """Least-squares vanishing point from weighted lines: the right singular
    vector of smallest singular value of the matrix whose rows are the lines
    scaled by their weights.

    Args:
        vp (ModelInstance): The initial vanishing point.
        segments (npt.ArrayLike): Endpoints, shape ``(n, 4)``.
        weights (npt.ArrayLike): Nonnegative weights, shape ``(n,)``.

    Returns:
        ModelInstance: The refined point, or ``vp`` itself when fewer than two
            independent lines carry weight.
    """
    w = np.asarray(weights, dtype=np.float64)
    if np.count_nonzero(w > 0) < 2:
        return vp
    A = lines_from_segments(segments) * w[:, None]
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    if s.size < 2 or s[1] <= DEGENERACY_TOL * max(s[0], 1.0):
        return vp
    return ModelInstance(TASKS.VP, vt[-1])
