import numpy as np
import numpy.typing as npt

from parallel_consensus.constants import DEGENERACY_TOL
from parallel_consensus.exceptions import GeometryError

FloatArray = npt.NDArray[np.float64]


def _check_size(width: float, height: float) -> float:
    if not (width > 0 and height > 0):
        raise GeometryError(
            f"Image size must be positive, got {width}x{height}."
        )
    return float(max(width, height))


def _as_points(points: npt.ArrayLike) -> FloatArray:
    array = np.array(points, dtype=np.float64)
    if array.shape[-1] != 2:
        raise GeometryError(
            f"Points must have 2 coordinates in the last axis, got "
            f"{array.shape}."
        )
    if not np.all(np.isfinite(array)):
        raise GeometryError("Point coordinates must be finite.")
    return array


def normalize_coords(
    points: npt.ArrayLike, width: float, height: float
) -> FloatArray:
    """Maps pixel coordinates into the normalized frame, centered on the image
    and scaled by its larger side.

    ``x' = (x - width / 2) / max(width, height)`` and likewise for ``y``.

    Args:
        points (npt.ArrayLike): Pixel coordinates, shape ``(..., 2)``.
        width (float): Image width in pixels.
        height (float): Image height in pixels.

    Raises:
        GeometryError: If the size is not positive or a point is not finite.

    Returns:
        FloatArray: Normalized coordinates with the same shape.
    """
    scale = _check_size(width, height)
    array = _as_points(points)
    center = np.array([width / 2.0, height / 2.0])
    return (array - center) / scale


def denormalize_coords(
    points: npt.ArrayLike, width: float, height: float
) -> FloatArray:
    """Inverse of ``normalize_coords``.

    Args:
        points (npt.ArrayLike): Normalized coordinates, shape ``(..., 2)``.
        width (float): Image width in pixels.
        height (float): Image height in pixels.

    Returns:
        FloatArray: Pixel coordinates with the same shape.
    """
    scale = _check_size(width, height)
    array = _as_points(points)
    center = np.array([width / 2.0, height / 2.0])
    return array * scale + center


def normalization_matrix(width: float, height: float) -> FloatArray:
    """The 3x3 affine matrix ``T`` with ``T @ (x, y, 1)`` equal to the
    normalized point.

    Args:
        width (float): Image width in pixels.
        height (float): Image height in pixels.

    Returns:
        FloatArray: The matrix.
    """
    scale = _check_size(width, height)
    return np.array(
        [
            [1.0 / scale, 0.0, -width / (2.0 * scale)],
            [0.0, 1.0 / scale, -height / (2.0 * scale)],
            [0.0, 0.0, 1.0],
        ]
    )


def to_homogeneous(points: FloatArray) -> FloatArray:
    ones = np.ones(points.shape[:-1] + (1,), dtype=np.float64)
    return np.concatenate([points, ones], axis=-1)


def conditioning_matrix(points: FloatArray) -> FloatArray | None:
    """Isotropic conditioning: translates the centroid to the origin and
    scales so that the mean distance from it is sqrt(2).

    Args:
        points (FloatArray): Points, shape ``(n, 2)``.

    Returns:
        FloatArray | None: The 3x3 matrix, or None if all points coincide.
    """
    centroid = points.mean(axis=0)
    mean_dist = np.linalg.norm(points - centroid, axis=1).mean()
    if mean_dist < DEGENERACY_TOL:
        return None
    s = np.sqrt(2.0) / mean_dist
    return np.array(
        [
            [s, 0.0, -s * centroid[0]],
            [0.0, s, -s * centroid[1]],
            [0.0, 0.0, 1.0],
        ]
    )
