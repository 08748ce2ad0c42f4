import numpy as np
import numpy.typing as npt

from parallel_consensus.constants import TASKS
from parallel_consensus.exceptions import GeometryError
from parallel_consensus.scene import CameraIntrinsics, ModelInstance

FloatArray = npt.NDArray[np.float64]

_ROTATION_TOL = 1e-9


def skew(t: npt.ArrayLike) -> FloatArray:
    """Cross-product matrix ``[t]_x`` with ``[t]_x @ v == cross(t, v)``."""
    x, y, z = np.asarray(t, dtype=np.float64)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def _as_matrix(K: CameraIntrinsics | npt.ArrayLike) -> FloatArray:
    if isinstance(K, CameraIntrinsics):
        return K.K
    return CameraIntrinsics(np.asarray(K, dtype=np.float64)).K


def _check_rotation(R: npt.ArrayLike) -> FloatArray:
    rot = np.asarray(R, dtype=np.float64)
    if rot.shape != (3, 3):
        raise GeometryError(f"R must be 3x3, got {rot.shape}.")
    if not np.allclose(rot @ rot.T, np.eye(3), atol=_ROTATION_TOL) or (
        abs(np.linalg.det(rot) - 1.0) > _ROTATION_TOL
    ):
        raise GeometryError("R must be a rotation matrix.")
    return rot


def gt_fmat_from_pose(
    K: CameraIntrinsics | npt.ArrayLike,
    R: npt.ArrayLike,
    t: npt.ArrayLike,
    K2: CameraIntrinsics | npt.ArrayLike | None = None,
) -> ModelInstance:
    """Fundamental matrix ``K2^-T [t]_x R K^-1`` of a second camera at
    ``X2 = R @ X1 + t``.

    Args:
        K (CameraIntrinsics | npt.ArrayLike): Intrinsics of the first view.
        R (npt.ArrayLike): Relative rotation.
        t (npt.ArrayLike): Relative translation.
        K2 (CameraIntrinsics | npt.ArrayLike | None): Intrinsics of the
            second view, ``K`` if omitted.

    Raises:
        GeometryError: If ``t`` is zero or ``R`` is not a rotation.

    Returns:
        ModelInstance: The fundamental matrix.
    """
    K1 = _as_matrix(K)
    K2m = K1 if K2 is None else _as_matrix(K2)
    rot = _check_rotation(R)
    trans = np.asarray(t, dtype=np.float64)
    if np.linalg.norm(trans) == 0.0:
        raise GeometryError("F is undefined for a pure rotation (t = 0).")
    F = np.linalg.inv(K2m).T @ skew(trans) @ rot @ np.linalg.inv(K1)
    return ModelInstance(TASKS.FMAT, F)


def gt_homography_from_plane(
    K: CameraIntrinsics | npt.ArrayLike,
    R: npt.ArrayLike,
    t: npt.ArrayLike,
    n: npt.ArrayLike,
    d: float,
    K2: CameraIntrinsics | npt.ArrayLike | None = None,
) -> ModelInstance:
    """Homography ``K2 (R - t n^T / d) K^-1`` induced by the plane
    ``n^T X + d = 0`` of the first camera frame.

    Args:
        K (CameraIntrinsics | npt.ArrayLike): Intrinsics of the first view.
        R (npt.ArrayLike): Relative rotation.
        t (npt.ArrayLike): Relative translation.
        n (npt.ArrayLike): Plane normal, rescaled to unit length.
        d (float): Plane offset.
        K2 (CameraIntrinsics | npt.ArrayLike | None): Intrinsics of the
            second view, ``K`` if omitted.

    Raises:
        GeometryError: If ``d`` is zero, the normal is zero or the result is
            singular.

    Returns:
        ModelInstance: The homography.
    """
    if d == 0.0:
        raise GeometryError("Plane offset d must be nonzero.")
    K1 = _as_matrix(K)
    K2m = K1 if K2 is None else _as_matrix(K2)
    rot = _check_rotation(R)
    normal = np.asarray(n, dtype=np.float64)
    norm = np.linalg.norm(normal)
    if norm == 0.0:
        raise GeometryError("Plane normal must be nonzero.")
    normal = normal / norm
    trans = np.asarray(t, dtype=np.float64)
    H = K2m @ (rot - np.outer(trans, normal) / d) @ np.linalg.inv(K1)
    sv = np.linalg.svd(H, compute_uv=False)
    if sv[2] < 1e-12 * sv[0]:
        raise GeometryError("Plane-induced homography is singular.")
    return ModelInstance(TASKS.HOMOGRAPHY, H)
