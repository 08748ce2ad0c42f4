from itertools import combinations

import numpy as np
import numpy.typing as npt

from parallel_consensus.constants import (
    DEGENERACY_TOL,
    RESIDUAL_SENTINEL,
    TASKS,
)
from parallel_consensus.geometry.normalization import (
    conditioning_matrix,
    to_homogeneous,
)
from parallel_consensus.scene import ModelInstance

FloatArray = npt.NDArray[np.float64]

_COLLINEAR_TOL = 1e-9
_SINGULAR_TOL = 1e-12


def has_collinear_triple(points: FloatArray) -> bool:
    """Whether any three of the (conditioned) points are collinear."""
    hom = to_homogeneous(points)
    for a, b, c in combinations(range(hom.shape[0]), 3):
        if abs(np.linalg.det(hom[[a, b, c]])) < _COLLINEAR_TOL:
            return True
    return False


def dlt_rows(src: FloatArray, dst: FloatArray) -> FloatArray:
    """Two DLT rows per correspondence for ``dst ~ H @ src``."""
    x, y = src[:, 0], src[:, 1]
    u, v = dst[:, 0], dst[:, 1]
    zeros = np.zeros_like(x)
    ones = np.ones_like(x)
    rows_u = np.column_stack(
        [-x, -y, -ones, zeros, zeros, zeros, u * x, u * y, u]
    )
    rows_v = np.column_stack(
        [zeros, zeros, zeros, -x, -y, -ones, v * x, v * y, v]
    )
    return np.stack([rows_u, rows_v], axis=1).reshape(-1, 9)


def homography_four_point_dlt(
    correspondences: npt.ArrayLike,
) -> ModelInstance | None:
    """Four-point DLT with isotropic conditioning of both point sets.

    Args:
        correspondences (npt.ArrayLike): Four rows ``(x1, y1, x2, y2)``.

    Returns:
        ModelInstance | None: The homography, or None when three source or
            target points are collinear or the result is singular.
    """
    corr = np.asarray(correspondences, dtype=np.float64).reshape(-1, 4)
    T1 = conditioning_matrix(corr[:, :2])
    T2 = conditioning_matrix(corr[:, 2:])
    if T1 is None or T2 is None:
        return None
    src = (to_homogeneous(corr[:, :2]) @ T1.T)[:, :2]
    dst = (to_homogeneous(corr[:, 2:]) @ T2.T)[:, :2]
    if has_collinear_triple(src) or has_collinear_triple(dst):
        return None

    _, _, vt = np.linalg.svd(dlt_rows(src, dst), full_matrices=True)
    H = np.linalg.inv(T2) @ vt[-1].reshape(3, 3) @ T1
    sv = np.linalg.svd(H, compute_uv=False)
    if sv[0] < DEGENERACY_TOL or sv[2] < _SINGULAR_TOL * sv[0]:
        return None
    return ModelInstance(TASKS.HOMOGRAPHY, H)


def _transfer(
    points: FloatArray, H: FloatArray
) -> tuple[FloatArray, npt.NDArray[np.bool_]]:
    mapped = to_homogeneous(points) @ H.T
    w = mapped[:, 2]
    ok = np.abs(w) >= DEGENERACY_TOL
    safe_w = np.where(ok, w, 1.0)
    return mapped[:, :2] / safe_w[:, None], ok


def residual_transfer_sqrt(
    correspondences: npt.ArrayLike,
    H: npt.ArrayLike,
    H_inv: npt.ArrayLike | None = None,
) -> FloatArray:
    """Square root of the symmetric transfer error
    ``d(pa, H^-1 pb)^2 + d(pb, H pa)^2``.

    Both matrices are rescaled to unit norm, so ``H`` and ``2 H`` give the
    same residuals. Points transferred to infinity yield
    ``RESIDUAL_SENTINEL``.

    Args:
        correspondences (npt.ArrayLike): Rows ``(x1, y1, x2, y2)``.
        H (npt.ArrayLike): The 3x3 homography.
        H_inv (npt.ArrayLike | None): Its inverse, if already known.

    Returns:
        FloatArray: Residuals, shape ``(n,)``.
    """
    corr = np.asarray(correspondences, dtype=np.float64).reshape(-1, 4)
    fwd = np.asarray(H, dtype=np.float64)
    bwd = np.linalg.inv(fwd) if H_inv is None else np.asarray(H_inv)
    fwd = fwd / np.linalg.norm(fwd)
    bwd = bwd / np.linalg.norm(bwd)

    pa, pb = corr[:, :2], corr[:, 2:]
    to_b, ok_b = _transfer(pa, fwd)
    to_a, ok_a = _transfer(pb, bwd)
    err = np.sum((pb - to_b) ** 2, axis=1) + np.sum((pa - to_a) ** 2, axis=1)
    out = np.sqrt(err)
    out[~(ok_a & ok_b)] = RESIDUAL_SENTINEL
    return np.minimum(out, RESIDUAL_SENTINEL)
