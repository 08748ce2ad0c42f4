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

# Evaluation points for recovering the cubic det(a * F1 + (1 - a) * F2).
_CUBIC_NODES = np.array([-1.0, 0.0, 1.0, 2.0])
_RANK_TOL = 1e-10
_IMAG_TOL = 1e-8


def enforce_rank_two(F: FloatArray) -> FloatArray:
    """Zeroes the smallest singular value of a 3x3 matrix."""
    u, s, vt = np.linalg.svd(F)
    s[2] = 0.0
    return (u * s) @ vt


def epipolar_constraints(p1: FloatArray, p2: FloatArray) -> FloatArray:
    """Rows of the linear system ``p2^T F p1 = 0`` in the row-major entries of
    F, one per homogeneous correspondence.

    Args:
        p1 (FloatArray): Points in the first view, shape ``(n, 3)``.
        p2 (FloatArray): Points in the second view, shape ``(n, 3)``.

    Returns:
        FloatArray: The constraint matrix, shape ``(n, 9)``.
    """
    return (p2[:, :, None] * p1[:, None, :]).reshape(-1, 9)


def _cubic_coefficients(F1: FloatArray, F2: FloatArray) -> FloatArray:
    dets = [np.linalg.det(a * F1 + (1.0 - a) * F2) for a in _CUBIC_NODES]
    coeffs = np.polyfit(_CUBIC_NODES, dets, 3)
    scale = np.max(np.abs(coeffs))
    if scale == 0.0:
        return coeffs[-1:]
    # Drop vanishing leading terms so np.roots solves the quadratic or
    # linear remainder.
    lead = 0
    while lead < 3 and abs(coeffs[lead]) < 1e-12 * scale:
        lead += 1
    return coeffs[lead:]


def fmat_seven_point(correspondences: npt.ArrayLike) -> list[ModelInstance]:
    """Seven-point algorithm with isotropic conditioning of both views.

    Takes the two-dimensional null space ``{F1, F2}`` of the constraint
    matrix and returns one rank-2 matrix per real root of
    ``det(a * F1 + (1 - a) * F2) = 0``.

    Args:
        correspondences (npt.ArrayLike): Seven rows ``(x1, y1, x2, y2)``.

    Returns:
        list[ModelInstance]: Up to three fundamental matrices; empty when the
            configuration is degenerate.
    """
    corr = np.asarray(correspondences, dtype=np.float64).reshape(-1, 4)
    T1 = conditioning_matrix(corr[:, :2])
    T2 = conditioning_matrix(corr[:, 2:])
    if T1 is None or T2 is None:
        return []
    p1 = to_homogeneous(corr[:, :2]) @ T1.T
    p2 = to_homogeneous(corr[:, 2:]) @ T2.T

    A = epipolar_constraints(p1, p2)
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    if s.size < 7 or s[6] < _RANK_TOL * s[0]:
        return []
    F1 = vt[-1].reshape(3, 3)
    F2 = vt[-2].reshape(3, 3)

    coeffs = _cubic_coefficients(F1, F2)
    if coeffs.size < 2:
        return []
    roots = np.roots(coeffs)
    real = roots[np.abs(roots.imag) < _IMAG_TOL * (1.0 + np.abs(roots.real))]

    models: list[ModelInstance] = []
    for alpha in np.sort(real.real):
        F = enforce_rank_two(alpha * F1 + (1.0 - alpha) * F2)
        F = T2.T @ F @ T1
        if np.linalg.norm(F) < DEGENERACY_TOL:
            continue
        models.append(ModelInstance(TASKS.FMAT, F))
    return models


def residual_sampson_sqrt(
    correspondences: npt.ArrayLike, F: npt.ArrayLike
) -> FloatArray:
    """Square root of the Sampson distance of each correspondence to F.

    The matrix is rescaled to unit norm first, so the residual does not depend
    on the scale of ``F``. A vanishing denominator yields
    ``RESIDUAL_SENTINEL``.

    Args:
        correspondences (npt.ArrayLike): Rows ``(x1, y1, x2, y2)``.
        F (npt.ArrayLike): The 3x3 fundamental matrix.

    Returns:
        FloatArray: Residuals, shape ``(n,)``.
    """
    corr = np.asarray(correspondences, dtype=np.float64).reshape(-1, 4)
    mat = np.asarray(F, dtype=np.float64)
    mat = mat / np.linalg.norm(mat)
    p = to_homogeneous(corr[:, :2])
    q = to_homogeneous(corr[:, 2:])
    Fp = p @ mat.T
    Ftq = q @ mat
    num = np.sum(q * Fp, axis=1)
    denom = Fp[:, 0] ** 2 + Fp[:, 1] ** 2 + Ftq[:, 0] ** 2 + Ftq[:, 1] ** 2
    out = np.full(corr.shape[0], RESIDUAL_SENTINEL)
    valid = denom > DEGENERACY_TOL**2
    out[valid] = np.abs(num[valid]) / np.sqrt(denom[valid])
    return out
