import numpy as np
import numpy.typing as npt

from parallel_consensus.geometry.registry import residual_matrix
from parallel_consensus.scene import ModelInstance, Scene

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]


def assign_labels(
    residuals: FloatArray, tau: float, tau_a: float | None
) -> IntArray:
    """Labels from a residual matrix of ranked models.

    An observation below ``tau`` for some model goes to the nearest one
    (lower rank on ties). Otherwise it goes to the first model below
    ``tau_a``, or to 0 if there is none or ``tau_a`` is None.

    Args:
        residuals (FloatArray): Residuals, shape ``(M, N)``, rows in rank
            order.
        tau (float): Inlier threshold.
        tau_a (float | None): Assignment threshold.

    Returns:
        IntArray: Labels in ``[0, M]``, shape ``(N,)``.
    """
    if residuals.shape[0] == 0:
        return np.zeros(residuals.shape[1], dtype=np.int64)
    labels = np.zeros(residuals.shape[1], dtype=np.int64)
    nearest = np.argmin(residuals, axis=0)
    close = residuals[nearest, np.arange(residuals.shape[1])] < tau
    labels[close] = nearest[close] + 1
    if tau_a is not None:
        loose = residuals < tau_a
        first = np.argmax(loose, axis=0)
        hit = loose.any(axis=0) & ~close
        labels[hit] = first[hit] + 1
    return labels


def cluster_assignment(
    models: list[ModelInstance],
    scene: Scene,
    tau: float,
    tau_a: float | None,
) -> IntArray:
    """Assigns every observation of the scene to a ranked model or to the
    outliers, see ``assign_labels``.

    Args:
        models (list[ModelInstance]): Ranked models.
        scene (Scene): The scene.
        tau (float): Inlier threshold.
        tau_a (float | None): Assignment threshold.

    Returns:
        IntArray: Labels, shape ``(N,)``.
    """
    return assign_labels(residual_matrix(scene, models), tau, tau_a)
