import numpy as np
import numpy.typing as npt
from scipy.special import expit

from parallel_consensus.consensus.params import ConsensusParams
from parallel_consensus.geometry.registry import get_geometry
from parallel_consensus.scene import ModelInstance, Scene

FloatArray = npt.NDArray[np.float64]


def soft_inlier_score(
    d: npt.ArrayLike, tau: float, beta: float
) -> FloatArray:
    """Logistic relaxation of the hard inlier test, ``1/2`` at ``d == tau``.

    Args:
        d (npt.ArrayLike): Residuals.
        tau (float): Inlier threshold.
        beta (float): Softness.

    Returns:
        FloatArray: Scores in ``[0, 1]``.
    """
    return expit(-beta * (np.asarray(d, dtype=np.float64) / tau - 1.0))


def count_inliers(
    scores: FloatArray, q_column: FloatArray | None = None
) -> float:
    """Sum of soft inlier scores, weighted by ``q_column`` when given."""
    if q_column is None:
        return float(np.sum(scores))
    return float(np.dot(scores, q_column))


def model_scores(
    model: ModelInstance, scene: Scene, params: ConsensusParams
) -> FloatArray:
    residuals = get_geometry(scene.task).residuals(scene, model)
    return soft_inlier_score(residuals, params.tau, params.beta)


def weighted_inlier_count(
    model: ModelInstance | None,
    j: int,
    scene: Scene,
    q: FloatArray,
    params: ConsensusParams,
) -> float:
    """Soft inlier count of a hypothesis for putative model ``j``, weighted by
    the inlier weights ``q[:, j]``. Degenerate hypotheses count 0.

    Args:
        model (ModelInstance | None): The hypothesis, None if degenerate.
        j (int): Putative model index (0-based).
        scene (Scene): The scene.
        q (FloatArray): Row-normalized inlier weights, shape ``(N, M + 1)``.
        params (ConsensusParams): Threshold and softness.

    Returns:
        float: The weighted count.
    """
    if model is None or len(scene) == 0:
        return 0.0
    return count_inliers(model_scores(model, scene, params), q[:, j])


def unweighted_inlier_count(
    model: ModelInstance | None, scene: Scene, params: ConsensusParams
) -> float:
    """Plain soft inlier count, used by the unweighted counting ablation."""
    if model is None or len(scene) == 0:
        return 0.0
    return count_inliers(model_scores(model, scene, params))
