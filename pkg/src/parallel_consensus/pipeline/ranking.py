from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from parallel_consensus.geometry.registry import residual_matrix
from parallel_consensus.scene import ModelInstance, Scene

BoolArray = npt.NDArray[np.bool_]


@dataclass(frozen=True)
class RankingStep:
    """One accepted model of the greedy ranking.

    Attributes:
        index (int): Index into the putative models.
        unique (int): Inliers not yet explained by earlier models.
        overlap (int): Inliers already explained.
    """

    index: int
    unique: int
    overlap: int

    @property
    def gain(self) -> int:
        return self.unique - self.overlap


def rank_inlier_sets(inliers: BoolArray, min_gain: int) -> list[RankingStep]:
    """Greedy ranking by unique minus overlapping inliers.

    Each round picks the remaining model with the largest gain (lowest index
    on ties) and accepts it if the gain is at least ``min_gain``; otherwise the
    ranking stops.

    Args:
        inliers (BoolArray): Hard inlier masks, shape ``(M, N)``.
        min_gain (int): Minimum gain, the minimal set size.

    Returns:
        list[RankingStep]: The accepted models in rank order.
    """
    masks = np.asarray(inliers, dtype=bool)
    if masks.shape[0] == 0:
        return []
    covered = np.zeros(masks.shape[1], dtype=bool)
    remaining = list(range(masks.shape[0]))
    steps: list[RankingStep] = []
    while remaining:
        unique = np.array(
            [np.count_nonzero(masks[i] & ~covered) for i in remaining]
        )
        overlap = np.array(
            [np.count_nonzero(masks[i] & covered) for i in remaining]
        )
        best = int(np.argmax(unique - overlap))
        if unique[best] - overlap[best] < min_gain:
            break
        index = remaining.pop(best)
        steps.append(RankingStep(index, int(unique[best]), int(overlap[best])))
        covered |= masks[index]
    return steps


def instance_ranking(
    putative: list[ModelInstance], scene: Scene, tau: float, min_gain: int
) -> list[ModelInstance]:
    """Orders non-degenerate putative models by significance and drops
    redundant ones.

    Args:
        putative (list[ModelInstance]): Putative models.
        scene (Scene): The scene.
        tau (float): Inlier threshold, membership is ``d < tau``.
        min_gain (int): Minimum gain, the minimal set size.

    Returns:
        list[ModelInstance]: The ranked models.
    """
    if not putative:
        return []
    inliers = residual_matrix(scene, putative) < tau
    return [putative[s.index] for s in rank_inlier_sets(inliers, min_gain)]
