import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy.special import log_softmax, softmax

from parallel_consensus.consensus.params import ConsensusParams
from parallel_consensus.consensus.sampling import MinimalSet, sample_minimal_set
from parallel_consensus.consensus.scoring import count_inliers, model_scores
from parallel_consensus.geometry.registry import get_geometry
from parallel_consensus.scene import ModelInstance, Scene

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]


@dataclass(frozen=True)
class HypothesisSet:
    """The hypotheses generated for one putative model.

    Attributes:
        j (int): The putative model index (0-based).
        hypotheses (list[ModelInstance | None]): One entry per minimal set,
            None for degenerate hypotheses.
        minimal_sets (list[MinimalSet]): The sampled minimal sets.
        weighted_counts (FloatArray): Inlier counts, 0 for degenerates.
        log_sample_prob (FloatArray): Log probability of each minimal set.
        scores (FloatArray): Soft inlier scores, shape ``(S, N)``, zero rows
            for degenerates.
    """

    j: int
    hypotheses: list[ModelInstance | None]
    minimal_sets: list[MinimalSet]
    weighted_counts: FloatArray
    log_sample_prob: FloatArray
    scores: FloatArray

    def __len__(self) -> int:
        return len(self.hypotheses)

    @property
    def valid(self) -> npt.NDArray[np.bool_]:
        return np.array([h is not None for h in self.hypotheses], dtype=bool)

    def best_index(self) -> int | None:
        """Index of the largest count among non-degenerate hypotheses, lowest
        index on ties.

        Returns:
            int | None: The index, or None if every hypothesis is degenerate.
        """
        valid = self.valid
        if not valid.any():
            return None
        masked = np.where(valid, self.weighted_counts, -np.inf)
        return int(np.argmax(masked))


def _inlier_weights(
    j: int, q: FloatArray | None, params: ConsensusParams
) -> FloatArray | None:
    if params.counting == "unweighted" or q is None:
        return None
    return q[:, j]


def generate_hypotheses(
    j: int,
    scene: Scene,
    p: FloatArray,
    q: FloatArray | None,
    params: ConsensusParams,
    rng: np.random.Generator,
) -> HypothesisSet:
    """Samples and scores ``params.hypotheses`` hypotheses for putative
    model ``j``. When a solver returns several models for one minimal set,
    the best scoring one (lowest index on ties) keeps the slot.

    Args:
        j (int): Putative model index (0-based).
        scene (Scene): The scene.
        p (FloatArray): Sample weights, shape ``(N, M)``.
        q (FloatArray | None): Inlier weights, shape ``(N, M + 1)``; ignored
            for unweighted counting.
        params (ConsensusParams): The parameters.
        rng (np.random.Generator): The random stream owned by this call.

    Returns:
        HypothesisSet: The scored hypotheses.
    """
    geometry = get_geometry(scene.task)
    weights = _inlier_weights(j, q, params)
    n = len(scene)

    hypotheses: list[ModelInstance | None] = []
    minimal_sets: list[MinimalSet] = []
    counts = np.zeros(params.hypotheses)
    scores = np.zeros((params.hypotheses, n))
    for slot in range(params.hypotheses):
        sample = sample_minimal_set(j, p, params.minimal_size, rng)
        minimal_sets.append(sample)
        best: ModelInstance | None = None
        for candidate in geometry.solve(scene, sample.indices):
            candidate_scores = model_scores(candidate, scene, params)
            count = count_inliers(candidate_scores, weights)
            if best is None or count > counts[slot]:
                best = candidate
                counts[slot] = count
                scores[slot] = candidate_scores
        hypotheses.append(best)

    log_sample_prob = np.array([m.log_prob for m in minimal_sets])
    logger.debug(
        "Putative model %d: %d of %d hypotheses degenerate.",
        j,
        sum(h is None for h in hypotheses),
        params.hypotheses,
    )
    return HypothesisSet(
        j, hypotheses, minimal_sets, counts, log_sample_prob, scores
    )


def generate_and_select(
    j: int,
    scene: Scene,
    p: FloatArray,
    q: FloatArray | None,
    params: ConsensusParams,
    rng: np.random.Generator,
) -> tuple[ModelInstance | None, HypothesisSet]:
    """Generates hypotheses for putative model ``j`` and keeps the one with
    the largest inlier count.

    Args:
        j (int): Putative model index (0-based).
        scene (Scene): The scene.
        p (FloatArray): Sample weights, shape ``(N, M)``.
        q (FloatArray | None): Inlier weights, shape ``(N, M + 1)``.
        params (ConsensusParams): The parameters.
        rng (np.random.Generator): The random stream owned by this call.

    Returns:
        tuple[ModelInstance | None, HypothesisSet]: The selected model (None
            if all hypotheses are degenerate) and the full hypothesis set.
    """
    hyp_set = generate_hypotheses(j, scene, p, q, params, rng)
    best = hyp_set.best_index()
    return (None if best is None else hyp_set.hypotheses[best]), hyp_set


def selection_logits(
    weighted_counts: FloatArray | HypothesisSet,
    softmax_scale: float,
    valid: npt.NDArray[np.bool_] | None = None,
) -> FloatArray:
    """Scaled counts with degenerate hypotheses masked to ``-inf``. When
    every hypothesis is degenerate the first slot keeps logit 0, so the
    distribution stays defined and selects nothing useful.

    Args:
        weighted_counts (FloatArray | HypothesisSet): Counts, shape
            ``(..., S)``, or a hypothesis set carrying counts and validity.
        softmax_scale (float): The scale.
        valid (npt.NDArray[np.bool_] | None): Validity mask, all valid when
            None and no hypothesis set is given.

    Returns:
        FloatArray: Logits, shape ``(..., S)``.
    """
    if isinstance(weighted_counts, HypothesisSet):
        valid = weighted_counts.valid
        weighted_counts = weighted_counts.weighted_counts
    counts = np.asarray(weighted_counts, dtype=np.float64)
    if valid is None:
        return softmax_scale * counts
    valid = np.asarray(valid, dtype=bool)
    logits = np.where(valid, softmax_scale * counts, -np.inf)
    empty = ~valid.any(axis=-1)
    logits[..., 0] = np.where(empty, 0.0, logits[..., 0])
    return logits


def selection_distribution(
    weighted_counts: FloatArray | HypothesisSet,
    softmax_scale: float,
    valid: npt.NDArray[np.bool_] | None = None,
) -> FloatArray:
    """Softmax over the scaled inlier counts of the non-degenerate
    hypotheses.

    Args:
        weighted_counts (FloatArray | HypothesisSet): Counts, shape ``(S,)``.
        softmax_scale (float): The scale.
        valid (npt.NDArray[np.bool_] | None): Validity mask.

    Returns:
        FloatArray: Selection probabilities summing to 1.
    """
    logits = selection_logits(weighted_counts, softmax_scale, valid)
    return softmax(logits, axis=-1)


def log_selection_distribution(
    weighted_counts: FloatArray | HypothesisSet,
    softmax_scale: float,
    valid: npt.NDArray[np.bool_] | None = None,
) -> FloatArray:
    logits = selection_logits(weighted_counts, softmax_scale, valid)
    return log_softmax(logits, axis=-1)
