from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import numpy.typing as npt

from parallel_consensus.consensus.scoring import soft_inlier_score
from parallel_consensus.consensus.selection import (
    HypothesisSet,
    generate_and_select,
)
from parallel_consensus.constants import TASKS
from parallel_consensus.exceptions import (
    GeometryError,
    ShapeMismatchError,
    TaskMismatchError,
)
from parallel_consensus.geometry.registry import get_geometry, residual_matrix
from parallel_consensus.geometry.vanishing import refine_vp_weighted
from parallel_consensus.pipeline.assignment import assign_labels
from parallel_consensus.pipeline.params import FitResult, PipelineParams
from parallel_consensus.pipeline.ranking import instance_ranking
from parallel_consensus.scene import ModelInstance, Scene
from parallel_consensus.utils.streams import substream
from parallel_consensus.weights.providers import WeightProvider

if TYPE_CHECKING:
    from parallel_consensus.config import Config

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]


@dataclass(frozen=True)
class PutativeModel:
    """Outcome of the hypothesis loop of one putative model."""

    j: int
    model: ModelInstance | None
    hypotheses: HypothesisSet


def check_weights(
    log_p: FloatArray, log_q: FloatArray, n: int, m_star: int
) -> None:
    if log_p.shape != (n, m_star):
        raise ShapeMismatchError(
            f"logP has shape {log_p.shape}, expected {(n, m_star)}."
        )
    if log_q.shape != (n, m_star + 1):
        raise ShapeMismatchError(
            f"logQ has shape {log_q.shape}, expected {(n, m_star + 1)}."
        )


def refine_model(
    scene: Scene, model: ModelInstance, params: PipelineParams
) -> ModelInstance:
    """Weighted least-squares polish of a vanishing point over its soft
    inliers; other models are returned unchanged.

    The polish minimizes an algebraic error, which can push the point away
    from segments that end close to it. A refined point with fewer hard
    inliers than the original is discarded.
    """
    if scene.task != TASKS.VP or not params.refine:
        return model
    assert scene.segments is not None
    geometry = get_geometry(scene.task)
    tau = params.consensus.tau
    residuals = geometry.residuals(scene, model)
    weights = soft_inlier_score(residuals, tau, params.consensus.beta)
    refined = refine_vp_weighted(model, scene.segments, weights)
    if refined is model:
        return model
    before = np.count_nonzero(residuals < tau)
    after = np.count_nonzero(geometry.residuals(scene, refined) < tau)
    if after < before:
        logger.debug(
            "Refinement dropped the inliers of a vanishing point from %d to "
            "%d, keeping the unrefined point.",
            before,
            after,
        )
        return model
    return refined


def finish_models(
    scene: Scene,
    selected: list[ModelInstance | None],
    params: PipelineParams,
) -> tuple[list[ModelInstance], npt.NDArray[np.int64], tuple[int, ...]]:
    """Ranks the selected models and labels the observations.

    Args:
        scene (Scene): The scene.
        selected (list[ModelInstance | None]): Selected model per putative
            index, None when degenerate.
        params (PipelineParams): Thresholds and minimal set size.

    Returns:
        tuple[list[ModelInstance], npt.NDArray[np.int64], tuple[int, ...]]:
            Ranked models, labels and hard inlier counts.
    """
    putative = [m for m in selected if m is not None]
    tau = params.tau
    ranked = instance_ranking(
        putative, scene, tau, params.consensus.minimal_size
    )
    residuals = residual_matrix(scene, ranked)
    labels = assign_labels(residuals, tau, params.assignment_threshold)
    inliers = tuple(int(c) for c in np.sum(residuals < tau, axis=1))
    return ranked, labels, inliers


class ParallelConsensus:
    """Fits up to ``max_instances`` models to a scene.

    Every putative model samples and selects its hypothesis independently
    from its own random substream, so the result does not depend on the
    number of worker threads. Selected models are then ranked by significance
    and observations are assigned to them.
    """

    def __init__(
        self,
        params: PipelineParams,
        provider: WeightProvider,
        threads: int = 1,
    ) -> None:
        if provider.m_star != params.max_instances:
            raise ShapeMismatchError(
                f"Provider emits weights for {provider.m_star} putative "
                f"models, parameters ask for {params.max_instances}."
            )
        self.params = params
        self.provider = provider
        self.threads = max(1, int(threads))
        self.logger = logging.getLogger(__name__)

    @classmethod
    def from_config(
        cls, config: Config, task: str | None = None
    ) -> ParallelConsensus:
        """Builds the pipeline from the ``[fit]`` and ``[general]`` options.

        Args:
            config (Config): The configuration.
            task (str | None): The task, the configured one if None.

        Returns:
            ParallelConsensus: The pipeline.
        """
        params = config.pipeline_params(task)
        return cls(
            params, config.provider(params.max_instances), config.threads
        )

    def putative_models(
        self,
        scene: Scene,
        log_p: FloatArray,
        log_q: FloatArray,
        seed: int,
        stream: tuple[int, ...] = (),
    ) -> list[PutativeModel]:
        """Runs the hypothesis loop for every putative model.

        Args:
            scene (Scene): The scene.
            log_p (FloatArray): Log sample weights, shape ``(N, M)``.
            log_q (FloatArray): Log inlier weights, shape ``(N, M + 1)``.
            seed (int): Root seed.
            stream (tuple[int, ...]): Counters placed before the putative
                index when deriving substreams.

        Returns:
            list[PutativeModel]: One entry per putative model, in index
                order.
        """
        m_star = self.params.max_instances
        check_weights(log_p, log_q, len(scene), m_star)
        p, q = np.exp(log_p), np.exp(log_q)
        consensus = self.params.consensus

        def run(j: int) -> PutativeModel:
            rng = substream(seed, *stream, j)
            model, hyp_set = generate_and_select(j, scene, p, q, consensus, rng)
            return PutativeModel(j, model, hyp_set)

        if self.threads == 1 or m_star == 1:
            return [run(j) for j in range(m_star)]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(run, range(m_star)))

    def refine(self, scene: Scene, model: ModelInstance) -> ModelInstance:
        return refine_model(scene, model, self.params)

    def finish(
        self, scene: Scene, selected: list[ModelInstance | None]
    ) -> tuple[list[ModelInstance], npt.NDArray[np.int64], tuple[int, ...]]:
        return finish_models(scene, selected, self.params)

    def fit_with_weights(
        self,
        scene: Scene,
        log_p: FloatArray,
        log_q: FloatArray,
        seed: int,
        stream: tuple[int, ...] = (),
    ) -> FitResult:
        start = time.perf_counter()
        putative = self.putative_models(scene, log_p, log_q, seed, stream)
        selected = [
            None if pm.model is None else self.refine(scene, pm.model)
            for pm in putative
        ]
        ranked, labels, inliers = self.finish(scene, selected)
        elapsed = time.perf_counter() - start
        self.logger.debug(
            "Fitted %d of %d putative models to %d observations in %.4fs.",
            len(ranked),
            self.params.max_instances,
            len(scene),
            elapsed,
        )
        return FitResult(scene.task, tuple(ranked), labels, inliers, elapsed)

    def fit(
        self, scene: Scene, seed: int, stream: tuple[int, ...] = ()
    ) -> FitResult:
        """Fits models to a scene.

        Args:
            scene (Scene): The scene, at least one observation.
            seed (int): Root seed; the result is a function of it.
            stream (tuple[int, ...]): Extra counters, e.g. the scene index.

        Raises:
            TaskMismatchError: If the scene task differs from the parameters.
            GeometryError: If the scene is empty.

        Returns:
            FitResult: The ranked models and labels.
        """
        if scene.task != self.params.task:
            raise TaskMismatchError(
                f"Scene task {scene.task!r} does not match the parameters' "
                f"task {self.params.task!r}."
            )
        if len(scene) == 0:
            raise GeometryError("Cannot fit models to an empty scene.")
        log_p, log_q = self.provider(scene)
        return self.fit_with_weights(scene, log_p, log_q, seed, stream)


def parsac_fit(
    scene: Scene,
    provider: WeightProvider,
    params: PipelineParams,
    seed: int,
    threads: int = 1,
) -> FitResult:
    """Functional entry point, see ``ParallelConsensus.fit``."""
    return ParallelConsensus(params, provider, threads).fit(scene, seed)
