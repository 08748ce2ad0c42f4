from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from parallel_consensus.consensus.scoring import model_scores
from parallel_consensus.consensus.selection import log_selection_distribution
from parallel_consensus.exceptions import ConfigurationError
from parallel_consensus.geometry.registry import get_geometry
from parallel_consensus.pipeline.fit import (
    check_weights,
    finish_models,
    refine_model,
)
from parallel_consensus.pipeline.params import PipelineParams
from parallel_consensus.scene import ModelInstance, Scene
from parallel_consensus.training.losses import TaskLoss

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

DEFAULT_MAX_OUTCOMES = 100_000


@dataclass(frozen=True)
class EnumeratedGradient:
    """Exact expected loss and its gradient on ``logP`` and ``logQ``."""

    expected_loss: float
    grad_log_p: FloatArray
    grad_log_q: FloatArray


class OutcomeEnumerator:
    """Enumerates every sampling and selection outcome of a tiny scene.

    Everything that does not depend on the weights is computed once: the
    solution of every possible minimal set, the soft inlier scores of every
    hypothesis and the task loss of every joint outcome. ``expected_loss``
    and ``gradient`` then only combine these tables with the probabilities
    implied by ``logP`` and ``logQ``.

    A draw is the tuple of ``S`` minimal sets of one putative model. When a
    solver returns several candidates for a minimal set, the one with the
    largest plain soft inlier count is kept, so the tables are exact for the
    single-solution solvers.
    """

    def __init__(
        self,
        scene: Scene,
        params: PipelineParams,
        loss_fn: TaskLoss,
        max_outcomes: int = DEFAULT_MAX_OUTCOMES,
    ) -> None:
        consensus = params.consensus
        c = consensus.minimal_size
        s = consensus.hypotheses
        m = params.max_instances
        n = len(scene)
        draws = n ** (c * s)
        total = (draws * s) ** m
        if total > max_outcomes:
            raise ConfigurationError(
                f"max_outcomes: enumeration needs {total} outcomes, more "
                f"than {max_outcomes}"
            )
        self.scene = scene
        self.params = params
        self.n, self.m, self.s = n, m, s

        geometry = get_geometry(scene.task)
        solutions: dict[tuple[int, ...], tuple[ModelInstance, FloatArray]] = {}
        for minimal in itertools.product(range(n), repeat=c):
            candidates = geometry.solve(scene, np.array(minimal))
            if not candidates:
                continue
            scores = [model_scores(h, scene, consensus) for h in candidates]
            best = int(np.argmax([sc.sum() for sc in scores]))
            solutions[minimal] = (candidates[best], scores[best])

        self.indices = np.array(
            list(itertools.product(range(n), repeat=c * s)), dtype=np.int64
        ).reshape(draws, s, c)
        self.valid = np.zeros((draws, s), dtype=bool)
        self.scores = np.zeros((draws, s, n))
        self.models: list[list[ModelInstance | None]] = []
        refined: dict[tuple[int, ...], ModelInstance] = {}
        for d in range(draws):
            row: list[ModelInstance | None] = []
            for slot in range(s):
                key = tuple(int(i) for i in self.indices[d, slot])
                if key not in solutions:
                    row.append(None)
                    continue
                model, scores = solutions[key]
                if key not in refined:
                    refined[key] = refine_model(scene, model, params)
                self.valid[d, slot] = True
                self.scores[d, slot] = scores
                row.append(refined[key])
            self.models.append(row)
        self.occurrences = np.stack(
            [np.bincount(idx.ravel(), minlength=n) for idx in self.indices]
        ).astype(np.float64)
        self.losses = self._loss_table(loss_fn)
        logger.debug(
            "Enumerated %d draws per putative model, %d joint outcomes.",
            draws,
            total,
        )

    def _loss_table(self, loss_fn: TaskLoss) -> FloatArray:
        draws = self.indices.shape[0]
        shape = (draws, self.s) * self.m
        table = np.zeros(shape)
        any_valid = self.valid.any(axis=1)
        for index in np.ndindex(*shape):
            selected: list[ModelInstance | None] = []
            reachable = True
            for j in range(self.m):
                d, slot = index[2 * j], index[2 * j + 1]
                if any_valid[d] and not self.valid[d, slot]:
                    reachable = False
                    break
                if not any_valid[d] and slot != 0:
                    reachable = False
                    break
                selected.append(self.models[d][slot])
            if not reachable:
                continue
            ranked, labels, _ = finish_models(
                self.scene, selected, self.params
            )
            table[index] = loss_fn(ranked, labels)
        return table

    def _factors(
        self, log_p: FloatArray, log_q: FloatArray
    ) -> tuple[list[FloatArray], FloatArray]:
        check_weights(log_p, log_q, self.n, self.m)
        consensus = self.params.consensus
        q = np.exp(log_q)
        pis, weights = [], []
        for j in range(self.m):
            log_sample = self.occurrences @ log_p[:, j]
            if consensus.counting == "weighted":
                counts = self.scores @ q[:, j]
            else:
                counts = self.scores.sum(axis=-1)
            log_pi = log_selection_distribution(
                counts, consensus.softmax_scale, self.valid
            )
            pi = np.exp(log_pi)
            pis.append(pi)
            weights.append(np.exp(log_sample)[:, None] * pi)
        joint = weights[0]
        for w in weights[1:]:
            joint = np.multiply.outer(joint, w)
        return pis, joint

    def expected_loss(self, log_p: FloatArray, log_q: FloatArray) -> float:
        """Expected task loss under the given weights.

        Args:
            log_p (FloatArray): Log sample weights, shape ``(N, M)``.
            log_q (FloatArray): Log inlier weights, shape ``(N, M + 1)``.

        Returns:
            float: The expectation.
        """
        _, joint = self._factors(log_p, log_q)
        return float(np.sum(joint * self.losses))

    def gradient(
        self, log_p: FloatArray, log_q: FloatArray
    ) -> EnumeratedGradient:
        """Exact gradient of the expected loss, with ``logP`` and ``logQ``
        entries treated as free variables.

        Args:
            log_p (FloatArray): Log sample weights, shape ``(N, M)``.
            log_q (FloatArray): Log inlier weights, shape ``(N, M + 1)``.

        Returns:
            EnumeratedGradient: The expectation and its gradients.
        """
        pis, joint = self._factors(log_p, log_q)
        consensus = self.params.consensus
        weighted_losses = joint * self.losses
        q = np.exp(log_q)
        grad_p = np.zeros_like(log_p)
        grad_q = np.zeros_like(log_q)
        axes = tuple(range(2 * self.m))
        empty = ~self.valid.any(axis=1)
        for j, pi in enumerate(pis):
            other = axes[: 2 * j] + axes[2 * j + 2 :]
            g = weighted_losses.sum(axis=other) if other else weighted_losses
            grad_p[:, j] = g.sum(axis=1) @ self.occurrences
            if consensus.counting != "weighted":
                continue
            delta = np.eye(self.s)[None, :, :] - pi[:, None, :]
            delta[empty] = 0.0
            grad_q[:, j] = (
                consensus.softmax_scale
                * np.einsum("ds,dsk,dkn->n", g, delta, self.scores)
                * q[:, j]
            )
        return EnumeratedGradient(
            float(np.sum(weighted_losses)), grad_p, grad_q
        )


def enumerate_expected_loss(
    scene: Scene,
    log_p: FloatArray,
    log_q: FloatArray,
    params: PipelineParams,
    loss_fn: TaskLoss,
) -> float:
    """One-shot ``OutcomeEnumerator(...).expected_loss``."""
    return OutcomeEnumerator(scene, params, loss_fn).expected_loss(
        log_p, log_q
    )


def enumerated_estimator(
    scene: Scene,
    log_p: FloatArray,
    log_q: FloatArray,
    params: PipelineParams,
    loss_fn: TaskLoss,
) -> EnumeratedGradient:
    """One-shot ``OutcomeEnumerator(...).gradient``."""
    return OutcomeEnumerator(scene, params, loss_fn).gradient(log_p, log_q)
