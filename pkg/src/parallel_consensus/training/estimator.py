"""Score-function gradient of the expected task loss.

The pipeline is stochastic twice over: minimal sets are drawn from the sample
weights and one hypothesis per putative model is drawn from the softmax over
its inlier counts. The estimator draws ``K`` hypothesis sets, ``K~`` model
selections per set, and weights the gradient of every log probability with
the loss minus the mean loss of all ``K * K~`` draws.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from parallel_consensus.consensus.selection import (
    HypothesisSet,
    generate_hypotheses,
    log_selection_distribution,
)
from parallel_consensus.pipeline.fit import (
    check_weights,
    finish_models,
    refine_model,
)
from parallel_consensus.pipeline.params import PipelineParams
from parallel_consensus.scene import ModelInstance, Scene
from parallel_consensus.training.losses import TaskLoss, make_task_loss
from parallel_consensus.training.params import TrainParams
from parallel_consensus.utils.streams import substream
from parallel_consensus.weights.network import (
    apply_running_stats,
    network_backward,
    network_forward,
)
from parallel_consensus.weights.params import GradientBundle, NetworkParams

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]


@dataclass(frozen=True)
class EpisodeTrace:
    """Everything drawn for one scene.

    Attributes:
        log_sample_prob (FloatArray): Log probability of the minimal sets of
            each putative model, shape ``(K, M)``.
        selections (IntArray): Selected hypothesis per draw and putative
            model, shape ``(K, K~, M)``; -1 when all hypotheses were
            degenerate.
        log_selection_prob (FloatArray): Log probability of each model-set
            draw, shape ``(K, K~)``.
        losses (FloatArray): Task loss of each draw, shape ``(K, K~)``.
    """

    log_sample_prob: FloatArray
    selections: IntArray
    log_selection_prob: FloatArray
    losses: FloatArray

    @property
    def mean_loss(self) -> float:
        return float(self.losses.mean())


def sample_occurrences(hyp_set: HypothesisSet, n: int) -> FloatArray:
    """How often each observation was drawn across the minimal sets."""
    indices = np.concatenate([m.indices for m in hyp_set.minimal_sets])
    return np.bincount(indices, minlength=n).astype(np.float64)


def selection_score_gradient(
    hyp_set: HypothesisSet, selected: int, pi: FloatArray, alpha: float
) -> FloatArray:
    """Gradient of ``log pi[selected]`` with respect to the inlier weights of
    the putative model, per observation.

    Args:
        hyp_set (HypothesisSet): The hypotheses.
        selected (int): The selected slot.
        pi (FloatArray): Selection probabilities, zero for degenerates.
        alpha (float): Softmax scale.

    Returns:
        FloatArray: Shape ``(N,)``.
    """
    delta = -pi.copy()
    delta[selected] += 1.0
    return alpha * (delta @ hyp_set.scores)


def reinforce_upstream(
    scene: Scene,
    log_p: FloatArray,
    log_q: FloatArray,
    loss_fn: TaskLoss,
    pipeline_params: PipelineParams,
    train_params: TrainParams,
    seed: int,
    stream: tuple[int, ...] = (),
) -> tuple[FloatArray, FloatArray, EpisodeTrace]:
    """Upstream gradients of the expected loss on ``logP`` and ``logQ``.

    Hypothesis set ``k`` of putative model ``j`` draws from substream
    ``(seed, *stream, k, j)``; the model selections of set ``k`` draw from
    ``(seed, *stream, k, M)``.

    Args:
        scene (Scene): The (padded) training scene.
        log_p (FloatArray): Log sample weights, shape ``(N, M)``.
        log_q (FloatArray): Log inlier weights, shape ``(N, M + 1)``.
        loss_fn (TaskLoss): Loss of ranked models and labels.
        pipeline_params (PipelineParams): Training pipeline parameters.
        train_params (TrainParams): Sample counts.
        seed (int): Root seed.
        stream (tuple[int, ...]): Counters identifying the scene.

    Returns:
        tuple[FloatArray, FloatArray, EpisodeTrace]: Gradients shaped like
            ``logP`` and ``logQ`` and the drawn episode.
    """
    m_star = pipeline_params.max_instances
    n = len(scene)
    check_weights(log_p, log_q, n, m_star)
    p, q = np.exp(log_p), np.exp(log_q)
    consensus = pipeline_params.consensus
    alpha = consensus.softmax_scale
    weighted = consensus.counting == "weighted"
    big_k = train_params.hypothesis_samples
    small_k = train_params.model_samples

    log_sample_prob = np.zeros((big_k, m_star))
    selections = np.full((big_k, small_k, m_star), -1, dtype=np.int64)
    log_selection_prob = np.zeros((big_k, small_k))
    losses = np.zeros((big_k, small_k))
    # Gradients are linear in the advantage: keep sum(g) and sum(loss * g)
    # and subtract the baseline once all losses are known.
    occ_sum = np.zeros((n, m_star))
    occ_loss_sum = np.zeros((n, m_star))
    sel_sum = np.zeros((n, m_star))
    sel_loss_sum = np.zeros((n, m_star))

    for k in range(big_k):
        hyp_sets = [
            generate_hypotheses(
                j, scene, p, q, consensus, substream(seed, *stream, k, j)
            )
            for j in range(m_star)
        ]
        log_pis = [log_selection_distribution(h, alpha) for h in hyp_sets]
        pis = [np.exp(lp) for lp in log_pis]
        occurrences = np.zeros((n, m_star))
        for j, hyp_set in enumerate(hyp_sets):
            log_sample_prob[k, j] = float(hyp_set.log_sample_prob.sum())
            occurrences[:, j] = sample_occurrences(hyp_set, n)

        refined: dict[tuple[int, int], ModelInstance] = {}
        rng = substream(seed, *stream, k, m_star)
        for kk in range(small_k):
            selected: list[ModelInstance | None] = []
            draw_grad = np.zeros((n, m_star))
            for j, hyp_set in enumerate(hyp_sets):
                if not hyp_set.valid.any():
                    selected.append(None)
                    continue
                s = int(rng.choice(len(hyp_set), p=pis[j]))
                selections[k, kk, j] = s
                log_selection_prob[k, kk] += log_pis[j][s]
                if (j, s) not in refined:
                    model = hyp_set.hypotheses[s]
                    assert model is not None
                    refined[(j, s)] = refine_model(
                        scene, model, pipeline_params
                    )
                selected.append(refined[(j, s)])
                if weighted:
                    draw_grad[:, j] = selection_score_gradient(
                        hyp_set, s, pis[j], alpha
                    )
            ranked, labels, _ = finish_models(scene, selected, pipeline_params)
            losses[k, kk] = loss_fn(ranked, labels)
            sel_sum += draw_grad
            sel_loss_sum += losses[k, kk] * draw_grad
        occ_sum += occurrences
        occ_loss_sum += losses[k].mean() * occurrences

    trace = EpisodeTrace(
        log_sample_prob, selections, log_selection_prob, losses
    )
    grad_log_p = np.zeros_like(log_p)
    grad_log_q = np.zeros_like(log_q)
    if np.ptp(losses) == 0:
        return grad_log_p, grad_log_q, trace

    baseline = losses.mean()
    grad_log_p = (occ_loss_sum - baseline * occ_sum) / big_k
    if weighted:
        grad_log_q[:, :m_star] = (
            (sel_loss_sum - baseline * sel_sum) / (big_k * small_k)
        ) * q[:, :m_star]
    return grad_log_p, grad_log_q, trace


def reinforce_gradient(
    scene: Scene,
    params: NetworkParams,
    pipeline_params: PipelineParams,
    train_params: TrainParams,
    seed: int,
    stream: tuple[int, ...] = (),
) -> tuple[GradientBundle, float, NetworkParams]:
    """Network gradient of the expected loss on a single scene.

    Args:
        scene (Scene): The training scene, already padded if needed.
        params (NetworkParams): The network.
        pipeline_params (PipelineParams): Training pipeline parameters.
        train_params (TrainParams): Loss kind and sample counts.
        seed (int): Root seed.
        stream (tuple[int, ...]): Counters identifying the scene.

    Returns:
        tuple[GradientBundle, float, NetworkParams]: The gradients, the mean
            loss and the parameters with updated running statistics.
    """
    log_p, log_q, cache = network_forward(
        params, scene.observations, mode="train"
    )
    loss_fn = make_task_loss(
        train_params.loss, scene, pipeline_params, train_params.gamma
    )
    grad_p, grad_q, trace = reinforce_upstream(
        scene,
        log_p,
        log_q,
        loss_fn,
        pipeline_params,
        train_params,
        seed,
        stream,
    )
    if not grad_p.any() and not grad_q.any():
        bundle = GradientBundle.zeros_like(params)
    else:
        bundle = network_backward(cache, grad_p, grad_q)
    logger.debug(
        "Scene of %d observations: mean loss %.6f, gradient norm %.3e.",
        len(scene),
        trace.mean_loss,
        bundle.global_norm(),
    )
    return bundle, trace.mean_loss, apply_running_stats(params, cache)
