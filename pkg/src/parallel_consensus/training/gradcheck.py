"""Finite-difference checks of the network backward pass and of the
enumerated expected-loss gradient on a micro instance."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
import numpy.typing as npt

from parallel_consensus.constants import TASKS
from parallel_consensus.geometry.vanishing import observations_from_segments
from parallel_consensus.pipeline.params import PipelineParams
from parallel_consensus.scene import ModelInstance, Scene
from parallel_consensus.training.enumeration import OutcomeEnumerator
from parallel_consensus.training.losses import make_task_loss
from parallel_consensus.weights.network import network_backward, network_forward
from parallel_consensus.weights.params import NetworkParams, init_params

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

FD_STEP = 1e-4
NETWORK_TOLERANCE = 1e-4
ESTIMATOR_TOLERANCE = 1e-3
MIN_RELU_MARGIN = 1e-3


@dataclass(frozen=True)
class GradcheckReport:
    """Per-tensor relative errors of one check.

    Attributes:
        name (str): Which check.
        errors (dict[str, float]): Relative error per trainable tensor.
        tolerance (float): The pass threshold.
    """

    name: str
    errors: dict[str, float]
    tolerance: float

    @property
    def max_error(self) -> float:
        return max(self.errors.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_error < self.tolerance

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "max_error": self.max_error,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "errors": dict(self.errors),
        }


def relative_error(analytic: FloatArray, numeric: FloatArray) -> float:
    """``max|a - n| / max(max|a|, max|n|, 1e-6)``."""
    scale = max(
        float(np.max(np.abs(analytic), initial=0.0)),
        float(np.max(np.abs(numeric), initial=0.0)),
        1e-6,
    )
    return float(np.max(np.abs(analytic - numeric), initial=0.0)) / scale


def finite_difference(
    fn: Callable[[NetworkParams], float],
    params: NetworkParams,
    step: float = FD_STEP,
) -> dict[str, FloatArray]:
    """Central differences of ``fn`` in every trainable entry.

    Args:
        fn (Callable[[NetworkParams], float]): The scalar function.
        params (NetworkParams): The evaluation point.
        step (float): The step.

    Returns:
        dict[str, FloatArray]: Numeric gradients per trainable tensor.
    """
    out: dict[str, FloatArray] = {}
    for name in params.trainable_names():
        base = params[name]
        grad = np.zeros_like(base)
        for idx in np.ndindex(base.shape):
            plus, minus = base.copy(), base.copy()
            plus[idx] += step
            minus[idx] -= step
            f_plus = fn(params.with_tensors({name: plus}))
            f_minus = fn(params.with_tensors({name: minus}))
            grad[idx] = (f_plus - f_minus) / (2 * step)
        out[name] = grad
    return out


def well_conditioned_params(
    m_star: int,
    observations: FloatArray,
    seed: int,
    channels: int = 8,
    blocks: int = 2,
    attempts: int = 100,
) -> NetworkParams:
    """Draws initializations until no ReLU input lies within
    ``MIN_RELU_MARGIN`` of its kink, so central differences do not straddle
    one.

    Args:
        m_star (int): Number of putative models.
        observations (FloatArray): The inputs the check runs on.
        seed (int): Seed of the first draw; later draws add the attempt.
        channels (int): Hidden width.
        blocks (int): Residual blocks.
        attempts (int): Draws before giving up.

    Raises:
        RuntimeError: If no draw has a large enough margin.

    Returns:
        NetworkParams: The weights.
    """
    for attempt in range(attempts):
        params = init_params(
            m_star, seed + attempt, channels=channels, blocks=blocks
        )
        _, _, cache = network_forward(params, observations, mode="train")
        if cache.relu_margin() > MIN_RELU_MARGIN:
            return params
    raise RuntimeError(
        f"No initialization with ReLU margin above {MIN_RELU_MARGIN} in "
        f"{attempts} draws."
    )


def check_network_gradient(
    params: NetworkParams,
    observations: FloatArray,
    seed: int,
    step: float = FD_STEP,
    tolerance: float = NETWORK_TOLERANCE,
) -> GradcheckReport:
    """Compares ``network_backward`` with central differences of
    ``sum(gP * logP) + sum(gQ * logQ)`` for random upstream ``gP, gQ``.

    Args:
        params (NetworkParams): The network.
        observations (FloatArray): Inputs ``(N, D)`` or ``(B, N, D)``.
        seed (int): Seed of the upstream gradients.
        step (float): Difference step.
        tolerance (float): Pass threshold.

    Returns:
        GradcheckReport: The per-tensor errors.
    """
    log_p, log_q, cache = network_forward(params, observations, mode="train")
    rng = np.random.default_rng(seed)
    grad_p = rng.normal(size=log_p.shape)
    grad_q = rng.normal(size=log_q.shape)
    analytic = network_backward(cache, grad_p, grad_q)

    def objective(p: NetworkParams) -> float:
        lp, lq, _ = network_forward(p, observations, mode="train")
        return float(np.sum(grad_p * lp) + np.sum(grad_q * lq))

    numeric = finite_difference(objective, params, step)
    errors = {n: relative_error(analytic[n], numeric[n]) for n in numeric}
    report = GradcheckReport("network", errors, tolerance)
    logger.info(
        "Network gradient check: max relative error %.3e.", report.max_error
    )
    return report


def micro_vp_scene() -> Scene:
    """Four segments: three meet in one vanishing point, one does not."""
    vp = np.array([0.9, 0.1, 1.0])
    segments = np.array(
        [
            [-0.3, -0.2, -0.1, -0.15],
            [-0.2, 0.2, 0.0, 0.18],
            [0.0, -0.3, 0.2, -0.2],
            [0.1, 0.3, 0.12, 0.05],
        ]
    )
    # Bend the first three segments so their lines pass through vp.
    for row in segments[:3]:
        start = row[:2]
        direction = vp[:2] - start
        direction /= np.linalg.norm(direction)
        row[2:] = start + 0.15 * direction
    return Scene(
        task=TASKS.VP,
        observations=observations_from_segments(segments),
        width=640,
        height=480,
        segments=segments,
        gt_labels=np.array([1, 1, 1, 0]),
        gt_models=(ModelInstance(TASKS.VP, vp),),
    )


def micro_pipeline_params() -> PipelineParams:
    return PipelineParams.for_task(
        TASKS.VP,
        max_instances=1,
        hypotheses=2,
        tau=0.05,
        softmax_scale=10.0,
    )


def check_estimator_gradient(
    params: NetworkParams,
    scene: Scene,
    pipeline_params: PipelineParams,
    loss: str = "hungarian",
    step: float = FD_STEP,
    tolerance: float = ESTIMATOR_TOLERANCE,
) -> GradcheckReport:
    """Compares the enumerated gradient of the expected loss, chained through
    the network, with central differences of the exact expected loss.

    Args:
        params (NetworkParams): The network.
        scene (Scene): A scene small enough to enumerate.
        pipeline_params (PipelineParams): Pipeline parameters.
        loss (str): Loss kind.
        step (float): Difference step.
        tolerance (float): Pass threshold.

    Returns:
        GradcheckReport: The per-tensor errors.
    """
    loss_fn = make_task_loss(loss, scene, pipeline_params)
    enumerator = OutcomeEnumerator(scene, pipeline_params, loss_fn)
    log_p, log_q, cache = network_forward(
        params, scene.observations, mode="train"
    )
    exact = enumerator.gradient(log_p, log_q)
    analytic = network_backward(cache, exact.grad_log_p, exact.grad_log_q)

    def objective(p: NetworkParams) -> float:
        lp, lq, _ = network_forward(p, scene.observations, mode="train")
        return enumerator.expected_loss(lp, lq)

    numeric = finite_difference(objective, params, step)
    errors = {n: relative_error(analytic[n], numeric[n]) for n in numeric}
    report = GradcheckReport("estimator", errors, tolerance)
    logger.info(
        "Estimator gradient check: expected loss %.6f, max relative error "
        "%.3e.",
        exact.expected_loss,
        report.max_error,
    )
    return report


def run_gradcheck(seed: int = 0) -> list[GradcheckReport]:
    """Both checks on the micro vanishing point instance."""
    scene = micro_vp_scene()
    pipeline_params = micro_pipeline_params()
    params = well_conditioned_params(
        pipeline_params.max_instances, scene.observations, seed
    )
    return [
        check_network_gradient(params, scene.observations, seed),
        check_estimator_gradient(params, scene, pipeline_params),
    ]
