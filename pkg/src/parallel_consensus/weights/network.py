"""Pointwise residual network predicting sample and inlier weights.

Every layer acts on each observation independently (1x1 convolutions) except
the normalization layers: instance norm pools over the observations of one
scene, batch norm over all observations of the batch. Arrays are laid out as
``(batch, observations, channels)``.
"""
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import numpy.typing as npt
from scipy.special import expit, logsumexp

from parallel_consensus.constants import BATCH_NORM_MOMENTUM
from parallel_consensus.exceptions import ShapeMismatchError
from parallel_consensus.weights.params import (
    SUBLAYERS,
    GradientBundle,
    NetworkParams,
    sublayer_prefix,
)

FloatArray = npt.NDArray[np.float64]
Mode = Literal["train", "infer"]


@dataclass
class SublayerCache:
    inputs: FloatArray
    inorm_hat: FloatArray
    inorm_inv_std: FloatArray
    bnorm_hat: FloatArray
    bnorm_inv_std: FloatArray
    pre_relu: FloatArray


@dataclass
class ForwardCache:
    """Activations kept for the backward pass.

    ``running`` holds the batch-norm running statistics updated by a train
    mode pass; they are not written back into the parameters.
    """

    params: NetworkParams
    mode: str
    batched: bool
    observations: FloatArray
    stem_pre: FloatArray
    sublayers: dict[str, SublayerCache] = field(default_factory=dict)
    head_input: FloatArray = field(default_factory=lambda: np.zeros(0))
    head_p_pre: FloatArray = field(default_factory=lambda: np.zeros(0))
    head_q_pre: FloatArray = field(default_factory=lambda: np.zeros(0))
    log_p: FloatArray = field(default_factory=lambda: np.zeros(0))
    log_q: FloatArray = field(default_factory=lambda: np.zeros(0))
    running: dict[str, FloatArray] = field(default_factory=dict)

    def relu_margin(self) -> float:
        """Smallest distance of any ReLU input from the kink at 0."""
        margins = [np.min(np.abs(self.stem_pre))]
        margins += [np.min(np.abs(s.pre_relu)) for s in self.sublayers.values()]
        return float(min(margins))


def log_sigmoid(x: FloatArray) -> FloatArray:
    return -np.logaddexp(0.0, -x)


def normalize_log_weights(
    raw_p: FloatArray, raw_q: FloatArray, axis_obs: int = -2
) -> tuple[FloatArray, FloatArray]:
    """Normalizes log weights: sample weights over the observations of each
    column, inlier weights over the models of each row.

    Args:
        raw_p (FloatArray): Unnormalized log sample weights ``(..., N, M)``.
        raw_q (FloatArray): Unnormalized log inlier weights
            ``(..., N, M + 1)``.
        axis_obs (int): The observation axis.

    Returns:
        tuple[FloatArray, FloatArray]: ``(logP, logQ)``.
    """
    log_p = raw_p - logsumexp(raw_p, axis=axis_obs, keepdims=True)
    log_q = raw_q - logsumexp(raw_q, axis=-1, keepdims=True)
    return log_p, log_q


def _conv(x: FloatArray, weight: FloatArray, bias: FloatArray) -> FloatArray:
    return x @ weight.T + bias


def _sublayer_forward(
    params: NetworkParams,
    prefix: str,
    x: FloatArray,
    mode: str,
    running: dict[str, FloatArray],
) -> tuple[FloatArray, SublayerCache]:
    eps = params.eps
    z = _conv(x, params[f"{prefix}.conv.weight"], params[f"{prefix}.conv.bias"])

    mean_i = z.mean(axis=1, keepdims=True)
    var_i = z.var(axis=1, keepdims=True)
    inv_std_i = 1.0 / np.sqrt(var_i + eps)
    z_hat = (z - mean_i) * inv_std_i
    y = (
        params[f"{prefix}.inorm.scale"] * z_hat
        + params[f"{prefix}.inorm.shift"]
    )

    mean_key = f"{prefix}.bnorm.running_mean"
    var_key = f"{prefix}.bnorm.running_var"
    if mode == "train":
        count = y.shape[0] * y.shape[1]
        mean_b = y.mean(axis=(0, 1))
        var_b = y.var(axis=(0, 1))
        unbiased = var_b * count / (count - 1) if count > 1 else var_b
        m = BATCH_NORM_MOMENTUM
        running[mean_key] = (1 - m) * params[mean_key] + m * mean_b
        running[var_key] = (1 - m) * params[var_key] + m * unbiased
    else:
        mean_b = params[mean_key]
        var_b = params[var_key]
    inv_std_b = 1.0 / np.sqrt(var_b + eps)
    y_hat = (y - mean_b) * inv_std_b
    pre = (
        params[f"{prefix}.bnorm.scale"] * y_hat
        + params[f"{prefix}.bnorm.shift"]
    )
    out = np.maximum(pre, 0.0)
    return out, SublayerCache(x, z_hat, inv_std_i, y_hat, inv_std_b, pre)


def network_forward(
    params: NetworkParams, observations: npt.ArrayLike, mode: Mode = "infer"
) -> tuple[FloatArray, FloatArray, ForwardCache]:
    """Runs the network on one scene ``(N, D)`` or a batch ``(B, N, D)``.

    Args:
        params (NetworkParams): The weights.
        observations (npt.ArrayLike): Observations.
        mode (Mode): ``train`` uses batch statistics in batch norm,
            ``infer`` the running statistics.

    Raises:
        ShapeMismatchError: If the observation dimension is wrong or the
            scene is empty.

    Returns:
        tuple[FloatArray, FloatArray, ForwardCache]: Normalized ``logP``
            ``(..., N, M)``, ``logQ`` ``(..., N, M + 1)`` and the cache.
    """
    x = np.asarray(observations, dtype=np.float64)
    batched = x.ndim == 3
    if not batched:
        x = x[None]
    if x.ndim != 3 or x.shape[-1] != params.in_dim:
        raise ShapeMismatchError(
            f"Observations must have shape (B, N, {params.in_dim}), got "
            f"{np.shape(observations)}."
        )
    if x.shape[1] < 1:
        raise ShapeMismatchError("Observations must not be empty.")

    stem_pre = _conv(x, params["stem.weight"], params["stem.bias"])
    h = np.maximum(stem_pre, 0.0)
    cache = ForwardCache(params, mode, batched, x, stem_pre)
    for b in range(params.blocks):
        block_in = h
        for s in SUBLAYERS:
            prefix = sublayer_prefix(b, s)
            h, cache.sublayers[prefix] = _sublayer_forward(
                params, prefix, h, mode, cache.running
            )
        h = h + block_in

    cache.head_input = h
    cache.head_p_pre = _conv(h, params["head_p.weight"], params["head_p.bias"])
    cache.head_q_pre = _conv(h, params["head_q.weight"], params["head_q.bias"])
    log_p, log_q = normalize_log_weights(
        log_sigmoid(cache.head_p_pre), log_sigmoid(cache.head_q_pre)
    )
    cache.log_p, cache.log_q = log_p, log_q
    if not batched:
        return log_p[0], log_q[0], cache
    return log_p, log_q, cache


def _norm_backward(
    grad_hat: FloatArray, x_hat: FloatArray, inv_std: FloatArray, axes: tuple
) -> FloatArray:
    mean_g = grad_hat.mean(axis=axes, keepdims=True)
    mean_gx = (grad_hat * x_hat).mean(axis=axes, keepdims=True)
    return inv_std * (grad_hat - mean_g - x_hat * mean_gx)


def _sublayer_backward(
    params: NetworkParams,
    prefix: str,
    c: SublayerCache,
    grad_out: FloatArray,
    grads: dict[str, FloatArray],
) -> FloatArray:
    g = grad_out * (c.pre_relu > 0)
    grads[f"{prefix}.bnorm.scale"] = np.sum(g * c.bnorm_hat, axis=(0, 1))
    grads[f"{prefix}.bnorm.shift"] = np.sum(g, axis=(0, 1))
    g = _norm_backward(
        g * params[f"{prefix}.bnorm.scale"],
        c.bnorm_hat,
        c.bnorm_inv_std,
        (0, 1),
    )
    grads[f"{prefix}.inorm.scale"] = np.sum(g * c.inorm_hat, axis=(0, 1))
    grads[f"{prefix}.inorm.shift"] = np.sum(g, axis=(0, 1))
    g = _norm_backward(
        g * params[f"{prefix}.inorm.scale"], c.inorm_hat, c.inorm_inv_std, (1,)
    )
    grads[f"{prefix}.conv.weight"] = np.einsum("bnc,bnd->cd", g, c.inputs)
    grads[f"{prefix}.conv.bias"] = np.sum(g, axis=(0, 1))
    return g @ params[f"{prefix}.conv.weight"]


def network_backward(
    cache: ForwardCache,
    grad_log_p: npt.ArrayLike,
    grad_log_q: npt.ArrayLike,
) -> GradientBundle:
    """Gradient of ``sum(grad_log_p * logP) + sum(grad_log_q * logQ)`` with
    respect to every trainable tensor.

    Args:
        cache (ForwardCache): Cache of a train mode forward pass.
        grad_log_p (npt.ArrayLike): Upstream gradient, shaped like ``logP``.
        grad_log_q (npt.ArrayLike): Upstream gradient, shaped like ``logQ``.

    Raises:
        ShapeMismatchError: If a gradient does not match its output, or the
            cache comes from an infer mode pass.

    Returns:
        GradientBundle: The gradients.
    """
    if cache.mode != "train":
        raise ShapeMismatchError("Backward needs a train mode forward cache.")
    gp = np.asarray(grad_log_p, dtype=np.float64)
    gq = np.asarray(grad_log_q, dtype=np.float64)
    if not cache.batched:
        gp, gq = gp[None], gq[None]
    if gp.shape != cache.log_p.shape:
        raise ShapeMismatchError(
            f"grad_log_p has shape {gp.shape}, expected {cache.log_p.shape}."
        )
    if gq.shape != cache.log_q.shape:
        raise ShapeMismatchError(
            f"grad_log_q has shape {gq.shape}, expected {cache.log_q.shape}."
        )
    params = cache.params
    grads: dict[str, FloatArray] = {}

    # Through the log-sum-exp normalizations, then the log-sigmoids.
    d_p = gp - np.exp(cache.log_p) * gp.sum(axis=1, keepdims=True)
    d_q = gq - np.exp(cache.log_q) * gq.sum(axis=2, keepdims=True)
    d_p = d_p * expit(-cache.head_p_pre)
    d_q = d_q * expit(-cache.head_q_pre)

    h = cache.head_input
    grads["head_p.weight"] = np.einsum("bnm,bnc->mc", d_p, h)
    grads["head_p.bias"] = d_p.sum(axis=(0, 1))
    grads["head_q.weight"] = np.einsum("bnm,bnc->mc", d_q, h)
    grads["head_q.bias"] = d_q.sum(axis=(0, 1))
    g = d_p @ params["head_p.weight"] + d_q @ params["head_q.weight"]

    for b in reversed(range(params.blocks)):
        skip = g
        for s in reversed(SUBLAYERS):
            prefix = sublayer_prefix(b, s)
            g = _sublayer_backward(
                params, prefix, cache.sublayers[prefix], g, grads
            )
        g = g + skip

    g = g * (cache.stem_pre > 0)
    grads["stem.weight"] = np.einsum("bnc,bnd->cd", g, cache.observations)
    grads["stem.bias"] = g.sum(axis=(0, 1))
    return GradientBundle({n: grads[n] for n in params.trainable_names()})


def apply_running_stats(
    params: NetworkParams, cache: ForwardCache
) -> NetworkParams:
    """Copy of the parameters with the running statistics of a train mode
    pass."""
    if not cache.running:
        return params
    return params.with_tensors(cache.running)
