from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import numpy.typing as npt

from parallel_consensus.constants import LR_DROP_FACTOR
from parallel_consensus.exceptions import (
    ShapeMismatchError,
    WeightsFormatError,
)
from parallel_consensus.io.tensors import read_tensors, write_tensors
from parallel_consensus.weights.params import GradientBundle, NetworkParams

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]


@dataclass
class AdamState:
    """Moment estimates of the Adam optimizer.

    Attributes:
        step (int): Number of applied steps.
        m (dict[str, FloatArray]): First moments per trainable tensor.
        v (dict[str, FloatArray]): Second moments per trainable tensor.
        beta1 (float): First moment decay.
        beta2 (float): Second moment decay.
        eps (float): Denominator epsilon.
    """

    step: int = 0
    m: dict[str, FloatArray] = field(default_factory=dict)
    v: dict[str, FloatArray] = field(default_factory=dict)
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @staticmethod
    def zeros(params: NetworkParams) -> AdamState:
        names = params.trainable_names()
        return AdamState(
            m={n: np.zeros_like(params[n]) for n in names},
            v={n: np.zeros_like(params[n]) for n in names},
        )

    def header(self) -> dict:
        return {
            "kind": "adam",
            "step": self.step,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
        }


def lr_for_epoch(
    epoch: int, base: float, drop_epoch: int, factor: float = LR_DROP_FACTOR
) -> float:
    """Learning rate of a 1-based epoch: ``base`` up to ``drop_epoch``,
    ``base * factor`` afterwards."""
    return base * factor if epoch > drop_epoch else base


def adam_step(
    params: NetworkParams,
    bundle: GradientBundle,
    lr: float,
    state: AdamState,
) -> tuple[NetworkParams, AdamState, bool]:
    """One bias-corrected Adam update.

    Args:
        params (NetworkParams): The current weights.
        bundle (GradientBundle): Gradients of the loss.
        lr (float): Learning rate.
        state (AdamState): Moments before the step.

    Raises:
        ShapeMismatchError: If the state does not match the parameters.

    Returns:
        tuple[NetworkParams, AdamState, bool]: New weights, new state and
            whether the step was applied. A step with non-finite gradients
            is skipped and leaves both unchanged.
    """
    if not bundle.is_finite():
        logger.warning(
            "Skipping optimizer step %d: non-finite gradients.", state.step + 1
        )
        return params, state, False
    if set(state.m) != set(bundle.grads):
        raise ShapeMismatchError("Optimizer state does not match gradients.")

    step = state.step + 1
    b1, b2 = state.beta1, state.beta2
    new_m: dict[str, FloatArray] = {}
    new_v: dict[str, FloatArray] = {}
    updates: dict[str, FloatArray] = {}
    for name, grad in bundle.grads.items():
        new_m[name] = b1 * state.m[name] + (1 - b1) * grad
        new_v[name] = b2 * state.v[name] + (1 - b2) * grad * grad
        m_hat = new_m[name] / (1 - b1**step)
        v_hat = new_v[name] / (1 - b2**step)
        updates[name] = params[name] - lr * m_hat / (
            np.sqrt(v_hat) + state.eps
        )
    new_state = AdamState(step, new_m, new_v, b1, b2, state.eps)
    return params.with_tensors(updates), new_state, True


def save_adam_state(state: AdamState, path: str | Path) -> None:
    tensors = {f"m.{n}": t for n, t in state.m.items()}
    tensors.update({f"v.{n}": t for n, t in state.v.items()})
    write_tensors(path, state.header(), tensors)


def load_adam_state(path: str | Path) -> AdamState:
    """Reads an optimizer state written by ``save_adam_state``.

    Args:
        path (str | Path): The state file.

    Raises:
        WeightsFormatError: If the file holds something else.

    Returns:
        AdamState: The state.
    """
    header, tensors = read_tensors(path)
    if header.get("kind") != "adam":
        raise WeightsFormatError(
            f"{path} holds {header.get('kind')!r}, not an optimizer state."
        )
    m = {k[2:]: v for k, v in tensors.items() if k.startswith("m.")}
    v = {k[2:]: t for k, t in tensors.items() if k.startswith("v.")}
    return AdamState(
        step=header["step"],
        m=m,
        v=v,
        beta1=header["beta1"],
        beta2=header["beta2"],
        eps=header["eps"],
    )
