from __future__ import annotations

from pathlib import Path
from typing import Protocol, runtime_checkable

import numpy as np
import numpy.typing as npt

from parallel_consensus.constants import ORACLE_EPS
from parallel_consensus.exceptions import (
    ConfigurationError,
    SceneFormatError,
    TaskMismatchError,
)
from parallel_consensus.scene import Scene
from parallel_consensus.weights.network import network_forward
from parallel_consensus.weights.params import NetworkParams, load_params

FloatArray = npt.NDArray[np.float64]

PROVIDER_NAMES: tuple[str, ...] = ("uniform", "oracle", "neural")


@runtime_checkable
class WeightProvider(Protocol):
    """Emits normalized log sample weights ``(N, M)`` and log inlier weights
    ``(N, M + 1)`` for a scene."""

    m_star: int

    def __call__(self, scene: Scene) -> tuple[FloatArray, FloatArray]:
        ...


class UniformProvider:
    """Constant weights; the pipeline reduces to unguided parallel RANSAC."""

    name = "uniform"

    def __init__(self, m_star: int) -> None:
        if m_star < 1:
            raise ConfigurationError(f"m_star: must be positive, got {m_star}")
        self.m_star = m_star

    def __call__(self, scene: Scene) -> tuple[FloatArray, FloatArray]:
        n = len(scene)
        log_p = np.full((n, self.m_star), -np.log(n) if n else 0.0)
        log_q = np.full((n, self.m_star + 1), -np.log(self.m_star + 1))
        return log_p, log_q


class OracleProvider:
    """Weights read off the ground-truth labels.

    Column ``j`` of the sample weights is uniform over the observations of
    ground-truth model ``j + 1``; each inlier weight row puts ``1 - eps`` on
    the observation's own model (outliers on the last column). ``eps`` is
    spread over the remaining entries.

    Columns without a ground-truth model put all sample mass on the first
    observation. Every minimal set drawn from them repeats one observation,
    every solver rejects it, and the putative model stays empty.
    """

    name = "oracle"

    def __init__(self, m_star: int, eps: float = ORACLE_EPS) -> None:
        if m_star < 1:
            raise ConfigurationError(f"m_star: must be positive, got {m_star}")
        if not 0 < eps < 1:
            raise ConfigurationError(f"eps: must be in (0, 1), got {eps}")
        self.m_star = m_star
        self.eps = eps

    def __call__(self, scene: Scene) -> tuple[FloatArray, FloatArray]:
        if scene.gt_labels is None:
            raise SceneFormatError("The oracle provider needs gt_labels.")
        labels = scene.gt_labels
        num_models = max(scene.num_models, int(labels.max(initial=0)))
        if num_models > self.m_star:
            raise ConfigurationError(
                f"m_star: scene has {num_models} ground-truth models, more "
                f"than m_star={self.m_star}"
            )
        n, m, eps = len(scene), self.m_star, self.eps

        members = labels[:, None] == np.arange(1, m + 1)[None, :]
        sizes = members.sum(axis=0)
        unused = np.zeros(n)
        unused[:1] = 1.0
        p = np.where(
            sizes > 0,
            (1.0 - eps) * members / np.maximum(sizes, 1) + eps / n,
            unused[:, None],
        )
        p = p / p.sum(axis=0, keepdims=True)

        column = np.where(labels > 0, labels - 1, m)
        q = np.full((n, m + 1), eps / m)
        q[np.arange(n), column] = 1.0 - eps
        q = q / q.sum(axis=1, keepdims=True)
        with np.errstate(divide="ignore"):
            return np.log(p), np.log(q)


class NeuralProvider:
    """Weights predicted by the network, batch norm in inference mode."""

    name = "neural"

    def __init__(self, params: NetworkParams) -> None:
        self.params = params
        self.m_star = params.m_star

    def __call__(self, scene: Scene) -> tuple[FloatArray, FloatArray]:
        if self.params.task is not None and scene.task != self.params.task:
            raise TaskMismatchError(
                f"Weights were trained for {self.params.task!r}, scene is "
                f"{scene.task!r}."
            )
        log_p, log_q, _ = network_forward(
            self.params, scene.observations, mode="infer"
        )
        return log_p, log_q


def make_provider(
    name: str, m_star: int, weights_path: str | Path | None = None
) -> WeightProvider:
    """Builds a provider by name.

    Args:
        name (str): One of ``uniform``, ``oracle`` or ``neural``.
        m_star (int): Number of putative models.
        weights_path (str | Path | None): Weights file, required for
            ``neural``.

    Raises:
        ConfigurationError: If the name is unknown or weights are missing.

    Returns:
        WeightProvider: The provider.
    """
    if name == "uniform":
        return UniformProvider(m_star)
    if name == "oracle":
        return OracleProvider(m_star)
    if name == "neural":
        if weights_path is None:
            raise ConfigurationError(
                "weights: the neural provider needs a weights file"
            )
        return NeuralProvider(load_params(weights_path, m_star=m_star))
    raise ConfigurationError(
        f"provider: must be one of {PROVIDER_NAMES}, got {name!r}"
    )
