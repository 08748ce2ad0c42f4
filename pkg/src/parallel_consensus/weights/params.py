from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator

import numpy as np
import numpy.typing as npt

from parallel_consensus.constants import NORM_EPS, OBSERVATION_DIM
from parallel_consensus.exceptions import (
    ConfigurationError,
    ShapeMismatchError,
    WeightsFormatError,
)
from parallel_consensus.io.tensors import read_tensors, write_tensors
from parallel_consensus.utils.hashing import hash_arrays

FloatArray = npt.NDArray[np.float64]

DEFAULT_CHANNELS = 128
DEFAULT_BLOCKS = 6
SUBLAYERS = (0, 1)
RUNNING_SUFFIXES = ("bnorm.running_mean", "bnorm.running_var")


def sublayer_prefix(block: int, sub: int) -> str:
    return f"block{block}.{sub}"


def build_manifest(
    m_star: int, in_dim: int, channels: int, blocks: int
) -> list[tuple[str, tuple[int, ...]]]:
    """Names and shapes of every tensor of the network, in storage order."""
    c = channels
    manifest: list[tuple[str, tuple[int, ...]]] = [
        ("stem.weight", (c, in_dim)),
        ("stem.bias", (c,)),
    ]
    for b in range(blocks):
        for s in SUBLAYERS:
            prefix = sublayer_prefix(b, s)
            manifest += [
                (f"{prefix}.conv.weight", (c, c)),
                (f"{prefix}.conv.bias", (c,)),
                (f"{prefix}.inorm.scale", (c,)),
                (f"{prefix}.inorm.shift", (c,)),
                (f"{prefix}.bnorm.scale", (c,)),
                (f"{prefix}.bnorm.shift", (c,)),
                (f"{prefix}.bnorm.running_mean", (c,)),
                (f"{prefix}.bnorm.running_var", (c,)),
            ]
    manifest += [
        ("head_p.weight", (m_star, c)),
        ("head_p.bias", (m_star,)),
        ("head_q.weight", (m_star + 1, c)),
        ("head_q.bias", (m_star + 1,)),
    ]
    return manifest


def is_running_stat(name: str) -> bool:
    return name.endswith(RUNNING_SUFFIXES)


@dataclass
class NetworkParams:
    """Weights of the pointwise residual network plus its batch-norm running
    statistics.

    Attributes:
        m_star (int): Number of putative models.
        in_dim (int): Observation dimension.
        channels (int): Width of the hidden layers.
        blocks (int): Number of residual blocks.
        task (str | None): Task the weights were trained for.
        eps (float): Epsilon of both normalization layers.
        tensors (dict[str, FloatArray]): Named tensors in manifest order.
    """

    m_star: int
    in_dim: int = OBSERVATION_DIM
    channels: int = DEFAULT_CHANNELS
    blocks: int = DEFAULT_BLOCKS
    task: str | None = None
    eps: float = NORM_EPS
    tensors: dict[str, FloatArray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name, shape in self.manifest():
            if name not in self.tensors:
                raise ShapeMismatchError(f"Missing tensor {name}.")
            if self.tensors[name].shape != shape:
                raise ShapeMismatchError(
                    f"Tensor {name} has shape {self.tensors[name].shape}, "
                    f"expected {shape}."
                )
        extra = set(self.tensors) - {n for n, _ in self.manifest()}
        if extra:
            raise ShapeMismatchError(f"Unexpected tensors {sorted(extra)}.")

    def manifest(self) -> list[tuple[str, tuple[int, ...]]]:
        return build_manifest(
            self.m_star, self.in_dim, self.channels, self.blocks
        )

    def trainable_names(self) -> list[str]:
        return [n for n, _ in self.manifest() if not is_running_stat(n)]

    def __getitem__(self, name: str) -> FloatArray:
        return self.tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def copy(self) -> NetworkParams:
        return NetworkParams(
            m_star=self.m_star,
            in_dim=self.in_dim,
            channels=self.channels,
            blocks=self.blocks,
            task=self.task,
            eps=self.eps,
            tensors={k: v.copy() for k, v in self.tensors.items()},
        )

    def with_tensors(self, updates: dict[str, FloatArray]) -> NetworkParams:
        """A copy with some tensors replaced."""
        out = self.copy()
        for name, value in updates.items():
            if name not in out.tensors:
                raise ShapeMismatchError(f"Unknown tensor {name}.")
            out.tensors[name] = np.array(value, dtype=np.float64)
        out.__post_init__()
        return out

    def digest(self) -> str:
        return hash_arrays(self.tensors[n] for n, _ in self.manifest())

    def header(self) -> dict[str, Any]:
        return {
            "kind": "weights",
            "m_star": self.m_star,
            "in_dim": self.in_dim,
            "channels": self.channels,
            "blocks": self.blocks,
            "task": self.task,
            "eps": self.eps,
        }


def init_params(
    m_star: int,
    seed: int,
    channels: int = DEFAULT_CHANNELS,
    blocks: int = DEFAULT_BLOCKS,
    in_dim: int = OBSERVATION_DIM,
    task: str | None = None,
) -> NetworkParams:
    """Fresh network weights: He-scaled convolutions, zero biases, unit
    normalization scales, zero shifts and running statistics ``(0, 1)``.

    Args:
        m_star (int): Number of putative models.
        seed (int): Seed of the initialization.
        channels (int): Hidden width.
        blocks (int): Number of residual blocks.
        in_dim (int): Observation dimension.
        task (str | None): Task tag stored with the weights.

    Raises:
        ConfigurationError: If a size is not positive.

    Returns:
        NetworkParams: The weights.
    """
    if m_star < 1 or channels < 1 or blocks < 0 or in_dim < 1:
        raise ConfigurationError(
            "m_star, channels and in_dim must be positive, blocks "
            "non-negative."
        )
    rng = np.random.default_rng(seed)
    tensors: dict[str, FloatArray] = {}
    for name, shape in build_manifest(m_star, in_dim, channels, blocks):
        if name.endswith(".weight"):
            fan_in = shape[1]
            tensors[name] = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)
        elif name.endswith((".scale", "running_var")):
            tensors[name] = np.ones(shape)
        else:
            tensors[name] = np.zeros(shape)
    return NetworkParams(
        m_star=m_star,
        in_dim=in_dim,
        channels=channels,
        blocks=blocks,
        task=task,
        tensors=tensors,
    )


def save_params(params: NetworkParams, path: str | Path) -> None:
    write_tensors(path, params.header(), params.tensors)


def load_params(
    path: str | Path, m_star: int | None = None
) -> NetworkParams:
    """Reads weights written by ``save_params``.

    Args:
        path (str | Path): The weights file.
        m_star (int | None): Expected number of putative models, if known.

    Raises:
        WeightsFormatError: If the file is not a weights container.
        ShapeMismatchError: If a tensor does not have the expected shape.

    Returns:
        NetworkParams: The weights.
    """
    header, tensors = read_tensors(path)
    if header.get("kind") != "weights":
        raise WeightsFormatError(
            f"{path} holds {header.get('kind')!r}, not weights."
        )
    if m_star is not None and header["m_star"] != m_star:
        raise ShapeMismatchError(
            f"Tensor head_p.weight is sized for m_star={header['m_star']}, "
            f"expected {m_star}."
        )
    return NetworkParams(
        m_star=header["m_star"],
        in_dim=header["in_dim"],
        channels=header["channels"],
        blocks=header["blocks"],
        task=header.get("task"),
        eps=header.get("eps", NORM_EPS),
        tensors=tensors,
    )


@dataclass
class GradientBundle:
    """Gradients of the trainable tensors of a network."""

    grads: dict[str, FloatArray]

    @staticmethod
    def zeros_like(params: NetworkParams) -> GradientBundle:
        return GradientBundle(
            {n: np.zeros_like(params[n]) for n in params.trainable_names()}
        )

    def __getitem__(self, name: str) -> FloatArray:
        return self.grads[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.grads)

    def accumulate(
        self, other: GradientBundle, scale: float = 1.0
    ) -> GradientBundle:
        """Adds ``scale * other`` in place.

        Args:
            other (GradientBundle): The gradients to add.
            scale (float): Their factor.

        Raises:
            ShapeMismatchError: If the bundles do not match.

        Returns:
            GradientBundle: This bundle.
        """
        if set(other.grads) != set(self.grads):
            raise ShapeMismatchError("Gradient bundles hold different tensors.")
        for name, value in other.grads.items():
            if value.shape != self.grads[name].shape:
                raise ShapeMismatchError(
                    f"Gradient {name} has shape {value.shape}, expected "
                    f"{self.grads[name].shape}."
                )
            self.grads[name] += scale * value
        return self

    def scale(self, factor: float) -> GradientBundle:
        for name in self.grads:
            self.grads[name] *= factor
        return self

    def global_norm(self) -> float:
        return float(
            np.sqrt(sum(float(np.sum(g * g)) for g in self.grads.values()))
        )

    def is_finite(self) -> bool:
        return all(bool(np.all(np.isfinite(g))) for g in self.grads.values())

    def is_zero(self) -> bool:
        return all(not np.any(g) for g in self.grads.values())
