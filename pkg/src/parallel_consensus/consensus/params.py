from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, Literal

from parallel_consensus.constants import (
    MINIMAL_SET_SIZES,
    SOFTMAX_SCALE,
    SOFTNESS,
    TASK_DEFAULTS,
)
from parallel_consensus.exceptions import ConfigurationError

Counting = Literal["weighted", "unweighted"]
COUNTING_MODES: tuple[str, ...] = ("weighted", "unweighted")


@dataclass(frozen=True)
class ConsensusParams:
    """Parameters of the per-putative-model hypothesis loop.

    Attributes:
        task (str): The task, fixes the minimal set size.
        tau (float): Inlier threshold in residual units.
        beta (float): Softness of the inlier score.
        hypotheses (int): Hypotheses sampled per putative model.
        softmax_scale (float): Scale of the selection softmax (training).
        counting (str): ``weighted`` uses the predicted inlier weights,
            ``unweighted`` sums the soft inlier scores.
    """

    task: str
    tau: float
    beta: float = SOFTNESS
    hypotheses: int = 32
    softmax_scale: float = SOFTMAX_SCALE
    counting: str = "weighted"

    def __post_init__(self) -> None:
        if self.task not in MINIMAL_SET_SIZES:
            raise ConfigurationError(f"task: unknown task {self.task!r}")
        if not self.tau > 0:
            raise ConfigurationError(f"tau: must be positive, got {self.tau}")
        if not self.beta > 0:
            raise ConfigurationError(
                f"beta: must be positive, got {self.beta}"
            )
        if self.hypotheses < 1:
            raise ConfigurationError(
                f"hypotheses: must be at least 1, got {self.hypotheses}"
            )
        if not self.softmax_scale > 0:
            raise ConfigurationError(
                f"softmax_scale: must be positive, got {self.softmax_scale}"
            )
        if self.counting not in COUNTING_MODES:
            raise ConfigurationError(
                f"counting: must be one of {COUNTING_MODES}, got "
                f"{self.counting!r}"
            )

    @property
    def minimal_size(self) -> int:
        return MINIMAL_SET_SIZES[self.task]

    @staticmethod
    def for_task(
        task: str, train: bool = False, **overrides: Any
    ) -> ConsensusParams:
        """Parameters with the per-task defaults, optionally overridden.

        Args:
            task (str): The task.
            train (bool): Use the training threshold and hypothesis count.
            **overrides (Any): Field values replacing the defaults.

        Raises:
            ConfigurationError: If the task is unknown.

        Returns:
            ConsensusParams: The parameters.
        """
        if task not in TASK_DEFAULTS:
            raise ConfigurationError(f"task: unknown task {task!r}")
        defaults = TASK_DEFAULTS[task]
        prefix = "train_" if train else ""
        values: dict[str, Any] = {
            "task": task,
            "tau": defaults[f"{prefix}inlier_threshold"],
            "hypotheses": defaults[f"{prefix}hypotheses"],
        }
        values.update(overrides)
        return ConsensusParams(**values)

    def replace(self, **changes: Any) -> ConsensusParams:
        return dataclasses.replace(self, **changes)
