from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any

from parallel_consensus.constants import (
    LEARNING_RATE,
    MAX_OBSERVATIONS,
    SELF_SUPERVISED_GAMMA,
    TASK_DEFAULTS,
    TASKS,
)
from parallel_consensus.exceptions import ConfigurationError

LOSS_KINDS: tuple[str, ...] = ("hungarian", "me", "self_weighted", "self_plain")


@dataclass(frozen=True)
class TrainParams:
    """Parameters of the training loop.

    Attributes:
        hypothesis_samples (int): Hypothesis sets drawn per scene, ``K``.
        model_samples (int): Model selections drawn per hypothesis set.
        learning_rate (float): Base Adam learning rate.
        epochs (int): Number of epochs.
        lr_drop_epoch (int): Epochs after this one use a tenth of the rate.
        batch_size (int): Scenes per optimizer step.
        gamma (float): Decay of the weighted self-supervised loss.
        loss (str): One of ``LOSS_KINDS``.
        max_observations (int): Scenes are padded or subsampled to this size.
    """

    hypothesis_samples: int = 8
    model_samples: int = 64
    learning_rate: float = LEARNING_RATE
    epochs: int = 2000
    lr_drop_epoch: int = 1500
    batch_size: int = 64
    gamma: float = SELF_SUPERVISED_GAMMA
    loss: str = "hungarian"
    max_observations: int = MAX_OBSERVATIONS

    def __post_init__(self) -> None:
        for name in (
            "hypothesis_samples",
            "model_samples",
            "epochs",
            "batch_size",
            "max_observations",
        ):
            value = getattr(self, name)
            if value < 1:
                raise ConfigurationError(
                    f"{name}: must be at least 1, got {value}"
                )
        if self.lr_drop_epoch < 0:
            raise ConfigurationError(
                f"lr_drop_epoch: must be non-negative, got {self.lr_drop_epoch}"
            )
        if not self.learning_rate > 0:
            raise ConfigurationError(
                f"learning_rate: must be positive, got {self.learning_rate}"
            )
        if not 0 < self.gamma < 1:
            raise ConfigurationError(
                f"gamma: must be in (0, 1), got {self.gamma}"
            )
        if self.loss not in LOSS_KINDS:
            raise ConfigurationError(
                f"loss: must be one of {LOSS_KINDS}, got {self.loss!r}"
            )

    @staticmethod
    def for_task(task: str, **overrides: Any) -> TrainParams:
        """Per-task defaults. Vanishing points train with the Hungarian
        angle loss, the other tasks with the misclassification error.

        Args:
            task (str): The task.
            **overrides (Any): Replacement field values.

        Raises:
            ConfigurationError: If the task is unknown.

        Returns:
            TrainParams: The parameters.
        """
        if task not in TASK_DEFAULTS:
            raise ConfigurationError(f"task: unknown task {task!r}")
        defaults = TASK_DEFAULTS[task]
        values: dict[str, Any] = {
            "hypothesis_samples": defaults["hypothesis_samples"],
            "model_samples": defaults["model_samples"],
            "epochs": defaults["epochs"],
            "lr_drop_epoch": defaults["lr_drop_epoch"],
            "batch_size": defaults["batch_size"],
            "loss": "hungarian" if task == TASKS.VP else "me",
        }
        values.update(overrides)
        return TrainParams(**values)

    def replace(self, **changes: Any) -> TrainParams:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)
