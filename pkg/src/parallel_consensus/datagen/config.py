from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any

from parallel_consensus.constants import ALL_TASKS, TASKS
from parallel_consensus.exceptions import ConfigurationError

DEFAULT_OUTLIER_CAP = 10_000
DEFAULT_MAX_RETRIES = 5
# Full-frame sensor width used to turn focal lengths in mm into pixels.
SENSOR_WIDTH_MM = 36.0

MODEL_RANGES: dict[str, tuple[int, int]] = {
    TASKS.VP: (1, 8),
    TASKS.FMAT: (1, 4),
    TASKS.HOMOGRAPHY: (1, 8),
}
POINTS_RANGES: dict[str, tuple[int, int]] = {
    TASKS.VP: (10, 40),
    TASKS.FMAT: (40, 160),
    TASKS.HOMOGRAPHY: (20, 120),
}


@dataclass(frozen=True)
class GenConfig:
    """Settings of the synthetic scene generators.

    Attributes:
        task (str): The task.
        scene_count (int): Scenes to generate.
        width (int): Image width in pixels.
        height (int): Image height in pixels.
        model_range (tuple[int, int]): Inclusive range of the model count.
        points_range (tuple[int, int]): Inclusive range of observations per
            model.
        noise (float): Standard deviation of the coordinate noise in pixels.
        outlier_rate (float): Fraction of outliers among all observations.
        manhattan (bool): Vanishing point scenes use three orthogonal
            directions.
        outlier_cap (int): Largest number of synthetic outliers per scene.
        max_retries (int): Resampling attempts per model.
        focal_range_mm (tuple[float, float]): Focal length range in mm.
        seed (int): Root seed.
    """

    task: str
    scene_count: int = 10
    width: int = 1024
    height: int = 1024
    model_range: tuple[int, int] = (1, 4)
    points_range: tuple[int, int] = (40, 160)
    noise: float = 0.0
    outlier_rate: float = 0.0
    manhattan: bool = False
    outlier_cap: int = DEFAULT_OUTLIER_CAP
    max_retries: int = DEFAULT_MAX_RETRIES
    focal_range_mm: tuple[float, float] = (24.0, 40.0)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.task not in ALL_TASKS:
            raise ConfigurationError(f"task: unknown task {self.task!r}")
        if self.scene_count < 0:
            raise ConfigurationError(
                f"scene_count: must be non-negative, got {self.scene_count}"
            )
        if self.width <= 0 or self.height <= 0:
            raise ConfigurationError("width, height: must be positive")
        for name in ("model_range", "points_range", "focal_range_mm"):
            low, high = getattr(self, name)
            if not 0 < low <= high:
                raise ConfigurationError(
                    f"{name}: must satisfy 0 < low <= high, got "
                    f"{(low, high)}"
                )
            object.__setattr__(self, name, (low, high))
        if self.noise < 0:
            raise ConfigurationError(
                f"noise: must be non-negative, got {self.noise}"
            )
        if not 0 <= self.outlier_rate < 1:
            raise ConfigurationError(
                f"outlier_rate: must be in [0, 1), got {self.outlier_rate}"
            )
        if self.outlier_cap < 0 or self.max_retries < 0:
            raise ConfigurationError(
                "outlier_cap, max_retries: must be non-negative"
            )

    @staticmethod
    def for_task(task: str, **overrides: Any) -> GenConfig:
        """Per-task model and observation count ranges, optionally
        overridden.

        Args:
            task (str): The task.
            **overrides (Any): Replacement field values.

        Raises:
            ConfigurationError: If the task is unknown.

        Returns:
            GenConfig: The configuration.
        """
        if task not in ALL_TASKS:
            raise ConfigurationError(f"task: unknown task {task!r}")
        values: dict[str, Any] = {
            "task": task,
            "model_range": MODEL_RANGES[task],
            "points_range": POINTS_RANGES[task],
        }
        values.update(overrides)
        return GenConfig(**values)

    @property
    def scale(self) -> float:
        return float(max(self.width, self.height))

    def replace(self, **changes: Any) -> GenConfig:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        out = dataclasses.asdict(self)
        for name in ("model_range", "points_range", "focal_range_mm"):
            out[name] = list(out[name])
        return out

    @staticmethod
    def from_dict(data: dict[str, Any]) -> GenConfig:
        values = dict(data)
        for name in ("model_range", "points_range", "focal_range_mm"):
            if name in values:
                values[name] = tuple(values[name])
        return GenConfig(**values)
