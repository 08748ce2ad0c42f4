from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt

from parallel_consensus.consensus.params import ConsensusParams
from parallel_consensus.constants import TASK_DEFAULTS, TASKS
from parallel_consensus.exceptions import ConfigurationError, SceneFormatError
from parallel_consensus.scene import ModelInstance

IntArray = npt.NDArray[np.int64]


@dataclass(frozen=True)
class PipelineParams:
    """Parameters of the full fitting pipeline.

    Attributes:
        consensus (ConsensusParams): Hypothesis loop parameters.
        max_instances (int): Number of putative models ``M``.
        assignment_threshold (float | None): The looser threshold used for
            cluster labels only. Vanishing points have none.
        refine (bool): Refine selected vanishing points by weighted least
            squares over their soft inliers.
    """

    consensus: ConsensusParams
    max_instances: int
    assignment_threshold: float | None = None
    refine: bool = True

    def __post_init__(self) -> None:
        if self.max_instances < 1:
            raise ConfigurationError(
                f"max_instances: must be at least 1, got {self.max_instances}"
            )
        tau_a = self.assignment_threshold
        if tau_a is not None and not tau_a > self.consensus.tau:
            raise ConfigurationError(
                f"assignment_threshold: must exceed the inlier threshold "
                f"{self.consensus.tau}, got {tau_a}"
            )

    @property
    def task(self) -> str:
        return self.consensus.task

    @property
    def tau(self) -> float:
        return self.consensus.tau

    @staticmethod
    def for_task(
        task: str, train: bool = False, **overrides: Any
    ) -> PipelineParams:
        """Per-task defaults; overrides may name pipeline or consensus fields.

        Args:
            task (str): The task.
            train (bool): Use the training threshold and hypothesis count.
            **overrides (Any): Replacement field values.

        Returns:
            PipelineParams: The parameters.
        """
        consensus_fields = {f.name for f in dataclasses.fields(ConsensusParams)}
        consensus = ConsensusParams.for_task(
            task,
            train=train,
            **{k: v for k, v in overrides.items() if k in consensus_fields},
        )
        defaults = TASK_DEFAULTS[task]
        values: dict[str, Any] = {
            "consensus": consensus,
            "max_instances": defaults["max_instances"],
            "assignment_threshold": defaults["assignment_threshold"],
        }
        values.update(
            {k: v for k, v in overrides.items() if k not in consensus_fields}
        )
        if task == TASKS.VP:
            values["assignment_threshold"] = None
        return PipelineParams(**values)

    def to_dict(self) -> dict[str, Any]:
        out = dataclasses.asdict(self.consensus)
        out.update(
            {
                "max_instances": self.max_instances,
                "assignment_threshold": self.assignment_threshold,
                "refine": self.refine,
            }
        )
        return out

    @staticmethod
    def from_dict(data: dict[str, Any]) -> PipelineParams:
        consensus_fields = {f.name for f in dataclasses.fields(ConsensusParams)}
        consensus = ConsensusParams(
            **{k: v for k, v in data.items() if k in consensus_fields}
        )
        return PipelineParams(
            consensus=consensus,
            max_instances=data["max_instances"],
            assignment_threshold=data.get("assignment_threshold"),
            refine=data.get("refine", True),
        )


@dataclass(frozen=True, eq=False)
class FitResult:
    """Output of one pipeline run.

    Attributes:
        task (str): The task.
        models (tuple[ModelInstance, ...]): Ranked models, most significant
            first.
        labels (IntArray): Per-observation label, 0 for outliers and ``k``
            for the k-th ranked model.
        per_model_inliers (tuple[int, ...]): Hard inlier counts at the inlier
            threshold.
        elapsed (float): Wall time in seconds.
    """

    task: str
    models: tuple[ModelInstance, ...]
    labels: IntArray
    per_model_inliers: tuple[int, ...]
    elapsed: float = 0.0

    def __post_init__(self) -> None:
        labels = np.array(self.labels, dtype=np.int64)
        out_of_range = labels.size and (
            labels.min() < 0 or labels.max() > len(self.models)
        )
        if out_of_range:
            raise SceneFormatError("Labels out of range of the model count.")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "models", tuple(self.models))
        counts = tuple(int(c) for c in self.per_model_inliers)
        object.__setattr__(self, "per_model_inliers", counts)

    @property
    def num_models(self) -> int:
        return len(self.models)

    def to_dict(self, timing: bool = True) -> dict[str, Any]:
        out: dict[str, Any] = {
            "task": self.task,
            "models": [m.to_dict() for m in self.models],
            "labels": self.labels.tolist(),
            "per_model_inliers": list(self.per_model_inliers),
        }
        if timing:
            out["elapsed"] = self.elapsed
        return out

    @staticmethod
    def from_dict(data: dict[str, Any]) -> FitResult:
        return FitResult(
            task=data["task"],
            models=tuple(ModelInstance.from_dict(m) for m in data["models"]),
            labels=np.asarray(data["labels"], dtype=np.int64),
            per_model_inliers=tuple(data["per_model_inliers"]),
            elapsed=data.get("elapsed", 0.0),
        )

    def same_outcome(self, other: FitResult) -> bool:
        """Equality ignoring timing."""
        return (
            self.task == other.task
            and self.models == other.models
            and np.array_equal(self.labels, other.labels)
            and self.per_model_inliers == other.per_model_inliers
        )

    def __repr__(self) -> str:
        out = "FitResult("
        spaces = " " * len(out)
        out += (
            f"task={self.task},\n"
            + spaces
            + f"models={self.num_models},\n"
            + spaces
            + f"inliers={list(self.per_model_inliers)},\n"
            + spaces
            + f"outliers={int(np.sum(self.labels == 0))},\n"
            + spaces
            + f"elapsed={self.elapsed:.4f}s\n)"
        )
        return out
