from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from parallel_consensus import __version__
from parallel_consensus.constants import (
    DEFAULT_AUC_CUTOFFS,
    RESULTS_FORMAT_VERSION,
    TASKS,
)
from parallel_consensus.exceptions import SceneFormatError
from parallel_consensus.io.scenes import read_json, write_json
from parallel_consensus.metrics.evaluation import aggregate, pooled_errors
from parallel_consensus.pipeline.params import FitResult

logger = logging.getLogger(__name__)

RECALL_COLUMNS = ("curve", "threshold", "recall")
RECALL_POINTS = 101


@dataclass(frozen=True)
class SceneEntry:
    """Outcome of one scene.

    Attributes:
        name (str): Scene file name or index.
        seed (int): Seed the pipeline ran with.
        result (FitResult): The pipeline output.
        metrics (dict[str, Any]): The per-scene metric block.
    """

    name: str
    seed: int
    result: FitResult
    metrics: dict[str, Any]

    def to_dict(self, timing: bool = True) -> dict[str, Any]:
        return {
            "name": self.name,
            "seed": self.seed,
            "result": self.result.to_dict(timing=timing),
            "metrics": self.metrics,
        }

    @staticmethod
    def from_dict(data: dict[str, Any]) -> SceneEntry:
        return SceneEntry(
            name=data["name"],
            seed=data["seed"],
            result=FitResult.from_dict(data["result"]),
            metrics=data["metrics"],
        )


@dataclass(frozen=True)
class ResultsFile:
    """Per-scene outcomes, their aggregate and the settings that produced
    them.

    Attributes:
        task (str): The task.
        entries (tuple[SceneEntry, ...]): Per-scene outcomes, in scene order.
        params (dict[str, Any]): Pipeline parameter echo.
        seed (int): Root seed.
        provider (str): Weight provider name.
        cutoffs (tuple[float, ...]): AUC cutoffs in degrees.
        tool_version (str): Version of the package that wrote the file.
        aggregate (dict[str, Any]): Computed from the entries if omitted.
    """

    task: str
    entries: tuple[SceneEntry, ...]
    params: dict[str, Any]
    seed: int
    provider: str
    cutoffs: tuple[float, ...] = DEFAULT_AUC_CUTOFFS
    tool_version: str = __version__
    aggregate: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        object.__setattr__(self, "cutoffs", tuple(self.cutoffs))
        if not self.aggregate:
            object.__setattr__(self, "aggregate", self.recompute())

    @property
    def results(self) -> list[FitResult]:
        return [e.result for e in self.entries]

    @property
    def blocks(self) -> list[dict[str, Any]]:
        return [e.metrics for e in self.entries]

    @property
    def total_time(self) -> float:
        return float(sum(e.result.elapsed for e in self.entries))

    def recompute(self) -> dict[str, Any]:
        return aggregate(self.blocks, self.cutoffs)

    def check_consistency(self) -> None:
        """Compares the stored aggregate with a recomputation.

        Raises:
            SceneFormatError: If they differ.
        """
        fresh = self.recompute()
        if fresh != self.aggregate:
            raise SceneFormatError(
                "Results aggregate does not match its per-scene entries: "
                f"stored {self.aggregate}, recomputed {fresh}."
            )

    def to_dict(self, timing: bool = True) -> dict[str, Any]:
        out: dict[str, Any] = {
            "format_version": RESULTS_FORMAT_VERSION,
            "tool_version": self.tool_version,
            "task": self.task,
            "seed": self.seed,
            "provider": self.provider,
            "params": self.params,
            "cutoffs": list(self.cutoffs),
            "scenes": [e.to_dict(timing=timing) for e in self.entries],
            "aggregate": self.aggregate,
        }
        if timing:
            out["total_time"] = self.total_time
        return out

    @staticmethod
    def from_dict(data: dict[str, Any], verify: bool = True) -> ResultsFile:
        """Builds a results file from its dictionary form.

        Args:
            data (dict[str, Any]): The parsed file.
            verify (bool): Run ``check_consistency``.

        Raises:
            SceneFormatError: If the version is unsupported, a field is
                missing or the aggregate is inconsistent.

        Returns:
            ResultsFile: The results.
        """
        version = data.get("format_version")
        if version != RESULTS_FORMAT_VERSION:
            raise SceneFormatError(
                f"Unsupported results format version {version!r}."
            )
        try:
            results = ResultsFile(
                task=data["task"],
                entries=tuple(
                    SceneEntry.from_dict(e) for e in data["scenes"]
                ),
                params=data["params"],
                seed=data["seed"],
                provider=data["provider"],
                cutoffs=tuple(data["cutoffs"]),
                tool_version=data["tool_version"],
                aggregate=data["aggregate"],
            )
        except KeyError as e:
            raise SceneFormatError(f"Results file lacks field {e}.") from None
        if verify:
            results.check_consistency()
        return results

    def save(self, path: str | Path, timing: bool = True) -> None:
        write_json(self.to_dict(timing=timing), path)
        logger.info(
            "Wrote results of %d scenes to %s.", len(self.entries), path
        )

    @staticmethod
    def load(path: str | Path, verify: bool = True) -> ResultsFile:
        return ResultsFile.from_dict(read_json(path), verify=verify)


def recall_rows(
    results: ResultsFile, points: int = RECALL_POINTS
) -> list[dict[str, Any]]:
    """Plot data of the recall curves: pooled vanishing point errors up to
    the largest cutoff, or the fraction of scenes with misclassification
    error up to a threshold.

    Args:
        results (ResultsFile): The results.
        points (int): Thresholds per curve.

    Returns:
        list[dict[str, Any]]: Rows with ``curve``, ``threshold``, ``recall``.
    """
    rows: list[dict[str, Any]] = []
    if results.task == TASKS.VP:
        pool = pooled_errors(results.blocks)
        if len(pool):
            thetas, recall = pool.recall_curve(max(results.cutoffs), points)
            rows.extend(
                {"curve": "vp_error_deg", "threshold": t, "recall": r}
                for t, r in zip(thetas.tolist(), recall.tolist())
            )
    me = np.sort([b["me"] for b in results.blocks if "me" in b])
    if me.size:
        thresholds = np.linspace(0.0, 1.0, points)
        recall = np.searchsorted(me, thresholds, side="right") / me.size
        rows.extend(
            {"curve": "me", "threshold": t, "recall": r}
            for t, r in zip(thresholds.tolist(), recall.tolist())
        )
    return rows


def write_recall_csv(
    results: ResultsFile, path: str | Path, points: int = RECALL_POINTS
) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=RECALL_COLUMNS)
        writer.writeheader()
        writer.writerows(recall_rows(results, points))


def build_results(
    task: str,
    names: Sequence[str],
    seeds: Sequence[int],
    results: Sequence[FitResult],
    blocks: Sequence[dict[str, Any]],
    params: dict[str, Any],
    seed: int,
    provider: str,
    cutoffs: Sequence[float] = DEFAULT_AUC_CUTOFFS,
) -> ResultsFile:
    """Zips per-scene outcomes into a results file."""
    entries = tuple(
        SceneEntry(n, int(s), r, b)
        for n, s, r, b in zip(names, seeds, results, blocks)
    )
    return ResultsFile(
        task=task,
        entries=entries,
        params=params,
        seed=seed,
        provider=provider,
        cutoffs=tuple(cutoffs),
    )
