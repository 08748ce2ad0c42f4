from typing import Protocol

import numpy as np
import numpy.typing as npt

from parallel_consensus.constants import MINIMAL_SET_SIZES, TASKS
from parallel_consensus.exceptions import GeometryError
from parallel_consensus.geometry.fundamental import (
    fmat_seven_point,
    residual_sampson_sqrt,
)
from parallel_consensus.geometry.homography import (
    homography_four_point_dlt,
    residual_transfer_sqrt,
)
from parallel_consensus.geometry.vanishing import (
    refine_vp_weighted,
    residual_vp,
    vp_from_segments,
)
from parallel_consensus.scene import ModelInstance, Scene

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]


class TaskGeometry(Protocol):
    """Minimal solver and residual function of one task."""

    task: str
    minimal_size: int

    def solve(self, scene: Scene, indices: IntArray) -> list[ModelInstance]:
        ...

    def residuals(self, scene: Scene, model: ModelInstance) -> FloatArray:
        ...

    def identity_model(self) -> ModelInstance:
        ...


class VanishingPointGeometry:
    task = TASKS.VP
    minimal_size = MINIMAL_SET_SIZES[TASKS.VP]

    def solve(self, scene: Scene, indices: IntArray) -> list[ModelInstance]:
        assert scene.segments is not None
        vp = vp_from_segments(scene.segments[indices])
        return [] if vp is None else [vp]

    def residuals(self, scene: Scene, model: ModelInstance) -> FloatArray:
        assert scene.segments is not None
        return residual_vp(scene.segments, model.params)

    def refine(
        self, scene: Scene, model: ModelInstance, weights: FloatArray
    ) -> ModelInstance:
        assert scene.segments is not None
        return refine_vp_weighted(model, scene.segments, weights)

    def identity_model(self) -> ModelInstance:
        raise GeometryError("Vanishing points have no identity model.")


class FundamentalGeometry:
    task = TASKS.FMAT
    minimal_size = MINIMAL_SET_SIZES[TASKS.FMAT]

    def solve(self, scene: Scene, indices: IntArray) -> list[ModelInstance]:
        return fmat_seven_point(scene.observations[indices])

    def residuals(self, scene: Scene, model: ModelInstance) -> FloatArray:
        return residual_sampson_sqrt(scene.observations, model.params)

    def identity_model(self) -> ModelInstance:
        return ModelInstance(TASKS.FMAT, np.eye(3))


class HomographyGeometry:
    task = TASKS.HOMOGRAPHY
    minimal_size = MINIMAL_SET_SIZES[TASKS.HOMOGRAPHY]

    def solve(self, scene: Scene, indices: IntArray) -> list[ModelInstance]:
        H = homography_four_point_dlt(scene.observations[indices])
        return [] if H is None else [H]

    def residuals(self, scene: Scene, model: ModelInstance) -> FloatArray:
        return residual_transfer_sqrt(
            scene.observations, model.params, model.inverse
        )

    def identity_model(self) -> ModelInstance:
        return ModelInstance(TASKS.HOMOGRAPHY, np.eye(3))


_GEOMETRIES: dict[str, TaskGeometry] = {
    TASKS.VP: VanishingPointGeometry(),
    TASKS.FMAT: FundamentalGeometry(),
    TASKS.HOMOGRAPHY: HomographyGeometry(),
}


def get_geometry(task: str) -> TaskGeometry:
    """Looks up the geometry of a task.

    Args:
        task (str): The task name.

    Raises:
        GeometryError: If the task is unknown.

    Returns:
        TaskGeometry: The solver and residual bundle.
    """
    try:
        return _GEOMETRIES[task]
    except KeyError:
        raise GeometryError(f"Unknown task {task!r}.") from None


def residual_matrix(
    scene: Scene, models: list[ModelInstance] | tuple[ModelInstance, ...]
) -> FloatArray:
    """Residuals of every observation to every model, shape ``(M, N)``."""
    geometry = get_geometry(scene.task)
    if not models:
        return np.zeros((0, len(scene)))
    return np.stack([geometry.residuals(scene, m) for m in models])
