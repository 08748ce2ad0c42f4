from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Sequence

import numpy as np
import numpy.typing as npt

from parallel_consensus.constants import ALL_TASKS, OBSERVATION_DIM, TASKS
from parallel_consensus.exceptions import GeometryError, ShapeMismatchError

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]


def canonicalize(params: npt.ArrayLike) -> FloatArray:
    """Scales a homogeneous vector or matrix to unit (Frobenius) norm and flips
    its sign so that the entry of largest magnitude is positive.

    Ties in magnitude resolve to the first entry in row-major order, so the
    result is a deterministic function of the input direction.

    Args:
        params (npt.ArrayLike): The homogeneous parameters.

    Raises:
        GeometryError: If the parameters are zero or not finite.

    Returns:
        FloatArray: The canonical parameters, same shape as the input.
    """
    array = np.array(params, dtype=np.float64)
    if not np.all(np.isfinite(array)):
        raise GeometryError("Model parameters must be finite.")
    norm = np.linalg.norm(array)
    if norm == 0.0:
        raise GeometryError("Model parameters must be nonzero.")
    # Already unit norm up to rounding: leave untouched so the function is
    # idempotent and serialized models read back bit for bit.
    if abs(norm - 1.0) > 8 * np.finfo(np.float64).eps:
        array = array / norm
    flat = array.ravel()
    if flat[np.argmax(np.abs(flat))] < 0:
        array = -array
    return array


@dataclass(frozen=True, eq=False)
class ModelInstance:
    """A single geometric model: a vanishing point (homogeneous 3-vector), a
    fundamental matrix or a homography (3x3). Parameters are stored in
    canonical form, see ``canonicalize``.
    """

    kind: str
    params: FloatArray

    def __post_init__(self) -> None:
        if self.kind not in ALL_TASKS:
            raise GeometryError(f"Unknown model kind {self.kind!r}.")
        expected = (3,) if self.kind == TASKS.VP else (3, 3)
        array = np.asarray(self.params, dtype=np.float64)
        if array.shape != expected:
            raise ShapeMismatchError(
                f"A {self.kind} model needs parameters of shape {expected}, "
                f"got {array.shape}."
            )
        array = canonicalize(array)
        array.setflags(write=False)
        object.__setattr__(self, "params", array)

    @cached_property
    def inverse(self) -> FloatArray:
        """The inverse matrix of a homography.

        Raises:
            GeometryError: If the model is a vanishing point or is singular.

        Returns:
            FloatArray: The 3x3 inverse.
        """
        if self.kind == TASKS.VP:
            raise GeometryError("Vanishing points have no inverse.")
        try:
            return np.linalg.inv(self.params)
        except np.linalg.LinAlgError:
            raise GeometryError("Model matrix is singular.") from None

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "params": self.params.ravel().tolist()}

    @staticmethod
    def from_dict(data: dict[str, Any]) -> ModelInstance:
        kind = data["kind"]
        params = np.asarray(data["params"], dtype=np.float64)
        if kind != TASKS.VP:
            params = params.reshape(3, 3)
        return ModelInstance(kind, params)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ModelInstance):
            return False
        return self.kind == other.kind and np.array_equal(
            self.params, other.params
        )

    def __hash__(self) -> int:
        return hash((self.kind, self.params.tobytes()))

    def __repr__(self) -> str:
        values = np.array2string(self.params.ravel(), precision=4)
        return f"ModelInstance(kind={self.kind}, params={values})"


@dataclass(frozen=True, eq=False)
class CameraIntrinsics:
    """Pinhole intrinsics in pixel units."""

    K: FloatArray

    def __post_init__(self) -> None:
        K = np.array(self.K, dtype=np.float64)
        if K.shape != (3, 3):
            raise ShapeMismatchError(f"K must be 3x3, got {K.shape}.")
        if not np.all(np.isfinite(K)):
            raise GeometryError("K must be finite.")
        if not np.isclose(K[2, 2], 1.0, rtol=0.0, atol=1e-12):
            raise GeometryError("K[2][2] must be 1.")
        if abs(np.linalg.det(K)) < 1e-12:
            raise GeometryError("K must be invertible.")
        K.setflags(write=False)
        object.__setattr__(self, "K", K)

    @cached_property
    def inverse(self) -> FloatArray:
        return np.linalg.inv(self.K)

    @staticmethod
    def from_focal(
        focal_px: float, width: float, height: float
    ) -> CameraIntrinsics:
        """Builds intrinsics with square pixels and a centered principal
        point.

        Args:
            focal_px (float): Focal length in pixels.
            width (float): Image width in pixels.
            height (float): Image height in pixels.

        Returns:
            CameraIntrinsics: The intrinsics.
        """
        return CameraIntrinsics(
            np.array(
                [
                    [focal_px, 0.0, width / 2.0],
                    [0.0, focal_px, height / 2.0],
                    [0.0, 0.0, 1.0],
                ]
            )
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CameraIntrinsics):
            return False
        return np.array_equal(self.K, other.K)


@dataclass(frozen=True, eq=False)
class Scene:
    """A set of observations to be explained by model instances.

    Observations are 4-vectors in the normalized image frame. For the
    vanishing point task they are ``(mid_x, mid_y, length, angle)`` and the
    segment endpoints ``(x1, y1, x2, y2)`` are stored alongside in
    ``segments``; for fundamental matrices and homographies they are point
    correspondences ``(x1, y1, x2, y2)``. Ground-truth labels use ``0`` for
    outliers and ``k`` for the k-th ground-truth model.
    """

    task: str
    observations: FloatArray
    width: int
    height: int
    segments: FloatArray | None = None
    gt_labels: IntArray | None = None
    gt_models: tuple[ModelInstance, ...] | None = None
    intrinsics: CameraIntrinsics | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.task not in ALL_TASKS:
            raise GeometryError(f"Unknown task {self.task!r}.")
        if self.width <= 0 or self.height <= 0:
            raise GeometryError("Image size must be positive.")
        observations = self._frozen(self.observations, "observations")
        object.__setattr__(self, "observations", observations)
        n = observations.shape[0]

        if self.segments is not None:
            segments = self._frozen(self.segments, "segments")
            if segments.shape[0] != n:
                raise ShapeMismatchError(
                    "segments must have one row per observation."
                )
            object.__setattr__(self, "segments", segments)
        elif self.task == TASKS.VP:
            raise ShapeMismatchError("Vanishing point scenes need segments.")

        if self.gt_models is not None:
            object.__setattr__(self, "gt_models", tuple(self.gt_models))
        if self.gt_labels is not None:
            labels = np.array(self.gt_labels, dtype=np.int64)
            if labels.shape != (n,):
                raise ShapeMismatchError(
                    f"gt_labels must have shape ({n},), got {labels.shape}."
                )
            upper = len(self.gt_models) if self.gt_models is not None else None
            if labels.size and (
                labels.min() < 0 or (upper is not None and labels.max() > upper)
            ):
                raise ShapeMismatchError("gt_labels out of range.")
            labels.setflags(write=False)
            object.__setattr__(self, "gt_labels", labels)

    @staticmethod
    def _frozen(array: npt.ArrayLike, name: str) -> FloatArray:
        out = np.array(array, dtype=np.float64).reshape(-1, OBSERVATION_DIM)
        if not np.all(np.isfinite(out)):
            raise GeometryError(f"{name} must be finite.")
        out.setflags(write=False)
        return out

    def __len__(self) -> int:
        return int(self.observations.shape[0])

    @property
    def scale(self) -> float:
        """The normalization scale ``max(width, height)`` in pixels.

        Returns:
            float: The scale.
        """
        return float(max(self.width, self.height))

    @property
    def has_labels(self) -> bool:
        return self.gt_labels is not None

    @property
    def num_models(self) -> int:
        return 0 if self.gt_models is None else len(self.gt_models)

    @property
    def normalized_intrinsics(self) -> FloatArray | None:
        """Intrinsics mapping camera rays into the normalized image frame.

        Returns:
            FloatArray | None: ``T @ K`` or None if no intrinsics are known.
        """
        if self.intrinsics is None:
            return None
        from parallel_consensus.geometry.normalization import (
            normalization_matrix,
        )

        return normalization_matrix(self.width, self.height) @ self.intrinsics.K

    def subset(self, indices: Sequence[int] | IntArray) -> Scene:
        """Returns a scene holding the given observations (with repeats
        allowed), carrying the ground-truth labels along.

        Args:
            indices (Sequence[int] | IntArray): Observation indices.

        Returns:
            Scene: The new scene.
        """
        idx = np.asarray(indices, dtype=np.int64)
        return dataclasses.replace(
            self,
            observations=self.observations[idx],
            segments=None if self.segments is None else self.segments[idx],
            gt_labels=None if self.gt_labels is None else self.gt_labels[idx],
        )

    def replace(self, **changes: Any) -> Scene:
        return dataclasses.replace(self, **changes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Scene):
            return False

        def same(a: Any, b: Any) -> bool:
            if a is None or b is None:
                return a is None and b is None
            return bool(np.array_equal(a, b))

        return (
            self.task == other.task
            and self.width == other.width
            and self.height == other.height
            and self.seed == other.seed
            and same(self.observations, other.observations)
            and same(self.segments, other.segments)
            and same(self.gt_labels, other.gt_labels)
            and self.gt_models == other.gt_models
            and self.intrinsics == other.intrinsics
        )

    def __repr__(self) -> str:
        out = "Scene("
        spaces = " " * len(out)
        out += (
            f"task={self.task},\n"
            + spaces
            + f"observations={len(self)},\n"
            + spaces
            + f"size={self.width}x{self.height},\n"
            + spaces
            + f"gt_models={self.num_models}\n)"
        )
        return out
