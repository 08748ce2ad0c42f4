import numpy as np
import pytest

from parallel_consensus.constants import TASKS
from parallel_consensus.exceptions import SceneFormatError, TaskMismatchError
from parallel_consensus.metrics import (
    CLIP_VALUE,
    min_residual_error,
    sampson_error_metric,
    to_pixels,
    transfer_error_metric,
)
from parallel_consensus.scene import ModelInstance, Scene


class TestMinResidualError:
    def test_planted_models(self, fmat_scene: Scene):
        error = sampson_error_metric(fmat_scene, fmat_scene.gt_models)
        assert error == pytest.approx(0.0, abs=1e-10)

    def test_order_of_models_irrelevant(self, homography_scene: Scene):
        models = homography_scene.gt_models[::-1]
        error = transfer_error_metric(homography_scene, models)
        assert error == pytest.approx(0.0, abs=1e-10)

    def test_identity_fallback(self, homography_scene: Scene):
        identity = ModelInstance(TASKS.HOMOGRAPHY, np.eye(3))
        assert transfer_error_metric(homography_scene, []) == pytest.approx(
            transfer_error_metric(homography_scene, [identity])
        )

    def test_only_top_ranked_models(self, fmat_scene: Scene):
        wrong = ModelInstance(TASKS.FMAT, np.eye(3))
        with_wrong_first = [wrong, wrong, *fmat_scene.gt_models]
        error = sampson_error_metric(fmat_scene, with_wrong_first)
        assert error > 1e-3

    def test_clipped(self, homography_scene: Scene):
        far = ModelInstance(
            TASKS.HOMOGRAPHY,
            np.array([[1.0, 0.0, 50.0], [0.0, 1.0, 50.0], [0.0, 0.0, 1.0]]),
        )
        assert transfer_error_metric(homography_scene, [far]) == CLIP_VALUE

    def test_wrong_task(self, fmat_scene: Scene, homography_scene: Scene):
        with pytest.raises(TaskMismatchError):
            transfer_error_metric(fmat_scene, [])
        with pytest.raises(TaskMismatchError):
            sampson_error_metric(homography_scene, [])

    def test_needs_labels(self, fmat_scene: Scene):
        with pytest.raises(SceneFormatError):
            min_residual_error(fmat_scene.replace(gt_labels=None), [])

    def test_no_inliers(self, fmat_scene: Scene):
        outliers = fmat_scene.subset(np.flatnonzero(fmat_scene.gt_labels == 0))
        assert min_residual_error(outliers, fmat_scene.gt_models) is None

    def test_to_pixels(self, fmat_scene: Scene):
        assert to_pixels(0.5, fmat_scene) == 512.0
        assert to_pixels(None, fmat_scene) is None
