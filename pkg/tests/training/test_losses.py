import numpy as np
import pytest

from parallel_consensus.constants import TASKS
from parallel_consensus.exceptions import ConfigurationError, SceneFormatError
from parallel_consensus.pipeline import PipelineParams
from parallel_consensus.scene import ModelInstance, Scene
from parallel_consensus.training import (
    make_task_loss,
    self_supervised_plain_loss,
    self_supervised_weighted_loss,
    task_loss_hungarian,
    task_loss_me,
)

COSTS = np.array([[1.0, 5.0], [4.0, 2.0], [0.5, 0.5]])


def fixed_pairwise(models):
    return COSTS[: len(models)]


def vp_models(count: int) -> list[ModelInstance]:
    directions = [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)]
    return [ModelInstance(TASKS.VP, d) for d in directions[:count]]


class TestHungarianLoss:
    @pytest.mark.parametrize(
        "count, num_gt, expected",
        [
            (3, 2, 3.0),
            (2, 2, 3.0),
            (1, 2, 91.0),
            (0, 2, 180.0),
            (3, 0, 0.0),
        ],
        ids=["extra", "exact", "one_missing", "none", "no_gt"],
    )
    def test_fixed_costs(self, count, num_gt, expected):
        loss = task_loss_hungarian(
            vp_models(count), num_gt, fixed_pairwise, 90.0
        )
        assert loss == pytest.approx(expected)

    def test_only_leading_predictions_count(self):
        # The third prediction is the cheapest but ranks below num_gt.
        loss = task_loss_hungarian(vp_models(3), 1, fixed_pairwise, 90.0)
        assert loss == pytest.approx(1.0)

    def test_vp_ground_truth(self, vp_scene: Scene):
        params = PipelineParams.for_task(TASKS.VP)
        loss_fn = make_task_loss("hungarian", vp_scene, params)
        assert loss_fn(vp_scene.gt_models, vp_scene.gt_labels) == (
            pytest.approx(0.0, abs=1e-4)
        )
        assert loss_fn(vp_scene.gt_models[:1], vp_scene.gt_labels) == (
            pytest.approx(90.0, abs=1e-4)
        )

    def test_homography_ground_truth(self, homography_scene: Scene):
        params = PipelineParams.for_task(TASKS.HOMOGRAPHY)
        loss_fn = make_task_loss("hungarian", homography_scene, params)
        models = homography_scene.gt_models
        assert loss_fn(models, homography_scene.gt_labels) == (
            pytest.approx(0.0, abs=1e-6)
        )
        assert loss_fn(models[::-1], homography_scene.gt_labels) == (
            pytest.approx(0.0, abs=1e-6)
        )
        assert loss_fn((), homography_scene.gt_labels) == 2.0

    def test_needs_ground_truth(self, vp_scene: Scene):
        params = PipelineParams.for_task(TASKS.VP)
        with pytest.raises(SceneFormatError):
            make_task_loss(
                "hungarian",
                vp_scene.replace(gt_models=None, gt_labels=None),
                params,
            )


class TestMisclassificationLoss:
    def test_values(self):
        assert task_loss_me([1, 1, 2, 0], [2, 2, 1, 0]) == 0.0
        assert task_loss_me([1, 1, 1, 0], [1, 1, 2, 0]) == 0.25

    def test_bound(self, vp_scene: Scene):
        params = PipelineParams.for_task(TASKS.VP)
        loss_fn = make_task_loss("me", vp_scene, params)
        assert loss_fn((), vp_scene.gt_labels) == 0.0
        assert loss_fn((), np.zeros(len(vp_scene), dtype=np.int64)) > 0

    def test_needs_labels(self, vp_scene: Scene):
        params = PipelineParams.for_task(TASKS.VP)
        with pytest.raises(SceneFormatError):
            make_task_loss("me", vp_scene.replace(gt_labels=None), params)


class TestSelfSupervisedLosses:
    def test_plain_counts_union(self, vp_scene: Scene):
        models = vp_scene.gt_models
        assert self_supervised_plain_loss(models, vp_scene, 1e-4) == -50.0
        assert self_supervised_plain_loss(models[:1], vp_scene, 1e-4) == (
            -30.0
        )
        assert self_supervised_plain_loss((), vp_scene, 1e-4) == 0.0

    def test_weighted_rewards_more_coverage(self, vp_scene: Scene):
        models = vp_scene.gt_models
        one = self_supervised_weighted_loss(models[:1], vp_scene, 1e-4, 0.5)
        two = self_supervised_weighted_loss(models, vp_scene, 1e-4, 0.5)
        assert two < one < 0
        assert self_supervised_weighted_loss((), vp_scene, 1e-4, 0.5) == 0.0

    def test_weighted_discount(self, vp_scene: Scene):
        model = vp_scene.gt_models[:1]
        low = self_supervised_weighted_loss(model, vp_scene, 1e-4, 0.5, 0.1)
        high = self_supervised_weighted_loss(model, vp_scene, 1e-4, 0.5, 0.9)
        assert high == pytest.approx(9.0 * low)

    @pytest.mark.parametrize("kind", ["self_weighted", "self_plain"])
    def test_bound_losses_ignore_labels(self, vp_scene: Scene, kind):
        params = PipelineParams.for_task(TASKS.VP)
        bare = vp_scene.replace(gt_labels=None, gt_models=None)
        loss_fn = make_task_loss(kind, bare, params)
        assert loss_fn(vp_scene.gt_models, None) < 0


def test_unknown_loss(vp_scene: Scene):
    with pytest.raises(ConfigurationError, match="loss"):
        make_task_loss("l2", vp_scene, PipelineParams.for_task(TASKS.VP))
