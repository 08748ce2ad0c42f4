import numpy as np
import pytest

from parallel_consensus.constants import TASKS
from parallel_consensus.exceptions import TaskMismatchError
from parallel_consensus.metrics import aggregate, check_metrics, evaluate_scene
from parallel_consensus.pipeline import FitResult
from parallel_consensus.scene import Scene


def perfect_result(scene: Scene) -> FitResult:
    return FitResult(
        scene.task,
        scene.gt_models,
        scene.gt_labels,
        [
            int(np.sum(scene.gt_labels == k + 1))
            for k in range(scene.num_models)
        ],
    )


class TestCheckMetrics:
    @pytest.mark.parametrize(
        "task, metrics",
        [
            (TASKS.VP, ["me", "auc"]),
            (TASKS.FMAT, ["me", "se"]),
            (TASKS.HOMOGRAPHY, ["te"]),
            (TASKS.FMAT, []),
        ],
        ids=["vp", "fmat", "homography", "none"],
    )
    def test_allowed(self, task, metrics):
        check_metrics(task, metrics)

    @pytest.mark.parametrize(
        "task, metrics",
        [
            (TASKS.FMAT, ["auc"]),
            (TASKS.VP, ["se"]),
            (TASKS.HOMOGRAPHY, ["se"]),
            (TASKS.FMAT, ["te"]),
            (TASKS.VP, ["accuracy"]),
        ],
        ids=["auc_fmat", "se_vp", "se_homography", "te_fmat", "unknown"],
    )
    def test_rejected(self, task, metrics):
        with pytest.raises(TaskMismatchError):
            check_metrics(task, metrics)


class TestEvaluateScene:
    def test_vp(self, vp_scene: Scene):
        block = evaluate_scene(vp_scene, perfect_result(vp_scene))
        assert block["me"] == 0.0
        np.testing.assert_allclose(block["vp_errors"], [0.0, 0.0], atol=1e-5)
        assert "se" not in block

    @pytest.mark.parametrize(
        "fixture, key",
        [("fmat_scene", "se"), ("homography_scene", "te")],
        ids=["fmat", "homography"],
    )
    def test_residual_metric(self, fixture, key, request):
        scene = request.getfixturevalue(fixture)
        block = evaluate_scene(scene, perfect_result(scene))
        assert block["me"] == 0.0
        assert block[key] == pytest.approx(0.0, abs=1e-10)
        assert block[f"{key}_px"] == pytest.approx(block[key] * 1024)
        assert "vp_errors" not in block

    def test_empty_prediction(self, vp_scene: Scene):
        result = FitResult(TASKS.VP, (), np.zeros(len(vp_scene)), ())
        block = evaluate_scene(vp_scene, result)
        assert block["me"] == pytest.approx(50 / 56)
        assert block["vp_errors"] == [90.0, 90.0]

    def test_task_mismatch(self, vp_scene: Scene, fmat_scene: Scene):
        with pytest.raises(TaskMismatchError):
            evaluate_scene(vp_scene, perfect_result(fmat_scene))


class TestAggregate:
    def test_means_and_auc(self):
        blocks = [
            {"me": 0.0, "vp_errors": [0.0, 2.0]},
            {"me": 0.5, "vp_errors": [90.0]},
        ]
        out = aggregate(blocks, cutoffs=(5.0,))
        assert out["scenes"] == 2
        assert out["me"] == 0.25
        assert out["auc"] == {"5": pytest.approx((5.0 + 3.0) / 15.0)}

    def test_missing_values_skipped(self):
        out = aggregate([{"me": 0.2, "se": None}, {"me": 0.4, "se": 0.1}])
        assert out["se"] == 0.1
        assert out["me"] == pytest.approx(0.3)
        assert "auc" not in out
        assert "te" not in out

    def test_empty(self):
        assert aggregate([]) == {"scenes": 0}
