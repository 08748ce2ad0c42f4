import numpy as np
import pytest

from parallel_consensus.constants import RESIDUAL_SENTINEL, TASKS
from parallel_consensus.geometry import fmat_seven_point, residual_sampson_sqrt
from parallel_consensus.geometry.fundamental import enforce_rank_two
from parallel_consensus.scene import Scene

TRANSLATE_X = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])


class TestSevenPoint:
    def test_recovers_planted_matrix(self, fmat_scene: Scene):
        gt = fmat_scene.gt_models[0]
        inliers = fmat_scene.observations[fmat_scene.gt_labels == 1]
        models = fmat_seven_point(inliers[:7])
        assert 1 <= len(models) <= 3
        assert all(m.kind == TASKS.FMAT for m in models)
        errors = [np.abs(m.params - gt.params).max() for m in models]
        assert min(errors) < 1e-6

    def test_solutions_have_rank_two(self, fmat_scene: Scene):
        inliers = fmat_scene.observations[fmat_scene.gt_labels == 2]
        for model in fmat_seven_point(inliers[:7]):
            sv = np.linalg.svd(model.params, compute_uv=False)
            assert sv[2] < 1e-9 * sv[0]

    def test_solutions_satisfy_sample(self):
        rng = np.random.default_rng(5)
        corr = rng.uniform(-0.5, 0.5, size=(7, 4))
        for model in fmat_seven_point(corr):
            res = residual_sampson_sqrt(corr, model.params)
            np.testing.assert_allclose(res, 0.0, atol=1e-6)

    def test_coincident_points(self):
        corr = np.tile([0.1, 0.2, 0.3, 0.4], (7, 1))
        assert fmat_seven_point(corr) == []


class TestResidualSampsonSqrt:
    def test_known_value(self):
        out = residual_sampson_sqrt([[0.0, 0.0, 0.0, 1.0]], TRANSLATE_X)
        assert out[0] == pytest.approx(1.0 / np.sqrt(2.0))

    def test_on_epipolar_line(self):
        # Pure x translation keeps the y coordinate.
        out = residual_sampson_sqrt(
            [[0.1, 0.3, 0.7, 0.3], [-0.2, -0.1, 0.4, -0.1]], TRANSLATE_X
        )
        np.testing.assert_allclose(out, 0.0, atol=1e-15)

    @pytest.mark.parametrize(
        "factor", [2.0, -1.0, 1e-3], ids=["double", "negated", "tiny"]
    )
    def test_scale_invariant(self, factor):
        rng = np.random.default_rng(0)
        corr = rng.uniform(-0.5, 0.5, size=(10, 4))
        F = enforce_rank_two(rng.normal(size=(3, 3)))
        np.testing.assert_allclose(
            residual_sampson_sqrt(corr, factor * F),
            residual_sampson_sqrt(corr, F),
        )

    def test_zero_denominator(self):
        F = np.zeros((3, 3))
        F[2, 2] = 1.0
        out = residual_sampson_sqrt([[0.0, 0.0, 0.0, 0.0]], F)
        assert out[0] == RESIDUAL_SENTINEL
        assert np.isfinite(out).all()


class TestEnforceRankTwo:
    def test_rank(self):
        rng = np.random.default_rng(3)
        F = enforce_rank_two(rng.normal(size=(3, 3)))
        assert np.linalg.matrix_rank(F) == 2
