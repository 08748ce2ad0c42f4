import numpy as np
import pytest

from parallel_consensus.constants import TASKS
from parallel_consensus.geometry import (
    lines_from_segments,
    observations_from_segments,
    refine_vp_weighted,
    residual_vp,
    vp_from_lines,
    vp_from_segments,
)
from parallel_consensus.scene import ModelInstance, Scene


class TestLines:
    def test_normal_form(self):
        lines = lines_from_segments(
            [[0.0, 0.0, 3.0, 4.0], [1.0, 1.0, 1.0, 5.0]]
        )
        np.testing.assert_allclose(np.linalg.norm(lines[:, :2], axis=1), 1.0)
        # Both endpoints lie on their line.
        np.testing.assert_allclose(lines[0] @ [3.0, 4.0, 1.0], 0.0, atol=1e-12)
        np.testing.assert_allclose(lines[1] @ [1.0, 5.0, 1.0], 0.0, atol=1e-12)

    def test_zero_length(self):
        lines = lines_from_segments([[0.2, 0.2, 0.2, 0.2]])
        np.testing.assert_array_equal(lines, np.zeros((1, 3)))

    def test_observations(self):
        obs = observations_from_segments([[0.0, 0.0, 2.0, 0.0]])
        np.testing.assert_allclose(obs, [[1.0, 0.0, 2.0, 0.0]])
        obs = observations_from_segments([[0.0, 0.0, 0.0, 1.0]])
        np.testing.assert_allclose(obs[0, 3], np.pi / 2)


class TestVpFromSegments:
    @pytest.mark.parametrize(
        "segments, expected",
        [
            (
                [[0.0, -1.0, 0.0, 1.0], [-1.0, 0.0, 1.0, 0.0]],
                [0.0, 0.0, 1.0],
            ),
            ([[1.0, 0.0, 1.0, 1.0], [2.0, 0.0, 2.0, 1.0]], [0.0, 1.0, 0.0]),
        ],
        ids=["crossing_at_origin", "parallel_vertical"],
    )
    def test_intersection(self, segments, expected):
        vp = vp_from_segments(segments)
        assert vp == ModelInstance(TASKS.VP, expected)

    @pytest.mark.parametrize(
        "segments",
        [
            [[0.0, 0.0, 1.0, 1.0], [0.0, 0.0, 1.0, 1.0]],
            [[0.0, 0.0, 1.0, 1.0], [2.0, 2.0, 3.0, 3.0]],
            [[0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]],
        ],
        ids=["identical", "collinear", "zero_length"],
    )
    def test_degenerate(self, segments):
        assert vp_from_segments(segments) is None

    def test_vp_from_lines_coincident(self):
        line = np.array([1.0, 0.0, -1.0])
        assert vp_from_lines(np.stack([line, 2.0 * line])) is None


class TestResidualVp:
    @pytest.mark.parametrize(
        "segment, expected",
        [
            ([1.0, 0.0, 2.0, 0.0], 0.0),
            ([1.5, -0.5, 1.5, 0.5], 1.0),
            ([0.5, -0.5, 1.5, 0.5], 1.0 - np.cos(np.pi / 4)),
            ([-0.5, 0.0, 0.5, 0.0], 0.0),
            ([0.3, 0.3, 0.3, 0.3], 1.0),
        ],
        ids=["aligned", "perpendicular", "45_degrees", "through_vp", "point"],
    )
    def test_values(self, segment, expected):
        out = residual_vp([segment], np.array([0.0, 0.0, 1.0]))
        assert out[0] == pytest.approx(expected, abs=1e-12)

    def test_point_at_infinity(self):
        segments = [[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]
        out = residual_vp(segments, np.array([1.0, 0.0, 0.0]))
        np.testing.assert_allclose(out, [0.0, 1.0], atol=1e-12)

    def test_scale_invariant(self, vp_scene: Scene):
        vp = vp_scene.gt_models[0].params
        np.testing.assert_allclose(
            residual_vp(vp_scene.segments, vp),
            residual_vp(vp_scene.segments, -3.0 * vp),
            atol=1e-12,
        )

    def test_planted_inliers(self, vp_scene: Scene):
        for k, model in enumerate(vp_scene.gt_models, start=1):
            res = residual_vp(vp_scene.segments, model.params)
            assert np.all(res[vp_scene.gt_labels == k] < 1e-12)
            assert np.all(res[vp_scene.gt_labels == 0] > 0.05)


class TestRefineVpWeighted:
    def test_recovers_planted_point(self, vp_scene: Scene):
        weights = (vp_scene.gt_labels == 1).astype(float)
        start = ModelInstance(TASKS.VP, [1.0, 1.0, 1.0])
        refined = refine_vp_weighted(start, vp_scene.segments, weights)
        np.testing.assert_allclose(
            refined.params, vp_scene.gt_models[0].params, atol=1e-8
        )

    def test_needs_two_weighted_lines(self, vp_scene: Scene):
        weights = np.zeros(len(vp_scene))
        weights[0] = 1.0
        start = ModelInstance(TASKS.VP, [1.0, 1.0, 1.0])
        assert refine_vp_weighted(start, vp_scene.segments, weights) is start
