import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from parallel_consensus.constants import TASKS
from parallel_consensus.exceptions import GeometryError
from parallel_consensus.geometry import (
    gt_fmat_from_pose,
    gt_homography_from_plane,
    residual_matrix,
    skew,
)
from parallel_consensus.scene import CameraIntrinsics, ModelInstance, Scene


class TestSkew:
    def test_cross_product(self):
        rng = np.random.default_rng(0)
        t, v = rng.normal(size=(2, 3))
        np.testing.assert_allclose(skew(t) @ v, np.cross(t, v))


class TestGtFmatFromPose:
    def test_pure_translation(self):
        F = gt_fmat_from_pose(np.eye(3), np.eye(3), [1.0, 0.0, 0.0])
        assert F == ModelInstance(
            TASKS.FMAT,
            [[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]],
        )

    def test_epipolar_constraint_with_intrinsics(self):
        rng = np.random.default_rng(1)
        K = CameraIntrinsics.from_focal(900.0, 1024, 768)
        R = Rotation.from_rotvec([0.05, -0.1, 0.02]).as_matrix()
        t = np.array([0.3, 0.05, -0.1])
        X = np.column_stack(
            [rng.uniform(-1, 1, 10), rng.uniform(-1, 1, 10), np.full(10, 5.0)]
        )
        x1 = X @ K.K.T
        x2 = (X @ R.T + t) @ K.K.T
        F = gt_fmat_from_pose(K, R, t).params
        x1 /= x1[:, 2:]
        x2 /= x2[:, 2:]
        np.testing.assert_allclose(
            np.einsum("ij,jk,ik->i", x2, F, x1), 0.0, atol=1e-8
        )

    def test_zero_translation(self):
        with pytest.raises(GeometryError):
            gt_fmat_from_pose(np.eye(3), np.eye(3), [0.0, 0.0, 0.0])

    def test_not_a_rotation(self):
        with pytest.raises(GeometryError):
            gt_fmat_from_pose(np.eye(3), 2.0 * np.eye(3), [1.0, 0.0, 0.0])


class TestGtHomographyFromPlane:
    def test_no_motion(self):
        H = gt_homography_from_plane(
            np.eye(3), np.eye(3), [0.0, 0.0, 0.0], [0.0, 0.0, 1.0], -5.0
        )
        assert H == ModelInstance(TASKS.HOMOGRAPHY, np.eye(3))

    def test_planted_planes(self, homography_scene: Scene):
        res = residual_matrix(homography_scene, homography_scene.gt_models)
        for k in range(homography_scene.num_models):
            assert np.all(res[k, homography_scene.gt_labels == k + 1] < 1e-10)

    @pytest.mark.parametrize(
        "n, d",
        [([0.0, 0.0, 1.0], 0.0), ([0.0, 0.0, 0.0], -5.0)],
        ids=["zero_offset", "zero_normal"],
    )
    def test_invalid_plane(self, n, d):
        with pytest.raises(GeometryError):
            gt_homography_from_plane(np.eye(3), np.eye(3), [1.0, 0, 0], n, d)

    def test_singular(self):
        # The camera centre lies on the plane.
        with pytest.raises(GeometryError):
            gt_homography_from_plane(
                np.eye(3), np.eye(3), [0.0, 0.0, -5.0], [0.0, 0.0, 1.0], -5.0
            )
