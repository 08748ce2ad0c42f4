import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from parallel_consensus.geometry import (
    fmat_seven_point,
    homography_four_point_dlt,
    residual_sampson_sqrt,
    residual_transfer_sqrt,
)
from parallel_consensus.geometry.vanishing import (
    residual_vp,
    vp_from_segments,
)

TRIALS = 1000
EXACT = 1e-9


def project(points: np.ndarray) -> np.ndarray:
    return points[:, :2] / points[:, 2:]


def random_motion(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    R = Rotation.from_rotvec(rng.normal(scale=0.1, size=3)).as_matrix()
    t = rng.normal(size=3)
    return R, t / np.linalg.norm(t) * rng.uniform(0.5, 1.0)


def scene_points(count: int, rng: np.random.Generator) -> np.ndarray:
    return np.column_stack(
        [
            rng.uniform(-1.0, 1.0, count),
            rng.uniform(-1.0, 1.0, count),
            rng.uniform(3.0, 6.0, count),
        ]
    )


@pytest.mark.slow
class TestNoiseFreeMinimalSets:
    def test_vanishing_points(self):
        rng = np.random.default_rng(0)
        for trial in range(TRIALS):
            vp = rng.normal(size=3)
            mids = rng.uniform(-0.4, 0.4, size=(2, 2))
            direction = vp[None, :2] - vp[2] * mids
            direction /= np.linalg.norm(direction, axis=1, keepdims=True)
            half = rng.uniform(0.02, 0.1, size=(2, 1))
            segments = np.hstack(
                [mids - half * direction, mids + half * direction]
            )
            model = vp_from_segments(segments)
            assert model is not None, f"trial {trial}"
            assert residual_vp(segments, model.params).max() < EXACT

    def test_fundamental_matrices(self):
        rng = np.random.default_rng(1)
        for trial in range(TRIALS):
            R, t = random_motion(rng)
            X = scene_points(7, rng)
            corr = np.hstack([project(X), project(X @ R.T + t)])
            models = fmat_seven_point(corr)
            assert models, f"trial {trial}"
            best = min(
                residual_sampson_sqrt(corr, m.params).max() for m in models
            )
            assert best < EXACT, f"trial {trial}"

    def test_homographies(self):
        rng = np.random.default_rng(2)
        for trial in range(TRIALS):
            R, t = random_motion(rng)
            normal = np.array([*rng.normal(scale=0.3, size=2), 1.0])
            normal /= np.linalg.norm(normal)
            depth = rng.uniform(3.0, 6.0)
            rays = np.column_stack(
                [rng.uniform(-0.4, 0.4, size=(4, 2)), np.ones(4)]
            )
            X = rays * (depth / (rays @ normal))[:, None]
            corr = np.hstack([project(X), project(X @ R.T + t)])
            model = homography_four_point_dlt(corr)
            assert model is not None, f"trial {trial}"
            residuals = residual_transfer_sqrt(corr, model.params)
            assert residuals.max() < EXACT, f"trial {trial}"
