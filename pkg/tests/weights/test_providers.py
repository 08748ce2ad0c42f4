import numpy as np
import pytest

from parallel_consensus.constants import ORACLE_EPS, TASKS
from parallel_consensus.exceptions import (
    ConfigurationError,
    SceneFormatError,
    TaskMismatchError,
    WeightsFormatError,
)
from parallel_consensus.pipeline import ParallelConsensus, PipelineParams
from parallel_consensus.scene import Scene
from parallel_consensus.weights import (
    NeuralProvider,
    OracleProvider,
    UniformProvider,
    WeightProvider,
    init_params,
    make_provider,
    save_params,
)


def assert_normalized(log_p, log_q):
    np.testing.assert_allclose(np.exp(log_p).sum(axis=0), 1.0)
    np.testing.assert_allclose(np.exp(log_q).sum(axis=1), 1.0)


class TestUniformProvider:
    def test_weights(self, vp_scene: Scene):
        log_p, log_q = UniformProvider(3)(vp_scene)
        n = len(vp_scene)
        assert log_p.shape == (n, 3)
        assert log_q.shape == (n, 4)
        np.testing.assert_allclose(log_p, -np.log(n))
        np.testing.assert_allclose(log_q, -np.log(4))
        assert_normalized(log_p, log_q)

    def test_invalid(self):
        with pytest.raises(ConfigurationError):
            UniformProvider(0)


class TestOracleProvider:
    def test_weights_follow_labels(self, vp_scene: Scene):
        labels = vp_scene.gt_labels
        log_p, log_q = OracleProvider(2)(vp_scene)
        assert_normalized(log_p, log_q)

        p = np.exp(log_p)
        for j in range(2):
            members = labels == j + 1
            assert p[members, j].min() > p[~members, j].max()
            np.testing.assert_allclose(
                p[members, j].sum(), 1.0, atol=len(labels) * ORACLE_EPS
            )
        own = np.where(labels > 0, labels - 1, 2)
        np.testing.assert_array_equal(np.argmax(log_q, axis=1), own)
        np.testing.assert_allclose(
            np.exp(log_q[np.arange(len(labels)), own]), 1.0 - ORACLE_EPS
        )

    def test_unused_column_draws_one_observation(self, vp_scene: Scene):
        log_p, log_q = OracleProvider(3)(vp_scene)
        assert_normalized(log_p, log_q)
        assert log_p[0, 2] == 0.0
        assert np.all(np.isneginf(log_p[1:, 2]))
        assert np.all(np.isfinite(log_p[:, :2]))

    def test_unused_columns_stay_empty(self, vp_scene: Scene):
        params = PipelineParams.for_task(
            TASKS.VP, max_instances=4, hypotheses=8
        )
        pipeline = ParallelConsensus(params, OracleProvider(4))
        log_p, log_q = pipeline.provider(vp_scene)
        putative = pipeline.putative_models(vp_scene, log_p, log_q, seed=0)
        assert [pm.model is None for pm in putative] == [
            False,
            False,
            True,
            True,
        ]

    def test_needs_labels(self, vp_scene: Scene):
        with pytest.raises(SceneFormatError):
            OracleProvider(2)(vp_scene.replace(gt_labels=None))

    def test_too_many_models(self, vp_scene: Scene):
        with pytest.raises(ConfigurationError, match="m_star"):
            OracleProvider(1)(vp_scene)

    @pytest.mark.parametrize(
        "kwargs",
        [{"m_star": 0}, {"m_star": 2, "eps": 0.0}, {"m_star": 2, "eps": 1.0}],
        ids=["m_star", "eps_zero", "eps_one"],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigurationError):
            OracleProvider(**kwargs)


class TestNeuralProvider:
    def test_weights(self, vp_scene: Scene):
        params = init_params(2, seed=0, channels=8, blocks=1, task=TASKS.VP)
        provider = NeuralProvider(params)
        assert provider.m_star == 2
        log_p, log_q = provider(vp_scene)
        assert log_p.shape == (len(vp_scene), 2)
        assert_normalized(log_p, log_q)

    def test_task_mismatch(self, homography_scene: Scene):
        params = init_params(2, seed=0, channels=8, blocks=1, task=TASKS.VP)
        with pytest.raises(TaskMismatchError):
            NeuralProvider(params)(homography_scene)

    def test_untagged_weights_fit_any_task(self, homography_scene: Scene):
        params = init_params(2, seed=0, channels=8, blocks=1)
        log_p, _ = NeuralProvider(params)(homography_scene)
        assert log_p.shape == (len(homography_scene), 2)


class TestMakeProvider:
    @pytest.mark.parametrize(
        "name, expected",
        [("uniform", UniformProvider), ("oracle", OracleProvider)],
        ids=["uniform", "oracle"],
    )
    def test_by_name(self, name, expected):
        provider = make_provider(name, 4)
        assert isinstance(provider, expected)
        assert isinstance(provider, WeightProvider)
        assert provider.m_star == 4

    def test_neural(self, tmp_path):
        path = tmp_path / "weights.bin"
        save_params(init_params(3, seed=0, channels=8, blocks=1), path)
        provider = make_provider("neural", 3, path)
        assert isinstance(provider, NeuralProvider)
        assert provider.params.channels == 8

    def test_neural_needs_weights(self):
        with pytest.raises(ConfigurationError, match="weights"):
            make_provider("neural", 3)

    def test_neural_missing_file(self, tmp_path):
        with pytest.raises(WeightsFormatError):
            make_provider("neural", 3, tmp_path / "missing.bin")

    def test_unknown(self):
        with pytest.raises(ConfigurationError, match="provider"):
            make_provider("learned", 3)
