import numpy as np
import pytest

from parallel_consensus.exceptions import ConfigurationError
from parallel_consensus.training import (
    OutcomeEnumerator,
    enumerate_expected_loss,
    enumerated_estimator,
    make_task_loss,
)
from parallel_consensus.training.gradcheck import (
    micro_pipeline_params,
    micro_vp_scene,
)
from parallel_consensus.weights import UniformProvider


@pytest.fixture(scope="module")
def enumerator() -> OutcomeEnumerator:
    scene = micro_vp_scene()
    params = micro_pipeline_params()
    return OutcomeEnumerator(
        scene, params, make_task_loss("hungarian", scene, params)
    )


def skewed_weights(seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    raw_p = rng.normal(size=(4, 1))
    raw_q = rng.normal(size=(4, 2))
    log_p = raw_p - np.log(np.exp(raw_p).sum(axis=0))
    log_q = raw_q - np.log(np.exp(raw_q).sum(axis=1, keepdims=True))
    return log_p, log_q


class TestOutcomeEnumerator:
    def test_tables(self, enumerator: OutcomeEnumerator):
        # Four observations, two hypotheses of two segments each.
        assert enumerator.indices.shape == (256, 2, 2)
        assert enumerator.losses.shape == (256, 2)
        np.testing.assert_array_equal(enumerator.occurrences.sum(axis=1), 4)
        assert np.all(enumerator.losses >= 0)

    def test_probabilities_sum_to_one(self):
        scene = micro_vp_scene()
        params = micro_pipeline_params()
        constant = OutcomeEnumerator(scene, params, lambda models, _: 1.0)
        for seed in range(3):
            log_p, log_q = skewed_weights(seed)
            assert constant.expected_loss(log_p, log_q) == pytest.approx(1.0)

    def test_expected_loss_is_bounded(self, enumerator: OutcomeEnumerator):
        log_p, log_q = UniformProvider(1)(micro_vp_scene())
        value = enumerator.expected_loss(log_p, log_q)
        assert 0.0 <= value <= enumerator.losses.max()

    def test_one_shot_helpers(self, enumerator: OutcomeEnumerator):
        scene = micro_vp_scene()
        params = micro_pipeline_params()
        loss_fn = make_task_loss("hungarian", scene, params)
        log_p, log_q = skewed_weights(4)
        assert enumerate_expected_loss(
            scene, log_p, log_q, params, loss_fn
        ) == pytest.approx(enumerator.expected_loss(log_p, log_q))
        exact = enumerated_estimator(scene, log_p, log_q, params, loss_fn)
        np.testing.assert_allclose(
            exact.grad_log_p, enumerator.gradient(log_p, log_q).grad_log_p
        )

    @pytest.mark.parametrize("which", ["p", "q"])
    def test_gradient_matches_finite_differences(
        self, enumerator: OutcomeEnumerator, which
    ):
        log_p, log_q = skewed_weights(1)
        exact = enumerator.gradient(log_p, log_q)
        assert exact.expected_loss == pytest.approx(
            enumerator.expected_loss(log_p, log_q)
        )
        base = log_p if which == "p" else log_q
        analytic = exact.grad_log_p if which == "p" else exact.grad_log_q
        h = 1e-6
        for idx in np.ndindex(base.shape):
            plus, minus = base.copy(), base.copy()
            plus[idx] += h
            minus[idx] -= h
            if which == "p":
                f_plus = enumerator.expected_loss(plus, log_q)
                f_minus = enumerator.expected_loss(minus, log_q)
            else:
                f_plus = enumerator.expected_loss(log_p, plus)
                f_minus = enumerator.expected_loss(log_p, minus)
            numeric = (f_plus - f_minus) / (2 * h)
            assert analytic[idx] == pytest.approx(numeric, rel=1e-4, abs=1e-6)

    def test_outlier_column_has_no_gradient(
        self, enumerator: OutcomeEnumerator
    ):
        log_p, log_q = skewed_weights(2)
        exact = enumerator.gradient(log_p, log_q)
        np.testing.assert_array_equal(exact.grad_log_q[:, -1], 0.0)

    def test_too_many_outcomes(self):
        scene = micro_vp_scene()
        params = micro_pipeline_params()
        with pytest.raises(ConfigurationError, match="max_outcomes"):
            OutcomeEnumerator(
                scene, params, lambda models, _: 0.0, max_outcomes=100
            )
