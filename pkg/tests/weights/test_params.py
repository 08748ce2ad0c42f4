import numpy as np
import pytest

from parallel_consensus.constants import TASKS
from parallel_consensus.exceptions import (
    ConfigurationError,
    ShapeMismatchError,
    WeightsFormatError,
)
from parallel_consensus.io import write_tensors
from parallel_consensus.weights import (
    GradientBundle,
    NetworkParams,
    init_params,
    load_params,
    save_params,
)
from parallel_consensus.weights.params import build_manifest, is_running_stat


class TestInitParams:
    def test_manifest(self):
        params = init_params(3, seed=0, channels=8, blocks=2)
        manifest = params.manifest()
        assert manifest == build_manifest(3, 4, 8, 2)
        assert list(params) == [name for name, _ in manifest]
        assert params["stem.weight"].shape == (8, 4)
        assert params["head_p.weight"].shape == (3, 8)
        assert params["head_q.weight"].shape == (4, 8)
        # stem, 2 blocks x 2 sublayers x 8 tensors, two heads
        assert len(manifest) == 2 + 2 * 2 * 8 + 4

    def test_default_shape(self):
        params = init_params(4, seed=0)
        assert params.channels == 128
        assert params.blocks == 6

    def test_initial_values(self):
        params = init_params(2, seed=0, channels=8, blocks=1)
        np.testing.assert_array_equal(params["block0.0.bnorm.scale"], 1.0)
        np.testing.assert_array_equal(params["block0.1.inorm.shift"], 0.0)
        np.testing.assert_array_equal(
            params["block0.0.bnorm.running_var"], 1.0
        )
        np.testing.assert_array_equal(params["head_q.bias"], 0.0)
        assert np.std(params["block0.0.conv.weight"]) > 0

    def test_seeded(self):
        a = init_params(2, seed=1, channels=8, blocks=1)
        b = init_params(2, seed=1, channels=8, blocks=1)
        c = init_params(2, seed=2, channels=8, blocks=1)
        assert a.digest() == b.digest()
        assert a.digest() != c.digest()

    def test_trainable_names(self):
        params = init_params(2, seed=0, channels=8, blocks=1)
        names = params.trainable_names()
        assert not any(is_running_stat(n) for n in names)
        assert len(names) == len(params.manifest()) - 4

    @pytest.mark.parametrize(
        "kwargs",
        [{"m_star": 0}, {"channels": 0}, {"blocks": -1}, {"in_dim": 0}],
        ids=["m_star", "channels", "blocks", "in_dim"],
    )
    def test_invalid(self, kwargs):
        values = {"m_star": 2, "seed": 0, **kwargs}
        with pytest.raises(ConfigurationError):
            init_params(**values)


class TestNetworkParams:
    def test_missing_tensor(self):
        params = init_params(2, seed=0, channels=8, blocks=1)
        tensors = dict(params.tensors)
        del tensors["stem.bias"]
        with pytest.raises(ShapeMismatchError, match="stem.bias"):
            NetworkParams(2, channels=8, blocks=1, tensors=tensors)

    def test_wrong_shape(self):
        params = init_params(2, seed=0, channels=8, blocks=1)
        with pytest.raises(ShapeMismatchError):
            params.with_tensors({"stem.bias": np.zeros(7)})

    def test_unknown_tensor(self):
        params = init_params(2, seed=0, channels=8, blocks=1)
        with pytest.raises(ShapeMismatchError):
            params.with_tensors({"extra": np.zeros(1)})
        tensors = {**params.tensors, "extra": np.zeros(1)}
        with pytest.raises(ShapeMismatchError):
            NetworkParams(2, channels=8, blocks=1, tensors=tensors)

    def test_copy_is_independent(self):
        params = init_params(2, seed=0, channels=8, blocks=1)
        copy = params.copy()
        copy.tensors["stem.bias"][0] = 5.0
        assert params["stem.bias"][0] == 0.0
        assert copy.digest() != params.digest()

    def test_with_tensors(self):
        params = init_params(2, seed=0, channels=8, blocks=1)
        updated = params.with_tensors({"head_p.bias": np.ones(2)})
        np.testing.assert_array_equal(updated["head_p.bias"], 1.0)
        np.testing.assert_array_equal(params["head_p.bias"], 0.0)


class TestSaveLoad:
    def test_round_trip(self, tmp_path):
        params = init_params(3, seed=4, channels=8, blocks=2, task=TASKS.FMAT)
        path = tmp_path / "weights.bin"
        save_params(params, path)
        loaded = load_params(path, m_star=3)
        assert loaded.digest() == params.digest()
        assert loaded.task == TASKS.FMAT
        assert (loaded.channels, loaded.blocks) == (8, 2)

    def test_saved_bytes_are_stable(self, tmp_path):
        params = init_params(2, seed=4, channels=8, blocks=1)
        save_params(params, tmp_path / "a.bin")
        save_params(load_params(tmp_path / "a.bin"), tmp_path / "b.bin")
        assert (tmp_path / "a.bin").read_bytes() == (
            tmp_path / "b.bin"
        ).read_bytes()

    def test_m_star_mismatch(self, tmp_path):
        path = tmp_path / "weights.bin"
        save_params(init_params(3, seed=0, channels=8, blocks=1), path)
        with pytest.raises(ShapeMismatchError, match="head_p.weight"):
            load_params(path, m_star=4)

    def test_not_weights(self, tmp_path):
        path = tmp_path / "other.bin"
        write_tensors(path, {"kind": "adam"}, {"step": np.zeros(1)})
        with pytest.raises(WeightsFormatError):
            load_params(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(WeightsFormatError):
            load_params(tmp_path / "nope.bin")


class TestGradientBundle:
    def test_zeros_like(self):
        params = init_params(2, seed=0, channels=8, blocks=1)
        bundle = GradientBundle.zeros_like(params)
        assert list(bundle) == params.trainable_names()
        assert bundle.is_zero()
        assert bundle.global_norm() == 0.0

    def test_arithmetic(self):
        a = GradientBundle({"w": np.array([3.0, 0.0]), "b": np.array([4.0])})
        b = GradientBundle({"w": np.array([1.0, 1.0]), "b": np.array([0.0])})
        assert a.global_norm() == pytest.approx(5.0)
        a.accumulate(b, scale=2.0)
        np.testing.assert_array_equal(a["w"], [5.0, 2.0])
        a.scale(0.5)
        np.testing.assert_array_equal(a["w"], [2.5, 1.0])
        np.testing.assert_array_equal(a["b"], [2.0])
        assert not a.is_zero()

    def test_is_finite(self):
        bundle = GradientBundle({"w": np.array([1.0, np.nan])})
        assert not bundle.is_finite()
        assert GradientBundle({"w": np.ones(2)}).is_finite()

    @pytest.mark.parametrize(
        "other",
        [{"v": np.zeros(2)}, {"w": np.zeros(3)}],
        ids=["names", "shape"],
    )
    def test_accumulate_mismatch(self, other):
        bundle = GradientBundle({"w": np.zeros(2)})
        with pytest.raises(ShapeMismatchError):
            bundle.accumulate(GradientBundle(other))
