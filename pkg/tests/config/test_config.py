import pytest
from pytest_mock import MockerFixture

from parallel_consensus.config.config import Config
from parallel_consensus.config.config_option_handler import (
    ConfigOptionHandler,
)
from parallel_consensus.exceptions import ConfigurationError
from parallel_consensus.weights.providers import (
    OracleProvider,
    UniformProvider,
)

base_config_path = "parallel_consensus.config.config"


class TestConfig:
    def test_from_file(self, parsac_ini: str) -> None:
        config = Config.from_file(parsac_ini)
        assert config.task == "fmat"
        assert config.seed == 7
        assert config.threads == 1
        assert config.auc_cutoffs == (2.0, 4.0)
        assert config.handler.unknown_options == [("colour", "blue")]
        assert config.handler.get_option("seed").env_key == "PARSAC_SEED"

    def test_from_file_missing(self, tmp_path) -> None:
        with pytest.raises(FileNotFoundError):
            Config.from_file(tmp_path / "missing.ini")

    def test_pipeline_params(self, parsac_ini: str) -> None:
        params = Config.from_file(parsac_ini).pipeline_params()
        assert params.task == "fmat"
        assert params.max_instances == 3
        assert params.tau == 0.02
        assert params.assignment_threshold == 0.05
        assert params.consensus.counting == "unweighted"

    def test_pipeline_params_other_task(self, parsac_ini: str) -> None:
        params = Config.from_file(parsac_ini).pipeline_params(task="vp")
        assert params.task == "vp"
        assert params.assignment_threshold is None

    def test_train_params(self, parsac_ini: str) -> None:
        config = Config.from_file(parsac_ini)
        params = config.train_params()
        assert params.loss == "self_plain"
        assert params.epochs == 5
        assert config.network_shape() == (16, 6)

    def test_gen_config(self, parsac_ini: str) -> None:
        gen = Config.from_file(parsac_ini).gen_config()
        assert gen.task == "fmat"
        assert gen.model_range == (2, 3)
        assert gen.noise == 0.5
        assert gen.seed == 7

    def test_provider(self, parsac_ini: str) -> None:
        provider = Config.from_file(parsac_ini).provider(3)
        assert isinstance(provider, OracleProvider)
        assert isinstance(
            Config.from_dict({"task": "vp"}).provider(2), UniformProvider
        )

    def test_preset(self) -> None:
        config = Config.from_dict(
            {"task": "homography", "preset": "adelaide_h", "hypotheses": 64}
        )
        params = config.pipeline_params()
        assert params.tau == pytest.approx(1e-2)
        assert params.assignment_threshold == pytest.approx(4e-3**0.5)
        assert params.consensus.hypotheses == 64

    def test_preset_wrong_task(self) -> None:
        config = Config.from_dict({"task": "vp", "preset": "adelaide_h"})
        with pytest.raises(ConfigurationError, match="preset"):
            config.pipeline_params()

    def test_defaults_fall_back_to_task(self) -> None:
        config = Config.from_dict({"task": "homography"})
        params = config.pipeline_params()
        train = config.train_params()
        assert params.max_instances > 1
        assert train.loss == "me"
        assert config.network_shape() == (128, 6)

    def test_require_task(self) -> None:
        config = Config(ConfigOptionHandler())
        with pytest.raises(ConfigurationError, match="task: no value"):
            config.task

    def test_invalid_value(self) -> None:
        with pytest.raises(ConfigurationError, match="threads"):
            Config.from_dict({"threads": "0"})

    def test_override(self, parsac_ini: str) -> None:
        config = Config.from_file(parsac_ini)
        out = config.override(seed=3, task=None, threads="2")
        assert out is config
        assert config.seed == 3
        assert config.threads == 2
        assert config.task == "fmat"

    def test_from_env(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("PARSAC_SEED", "11")
        monkeypatch.setenv("PARSAC_TASK", "VP")
        config = Config.from_env()
        assert config.seed == 11
        assert config.task == "vp"

    def test_env_custom_prefix(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("OTHER_THREADS", "4")
        assert Config.from_dict({}, prefix="OTHER").threads == 4

    def test_file_beats_env(
        self, parsac_ini: str, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        monkeypatch.setenv("PARSAC_SEED", "11")
        assert Config.from_file(parsac_ini).seed == 7

    def test_save_to_file(self, parsac_ini: str, temp_file: str) -> None:
        config = Config.from_file(parsac_ini)
        config.save_to_file(temp_file)
        reloaded = Config.from_file(temp_file)
        assert reloaded.task == "fmat"
        assert reloaded.seed == 7
        assert reloaded.auc_cutoffs == (2.0, 4.0)
        assert reloaded.gen_config().model_range == (2, 3)
        assert reloaded.pipeline_params() == config.pipeline_params()
        assert reloaded.handler.unknown_options == [("colour", "blue")]

    def test_save_to_remembered_path(
        self, parsac_ini: str, temp_file: str
    ) -> None:
        with open(temp_file, "w") as f, open(parsac_ini) as source:
            f.write(source.read())
        config = Config.from_file(temp_file, save_to_file=True)
        config.set_value("seed", 9)
        config.save_to_file()
        assert Config.from_file(temp_file).seed == 9

    def test_save_without_path(self) -> None:
        config = Config.from_dict({"task": "vp"})
        with pytest.raises(ValueError, match="No file path"):
            config.save_to_file()

    @pytest.mark.parametrize(
        "level, log_file",
        [(None, None), ("debug", None), (None, "run.log")],
        ids=["default", "level override", "log file"],
    )
    def test_configure_logging(
        self, mocker: MockerFixture, level, log_file
    ) -> None:
        mock_basic = mocker.patch(base_config_path + ".logging.basicConfig")
        config = Config.from_dict({"log_file": log_file})
        config.configure_logging(level)
        kwargs = mock_basic.call_args.kwargs
        assert kwargs["level"] == ("DEBUG" if level else "INFO")
        if log_file is None:
            assert "filename" not in kwargs
        else:
            assert kwargs["filename"] == log_file
