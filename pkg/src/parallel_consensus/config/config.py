from __future__ import annotations

import configparser
import logging
from pathlib import Path
from typing import Any, TypeVar

from parallel_consensus.config.config_option_handler import (
    ConfigOptionHandler,
)
from parallel_consensus.constants import (
    DEFAULT_CONFIG_PATH,
    ENV_PREFIX,
    PRESETS,
)
from parallel_consensus.datagen.config import GenConfig
from parallel_consensus.exceptions import ConfigurationError
from parallel_consensus.pipeline.params import PipelineParams
from parallel_consensus.training.params import TrainParams
from parallel_consensus.weights.params import DEFAULT_BLOCKS, DEFAULT_CHANNELS
from parallel_consensus.weights.providers import (
    WeightProvider,
    make_provider,
)

T = TypeVar("T")

# Option name -> PipelineParams / ConsensusParams field.
_FIT_FIELDS = {
    "max_instances": "max_instances",
    "inlier_threshold": "tau",
    "assignment_threshold": "assignment_threshold",
    "hypotheses": "hypotheses",
    "softness": "beta",
    "softmax_scale": "softmax_scale",
    "counting": "counting",
    "refine": "refine",
}
_TRAIN_FIELDS = (
    "hypothesis_samples",
    "model_samples",
    "learning_rate",
    "epochs",
    "lr_drop_epoch",
    "batch_size",
    "gamma",
    "loss",
    "max_observations",
)
_GENERATE_FIELDS = (
    "scene_count",
    "width",
    "height",
    "model_range",
    "points_range",
    "noise",
    "outlier_rate",
    "manhattan",
    "outlier_cap",
    "max_retries",
    "focal_range_mm",
)


class Config:
    """Loads, stores and resolves the configuration of every command.

    Options come from a file, a dictionary or the environment (variables
    named ``PARSAC_<OPTION>``). Options left unset resolve to the per-task
    defaults when the parameter objects are built, so a configuration only
    needs to name what it changes.
    """

    DEFAULT_CONFIG_PATH = DEFAULT_CONFIG_PATH
    DEFAULT_PREFIX = ENV_PREFIX

    def __init__(
        self,
        handler: ConfigOptionHandler,
        *,
        output_file_path: str | None = None,
    ) -> None:
        self.handler = handler
        self._output_file_path = output_file_path

    def get_value(self, option: str, default: T | None = None) -> Any:
        """Gets the resolved value of an option.

        Args:
            option (str): The option name.
            default (T | None): Returned when the option is unset.

        Returns:
            Any: The value.
        """
        value = self.handler.get_value(option)
        return default if value is None else value

    def set_value(self, option: str, value: Any) -> None:
        self.handler.set_value(option, value)

    def override(self, **values: Any) -> Config:
        """Sets every non-None value, for command-line flags that take
        precedence over the file.

        Returns:
            Config: ``self``.
        """
        for option, value in values.items():
            if value is not None:
                self.set_value(option, value)
        return self

    @property
    def task(self) -> str:
        return self.handler.require("task")

    @property
    def seed(self) -> int:
        return int(self.get_value("seed", 0))

    @property
    def threads(self) -> int:
        return int(self.get_value("threads", 1))

    @property
    def auc_cutoffs(self) -> tuple[float, ...]:
        return tuple(self.get_value("auc_cutoffs"))

    def pipeline_params(
        self, task: str | None = None, train: bool = False
    ) -> PipelineParams:
        """Pipeline parameters: the per-task defaults, then the named
        ``preset`` if one is configured, then the ``[fit]`` section.

        Args:
            task (str | None): The task, the configured one if None.
            train (bool): Start from the training defaults.

        Raises:
            ConfigurationError: If the preset belongs to another task.

        Returns:
            PipelineParams: The parameters.
        """
        task = task or self.task
        values: dict[str, Any] = {}
        if (preset := self.handler.get_value("preset")) is not None:
            preset_task, preset_values = PRESETS[preset]
            if preset_task != task:
                raise ConfigurationError(
                    f"preset: {preset!r} applies to {preset_task!r} scenes, "
                    f"not {task!r}"
                )
            values.update(preset_values)
        for name in _FIT_FIELDS:
            if (value := self.handler.get_value(name)) is not None:
                values[name] = value
        overrides = {_FIT_FIELDS[name]: v for name, v in values.items()}
        return PipelineParams.for_task(task, train, **overrides)

    def train_params(self, task: str | None = None) -> TrainParams:
        values = self.handler.section_values("train")
        overrides = {k: v for k, v in values.items() if k in _TRAIN_FIELDS}
        return TrainParams.for_task(task or self.task, **overrides)

    def gen_config(self, task: str | None = None) -> GenConfig:
        values = self.handler.section_values("generate")
        overrides = {k: v for k, v in values.items() if k in _GENERATE_FIELDS}
        return GenConfig.for_task(
            task or self.task, seed=self.seed, **overrides
        )

    def network_shape(self) -> tuple[int, int]:
        return (
            int(self.get_value("channels", DEFAULT_CHANNELS)),
            int(self.get_value("blocks", DEFAULT_BLOCKS)),
        )

    def provider(self, m_star: int) -> WeightProvider:
        return make_provider(
            self.get_value("provider", "uniform"),
            m_star,
            self.get_value("weights"),
        )

    def configure_logging(self, level: str | None = None) -> None:
        """Applies the ``[logging]`` section; ``level`` overrides the file.

        Args:
            level (str | None): Log level from the command line.
        """
        if level is not None:
            self.set_value("log_level", level)
        kwargs: dict[str, Any] = {
            "level": self.get_value("log_level", "INFO"),
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        }
        if (log_file := self.get_value("log_file")) is not None:
            kwargs["filename"] = log_file
        logging.basicConfig(**kwargs)

    @staticmethod
    def from_env(prefix: str = "") -> Config:
        """A configuration with nothing set explicitly, resolving from the
        environment alone.

        Args:
            prefix (str): Environment variable prefix. Defaults to "PARSAC".

        Returns:
            Config: The configuration.
        """
        prefix = prefix or Config.DEFAULT_PREFIX
        return Config(ConfigOptionHandler(prefix=prefix))

    @staticmethod
    def from_file(
        file_path: str | Path,
        save_to_file: bool = False,
        prefix: str = "",
    ) -> Config:
        """Creates a ``Config`` object from an INI-style file.

        Args:
            file_path (str | Path): The file.
            save_to_file (bool): Remember the path for ``save_to_file``.
                Defaults to False.
            prefix (str): Environment variable prefix. Defaults to "PARSAC".

        Raises:
            ConfigurationError: If a value fails validation.
            FileNotFoundError: If the file does not exist.

        Returns:
            Config: The configuration.
        """
        prefix = prefix or Config.DEFAULT_PREFIX
        path = Path(file_path)
        if not path.is_file():
            raise FileNotFoundError(f"Config file {path} does not exist.")
        cparse = configparser.ConfigParser()
        cparse.read(path)
        handler = ConfigOptionHandler(prefix=prefix)
        handler.read_from_configparser(cparse)
        return Config(
            handler, output_file_path=str(path) if save_to_file else None
        )

    @staticmethod
    def from_dict(config: dict[str, Any], prefix: str = "") -> Config:
        """Creates a ``Config`` object from a flat dictionary.

        Args:
            config (dict[str, Any]): Option name to value.
            prefix (str): Environment variable prefix. Defaults to "PARSAC".

        Returns:
            Config: The configuration.
        """
        prefix = prefix or Config.DEFAULT_PREFIX
        handler = ConfigOptionHandler(prefix=prefix)
        handler.read_from_dict(config)
        return Config(handler)

    def save_to_file(self, file_path: str | Path | None = None) -> None:
        """Writes the explicitly set options to an INI-style file.

        Args:
            file_path (str | Path | None): Target; the remembered path if
                None.

        Raises:
            ValueError: If there is no path.
        """
        file_path = file_path or self._output_file_path
        if file_path is None:
            raise ValueError("No file path provided.")
        config = self.handler.save_to_configparser()
        with open(file_path, "w") as f:
            config.write(f)
