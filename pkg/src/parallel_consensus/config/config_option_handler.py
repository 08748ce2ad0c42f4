from __future__ import annotations

import configparser
import copy
from typing import Any

from parallel_consensus.config.callbacks import (
    bool_callback,
    choice_callback,
    float_callback,
    int_callback,
    log_level_callback,
    number_list_callback,
    number_list_save_callback,
    task_callback,
)
from parallel_consensus.config.config_option import ConfigOption
from parallel_consensus.consensus.params import COUNTING_MODES
from parallel_consensus.constants import DEFAULT_AUC_CUTOFFS, PRESETS
from parallel_consensus.exceptions import ConfigurationError
from parallel_consensus.training.params import LOSS_KINDS
from parallel_consensus.weights.providers import PROVIDER_NAMES

_LIST = number_list_save_callback
PRESET_NAMES = tuple(PRESETS)


def _int(name: str, section: str, minimum: int = 1, **kwargs: Any):
    return ConfigOption[int](
        name,
        callback=int_callback(name, minimum),
        section=section,
        **kwargs,
    )


def _float(name: str, section: str, **kwargs: Any):
    checks = {
        k: kwargs.pop(k)
        for k in ("positive", "non_negative", "below_one")
        if k in kwargs
    }
    return ConfigOption[float](
        name,
        callback=float_callback(name, **checks),
        section=section,
        **kwargs,
    )


class ConfigOptionHandler:
    """Registry of the configuration options.

    Options are looked up by name or by any of their deprecated names.
    Options read from a file or dictionary that the registry does not know
    are kept in ``unknown_options`` and written back to an ``[unknown]``
    section on save.
    """

    _BASE_OPTIONS: tuple[ConfigOption, ...] = (
        # general
        ConfigOption[str](
            "task", callback=task_callback, section="general", env_var="TASK"
        ),
        _int("seed", "general", minimum=0, default=0, env_var="SEED"),
        _int("threads", "general", default=1, env_var="THREADS"),
        ConfigOption[str](
            "provider",
            default="uniform",
            callback=choice_callback("provider", PROVIDER_NAMES),
            section="general",
            env_var="PROVIDER",
        ),
        ConfigOption[str]("weights", section="general", env_var="WEIGHTS"),
        # fit
        _int("max_instances", "fit", deprecated_names=["m_star"]),
        _float(
            "inlier_threshold",
            "fit",
            positive=True,
            deprecated_names=["tau"],
        ),
        _float("assignment_threshold", "fit", positive=True),
        _int("hypotheses", "fit"),
        _float("softness", "fit", positive=True, deprecated_names=["beta"]),
        _float("softmax_scale", "fit", positive=True),
        ConfigOption[str](
            "counting",
            callback=choice_callback("counting", COUNTING_MODES),
            section="fit",
        ),
        ConfigOption[bool](
            "refine", callback=bool_callback("refine"), section="fit"
        ),
        ConfigOption[str](
            "preset",
            callback=choice_callback("preset", PRESET_NAMES),
            section="fit",
        ),
        # train
        _int("hypothesis_samples", "train"),
        _int("model_samples", "train"),
        _float("learning_rate", "train", positive=True),
        _int("epochs", "train"),
        _int("lr_drop_epoch", "train", minimum=0),
        _int("batch_size", "train"),
        _float("gamma", "train", positive=True, below_one=True),
        ConfigOption[str](
            "loss",
            callback=choice_callback("loss", LOSS_KINDS),
            section="train",
        ),
        _int("max_observations", "train"),
        _int("channels", "train"),
        _int("blocks", "train"),
        _int("runs", "train", default=1),
        # generate
        _int("scene_count", "generate", minimum=0),
        _int("width", "generate"),
        _int("height", "generate"),
        ConfigOption[tuple](
            "model_range",
            callback=number_list_callback("model_range", int, 2),
            save_callback=_LIST,
            section="generate",
        ),
        ConfigOption[tuple](
            "points_range",
            callback=number_list_callback("points_range", int, 2),
            save_callback=_LIST,
            section="generate",
        ),
        _float("noise", "generate", non_negative=True),
        _float(
            "outlier_rate", "generate", non_negative=True, below_one=True
        ),
        ConfigOption[bool](
            "manhattan",
            callback=bool_callback("manhattan"),
            section="generate",
        ),
        _int("outlier_cap", "generate", minimum=0),
        _int("max_retries", "generate", minimum=0),
        ConfigOption[tuple](
            "focal_range_mm",
            callback=number_list_callback("focal_range_mm", float, 2),
            save_callback=_LIST,
            section="generate",
        ),
        # eval
        ConfigOption[tuple](
            "auc_cutoffs",
            default=DEFAULT_AUC_CUTOFFS,
            callback=number_list_callback("auc_cutoffs", float),
            save_callback=_LIST,
            section="eval",
        ),
        # logging
        ConfigOption[str](
            "log_level",
            default="INFO",
            section="logging",
            callback=log_level_callback,
            env_var="LOG_LEVEL",
        ),
        ConfigOption[str](
            "log_file",
            default=None,
            section="logging",
            env_var="LOG_FILE",
        ),
    )

    def __init__(self, prefix: str | None = None) -> None:
        """Initializes the class.

        Args:
            prefix (str | None): Prefix of the environment variables. If
                None, no prefix will be used. Defaults to None.
        """
        # Deep copy: set values must never reach the class-level table.
        self._options: list[ConfigOption] = copy.deepcopy(
            list(self._BASE_OPTIONS)
        )
        self._lookup: dict[str, ConfigOption] = {}
        self.unknown_options: list[tuple[str, str]] = []
        self.prefix = prefix
        self._register(self._options)

    @staticmethod
    def _aliases(option: ConfigOption) -> list[str]:
        old = option.deprecated_names
        if old is None:
            return []
        return [old] if isinstance(old, str) else list(old)

    def _register(self, options: list[ConfigOption]) -> None:
        for option in options:
            if self.prefix is not None:
                option.set_prefix(self.prefix)
            self._lookup[option.name] = option
        # Deprecated names never shadow a current option name.
        for option in options:
            for alias in self._aliases(option):
                self._lookup.setdefault(alias, option)

    @property
    def OPTIONS(self) -> list[ConfigOption]:
        return list(self._options)

    @property
    def SUPPORTED_OPTIONS(self) -> list[str]:
        return list(self._lookup)

    @property
    def SECTIONS(self) -> list[str]:
        return sorted({option.section for option in self._options})

    def add_options(self, options: ConfigOption | list[ConfigOption]) -> None:
        """Registers options on top of the built-in table.

        Args:
            options (ConfigOption | list[ConfigOption]): The options.
        """
        extra = options if isinstance(options, list) else [options]
        self._options.extend(extra)
        self._register(extra)

    def get_option(self, name: str) -> ConfigOption:
        """Finds an option by its name or one of its deprecated names.

        Args:
            name (str): The name, case-insensitive.

        Raises:
            KeyError: If the option is not supported.

        Returns:
            ConfigOption: The option.
        """
        key = name.lower()
        option = self._lookup.get(key)
        if option is None:
            raise KeyError(f"Option {key} is not supported.")
        return option

    def get_value(self, name: str) -> Any:
        return self.get_option(name).get_value()

    def set_value(self, name: str, value: Any) -> None:
        self.get_option(name).set_value(value)

    def get_section(self, section: str) -> list[ConfigOption]:
        return [o for o in self._options if o.section == section]

    def section_values(self, section: str) -> dict[str, Any]:
        """Resolved values of a section, leaving out unset options.

        Args:
            section (str): The section.

        Returns:
            dict[str, Any]: Option name to value.
        """
        resolved = {}
        for option in self.get_section(section):
            value = option.get_value()
            if value is not None:
                resolved[option.name] = value
        return resolved

    def _absorb(self, name: str, value: Any) -> None:
        try:
            option = self.get_option(name)
        except KeyError:
            self.unknown_options.append((name, str(value)))
            return
        option.set_value(value)

    def read_from_configparser(
        self, config: configparser.ConfigParser
    ) -> None:
        """Sets values from a parsed INI file. The section an option appears
        in does not matter; anything the table does not know, and everything
        under ``[unknown]``, lands in ``unknown_options``.

        Args:
            config (configparser.ConfigParser): The parsed file.

        Raises:
            ConfigurationError: If a value fails its parse callback.
        """
        for section in config.sections():
            pairs = config.items(section)
            if section == "unknown":
                self.unknown_options.extend(pairs)
            else:
                for name, value in pairs:
                    self._absorb(name, value)

    def read_from_dict(self, config: dict[str, Any]) -> None:
        """Sets values from a flat mapping of option name to raw value."""
        for name, value in config.items():
            self._absorb(name, value)

    def save_to_configparser(
        self, config: configparser.ConfigParser | None = None
    ) -> configparser.ConfigParser:
        """Writes the explicitly set options, plus the unknown ones, into a
        ConfigParser. Defaults and environment values are left out.

        Args:
            config (configparser.ConfigParser | None): Target; a new one if
                None.

        Returns:
            configparser.ConfigParser: The ConfigParser with the options.
        """
        target = config if config is not None else configparser.ConfigParser()
        entries = [
            (o.section, o.name, o.convert()) for o in self._options if o.is_set
        ]
        entries += [("unknown", k, v) for k, v in self.unknown_options]
        for section, name, text in entries:
            if not target.has_section(section):
                target.add_section(section)
            target.set(section, name, text)
        return target

    def require(self, name: str) -> Any:
        """The value of an option that must be set.

        Raises:
            ConfigurationError: If the option has no value.
        """
        value = self.get_value(name)
        if value is None:
            raise ConfigurationError(f"{name}: no value configured")
        return value
