from typing import Callable

import pytest

from parallel_consensus.config.config_option import ConfigOption


def callback(value: str | None) -> str | None:
    return value


def callback_add_one(value: str) -> str:
    return str(int(value) + 1)


def callback_to_none(value: str) -> None:
    return None


class TestConfigOption:
    def test_option(self) -> None:
        option = ConfigOption(
            name="hypotheses",
            default=32,
            deprecated_names=["hyps"],
            callback=callback,
            section="fit",
            env_var="HYPOTHESES",
            env_prefix="PARSAC",
        )
        assert option.name == "hypotheses"
        assert option.default == 32
        assert option.deprecated_names == ["hyps"]
        assert option.callback == callback
        assert option.section == "fit"
        assert option.value is None

    def test_env_key(self) -> None:
        option = ConfigOption(
            name="seed", env_var="SEED", env_prefix="PARSAC"
        )
        assert option.env_key == "PARSAC_SEED"
        option.env_prefix = None
        assert option.env_key == "SEED"
        option.env_var = None
        assert option.env_key is None

    @pytest.mark.parametrize(
        "callback",
        [
            None,
            callback_add_one,
            callback_to_none,
        ],
        ids=[
            "No callback",
            "With transform callback",
            "Callback selects default",
        ],
    )
    @pytest.mark.parametrize(
        "value",
        [None, "1"],
        ids=["No value", "With value"],
    )
    @pytest.mark.parametrize(
        "default",
        [None, "3"],
        ids=["No default", "With default"],
    )
    def test_set_value(
        self,
        callback: Callable | None,
        value: str | None,
        default: str | None,
    ) -> None:
        option = ConfigOption(name="x", default=default, callback=callback)
        option.set_value(value)
        if value is None or callback is callback_to_none:
            assert not option.is_set
            assert option.get_value() == default
        elif callback is None:
            assert option.get_value() == value
        else:
            assert option.get_value() == "2"

    @pytest.mark.parametrize(
        "env_value, expected",
        [("9", 9), ("", 4), (None, 4)],
        ids=["set", "empty", "unset"],
    )
    def test_get_value_from_env(
        self, monkeypatch: pytest.MonkeyPatch, env_value, expected
    ) -> None:
        if env_value is None:
            monkeypatch.delenv("PARSAC_THREADS", raising=False)
        else:
            monkeypatch.setenv("PARSAC_THREADS", env_value)
        option = ConfigOption(
            name="threads",
            default=4,
            callback=int,
            env_var="THREADS",
            env_prefix="PARSAC",
        )
        assert option.get_value() == expected

    def test_explicit_value_beats_env(
        self, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        monkeypatch.setenv("PARSAC_THREADS", "9")
        option = ConfigOption(
            name="threads",
            callback=int,
            env_var="THREADS",
            env_prefix="PARSAC",
        )
        option.set_value("2")
        assert option.get_value() == 2

    def test_origin(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.delenv("PARSAC_SEED", raising=False)
        option = ConfigOption(
            name="seed",
            default=0,
            callback=int,
            env_var="SEED",
            env_prefix="PARSAC",
        )
        assert option.origin == "default"
        monkeypatch.setenv("PARSAC_SEED", "4")
        assert option.origin == "environment"
        assert not option.is_set
        option.set_value("7")
        assert option.origin == "explicit"
        option.reset()
        assert option.get_value() == 4

    def test_convert(self) -> None:
        option = ConfigOption(name="x", default=(1, 2))
        assert option.convert() == "(1, 2)"
        option.save_callback = lambda v: ",".join(str(i) for i in v)
        assert option.convert() == "1,2"

    def test_set_prefix(self) -> None:
        option = ConfigOption(name="task", env_var="TASK")
        option.set_prefix("OTHER")
        assert option.env_key == "OTHER_TASK"
