from __future__ import annotations

import os
from typing import Any, Callable, Generic, Literal, TypeVar

T = TypeVar("T")

Origin = Literal["explicit", "environment", "default"]


class ConfigOption(Generic[T]):
    """One typed option of the ``parsac`` configuration.

    Raw text from a file, a dictionary, the command line or the environment
    goes through the parse ``callback``; the ``save_callback`` turns a value
    back into the text written to an INI file. Values taken from the
    environment are parsed on every lookup and never count as explicitly
    set, so saving a configuration does not capture the shell it ran in.
    """

    def __init__(
        self,
        name: str,
        default: T | None = None,
        deprecated_names: list[str] | str | None = None,
        callback: Callable[[Any], T | None] | None = None,
        save_callback: Callable[[T | None], str] | None = None,
        section: str = "general",
        env_var: str | None = None,
        env_prefix: str | None = None,
    ) -> None:
        """Initializes the class.

        Args:
            name (str): The name of the option.
            default (T | None): Value used when nothing else is set. None
                means the consumer falls back to its own (per-task) default.
                Defaults to None.
            deprecated_names (list[str] | str | None): Older names that still
                look the option up. Defaults to None.
            callback (Callable[[Any], T | None] | None): Converts and
                validates a raw value. Returning None selects the default.
                Defaults to None.
            save_callback (Callable[[T | None], str] | None): Converts the
                value back to text; required when ``callback`` changes the
                type. Defaults to None.
            section (str): INI section of the option. Defaults to "general".
            env_var (str | None): Base name of the environment variable, the
                prefix is prepended as ``PREFIX_NAME``. Defaults to None.
            env_prefix (str | None): The environment variable prefix.
                Defaults to None.
        """
        self.name = name
        self.default = default
        self.deprecated_names = deprecated_names
        self.callback = callback
        self.save_callback = save_callback
        self.section = section
        self.env_var = env_var
        self.env_prefix = env_prefix
        self.value: T | None = None

    @property
    def env_key(self) -> str | None:
        """The environment variable key, prefix included.

        Returns:
            str | None: The key, or None if the option has no variable.
        """
        if self.env_var is None:
            return None
        if self.env_prefix is None:
            return self.env_var
        return f"{self.env_prefix}_{self.env_var}"

    def parse(self, raw: Any) -> T | None:
        """Runs a raw value through the parse callback.

        Args:
            raw (Any): The raw value, usually text.

        Raises:
            ConfigurationError: If the callback rejects the value.

        Returns:
            T | None: The parsed value, None if the callback selects the
                default.
        """
        if raw is None:
            return None
        if self.callback is None:
            return raw
        return self.callback(raw)

    def set_value(self, value: Any) -> None:
        """Sets the value explicitly. None resets the option, so the
        environment and then the default apply again.

        Args:
            value (Any): The raw value.
        """
        self.value = self.parse(value)

    def reset(self) -> None:
        self.value = None

    def _from_env(self) -> T | None:
        if self.env_key is None:
            return None
        raw = os.getenv(self.env_key)
        # Empty variables count as unset.
        return self.parse(raw) if raw else None

    @property
    def origin(self) -> Origin:
        """Where ``get_value`` takes the value from."""
        if self.value is not None:
            return "explicit"
        if self._from_env() is not None:
            return "environment"
        return "default"

    @property
    def is_set(self) -> bool:
        return self.value is not None

    def get_value(self) -> T | None:
        """Resolves the value of the option: the explicit value, then the
        environment variable, then the default (possibly None).

        Returns:
            T | None: The value.
        """
        if self.value is not None:
            return self.value
        env_value = self._from_env()
        return self.default if env_value is None else env_value

    def set_prefix(self, prefix: str) -> None:
        self.env_prefix = prefix

    def convert(self) -> str:
        """The resolved value as INI text.

        Returns:
            str: The text.
        """
        value = self.get_value()
        if self.save_callback is None:
            return str(value)
        return self.save_callback(value)

    def __repr__(self) -> str:
        return (
            f"ConfigOption(name={self.name}, section={self.section}, "
            f"origin={self.origin})"
        )
