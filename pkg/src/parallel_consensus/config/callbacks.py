import re
from typing import Callable, Sequence

from parallel_consensus.constants import ALL_TASKS
from parallel_consensus.exceptions import ConfigurationError

delimiter = re.compile(r"\s*\,\s*")

_TRUE = ("1", "true", "yes", "on")
_FALSE = ("0", "false", "no", "off")


# Every parse callback returns the converted value and raises
# ConfigurationError naming the option on bad input.
def task_callback(task: str | None) -> str | None:
    if task is None:
        return None
    task = task.strip().lower()
    if task not in ALL_TASKS:
        raise ConfigurationError(
            f"task: must be one of {', '.join(ALL_TASKS)}, got {task!r}"
        )
    return task


def int_callback(name: str, minimum: int | None = None) -> Callable:
    def callback(value: str | None) -> int | None:
        if value is None:
            return None
        try:
            number = int(value)
        except ValueError:
            raise ConfigurationError(
                f"{name}: expected an integer, got {value!r}"
            ) from None
        if minimum is not None and number < minimum:
            raise ConfigurationError(
                f"{name}: must be at least {minimum}, got {number}"
            )
        return number

    return callback


def float_callback(
    name: str,
    positive: bool = False,
    non_negative: bool = False,
    below_one: bool = False,
) -> Callable:
    def callback(value: str | None) -> float | None:
        if value is None:
            return None
        try:
            number = float(value)
        except ValueError:
            raise ConfigurationError(
                f"{name}: expected a number, got {value!r}"
            ) from None
        if positive and not number > 0:
            raise ConfigurationError(f"{name}: must be positive, got {number}")
        if non_negative and number < 0:
            raise ConfigurationError(
                f"{name}: must be non-negative, got {number}"
            )
        if below_one and not number < 1:
            raise ConfigurationError(f"{name}: must be below 1, got {number}")
        return number

    return callback


def bool_callback(name: str) -> Callable:
    def callback(value: str | bool | None) -> bool | None:
        if value is None or isinstance(value, bool):
            return value
        lowered = value.strip().lower()
        if lowered in _TRUE:
            return True
        if lowered in _FALSE:
            return False
        raise ConfigurationError(f"{name}: expected a boolean, got {value!r}")

    return callback


def choice_callback(name: str, choices: Sequence[str]) -> Callable:
    def callback(value: str | None) -> str | None:
        if value is None:
            return None
        lowered = value.strip().lower()
        if lowered not in choices:
            raise ConfigurationError(
                f"{name}: must be one of {', '.join(choices)}, got {value!r}"
            )
        return lowered

    return callback


def number_list_callback(
    name: str, kind: type = float, length: int | None = None
) -> Callable:
    """Parses ``"a, b, ..."`` (or an already split sequence) into numbers.

    Args:
        name (str): Option name for error messages.
        kind (type): ``int`` or ``float``.
        length (int | None): Required number of entries. Two-entry lists
            are ranges and must satisfy ``0 < low <= high``.

    Returns:
        Callable: The callback.
    """

    def callback(value: str | Sequence | None) -> tuple | None:
        if value is None:
            return None
        parts = delimiter.split(value.strip()) if isinstance(value, str) else (
            value
        )
        try:
            numbers = tuple(kind(p) for p in parts if p != "")
        except (TypeError, ValueError):
            raise ConfigurationError(
                f"{name}: expected comma-separated numbers, got {value!r}"
            ) from None
        if not numbers:
            raise ConfigurationError(f"{name}: must not be empty")
        if length is not None and len(numbers) != length:
            raise ConfigurationError(
                f"{name}: expected {length} values, got {len(numbers)}"
            )
        if length == 2 and not 0 < numbers[0] <= numbers[1]:
            raise ConfigurationError(
                f"{name}: must satisfy 0 < low <= high, got {numbers}"
            )
        return numbers

    return callback


def number_list_save_callback(value: Sequence | None) -> str:
    if value is None:
        raise ConfigurationError("Cannot save an unset list option.")
    return ",".join(f"{v:g}" if isinstance(v, float) else str(v) for v in value)


def log_level_callback(log_level: str | None) -> str:
    # Does not set the log level, just checks that it is valid
    if log_level is None:
        return "INFO"
    log_level = log_level.upper()
    if log_level not in ("CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"):
        raise ConfigurationError(
            "log_level: must be one of CRITICAL, ERROR, WARNING, INFO, DEBUG"
        )
    return log_level
