import pytest

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
from parallel_consensus.exceptions import ConfigurationError


class TestCallbacks:
    @pytest.mark.parametrize(
        "value, expected",
        [(" VP ", "vp"), ("fmat", "fmat"), (None, None)],
        ids=["padded", "plain", "none"],
    )
    def test_task(self, value, expected) -> None:
        assert task_callback(value) == expected

    def test_task_invalid(self) -> None:
        with pytest.raises(ConfigurationError, match="task"):
            task_callback("circles")

    @pytest.mark.parametrize(
        "value, minimum, expected",
        [("4", 1, 4), ("0", 0, 0), (None, 1, None)],
        ids=["positive", "zero allowed", "none"],
    )
    def test_int(self, value, minimum, expected) -> None:
        assert int_callback("hypotheses", minimum)(value) == expected

    @pytest.mark.parametrize(
        "value",
        ["four", "0", "2.5"],
        ids=["word", "below minimum", "float"],
    )
    def test_int_invalid(self, value) -> None:
        with pytest.raises(ConfigurationError, match="hypotheses"):
            int_callback("hypotheses", 1)(value)

    @pytest.mark.parametrize(
        "checks, value",
        [
            ({"positive": True}, "0"),
            ({"non_negative": True}, "-1e-3"),
            ({"below_one": True}, "1"),
            ({}, "abc"),
        ],
        ids=["positive", "non negative", "below one", "not a number"],
    )
    def test_float_invalid(self, checks, value) -> None:
        with pytest.raises(ConfigurationError, match="noise"):
            float_callback("noise", **checks)(value)

    def test_float(self) -> None:
        callback = float_callback("noise", non_negative=True, below_one=True)
        assert callback("0") == 0.0
        assert callback("0.25") == 0.25
        assert callback(None) is None

    @pytest.mark.parametrize(
        "value, expected",
        [
            ("yes", True),
            ("On", True),
            ("1", True),
            ("false", False),
            ("0", False),
            (True, True),
            (None, None),
        ],
    )
    def test_bool(self, value, expected) -> None:
        assert bool_callback("refine")(value) is expected

    def test_bool_invalid(self) -> None:
        with pytest.raises(ConfigurationError, match="refine"):
            bool_callback("refine")("maybe")

    def test_choice(self) -> None:
        callback = choice_callback("provider", ("uniform", "oracle"))
        assert callback(" Oracle ") == "oracle"
        with pytest.raises(ConfigurationError, match="provider"):
            callback("neural")

    @pytest.mark.parametrize(
        "kind, length, value, expected",
        [
            (float, None, "1, 3,5", (1.0, 3.0, 5.0)),
            (int, 2, "2,4", (2, 4)),
            (int, 2, [3, 3], (3, 3)),
            (float, None, None, None),
        ],
        ids=["floats", "range", "sequence", "none"],
    )
    def test_number_list(self, kind, length, value, expected) -> None:
        assert number_list_callback("x", kind, length)(value) == expected

    @pytest.mark.parametrize(
        "length, value",
        [(None, ""), (2, "1,2,3"), (2, "4,2"), (2, "0,2"), (None, "a,b")],
        ids=["empty", "too long", "reversed", "zero", "words"],
    )
    def test_number_list_invalid(self, length, value) -> None:
        with pytest.raises(ConfigurationError, match="x"):
            number_list_callback("x", int, length)(value)

    def test_number_list_save(self) -> None:
        assert number_list_save_callback((1.0, 2.5)) == "1,2.5"
        assert number_list_save_callback((2, 3)) == "2,3"
        with pytest.raises(ConfigurationError):
            number_list_save_callback(None)

    def test_log_level(self) -> None:
        assert log_level_callback("debug") == "DEBUG"
        assert log_level_callback(None) == "INFO"
        with pytest.raises(ConfigurationError, match="log_level"):
            log_level_callback("verbose")
