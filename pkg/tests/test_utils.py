from unittest import mock

import numpy as np
import pytest

from parallel_consensus.utils import hash_arrays, retry, substream

retry_logger = "parallel_consensus.utils.retry.logger"


class TestRetry:
    def test_success(self):
        @retry(times=1)
        def test_func():
            return True

        assert test_func()

    @mock.patch(retry_logger)
    def test_failure(self, mock_logger: mock.MagicMock):
        count = 0

        @retry(times=1)
        def test_func():
            nonlocal count
            count += 1
            raise Exception

        with pytest.raises(Exception):
            test_func()

        assert mock_logger.warning.call_count == 1
        assert count == 2

    @mock.patch(retry_logger)
    def test_success_after_failure(self, mock_logger: mock.MagicMock):
        count = 0

        @retry(times=2)
        def test_func():
            nonlocal count
            count += 1
            if count < 2:
                raise Exception
            return True

        assert test_func()
        assert mock_logger.warning.call_count == 1
        assert count == 2

    @mock.patch(retry_logger)
    def test_exception_not_defined(self, mock_logger: mock.MagicMock):
        count = 0

        @retry(times=2, exceptions=(ValueError, TypeError))
        def test_func():
            nonlocal count
            count += 1
            if count == 1:
                raise ValueError
            raise IndexError

        with pytest.raises(IndexError):
            test_func()

        assert mock_logger.warning.call_count == 1
        assert count == 2

    @mock.patch(retry_logger)
    def test_zero_times_is_one_unguarded_call(
        self, mock_logger: mock.MagicMock
    ):
        count = 0

        @retry(times=0, exceptions=ValueError)
        def test_func():
            nonlocal count
            count += 1
            raise ValueError

        with pytest.raises(ValueError):
            test_func()

        mock_logger.warning.assert_not_called()
        assert count == 1

    def test_resamples_from_generator(self):
        rng = np.random.default_rng(0)
        draws = []

        @retry(times=5, exceptions=ValueError)
        def sample():
            value = rng.uniform()
            draws.append(value)
            if len(draws) < 3:
                raise ValueError
            return value

        assert sample() == draws[-1]
        assert len(set(draws)) == 3


class TestSubstream:
    def test_same_counters_same_draws(self):
        a = substream(7, 1, 2).uniform(size=5)
        b = substream(7, 1, 2).uniform(size=5)
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize(
        "other",
        [(8, 1, 2), (7, 2, 1), (7, 1), (7, 1, 2, 0)],
        ids=["seed", "order", "shorter", "longer"],
    )
    def test_different_counters(self, other):
        a = substream(7, 1, 2).uniform(size=5)
        b = substream(*other).uniform(size=5)
        assert not np.array_equal(a, b)

    def test_request_order_irrelevant(self):
        first = [substream(3, j).integers(1 << 30) for j in range(4)]
        second = [
            substream(3, j).integers(1 << 30) for j in reversed(range(4))
        ]
        assert first == second[::-1]


class TestHashArrays:
    def test_stable(self):
        arrays = [np.arange(6.0).reshape(2, 3), np.ones(4)]
        assert hash_arrays(arrays) == hash_arrays([a.copy() for a in arrays])

    @pytest.mark.parametrize(
        "other",
        [
            [np.arange(6.0).reshape(3, 2), np.ones(4)],
            [np.arange(6).reshape(2, 3), np.ones(4)],
            [np.arange(6.0).reshape(2, 3), np.full(4, 1.5)],
            [np.ones(4), np.arange(6.0).reshape(2, 3)],
        ],
        ids=["shape", "dtype", "value", "order"],
    )
    def test_sensitive(self, other):
        arrays = [np.arange(6.0).reshape(2, 3), np.ones(4)]
        assert hash_arrays(arrays) != hash_arrays(other)
