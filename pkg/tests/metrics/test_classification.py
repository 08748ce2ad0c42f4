import itertools

import numpy as np
import pytest

from parallel_consensus.exceptions import ShapeMismatchError
from parallel_consensus.metrics import (
    hungarian_assign,
    misclassification_error,
)


class TestMisclassificationError:
    @pytest.mark.parametrize(
        "labels, gt, expected",
        [
            ([1, 0, 2], [1, 0, 2], 0.0),
            ([1, 0, 2], [1, 1, 2], 1.0 / 3.0),
            ([2, 2, 1, 1], [1, 1, 2, 2], 1.0),
            ([], [], 0.0),
        ],
        ids=["perfect", "one_wrong", "swapped_ranks", "empty"],
    )
    def test_values(self, labels, gt, expected):
        assert misclassification_error(labels, gt) == pytest.approx(expected)

    def test_length_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            misclassification_error([0, 1], [0, 1, 1])


def brute_force(cost: np.ndarray) -> float:
    rows, cols = cost.shape
    if rows <= cols:
        return min(
            sum(cost[r, c] for r, c in enumerate(perm))
            for perm in itertools.permutations(range(cols), rows)
        )
    return brute_force(cost.T)


class TestHungarianAssign:
    @pytest.mark.parametrize(
        "shape", [(3, 3), (2, 4), (4, 2), (1, 5)], ids=str
    )
    def test_matches_brute_force(self, shape):
        rng = np.random.default_rng(sum(shape))
        cost = rng.uniform(0.0, 10.0, size=shape)
        pairs, total = hungarian_assign(cost)
        assert len(pairs) == min(shape)
        assert total == pytest.approx(brute_force(cost))
        assert len({r for r, _ in pairs}) == len({c for _, c in pairs})

    @pytest.mark.parametrize("seed", range(10))
    def test_random_matrices_match_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(100):
            rows, cols = rng.integers(1, 7, size=2)
            cost = rng.uniform(0.0, 10.0, size=(rows, cols))
            pairs, total = hungarian_assign(cost)
            assert len(pairs) == min(rows, cols)
            assert total == pytest.approx(brute_force(cost))

    def test_known_assignment(self):
        cost = np.array([[4.0, 1.0, 3.0], [2.0, 0.0, 5.0], [3.0, 2.0, 2.0]])
        pairs, total = hungarian_assign(cost)
        assert pairs == [(0, 1), (1, 0), (2, 2)]
        assert total == 5.0

    def test_empty(self):
        assert hungarian_assign(np.zeros((0, 3))) == ([], 0.0)

    def test_not_finite(self):
        with pytest.raises(ValueError):
            hungarian_assign([[1.0, np.inf]])
