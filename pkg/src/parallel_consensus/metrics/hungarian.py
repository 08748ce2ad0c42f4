import numpy as np
import numpy.typing as npt
from scipy.optimize import linear_sum_assignment


def hungarian_assign(
    cost: npt.ArrayLike,
) -> tuple[list[tuple[int, int]], float]:
    """Minimum-cost injective assignment from the smaller side of a cost
    matrix into the larger one.

    Args:
        cost (npt.ArrayLike): Finite costs, shape ``(n, m)``.

    Raises:
        ValueError: If a cost is not finite.

    Returns:
        tuple[list[tuple[int, int]], float]: The ``(row, column)`` pairs
            sorted by row, and their total cost.
    """
    matrix = np.atleast_2d(np.asarray(cost, dtype=np.float64))
    if matrix.size == 0:
        return [], 0.0
    if not np.all(np.isfinite(matrix)):
        raise ValueError("Assignment costs must be finite.")
    rows, cols = linear_sum_assignment(matrix)
    pairs = [(int(r), int(c)) for r, c in zip(rows, cols)]
    return pairs, float(matrix[rows, cols].sum())
