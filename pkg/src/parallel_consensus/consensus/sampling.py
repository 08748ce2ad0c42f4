import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]


@dataclass(frozen=True)
class MinimalSet:
    """Observation indices drawn for one hypothesis.

    Attributes:
        indices (IntArray): The drawn indices, duplicates allowed.
        log_prob (float): Sum of the log sample weights of the draws.
        uniform_fallback (bool): The weight column was all zero and the
            draw was uniform.
    """

    indices: IntArray
    log_prob: float
    uniform_fallback: bool = False

    def __len__(self) -> int:
        return int(self.indices.shape[0])

    @property
    def has_duplicates(self) -> bool:
        return len(np.unique(self.indices)) < len(self)


def sample_minimal_set(
    j: int, p: FloatArray, size: int, rng: np.random.Generator
) -> MinimalSet:
    """Draws ``size`` observation indices i.i.d. from column ``j`` of the
    sample weights.

    Args:
        j (int): Putative model index (0-based).
        p (FloatArray): Column-normalized sample weights, shape ``(N, M)``.
        size (int): Minimal set size.
        rng (np.random.Generator): The random stream.

    Returns:
        MinimalSet: The indices and their log probability.
    """
    column = np.asarray(p[:, j], dtype=np.float64)
    n = column.shape[0]
    total = column.sum()
    if not total > 0 or not np.isfinite(total):
        logger.warning(
            "Sample weights of putative model %d are all zero, sampling "
            "uniformly.",
            j,
        )
        indices = rng.integers(0, n, size=size)
        return MinimalSet(indices, size * float(np.log(1.0 / n)), True)
    column = column / total
    indices = rng.choice(n, size=size, replace=True, p=column)
    with np.errstate(divide="ignore"):
        log_prob = float(np.sum(np.log(column[indices])))
    return MinimalSet(indices.astype(np.int64), log_prob)
