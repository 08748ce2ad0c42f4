import numpy as np
import numpy.typing as npt

from parallel_consensus.exceptions import ShapeMismatchError


def misclassification_error(
    labels: npt.ArrayLike, gt_labels: npt.ArrayLike
) -> float:
    """Fraction of observations whose label differs from the ground truth.

    Labels are compared as they are: predicted rank ``k`` against
    ground-truth model ``k``, with no relabelling.

    Args:
        labels (npt.ArrayLike): Predicted labels.
        gt_labels (npt.ArrayLike): Ground-truth labels.

    Raises:
        ShapeMismatchError: If the lengths differ.

    Returns:
        float: The error in ``[0, 1]``; 0 for empty inputs.
    """
    a = np.asarray(labels).ravel()
    b = np.asarray(gt_labels).ravel()
    if a.shape != b.shape:
        raise ShapeMismatchError(
            f"Label arrays differ in length: {a.size} vs {b.size}."
        )
    if a.size == 0:
        return 0.0
    return float(np.mean(a != b))
