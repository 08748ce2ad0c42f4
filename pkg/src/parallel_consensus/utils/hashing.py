import hashlib
from typing import Iterable

import numpy as np


def hash_arrays(arrays: Iterable[np.ndarray]) -> str:
    """Returns a stable SHA-256 digest of a sequence of arrays.

    Shapes and dtypes take part in the digest, so two parameter sets only hash
    equal if every tensor matches bit for bit. Used to compare epoch-end
    parameters across runs.

    Args:
        arrays (Iterable[np.ndarray]): The arrays to hash, in a fixed order.

    Returns:
        str: The hexadecimal digest.
    """
    digest = hashlib.sha256()
    for array in arrays:
        contiguous = np.ascontiguousarray(array)
        digest.update(str((contiguous.shape, contiguous.dtype.str)).encode())
        digest.update(contiguous.tobytes())
    return digest.hexdigest()
