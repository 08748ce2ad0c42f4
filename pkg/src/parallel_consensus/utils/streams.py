import numpy as np


def substream(seed: int, *counters: int) -> np.random.Generator:
    """Returns a random generator derived from ``seed`` and a tuple of
    counters.

    The generator depends only on ``(seed, counters)``, never on the order in
    which substreams are requested, so work items such as putative models can
    run on any thread in any order and still draw the same numbers.

    Args:
        seed (int): The root seed, a non-negative integer.
        *counters (int): Non-negative counters identifying the work item, for
            example ``(scene_index, draw, putative_index)``.

    Returns:
        np.random.Generator: A generator seeded from the derived sequence.
    """
    sequence = np.random.SeedSequence(
        entropy=int(seed), spawn_key=tuple(int(c) for c in counters)
    )
    return np.random.default_rng(sequence)
