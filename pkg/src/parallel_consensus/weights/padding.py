import numpy as np

from parallel_consensus.constants import MAX_OBSERVATIONS
from parallel_consensus.scene import Scene


def pad_or_subsample(
    scene: Scene,
    rng: np.random.Generator,
    max_observations: int = MAX_OBSERVATIONS,
) -> Scene:
    """Brings a training scene to exactly ``max_observations`` observations.

    Larger scenes are subsampled without replacement; smaller ones keep every
    observation and are filled up with uniformly drawn duplicates. Labels
    travel with their observations.

    Args:
        scene (Scene): The scene, at least one observation.
        rng (np.random.Generator): The random stream.
        max_observations (int): The target size.

    Returns:
        Scene: The resized scene.
    """
    n = len(scene)
    if n == max_observations:
        return scene
    if n > max_observations:
        keep = np.sort(rng.choice(n, size=max_observations, replace=False))
        return scene.subset(keep)
    extra = rng.integers(0, n, size=max_observations - n)
    return scene.subset(np.concatenate([np.arange(n), extra]))
