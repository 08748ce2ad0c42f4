class ConsensusError(Exception):
    """Base class for all exceptions raised by this package."""

    pass


class GeometryError(ConsensusError, ValueError):
    """Invalid geometric input, such as non-finite coordinates or a zero
    baseline."""

    pass


class ConfigurationError(ConsensusError, ValueError):
    """A parameter or configuration option holds an invalid value."""

    pass


class ShapeMismatchError(ConsensusError, ValueError):
    """A tensor does not have the shape its consumer expects."""

    pass


class WeightsFormatError(ConsensusError):
    """A weights or optimizer-state container could not be read."""

    pass


class SceneFormatError(ConsensusError):
    """A scene, manifest or results file is malformed or inconsistent."""

    pass


class TaskMismatchError(ConsensusError):
    """The task of a scene does not match the task of a model or metric."""

    pass


class GenerationError(ConsensusError):
    """A synthetic scene could not be generated under the given constraints."""

    pass


class InsufficientInliersError(GenerationError):
    """A sampled synthetic model has fewer inliers than required."""

    pass


class TrainingDivergedError(ConsensusError):
    """The training loss became non-finite."""

    pass
