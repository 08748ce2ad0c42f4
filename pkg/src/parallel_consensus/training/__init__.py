from parallel_consensus.training.enumeration import (
    EnumeratedGradient,
    OutcomeEnumerator,
    enumerate_expected_loss,
    enumerated_estimator,
)
from parallel_consensus.training.estimator import (
    EpisodeTrace,
    reinforce_gradient,
    reinforce_upstream,
)
from parallel_consensus.training.gradcheck import (
    GradcheckReport,
    check_estimator_gradient,
    check_network_gradient,
    run_gradcheck,
)
from parallel_consensus.training.losses import (
    make_task_loss,
    self_supervised_plain_loss,
    self_supervised_weighted_loss,
    task_loss_hungarian,
    task_loss_me,
)
from parallel_consensus.training.optimizer import (
    AdamState,
    adam_step,
    load_adam_state,
    lr_for_epoch,
    save_adam_state,
)
from parallel_consensus.training.params import LOSS_KINDS, TrainParams
from parallel_consensus.training.trainer import (
    EpochStats,
    Trainer,
    TrainingReport,
    train_epoch,
    validation_score,
)

__all__ = [
    "adam_step",
    "AdamState",
    "check_estimator_gradient",
    "check_network_gradient",
    "EnumeratedGradient",
    "enumerate_expected_loss",
    "enumerated_estimator",
    "EpisodeTrace",
    "EpochStats",
    "GradcheckReport",
    "load_adam_state",
    "LOSS_KINDS",
    "lr_for_epoch",
    "make_task_loss",
    "OutcomeEnumerator",
    "reinforce_gradient",
    "reinforce_upstream",
    "run_gradcheck",
    "save_adam_state",
    "self_supervised_plain_loss",
    "self_supervised_weighted_loss",
    "task_loss_hungarian",
    "task_loss_me",
    "Trainer",
    "train_epoch",
    "TrainingReport",
    "TrainParams",
    "validation_score",
]
