from typing import Literal, TypeAlias

Task: TypeAlias = Literal["vp", "fmat", "homography"]


class TASKS:
    VP = "vp"
    FMAT = "fmat"
    HOMOGRAPHY = "homography"


ALL_TASKS: tuple[str, ...] = (TASKS.VP, TASKS.FMAT, TASKS.HOMOGRAPHY)

ENV_PREFIX = "PARSAC"
DEFAULT_CONFIG_PATH = ".parsac"

OBSERVATION_DIM = 4
MINIMAL_SET_SIZES = {
    TASKS.VP: 2,
    TASKS.FMAT: 7,
    TASKS.HOMOGRAPHY: 4,
}

# Residual returned when a residual is undefined (zero Sampson denominator,
# transferred point at infinity). Never NaN.
RESIDUAL_SENTINEL = 1e12
DEGENERACY_TOL = 1e-12

SOFTNESS = 5.0
SOFTMAX_SCALE = 1000.0
SELF_SUPERVISED_GAMMA = 0.3
MAX_OBSERVATIONS = 512
NORM_EPS = 1e-5
BATCH_NORM_MOMENTUM = 0.1
ORACLE_EPS = 1e-6
VP_MAX_ANGLE_DEG = 90.0
DEFAULT_AUC_CUTOFFS = (1.0, 3.0, 5.0, 10.0)

# Thresholds are in the normalized frame. The homography thresholds are the
# square roots of the tabulated values, which bound the squared transfer error.
TASK_DEFAULTS: dict[str, dict[str, float | int | None]] = {
    TASKS.VP: {
        "max_instances": 8,
        "inlier_threshold": 1e-4,
        "train_inlier_threshold": 1e-4,
        "assignment_threshold": None,
        "hypotheses": 32,
        "train_hypotheses": 32,
        "hypothesis_samples": 8,
        "model_samples": 64,
        "batch_size": 64,
        "epochs": 2000,
        "lr_drop_epoch": 1500,
    },
    TASKS.FMAT: {
        "max_instances": 4,
        "inlier_threshold": 1e-2,
        "train_inlier_threshold": 4e-3,
        "assignment_threshold": 2e-2,
        "hypotheses": 128,
        "train_hypotheses": 32,
        "hypothesis_samples": 16,
        "model_samples": 128,
        "batch_size": 32,
        "epochs": 3000,
        "lr_drop_epoch": 2500,
    },
    TASKS.HOMOGRAPHY: {
        "max_instances": 24,
        "inlier_threshold": 1e-3,
        "train_inlier_threshold": 1e-3,
        "assignment_threshold": 2e-3,
        "hypotheses": 512,
        "train_hypotheses": 32,
        "hypothesis_samples": 8,
        "model_samples": 64,
        "batch_size": 4,
        "epochs": 500,
        "lr_drop_epoch": 350,
    },
}

# Inference preset for real-image homography scenes; thresholds read as above.
ADELAIDE_H_PRESET: dict[str, float | int] = {
    "max_instances": 24,
    "inlier_threshold": 1e-4**0.5,
    "assignment_threshold": 4e-3**0.5,
    "hypotheses": 512,
}

# Named presets: preset name -> (task, fit option overrides).
PRESETS: dict[str, tuple[str, dict[str, float | int]]] = {
    "adelaide_h": (TASKS.HOMOGRAPHY, ADELAIDE_H_PRESET),
}

LEARNING_RATE = 1e-4
LR_DROP_FACTOR = 0.1

# Generation thresholds in pixels.
FMAT_LABEL_THRESHOLD_PX = 2.0
HOMOGRAPHY_LABEL_THRESHOLD_PX = 1.0
VP_LABEL_ANGLE_DEG = 0.5
VP_OUTLIER_SQUARE_PX = 100.0
PLANE_MERGE_ANGLE_DEG = 2.0
PLANE_MERGE_OFFSET = 0.1
MIN_PLANE_CORRESPONDENCES = 10
VP_MIN_SEPARATION_DEG = 15.0

WEIGHTS_MAGIC = b"PARSACW1\n"
WEIGHTS_FORMAT_VERSION = 1
SCENE_FORMAT_VERSION = 1
RESULTS_FORMAT_VERSION = 1
