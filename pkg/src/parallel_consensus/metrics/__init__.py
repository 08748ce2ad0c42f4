from parallel_consensus.metrics.classification import misclassification_error
from parallel_consensus.metrics.evaluation import (
    METRIC_NAMES,
    aggregate,
    check_metrics,
    evaluate_scene,
    pooled_errors,
    vp_frame_intrinsics,
)
from parallel_consensus.metrics.hungarian import hungarian_assign
from parallel_consensus.metrics.residual_metrics import (
    CLIP_VALUE,
    min_residual_error,
    sampson_error_metric,
    to_pixels,
    transfer_error_metric,
)
from parallel_consensus.metrics.vanishing import (
    ErrorPool,
    auc_at,
    vp_angle_errors,
    vp_angle_matrix,
    vp_directions,
)

__all__ = [
    "aggregate",
    "auc_at",
    "check_metrics",
    "CLIP_VALUE",
    "ErrorPool",
    "evaluate_scene",
    "hungarian_assign",
    "METRIC_NAMES",
    "min_residual_error",
    "misclassification_error",
    "pooled_errors",
    "sampson_error_metric",
    "to_pixels",
    "transfer_error_metric",
    "vp_angle_errors",
    "vp_angle_matrix",
    "vp_directions",
    "vp_frame_intrinsics",
]
