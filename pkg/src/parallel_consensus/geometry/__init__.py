from parallel_consensus.geometry.fundamental import (
    fmat_seven_point,
    residual_sampson_sqrt,
)
from parallel_consensus.geometry.homography import (
    homography_four_point_dlt,
    residual_transfer_sqrt,
)
from parallel_consensus.geometry.normalization import (
    denormalize_coords,
    normalization_matrix,
    normalize_coords,
)
from parallel_consensus.geometry.poses import (
    gt_fmat_from_pose,
    gt_homography_from_plane,
    skew,
)
from parallel_consensus.geometry.registry import (
    TaskGeometry,
    get_geometry,
    residual_matrix,
)
from parallel_consensus.geometry.vanishing import (
    lines_from_segments,
    observations_from_segments,
    refine_vp_weighted,
    residual_vp,
    vp_from_lines,
    vp_from_segments,
)

__all__ = [
    "denormalize_coords",
    "fmat_seven_point",
    "get_geometry",
    "gt_fmat_from_pose",
    "gt_homography_from_plane",
    "homography_four_point_dlt",
    "lines_from_segments",
    "normalization_matrix",
    "normalize_coords",
    "observations_from_segments",
    "refine_vp_weighted",
    "residual_matrix",
    "residual_sampson_sqrt",
    "residual_transfer_sqrt",
    "residual_vp",
    "skew",
    "TaskGeometry",
    "vp_from_lines",
    "vp_from_segments",
]
