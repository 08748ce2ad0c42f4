from parallel_consensus.datagen.common import (
    inject_noise,
    inject_outliers,
    label_threshold,
    merge_coplanar_planes,
    outlier_count,
    prune_small_clusters,
    relabel_by_significance,
    relabel_collisions,
)
from parallel_consensus.datagen.config import GenConfig
from parallel_consensus.datagen.generators import (
    GENERATORS,
    gen_fmat_scene,
    gen_homography_scene,
    gen_vp_scene,
    generate_scene,
    generate_scenes,
    sample_directions,
    scene_seed,
)
from parallel_consensus.datagen.sweep import (
    SweepRow,
    robustness_sweep,
    write_sweep_csv,
)
