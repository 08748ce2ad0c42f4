from parallel_consensus.pipeline.assignment import (
    assign_labels,
    cluster_assignment,
)
from parallel_consensus.pipeline.fit import (
    ParallelConsensus,
    PutativeModel,
    finish_models,
    parsac_fit,
    refine_model,
)
from parallel_consensus.pipeline.params import FitResult, PipelineParams
from parallel_consensus.pipeline.ranking import (
    RankingStep,
    instance_ranking,
    rank_inlier_sets,
)

__all__ = [
    "assign_labels",
    "cluster_assignment",
    "finish_models",
    "FitResult",
    "instance_ranking",
    "ParallelConsensus",
    "parsac_fit",
    "PipelineParams",
    "PutativeModel",
    "rank_inlier_sets",
    "RankingStep",
    "refine_model",
]
