from parallel_consensus.weights.network import (
    ForwardCache,
    apply_running_stats,
    log_sigmoid,
    network_backward,
    network_forward,
    normalize_log_weights,
)
from parallel_consensus.weights.padding import pad_or_subsample
from parallel_consensus.weights.params import (
    GradientBundle,
    NetworkParams,
    init_params,
    load_params,
    save_params,
)
from parallel_consensus.weights.providers import (
    PROVIDER_NAMES,
    NeuralProvider,
    OracleProvider,
    UniformProvider,
    WeightProvider,
    make_provider,
)

__all__ = [
    "apply_running_stats",
    "ForwardCache",
    "GradientBundle",
    "init_params",
    "load_params",
    "log_sigmoid",
    "make_provider",
    "network_backward",
    "network_forward",
    "NetworkParams",
    "NeuralProvider",
    "normalize_log_weights",
    "OracleProvider",
    "pad_or_subsample",
    "PROVIDER_NAMES",
    "save_params",
    "UniformProvider",
    "WeightProvider",
]
