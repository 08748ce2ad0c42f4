from parallel_consensus.utils.hashing import hash_arrays
from parallel_consensus.utils.retry import retry
from parallel_consensus.utils.streams import substream
