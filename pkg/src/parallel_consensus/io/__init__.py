# Results files live in parallel_consensus.io.results, imported directly:
# they depend on the pipeline, which depends on the tensor container here.
from parallel_consensus.io.scenes import (
    MANIFEST_NAME,
    load_scene,
    load_scene_set,
    read_json,
    read_manifest,
    save_scene,
    scene_from_dict,
    scene_to_dict,
    write_json,
    write_scene_set,
)
from parallel_consensus.io.tensors import (
    decode_tensors,
    encode_tensors,
    read_tensors,
    write_tensors,
)
