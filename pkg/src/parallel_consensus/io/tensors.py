import json
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt

from parallel_consensus.constants import WEIGHTS_FORMAT_VERSION, WEIGHTS_MAGIC
from parallel_consensus.exceptions import WeightsFormatError

FloatArray = npt.NDArray[np.float64]

_DTYPE = np.dtype("<f8")


def encode_tensors(
    header: dict[str, Any], tensors: dict[str, FloatArray]
) -> bytes:
    """Serializes tensors into the binary container: the magic line, a JSON
    header line holding the manifest, then little-endian float64 data in
    manifest order.

    Args:
        header (dict[str, Any]): Metadata; ``format_version`` and
            ``manifest`` are filled in.
        tensors (dict[str, FloatArray]): Named tensors, in manifest order.

    Returns:
        bytes: The container.
    """
    full = dict(header)
    full["format_version"] = WEIGHTS_FORMAT_VERSION
    full["manifest"] = [[name, list(t.shape)] for name, t in tensors.items()]
    head = json.dumps(full, sort_keys=True, separators=(",", ":"))
    body = b"".join(
        np.ascontiguousarray(t, dtype=_DTYPE).tobytes()
        for t in tensors.values()
    )
    return WEIGHTS_MAGIC + head.encode("utf-8") + b"\n" + body


def decode_tensors(data: bytes) -> tuple[dict[str, Any], dict[str, FloatArray]]:
    """Inverse of ``encode_tensors``.

    Args:
        data (bytes): The container.

    Raises:
        WeightsFormatError: If the magic, version or length is wrong.

    Returns:
        tuple[dict[str, Any], dict[str, FloatArray]]: The header and the
            tensors in manifest order.
    """
    if not data.startswith(WEIGHTS_MAGIC):
        raise WeightsFormatError("Not a weights container (bad magic).")
    rest = data[len(WEIGHTS_MAGIC) :]
    newline = rest.find(b"\n")
    if newline < 0:
        raise WeightsFormatError("Weights container has no header line.")
    try:
        header = json.loads(rest[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise WeightsFormatError(f"Unreadable weights header: {e}") from e
    version = header.get("format_version")
    if version != WEIGHTS_FORMAT_VERSION:
        raise WeightsFormatError(
            f"Unsupported weights format version {version!r}."
        )

    body = rest[newline + 1 :]
    tensors: dict[str, FloatArray] = {}
    offset = 0
    for name, shape in header.get("manifest", []):
        count = int(np.prod(shape, dtype=np.int64))
        nbytes = count * _DTYPE.itemsize
        if offset + nbytes > len(body):
            raise WeightsFormatError(f"Weights container truncated at {name}.")
        tensors[name] = (
            np.frombuffer(body, dtype=_DTYPE, count=count, offset=offset)
            .reshape(shape)
            .astype(np.float64)
        )
        offset += nbytes
    if offset != len(body):
        raise WeightsFormatError("Weights container has trailing bytes.")
    return header, tensors


def write_tensors(
    path: str | Path, header: dict[str, Any], tensors: dict[str, FloatArray]
) -> None:
    Path(path).write_bytes(encode_tensors(header, tensors))


def read_tensors(
    path: str | Path,
) -> tuple[dict[str, Any], dict[str, FloatArray]]:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise WeightsFormatError(f"Cannot read {path}: {e}") from e
    return decode_tensors(data)
