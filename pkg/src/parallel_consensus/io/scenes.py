from __future__ import annotations

import gzip
import json
import logging
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from parallel_consensus.constants import SCENE_FORMAT_VERSION
from parallel_consensus.exceptions import SceneFormatError
from parallel_consensus.scene import CameraIntrinsics, ModelInstance, Scene

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def dumps_json(data: Any) -> str:
    """Deterministic JSON text. Floats use the shortest round-trip repr."""
    return json.dumps(data, ensure_ascii=False, indent=4, sort_keys=True)


def write_json(data: Any, path: str | Path) -> None:
    """Writes JSON, gzip-compressed when the name ends in ``.gz``.

    The gzip header carries no timestamp, so equal data gives equal bytes.

    Args:
        data (Any): JSON-serializable data.
        path (str | Path): Output path.
    """
    text = dumps_json(data).encode("utf-8")
    path = Path(path)
    if path.suffix == ".gz":
        path.write_bytes(gzip.compress(text, mtime=0))
    else:
        path.write_bytes(text)


def read_json(path: str | Path) -> Any:
    """Reads a file written by ``write_json``.

    Args:
        path (str | Path): Input path.

    Raises:
        SceneFormatError: If the file is not valid (compressed) JSON.

    Returns:
        Any: The data.
    """
    path = Path(path)
    try:
        if path.suffix == ".gz":
            with gzip.open(path, "rt", encoding="utf-8") as f:
                return json.load(f)
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError, EOFError) as e:
        raise SceneFormatError(f"Cannot read {path}: {e}") from e


def scene_to_dict(scene: Scene) -> dict[str, Any]:
    out: dict[str, Any] = {
        "format_version": SCENE_FORMAT_VERSION,
        "task": scene.task,
        "width": scene.width,
        "height": scene.height,
        "seed": scene.seed,
        "observations": scene.observations.tolist(),
    }
    if scene.intrinsics is not None:
        out["K"] = scene.intrinsics.K.ravel().tolist()
    if scene.segments is not None:
        out["segments"] = scene.segments.tolist()
    if scene.gt_labels is not None:
        out["gt_labels"] = scene.gt_labels.tolist()
    if scene.gt_models is not None:
        out["gt_models"] = [m.to_dict() for m in scene.gt_models]
    return out


def scene_from_dict(data: dict[str, Any]) -> Scene:
    """Builds a scene from its file representation.

    Args:
        data (dict[str, Any]): The parsed scene file.

    Raises:
        SceneFormatError: If the version is unsupported or a field is
            missing or invalid.

    Returns:
        Scene: The scene.
    """
    version = data.get("format_version")
    if version != SCENE_FORMAT_VERSION:
        raise SceneFormatError(
            f"Unsupported scene format version {version!r}."
        )
    try:
        K = data.get("K")
        models = data.get("gt_models")
        labels = data.get("gt_labels")
        return Scene(
            task=data["task"],
            observations=np.asarray(data["observations"], dtype=np.float64),
            width=int(data["width"]),
            height=int(data["height"]),
            segments=(
                None
                if data.get("segments") is None
                else np.asarray(data["segments"], dtype=np.float64)
            ),
            gt_labels=(
                None if labels is None else np.asarray(labels, dtype=np.int64)
            ),
            gt_models=(
                None
                if models is None
                else tuple(ModelInstance.from_dict(m) for m in models)
            ),
            intrinsics=(
                None
                if K is None
                else CameraIntrinsics(np.asarray(K, np.float64).reshape(3, 3))
            ),
            seed=data.get("seed"),
        )
    except KeyError as e:
        raise SceneFormatError(f"Scene file lacks field {e}.") from None
    except ValueError as e:
        raise SceneFormatError(f"Invalid scene file: {e}") from e


def save_scene(scene: Scene, path: str | Path) -> None:
    write_json(scene_to_dict(scene), path)


def load_scene(path: str | Path) -> Scene:
    return scene_from_dict(read_json(path))


def scene_file_name(index: int, compress: bool = False) -> str:
    return f"scene_{index:05d}.json" + (".gz" if compress else "")


def write_scene_set(
    scenes: Sequence[Scene],
    out_dir: str | Path,
    config: dict[str, Any] | None = None,
    seed: int | None = None,
    compress: bool = False,
) -> Path:
    """Writes one file per scene and a manifest listing them.

    Args:
        scenes (Sequence[Scene]): The scenes.
        out_dir (str | Path): Target directory, created if missing.
        config (dict[str, Any] | None): Generator settings to echo.
        seed (int | None): Root seed to echo.
        compress (bool): Gzip the scene files.

    Returns:
        Path: The manifest path.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = []
    for i, scene in enumerate(scenes):
        name = scene_file_name(i, compress)
        save_scene(scene, out / name)
        names.append(name)
    manifest = {
        "format_version": SCENE_FORMAT_VERSION,
        "scenes": names,
        "config": config,
        "seed": seed,
    }
    path = out / MANIFEST_NAME
    write_json(manifest, path)
    logger.info("Wrote %d scenes to %s.", len(names), out)
    return path


def read_manifest(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    manifest = read_json(path)
    if not isinstance(manifest, dict) or "scenes" not in manifest:
        raise SceneFormatError(f"{path} is not a scene manifest.")
    return manifest


def load_scene_set(path: str | Path) -> list[Scene]:
    """Reads the scenes listed in a manifest, or a single scene file.

    Args:
        path (str | Path): A manifest, a directory holding one or a scene
            file.

    Raises:
        SceneFormatError: If a file is missing or malformed.

    Returns:
        list[Scene]: The scenes in manifest order.
    """
    path = Path(path)
    if path.is_file() and path.name != MANIFEST_NAME:
        return [load_scene(path)]
    manifest = read_manifest(path)
    root = path if path.is_dir() else path.parent
    return [load_scene(root / name) for name in manifest["scenes"]]
