import json

import pytest

from parallel_consensus.constants import SCENE_FORMAT_VERSION
from parallel_consensus.exceptions import SceneFormatError
from parallel_consensus.io import (
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
from parallel_consensus.scene import Scene


class TestSceneFiles:
    @pytest.mark.parametrize("suffix", [".json", ".json.gz"])
    def test_round_trip(self, planted_scene: Scene, tmp_path, suffix):
        path = tmp_path / f"scene{suffix}"
        save_scene(planted_scene, path)
        loaded = load_scene(path)
        assert loaded == planted_scene
        assert loaded.gt_models == planted_scene.gt_models

    def test_unlabelled_scene(self, homography_scene: Scene):
        bare = homography_scene.replace(gt_labels=None, gt_models=None)
        data = scene_to_dict(bare)
        assert "gt_labels" not in data
        assert "gt_models" not in data
        assert scene_from_dict(data) == bare

    def test_output_is_deterministic(self, vp_scene: Scene, tmp_path):
        for name in ("a.json.gz", "b.json.gz", "a.json", "b.json"):
            save_scene(vp_scene, tmp_path / name)
        assert (tmp_path / "a.json.gz").read_bytes() == (
            tmp_path / "b.json.gz"
        ).read_bytes()
        assert (tmp_path / "a.json").read_bytes() == (
            tmp_path / "b.json"
        ).read_bytes()

    def test_wrong_version(self, vp_scene: Scene):
        data = scene_to_dict(vp_scene)
        data["format_version"] = SCENE_FORMAT_VERSION + 1
        with pytest.raises(SceneFormatError, match="version"):
            scene_from_dict(data)

    def test_missing_field(self, vp_scene: Scene):
        data = scene_to_dict(vp_scene)
        del data["observations"]
        with pytest.raises(SceneFormatError, match="observations"):
            scene_from_dict(data)

    @pytest.mark.parametrize(
        "content",
        [b"{not json", b""],
        ids=["garbage", "empty"],
    )
    def test_unreadable(self, tmp_path, content):
        path = tmp_path / "scene.json"
        path.write_bytes(content)
        with pytest.raises(SceneFormatError):
            load_scene(path)

    def test_corrupt_gzip(self, tmp_path):
        path = tmp_path / "scene.json.gz"
        path.write_bytes(b"not gzip at all")
        with pytest.raises(SceneFormatError):
            read_json(path)


class TestSceneSets:
    def test_write_and_load(self, vp_scene, single_vp_scene, tmp_path):
        scenes = [vp_scene, single_vp_scene]
        manifest_path = write_scene_set(
            scenes, tmp_path / "set", config={"task": "vp"}, seed=7
        )
        assert manifest_path == tmp_path / "set" / MANIFEST_NAME
        manifest = read_manifest(tmp_path / "set")
        assert manifest["scenes"] == ["scene_00000.json", "scene_00001.json"]
        assert manifest["seed"] == 7
        assert manifest["config"] == {"task": "vp"}

        assert load_scene_set(tmp_path / "set") == scenes
        assert load_scene_set(manifest_path) == scenes
        single = load_scene_set(tmp_path / "set" / "scene_00001.json")
        assert single == [single_vp_scene]

    def test_compressed(self, vp_scene: Scene, tmp_path):
        write_scene_set([vp_scene], tmp_path, compress=True)
        assert (tmp_path / "scene_00000.json.gz").exists()
        assert load_scene_set(tmp_path) == [vp_scene]

    def test_not_a_manifest(self, tmp_path):
        path = tmp_path / MANIFEST_NAME
        write_json({"task": "vp"}, path)
        with pytest.raises(SceneFormatError, match="manifest"):
            read_manifest(path)

    def test_missing_scene_file(self, vp_scene: Scene, tmp_path):
        write_scene_set([vp_scene], tmp_path)
        (tmp_path / "scene_00000.json").unlink()
        with pytest.raises(SceneFormatError):
            load_scene_set(tmp_path)


class TestJson:
    def test_sorted_keys(self, tmp_path):
        write_json({"b": 1, "a": [0.1, 2]}, tmp_path / "x.json")
        text = (tmp_path / "x.json").read_text()
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": [0.1, 2], "b": 1}
