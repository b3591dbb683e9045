import pytest

from glens.assets import make_builtin_backgrounds, make_builtin_icon_library
from glens.cropgen import CropConfig, plan_crop
from glens.geometry import Point
from glens.mockpred import emit_mock_predictions
from glens.scenegen import generate_scene
from glens.schemas import validate_record
from glens.taxonomy import ClassifierConfig, ResponseCategory, classify


@pytest.fixture(scope="module")
def scene_set(tmp_path_factory):
    root = tmp_path_factory.mktemp("mockpred")
    icons = make_builtin_icon_library(root / "icons")
    bgs = make_builtin_backgrounds(root / "bgs", 640, 400)
    manifests = {}
    tasks = []
    for i in range(10):
        manifest, _ = generate_scene(
            bgs[i % 4], icons, n=5, seed=100 + i,
            scale_range=(0.06, 0.12), scene_id=f"scene-{i:05d}",
        )
        manifests[manifest.scene_id] = manifest
        tasks.append({
            "scene_id": manifest.scene_id,
            "image": f"images/{manifest.scene_id}.png",
            "instruction": manifest.instruction,
        })
    return tasks, manifests


def test_records_pass_schema(scene_set):
    tasks, manifests = scene_set
    for mode in ("target-center", "fixed-center", "offset", "noisy"):
        for record in emit_mock_predictions(tasks, manifests, mode, seed=1):
            assert validate_record(record, "predictions") == [], mode


def test_deterministic(scene_set):
    tasks, manifests = scene_set
    a = emit_mock_predictions(tasks, manifests, "noisy", seed=42)
    b = emit_mock_predictions(tasks, manifests, "noisy", seed=42)
    assert a == b
    c = emit_mock_predictions(tasks, manifests, "noisy", seed=43)
    assert a != c


def test_fixed_center_contract(scene_set):
    tasks, manifests = scene_set
    for record in emit_mock_predictions(tasks, manifests, "fixed-center", seed=1):
        assert record["pred"] == {"x": 0.5, "y": 0.5}
        assert record["x_digit_logits"][5] == 1.0
        assert sum(record["x_digit_logits"]) == 1.0


def test_target_center_classifies_correct(scene_set):
    tasks, manifests = scene_set
    for record in emit_mock_predictions(tasks, manifests, "target-center", seed=1):
        manifest = manifests[record["scene_id"]]
        result = classify(
            Point(record["pred"]["x"], record["pred"]["y"]),
            manifest.target_bbox,
            manifest.distractors(),
        )
        assert result.category is ResponseCategory.CORRECT


def test_offset_classifies_biased_under_default_tau(scene_set):
    tasks, manifests = scene_set
    for record in emit_mock_predictions(tasks, manifests, "offset", seed=1):
        manifest = manifests[record["scene_id"]]
        result = classify(
            Point(record["pred"]["x"], record["pred"]["y"]),
            manifest.target_bbox,
            manifest.distractors(),
            ClassifierConfig(tau=0.05),
        )
        assert result.category is ResponseCategory.BIASED


def test_crop_oracle_roundtrip(scene_set):
    tasks, manifests = scene_set
    first = emit_mock_predictions(tasks, manifests, "offset", seed=1)
    crop_tasks = []
    for task, record in zip(tasks, first):
        manifest = manifests[record["scene_id"]]
        window = plan_crop(
            Point(record["pred"]["x"], record["pred"]["y"]),
            manifest.dims,
            CropConfig(0.8),
        )
        crop_tasks.append({**task, "crop_window": window.to_dict()})
    second = emit_mock_predictions(crop_tasks, manifests, "crop-oracle", seed=1)
    for record in second:
        assert record["pass"] == "crop"
        assert "crop_window" in record
        assert validate_record(record, "predictions") == []


def test_unknown_mode_rejected(scene_set):
    tasks, manifests = scene_set
    with pytest.raises(ValueError):
        emit_mock_predictions(tasks, manifests, "telepathy", seed=1)


def test_unknown_scene_raises(scene_set):
    _, manifests = scene_set
    stray = [{"scene_id": "nope", "image": "x.png", "instruction": "Click."}]
    with pytest.raises(KeyError):
        emit_mock_predictions(stray, manifests, "noisy", seed=1)
