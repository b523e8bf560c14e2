import json
import warnings
from pathlib import Path

import pytest

from tabletidy.cli import main
from tabletidy.errors import SymmetryWarning
from tabletidy.fixtures import write_fixture_files


@pytest.fixture(scope="module")
def fixture_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("fixtures")
    write_fixture_files(path)
    return path


@pytest.fixture(autouse=True)
def quiet_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SymmetryWarning)
        yield


def test_run_synthetic_provider(fixture_dir, tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["run", "--scene", str(fixture_dir / "dining_scene.json"),
                 "--provider", "synthetic:place-setting", "--seed", "7",
                 "--out", str(out)])
    assert code == 0
    stdout = capsys.readouterr().out
    assert "A fork, a knife, a plate, and a spoon, top-down" in stdout
    for name in ("plan.json", "sim_report.json", "before.ppm", "after.ppm",
                 "audit.jsonl", "layout_goal.json", "goal_selection.json"):
        assert (out / name).exists(), name
    report = json.loads((out / "sim_report.json").read_text())
    assert report["valid"] is True


def test_run_byte_identical_across_reruns(fixture_dir, tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["run", "--scene", str(fixture_dir / "dining_scene.json"),
                     "--provider", "synthetic:place-setting", "--seed", "5",
                     "--out", str(out)]) == 0
        outs.append(out)
    files_a = sorted(p.name for p in outs[0].iterdir())
    files_b = sorted(p.name for p in outs[1].iterdir())
    assert files_a == files_b
    for name in files_a:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name


def test_run_fixture_provider(fixture_dir, tmp_path):
    code = main(["run", "--scene", str(fixture_dir / "dining_scene.json"),
                 "--provider", f"fixture:{fixture_dir / 'candidates'}",
                 "--out", str(tmp_path / "out")])
    assert code == 0


def test_run_missing_scene_is_invalid_input(tmp_path):
    code = main(["run", "--scene", str(tmp_path / "nope.json")])
    assert code == 2


def test_run_malformed_scene_is_invalid_input(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"image_width": 4}))
    assert main(["run", "--scene", str(bad)]) == 2


def test_run_exhausted_provider_exit_code(fixture_dir, tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    code = main(["run", "--scene", str(fixture_dir / "dining_scene.json"),
                 "--provider", f"fixture:{empty}"])
    assert code == 3


def test_run_wrong_count_provider_exit_code(fixture_dir, tmp_path, capsys):
    # office candidates have 3 movable objects, the dining scene needs 4
    code = main(["run", "--scene", str(fixture_dir / "dining_scene.json"),
                 "--provider", "synthetic:office", "--seed", "1"])
    assert code == 0  # office template still generates the 4 prompted nouns
    capsys.readouterr()


def test_baseline_commands(fixture_dir, tmp_path):
    for method in ("random", "geometric"):
        out = tmp_path / method
        code = main(["baseline", method,
                     "--scene", str(fixture_dir / "dining_scene.json"),
                     "--seed", "3", "--out", str(out)])
        assert code == 0
        assert (out / "layout.json").exists()
        assert (out / "layout.ppm").exists()


def test_eval_missing_writes_report(fixture_dir, tmp_path, capsys):
    out = tmp_path / "eval"
    code = main(["eval-missing",
                 "--bundle", str(fixture_dir / "dining_eval_bundle.json"),
                 "--provider", "synthetic:place-setting",
                 "--out", str(out)])
    assert code == 0
    table = (out / "report.txt").read_text()
    assert "pipeline" in table and "geometric" in table and "random" in table
    assert "/ -" in table  # plate orientation exempt
    report = json.loads((out / "report.json").read_text())
    assert set(report) == {"pipeline", "geometric", "random"}
    assert report["pipeline"]["plate"]["median_deg"] is None


def test_render_from_scene_and_layout(fixture_dir, tmp_path):
    ppm = tmp_path / "scene.ppm"
    assert main(["render", "--scene", str(fixture_dir / "office_scene.json"),
                 "--out", str(ppm)]) == 0
    assert ppm.read_bytes().startswith(b"P6\n256 256\n255\n")

    run_out = tmp_path / "run"
    main(["run", "--scene", str(fixture_dir / "dining_scene.json"),
          "--provider", "synthetic:place-setting", "--out", str(run_out)])
    ppm2 = tmp_path / "layout.ppm"
    assert main(["render", "--layout", str(run_out / "layout_goal.json"),
                 "--out", str(ppm2), "--no-markers"]) == 0
    assert ppm2.exists()


def test_zero_movable_scene_empty_plan(tmp_path):
    import numpy as np

    from tabletidy.masks import BinaryMask
    from tabletidy.scene import CameraModel, SceneDescription, save_scene
    from tabletidy.shapes import make_object
    from tabletidy.transforms import Pose2D

    rng = np.random.default_rng(0)
    scene = SceneDescription(
        image_width=128, image_height=128,
        objects=(make_object("b", "basket", Pose2D(64, 64), 128, 128, rng,
                             movable=False),),
        table_edge_band=BinaryMask.empty(128, 128),
        camera=CameraModel(fx=100, fy=100, cx=64, cy=64, table_depth=0.5))
    path = tmp_path / "pinned.json"
    save_scene(scene, path)
    out = tmp_path / "out"
    code = main(["run", "--scene", str(path), "--out", str(out)])
    assert code == 0
    plan = json.loads((out / "plan.json").read_text())
    assert plan["moves"] == []


def test_run_through_http_stub(fixture_dir, tmp_path, monkeypatch):
    from tabletidy.providers.stub_server import serve
    from tabletidy.providers.synthetic import SyntheticProvider

    with serve(SyntheticProvider("place-setting")) as server:
        code = main(["run", "--scene", str(fixture_dir / "dining_scene.json"),
                     "--provider", f"http:{server.url}", "--seed", "4",
                     "--out", str(tmp_path / "out")])
        assert code == 0
        # the environment variable overrides a bogus CLI endpoint
        monkeypatch.setenv("TABLETIDY_PROVIDER_URL", server.url)
        code = main(["run", "--scene", str(fixture_dir / "dining_scene.json"),
                     "--provider", "http:http://127.0.0.1:1", "--seed", "4",
                     "--out", str(tmp_path / "out-env")])
        assert code == 0


def test_unreachable_http_provider_exit_code(fixture_dir):
    code = main(["run", "--scene", str(fixture_dir / "dining_scene.json"),
                 "--provider", "http:http://127.0.0.1:1"])
    assert code == 3


def test_unresolvable_layout_exit_code(fixture_dir, tmp_path, capsys):
    # an absurd collision margin makes every pair overlap forever
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"margin": 80.0, "layout_max_iter": 10}))
    code = main(["run", "--scene", str(fixture_dir / "dining_scene.json"),
                 "--provider", "synthetic:place-setting",
                 "--config", str(config)])
    assert code == 4
    err = capsys.readouterr().err
    assert "layout" in err and "Unresolvable" in err


def test_config_file_with_cli_override(fixture_dir, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"seed": 1, "provider": "synthetic:office"}))
    out = tmp_path / "out"
    code = main(["run", "--scene", str(fixture_dir / "dining_scene.json"),
                 "--config", str(config),
                 "--provider", "synthetic:place-setting", "--out", str(out)])
    assert code == 0
    written = json.loads((out / "config.json").read_text())
    assert written["provider"] == "synthetic:place-setting"
    assert written["seed"] == 1
