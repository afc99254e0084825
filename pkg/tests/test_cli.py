import json
import logging

import pytest

from linkfold.config import settings
from linkfold.logging_conf import setup_logging
from linkfold.main import main
from linkfold.services.documents import layout_to_doc, load_layout, write_doc
from linkfold.services.foldgen import assemble_layout, sample_torus
from linkfold.services.homology import ScaleChoice, distance_matrix, enclosing_radius, vr_filtration


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def _write(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


@pytest.fixture
def m1_file(tmp_path, capsys):
    path = tmp_path / "m1.json"
    assert _run(capsys, "build", "--m", 1, "--out", path)[0] == 0
    return path


@pytest.fixture
def m2_file(tmp_path, capsys):
    path = tmp_path / "m2.json"
    assert _run(capsys, "build", "--m", 2, "--out", path)[0] == 0
    return path


def test_check_reports_admissible_starts(tmp_path, capsys):
    path = _write(tmp_path / "l.json", {"lengths": [2, 1, 2, 1.6, 1.6]})
    code, report = _run(capsys, "check", path)
    assert code == 0
    assert report["outputs"]["n"] == 5
    assert report["outputs"]["realizable"] is True
    assert report["outputs"]["admissible_starts"] == [1]
    assert report["input_digest"].startswith("sha256:")


def test_check_unrealizable_and_malformed(tmp_path, capsys):
    code, report = _run(capsys, "check", _write(tmp_path / "l.json", {"lengths": [10, 1, 1, 1]}))
    assert code == 0
    assert report["outputs"]["realizable"] is False

    code, report = _run(capsys, "check", _write(tmp_path / "bad.json", {"weights": [1, 2]}))
    assert code == 2
    assert report is None
    code, _ = _run(capsys, "check", tmp_path / "missing.json")
    assert code == 2


def test_build(tmp_path, capsys):
    code, report = _run(capsys, "build", "--m", 2)
    assert code == 0
    assert report["outputs"]["n"] == 10
    assert report["outputs"]["layout"]["angle_triples"] == [[2, 3, 4], [7, 8, 9]]

    path = tmp_path / "out" / "layout.json"
    code, report = _run(capsys, "build", "--m", 1, "--out", path)
    assert code == 0
    assert report["outputs"]["n"] == 5
    assert load_layout(str(path)).n == 5

    assert _run(capsys, "build", "--m", 0)[0] == 2
    assert _run(capsys, "build", "--fold-lengths", "1,2,1")[0] == 2


def test_certify_single_gadget(m1_file, tmp_path, capsys):
    code, report = _run(capsys, "certify", m1_file, "--out", tmp_path / "cert.json")
    assert code == 0
    outputs = report["outputs"]
    assert outputs["degree_matrix"] in ([[1]], [[-1]])
    assert outputs["failures"] == []
    assert outputs["closure"]["verdict"] == "found"
    assert outputs["loop_profiles"][0]["self_touching"] == 1
    assert report["rng_seed"] == settings.SEED
    saved = json.loads((tmp_path / "cert.json").read_text(encoding="utf-8"))
    assert "timings" not in saved
    assert saved["outputs"] == outputs


def test_certify_two_gadgets(m2_file, capsys):
    code, report = _run(capsys, "certify", m2_file, "--samples", 256, "--grid", 8, "--seed", 3)
    assert code == 0
    outputs = report["outputs"]
    assert [abs(v) for row in outputs["degree_matrix"] for v in row] == [1, 0, 0, 1]
    assert outputs["profile"]["embedded"] == 49
    assert outputs["profile"]["self_touching"] == 15
    assert outputs["profile"]["crossing"] == 0
    assert report["rng_seed"] == 3


def test_certify_flags_an_overlapping_layout(tmp_path, capsys):
    chords = [((0.0, 0.0), (3.0, 0.0)), ((0.5, 0.0), (3.5, 0.0))]
    middles = [(1.75, 3.0), (1.75, 5.0)]
    path = str(tmp_path / "overlap.json")
    write_doc(path, layout_to_doc(assemble_layout((2.0, 1.0, 2.0), chords, middles, side=-1)))

    code, report = _run(capsys, "certify", path, "--samples", 256, "--grid", 8, "--trials", 50)
    assert code == 4
    assert report["ok"] is False
    profile = report["outputs"]["profile"]
    assert profile["crossing"] > 0
    crossing = [e for e in profile["non_embedded"] if e["class"] == "crossing"]
    assert crossing and crossing[0]["crossing_bars"]
    assert report["outputs"]["failures"]


def test_certify_output_is_byte_stable(m1_file, tmp_path, capsys):
    out = tmp_path / "cert.json"
    args = ("certify", m1_file, "--samples", 256, "--grid", 8, "--out", out)
    _run(capsys, *args)
    first = out.read_bytes()
    _run(capsys, *args)
    assert out.read_bytes() == first


def test_betti_of_the_fold_loop(m1_file, tmp_path, capsys):
    out = tmp_path / "betti.json"
    filtration = tmp_path / "filtration.txt"
    args = ("betti", m1_file, "--samples", 60, "--filtration-out", filtration, "--out", out)
    code, report = _run(capsys, *args)
    assert code == 0
    outputs = report["outputs"]
    assert outputs["betti"] == [1, 1]
    assert outputs["expected"] == [1, 1]
    assert report["ok"] is True
    (scale,) = outputs["scales"]
    assert scale["k"] == 1 and scale["claimed"] == 1
    assert scale["ratio"] is None or scale["ratio"] >= 5.0
    assert scale["significant"] is True
    assert len(filtration.read_text(encoding="utf-8").splitlines()) == outputs["simplices"]

    first = out.read_bytes()
    _run(capsys, *args)
    assert out.read_bytes() == first


def test_betti_budget_handling(m2_file, capsys):
    layout = load_layout(str(m2_file))
    cloud = [c for _, c in sample_torus(layout, [6, 6], spacing="arc")]
    distances = distance_matrix(cloud)
    # a cone at the enclosing radius, so tetrahedra are certain to appear
    cap = enclosing_radius(distances)
    counts = vr_filtration(cloud, cap, max_dim=2, distances=distances).counts()
    budget = counts[0] + counts[1] + counts[2]

    args = ("betti", m2_file, "--mode", "torus", "--grid", 6, "--max-dim", 2,
            "--max-diameter", repr(cap), "--budget", budget)
    code, report = _run(capsys, *args, "--skip-over-budget")
    assert code == 0
    assert report["outputs"]["skipped"] == [2]
    assert report["outputs"]["max_dim"] == 1
    assert report["outputs"]["simplices"] == budget

    code, report = _run(capsys, *args)
    assert code == 5
    assert report is None


def test_betti_ok_requires_significant_classes(m1_file, capsys, monkeypatch):
    monkeypatch.setattr(ScaleChoice, "significant", lambda self, threshold=None: False)
    code, report = _run(capsys, "betti", m1_file, "--samples", 60)
    assert code == 0
    assert report["outputs"]["betti"] == [1, 1]
    assert report["outputs"]["scales"][0]["significant"] is False
    assert report["ok"] is False


def test_render_is_deterministic(m1_file, tmp_path, capsys):
    for t in ("0", "0.5"):
        a, b = tmp_path / f"a{t}.svg", tmp_path / f"b{t}.svg"
        assert _run(capsys, "render", m1_file, "--t", t, "--out", a)[0] == 0
        assert _run(capsys, "render", m1_file, "--t", t, "--out", b)[0] == 0
        assert a.read_bytes() == b.read_bytes()
        assert a.read_text(encoding="utf-8").startswith("<svg")
    assert (tmp_path / "a0.svg").read_bytes() != (tmp_path / "a0.5.svg").read_bytes()


def test_config_file_overrides(tmp_path, capsys, monkeypatch):
    code, _ = _run(capsys, "--config", _write(tmp_path / "bad.json", {"NOT_A_SETTING": 1}), "build")
    assert code == 2

    monkeypatch.setattr(settings, "FOLD", settings.FOLD)
    fold = _write(tmp_path / "fold.json", {"FOLD": {"la": 2.2, "lb": 0.7, "lc": 1.9}})
    code, report = _run(capsys, "--config", fold, "build", "--m", 1)
    assert code == 0
    assert report["outputs"]["layout"]["gadgets"][0]["fold_lengths"] == [2.2, 0.7, 1.9]


def test_config_file_configures_logging(tmp_path, capsys, monkeypatch):
    for key in ("LOG_LEVEL", "LOG_FORMAT", "LOG_FILE"):
        monkeypatch.setattr(settings, key, getattr(settings, key))
    log_file = tmp_path / "linkfold.log"
    config = _write(
        tmp_path / "logging.json",
        {"LOG_LEVEL": "DEBUG", "LOG_FORMAT": "plain", "LOG_FILE": str(log_file)},
    )
    code, _ = _run(capsys, "--config", config, "build", "--m", 1)
    assert code == 0
    assert logging.getLogger().level == logging.DEBUG
    assert "[Layout] m=1" in log_file.read_text(encoding="utf-8")

    monkeypatch.undo()
    setup_logging()


@pytest.mark.slow
def test_betti_defaults_on_the_loop(m1_file, capsys):
    code, report = _run(capsys, "betti", m1_file)
    assert code == 0
    assert report["outputs"]["points"] == settings.BETTI_POINTS
    assert report["outputs"]["betti"] == [1, 1]
    assert report["outputs"]["scales"][0]["significant"] is True


@pytest.mark.slow
def test_betti_of_the_two_torus(m2_file, capsys):
    code, report = _run(capsys, "betti", m2_file, "--mode", "torus", "--grid", "16,16")
    assert code == 0
    outputs = report["outputs"]
    assert outputs["points"] == 256
    assert outputs["spacing"] == "arc"
    assert outputs["betti"] == [1, 2]
    assert outputs["expected"] == [1, 2]
    (scale,) = outputs["scales"]
    assert scale["claimed"] == 2
    assert scale["significant"] is True
    assert report["ok"] is True
