import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from lcarena.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture(scope="module")
def toy(tmp_path_factory):
    root = tmp_path_factory.mktemp("toy")
    shutil.copytree(CONFIGS, root / "configs")
    assert main(["synthgen", "--config", str(root / "configs/toy_synth.json"),
                 "--out", str(root / "toy_data")]) == 0
    cfg = json.loads((root / "configs/toy_experiment.json").read_text())
    cfg["agents"] = cfg["agents"][:3]
    (root / "configs/small.json").write_text(json.dumps(cfg))
    assert main(["run", "--config", str(root / "configs/small.json")]) == 0
    return root


def test_run_artifacts(toy):
    out = toy / "toy_results"
    for name in ("report.json", "per_dataset.csv", "leaderboard.csv"):
        assert (out / name).is_file()
    assert len(list((out / "transcripts").glob("*.jsonl"))) == 3 * 10 * 3


def test_leaderboard_csv_header(toy, capsys):
    assert main(["leaderboard", "--report", str(toy / "toy_results/report.json"),
                 "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "agent," + ",".join(f"d{i:03d}" for i in range(10)) + ",avg"
    assert len(lines) == 4


def test_leaderboard_json(toy, capsys):
    assert main(["leaderboard", "--report", str(toy / "toy_results/report.json"),
                 "--format", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)["rows"]
    assert [r["rank"] for r in rows] == [1, 2, 3]


def test_score_then_leaderboard(toy, tmp_path):
    assert main(["score", "--transcripts", str(toy / "toy_results/transcripts"),
                 "--out", str(tmp_path / "r.json")]) == 0
    again = json.loads((tmp_path / "r.json").read_text())
    first = json.loads((toy / "toy_results/report.json").read_text())
    assert again["ranking"] == first["ranking"]


def test_replay(toy, capsys):
    f = sorted((toy / "toy_results/transcripts").glob("*.jsonl"))[0]
    assert main(["replay", "--transcript", str(f), "--data", str(toy / "toy_data")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["comparable"] and out["alc"] == out["stored_alc"]
    assert main(["replay", "--transcript", str(f), "--data", str(toy / "toy_data"),
                 "--alc-mode", "log", "--t0", "2"]) == 0
    cap = capsys.readouterr()
    assert not json.loads(cap.out)["comparable"] and "not comparable" in cap.err


def test_replay_tampered_exit_1(toy, tmp_path):
    f = sorted((toy / "toy_results/transcripts").glob("*.jsonl"))[0]
    blob = f.read_bytes().replace(b'"algo":', b'"algo": ', 1)
    (tmp_path / "t.jsonl").write_bytes(blob)
    assert main(["replay", "--transcript", str(tmp_path / "t.jsonl"),
                 "--data", str(toy / "toy_data")]) == 1


def test_run_without_meta_dataset_exit_2(tmp_path):
    cfg = {"agents": [{"id": "rs", "type": "random_search"}]}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    assert main(["run", "--config", str(tmp_path / "c.json")]) == 2
    cfg["meta_dataset"] = "missing"
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    assert main(["run", "--config", str(tmp_path / "c.json")]) == 2


def test_missing_config_exit_2(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.json")]) == 2


@pytest.mark.parametrize("argv", [[], ["bogus"], ["leaderboard"],
                                  ["leaderboard", "--report", "x", "--format", "xml"],
                                  ["run", "--config", "x", "--alc-mode", "cubic"]])
def test_usage_errors_exit_1(argv, capsys):
    assert main(argv) == 1


def test_invalid_config_exit_1(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps({"agents": [{"id": "a", "type": "oracle"}]}))
    assert main(["run", "--config", str(tmp_path / "c.json")]) == 1
    (tmp_path / "bad.json").write_text("{not json")
    assert main(["synthgen", "--config", str(tmp_path / "bad.json"), "--out", str(tmp_path)]) == 1


def test_global_flags_anywhere(toy, tmp_path):
    assert main(["--seed", "3", "synthgen", "--config", str(toy / "configs/toy_synth.json"),
                 "--out", str(tmp_path / "a")]) == 0
    assert main(["synthgen", "--config", str(toy / "configs/toy_synth.json"),
                 "--out", str(tmp_path / "b"), "--seed", "3"]) == 0
    assert (tmp_path / "a/meta.json").read_bytes() == (tmp_path / "b/meta.json").read_bytes()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "lcarena", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "lcarena" in proc.stdout
