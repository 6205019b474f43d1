"""End-to-end tests for the command line interface.

Commands run in-process through ``spdrose.cli.main`` so exit codes and
output can be checked without spawning interpreters.
"""

import json

import numpy as np
import pytest

from spdrose import load_dataset, make_benchmark, save_dataset, write_pgm, write_ppm
from spdrose.cli import main

from conftest import random_spd


def save_benchmark_dataset(tmp_path, name, n_classes=2, per_class=12, seed=0):
    bench = make_benchmark(
        n_classes, 3, per_class, 0, separation=2.5, spread=0.08, seed=seed
    )
    return save_dataset(
        tmp_path / name, list(bench.train_points), list(bench.train_labels)
    )


def write_config(tmp_path, **overrides):
    payload = dict(reps=2, train_per_class=8, epochs=25, seed=3)
    payload.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(payload))
    return path


def test_extract_gray_grid(tmp_path, capsys):
    rng = np.random.default_rng(4)
    for name in ("a.pgm", "b.pgm"):
        write_pgm(tmp_path / name, rng.uniform(size=(10, 10)))
    code = main(
        [
            "extract",
            str(tmp_path / "a.pgm"),
            str(tmp_path / "b.pgm"),
            "--features", "intensity5",
            "--rows", "2", "--cols", "2",
            "--labels", "0,1",
            "--out", str(tmp_path / "data"),
        ]
    )
    assert code == 0
    assert "8 descriptor(s)" in capsys.readouterr().out
    points, labels = load_dataset(tmp_path / "data" / "manifest.json")
    assert len(points) == 8
    assert all(p.dim == 5 for p in points)
    assert labels.tolist() == [0, 0, 0, 0, 1, 1, 1, 1]


def test_extract_color_whole_image(tmp_path, capsys):
    rng = np.random.default_rng(9)
    write_ppm(tmp_path / "c.ppm", rng.uniform(size=(12, 12, 3)))
    code = main(
        [
            "extract", str(tmp_path / "c.ppm"),
            "--features", "color11",
            "--rows", "1", "--cols", "1",
            "--out", str(tmp_path / "data"),
        ]
    )
    assert code == 0
    points, _ = load_dataset(tmp_path / "data" / "manifest.json")
    assert len(points) == 1
    assert points[0].dim == 11


def test_extract_suffix_mismatch_exits_2(tmp_path, capsys):
    rng = np.random.default_rng(2)
    write_ppm(tmp_path / "c.ppm", rng.uniform(size=(10, 10, 3)))
    code = main(
        [
            "extract", str(tmp_path / "c.ppm"),
            "--features", "intensity5",
            "--out", str(tmp_path / "data"),
        ]
    )
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_extract_label_count_mismatch_exits_2(tmp_path, capsys):
    rng = np.random.default_rng(2)
    write_pgm(tmp_path / "a.pgm", rng.uniform(size=(10, 10)))
    code = main(
        [
            "extract", str(tmp_path / "a.pgm"),
            "--labels", "0,1",
            "--out", str(tmp_path / "data"),
        ]
    )
    assert code == 2
    assert "1 image(s)" in capsys.readouterr().err


def test_synth_writes_unlabeled_points(tmp_path, capsys):
    rng = np.random.default_rng(11)
    manifest = save_dataset(
        tmp_path / "base", [random_spd(rng, 3) for _ in range(6)], [0, 0, 0, 1, 1, 1]
    )
    code = main(
        [
            "synth", "--data", str(manifest),
            "--out", str(tmp_path / "aug"),
            "--count", "5", "--seed", "3",
        ]
    )
    assert code == 0
    assert "5 synthetic point(s)" in capsys.readouterr().out
    points, labels = load_dataset(tmp_path / "aug" / "manifest.json")
    assert len(points) == 5
    assert labels.tolist() == [0] * 5


def test_train_eval_round_trip(tmp_path, capsys):
    bench = make_benchmark(2, 3, 12, 10, separation=2.5, spread=0.08, seed=1)
    train_manifest = save_dataset(
        tmp_path / "train", list(bench.train_points), list(bench.train_labels)
    )
    test_manifest = save_dataset(
        tmp_path / "test", list(bench.test_points), list(bench.test_labels)
    )
    code = main(
        [
            "train", "--train", str(train_manifest),
            "--out", str(tmp_path / "model"),
            "--k", "48", "--epochs", "60", "--seed", "5",
        ]
    )
    assert code == 0
    assert (tmp_path / "model" / "model.json").exists()
    assert (tmp_path / "model" / "classifier.json").exists()
    capsys.readouterr()

    code = main(
        ["eval", "--model", str(tmp_path / "model"), "--test", str(test_manifest)]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["total"] == 20
    assert float(payload["accuracy"]) >= 0.9


def test_train_with_synthetic_pool(tmp_path, capsys):
    manifest = save_benchmark_dataset(tmp_path, "train", per_class=8)
    code = main(
        [
            "train", "--train", str(manifest),
            "--out", str(tmp_path / "model"),
            "--synthetic", "4", "--k", "32", "--epochs", "30",
        ]
    )
    assert code == 0
    assert "pool 20" in capsys.readouterr().out


def test_run_writes_report(tmp_path, capsys):
    manifest = save_benchmark_dataset(tmp_path, "data")
    config = write_config(tmp_path)
    out = tmp_path / "report.json"
    code = main(
        [
            "run", "--data", str(manifest),
            "--config", str(config),
            "--out", str(out),
        ]
    )
    assert code == 0
    assert "mean accuracy" in capsys.readouterr().out
    payload = json.loads(out.read_text())
    assert payload["format"] == "spdrose.report"
    assert len(payload["records"]) == 2


def test_run_stdout_and_determinism(tmp_path, capsys):
    manifest = save_benchmark_dataset(tmp_path, "data")
    config = write_config(tmp_path)
    argv = ["run", "--data", str(manifest), "--config", str(config)]
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    second = capsys.readouterr().out
    assert first == second
    assert json.loads(first)["config"]["seed"] == 3


def test_run_seed_override(tmp_path, capsys):
    manifest = save_benchmark_dataset(tmp_path, "data")
    config = write_config(tmp_path)
    code = main(
        [
            "run", "--data", str(manifest),
            "--config", str(config),
            "--seed", "99",
        ]
    )
    assert code == 0
    assert json.loads(capsys.readouterr().out)["config"]["seed"] == 99


def test_run_missing_config_exits_2(tmp_path, capsys):
    manifest = save_benchmark_dataset(tmp_path, "data")
    code = main(
        ["run", "--data", str(manifest), "--config", str(tmp_path / "nope.json")]
    )
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_run_corrupt_manifest_exits_3(tmp_path, capsys):
    bad = tmp_path / "manifest.json"
    bad.write_text("{broken")
    code = main(["run", "--data", str(bad)])
    assert code == 3
    assert "error:" in capsys.readouterr().err


def test_degrade_report(tmp_path, capsys):
    manifest = save_benchmark_dataset(tmp_path, "data")
    config = write_config(tmp_path, reps=1, epochs=20)
    out = tmp_path / "degradation.json"
    code = main(
        [
            "degrade", "--data", str(manifest),
            "--config", str(config),
            "--counts", "0,1", "--budget", "4",
            "--out", str(out),
        ]
    )
    assert code == 0
    console = capsys.readouterr().out
    assert "ROSE means:" in console
    assert "ROSES means:" in console
    payload = json.loads(out.read_text())
    assert payload["format"] == "spdrose.degradation_report"
    assert set(payload["means"]) == {"ROSE", "ROSES"}


def test_degrade_excessive_count_exits_3(tmp_path, capsys):
    manifest = save_benchmark_dataset(tmp_path, "data")
    config = write_config(tmp_path, reps=1)
    code = main(
        [
            "degrade", "--data", str(manifest),
            "--config", str(config),
            "--counts", "2",
        ]
    )
    assert code == 3
    assert "error:" in capsys.readouterr().err


def test_degrade_bad_counts_exits_2(tmp_path, capsys):
    manifest = save_benchmark_dataset(tmp_path, "data")
    code = main(["degrade", "--data", str(manifest), "--counts", "a,b"])
    assert code == 2
    assert "integers" in capsys.readouterr().err


def test_jl_check_sweep(tmp_path, capsys):
    rng = np.random.default_rng(21)
    manifest = save_dataset(
        tmp_path / "data", [random_spd(rng, 3) for _ in range(10)], [0] * 10
    )
    code = main(
        [
            "jl-check", "--data", str(manifest),
            "--k", "8,32,128", "--epsilon", "0.49",
        ]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert [entry["k"] for entry in payload] == [8, 32, 128]
    fractions = [entry["fraction_within"] for entry in payload]
    assert fractions == sorted(fractions)
    assert all(entry["pair_count"] == 45 for entry in payload)


def test_jl_check_single_k_is_object(tmp_path, capsys):
    rng = np.random.default_rng(22)
    manifest = save_dataset(
        tmp_path / "data", [random_spd(rng, 3) for _ in range(6)], [0] * 6
    )
    code = main(["jl-check", "--data", str(manifest), "--k", "32"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["k"] == 32


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2
