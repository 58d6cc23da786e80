import json
import sys
from pathlib import Path

import numpy as np
import pytest

from kaddshap.cli import main

SERVER = Path(__file__).parent / "protoserver.py"


@pytest.fixture
def dataset(tmp_path):
    rng = np.random.default_rng(0)
    path = tmp_path / "toy.csv"
    lines = ["a,b,c,d,y"]
    for _ in range(40):
        x = rng.normal(size=4)
        y = 1.5 * x[0] - 2.0 * x[1] + 0.5 * x[2] * x[3]
        lines.append(",".join(f"{v:.6f}" for v in (*x, y)))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_exact_prints_attributions(dataset, capsys):
    code = main([
        "exact", "--dataset", str(dataset), "--target", "y",
        "--model", "linear", "--instance", "0",
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "method: exact" in out
    assert "efficiency gap" in out


def test_explain_kadd_writes_reports(dataset, tmp_path):
    out_dir = tmp_path / "reports"
    code = main([
        "explain", "--dataset", str(dataset), "--target", "y",
        "--model", "linear", "--instance", "1", "--method", "kadd",
        "--k", "2", "--budget", "12", "--seed", "3",
        "--out", str(out_dir),
    ])
    assert code == 0
    assert (out_dir / "attributions.csv").exists()
    assert (out_dir / "interactions.csv").exists()


def test_explain_kernel_with_json_instance(dataset, capsys):
    code = main([
        "explain", "--dataset", str(dataset), "--target", "y",
        "--model", "linear", "--method", "kernel", "--budget", "10",
        "--instance", "[0.1, -0.2, 0.3, 0.4]", "--seed", "1",
    ])
    assert code == 0
    assert "method: kernel" in capsys.readouterr().out


def test_explain_synthetic_model(dataset, capsys):
    code = main([
        "explain", "--dataset", str(dataset), "--target", "y",
        "--model", "synthetic", "--terms", "[[1.0, [0]], [2.0, [1, 2]]]",
        "--instance", "0", "--k", "2",
    ])
    assert code == 0
    assert "kadd(2)" in capsys.readouterr().out


def test_config_file_with_flag_override(dataset, tmp_path, capsys):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({
        "dataset": str(dataset),
        "target": "y",
        "model": "linear",
        "instance": "0",
        "method": "kernel",
        "budget": 8,
        "seed": 5,
    }), encoding="utf-8")
    code = main(["explain", "--config", str(config), "--method", "kadd", "--k", "2"])
    assert code == 0
    out = capsys.readouterr().out
    assert "kadd(2)" in out  # flag beat the config's kernel
    assert "budget: 8" in out  # config supplied the budget


def test_transform_roundtrip(tmp_path, capsys):
    payload = {"m": 2, "payoffs": [0.0, 1.0, 2.0, 4.0]}
    src = tmp_path / "game.json"
    src.write_text(json.dumps(payload), encoding="utf-8")
    code = main(["transform", "--input", str(src), "--k", "2"])
    assert code == 0
    result = json.loads(capsys.readouterr().out)
    assert result["interactions"][1:3] == [1.5, 2.5]

    back_src = tmp_path / "interactions.json"
    back_src.write_text(json.dumps({
        "m": 2, "k": 2, "interactions": result["interactions"],
    }), encoding="utf-8")
    code = main(["transform", "--input", str(back_src)])
    assert code == 0
    round_tripped = json.loads(capsys.readouterr().out)
    assert round_tripped["payoffs"] == pytest.approx([0.0, 1.0, 2.0, 4.0], abs=1e-10)


def test_converge_rerun_from_manifest_is_byte_identical(dataset, tmp_path):
    out1 = tmp_path / "run1"
    code = main([
        "converge", "--dataset", str(dataset), "--target", "y",
        "--model", "linear", "--methods", "kernel,kadd(2)",
        "--budgets", "8,12", "--simulations", "3", "--instances", "2",
        "--seed", "11", "--out", str(out1),
    ])
    assert code == 0
    manifest = out1 / "run_manifest.json"
    assert manifest.exists()

    out2 = tmp_path / "run2"
    code = main(["converge", "--config", str(manifest), "--out", str(out2)])
    assert code == 0
    assert (out1 / "convergence.csv").read_bytes() == (out2 / "convergence.csv").read_bytes()
    assert manifest.read_bytes() == (out2 / "run_manifest.json").read_bytes()


def test_serve_check_pass_and_fail(capsys):
    command = f"{sys.executable} {SERVER} echo"
    code = main([
        "serve-check", "--model", f"exec:{command}", "--m", "3",
        "--batches", "10", "--seed", "0",
    ])
    assert code == 0
    assert "PASS" in capsys.readouterr().out

    bad = f"{sys.executable} {SERVER} wrong-count"
    code = main([
        "serve-check", "--model", f"exec:{bad}", "--m", "3",
        "--batches", "5", "--seed", "0",
    ])
    assert code == 1


def test_exact_remote_model(dataset, capsys):
    command = f"{sys.executable} {SERVER} echo"
    code = main([
        "exact", "--dataset", str(dataset), "--target", "y",
        "--model", f"exec:{command}", "--instance", "0",
    ])
    assert code == 0
    assert "method: exact" in capsys.readouterr().out
