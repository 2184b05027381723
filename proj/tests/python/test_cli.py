import os
import subprocess

import pytest

EDGECTL = os.environ.get("EDGECTL")
pytestmark = pytest.mark.skipif(not EDGECTL, reason="EDGECTL not set")


def run(cfg, *args):
    return subprocess.run([EDGECTL, "--config", str(cfg), *args], capture_output=True, text=True, timeout=300)


@pytest.fixture
def cfg(tmp_path):
    path = tmp_path / "edge.toml"
    path.write_text(
        "[registry]\nroot = \"registry\"\n"
        "[service]\nlisten = \"127.0.0.1:0\"\nlog_dir = \"logs\"\n"
        "[ingest]\nsource = \"file:stream.wire\"\n"
        "[simulate]\nseed = 8\nlabels = \"labels.csv\"\n"
        "[train]\nepochs = 30\n"
    )
    return path


def test_serve_without_model_exits_3(cfg):
    assert run(cfg, "serve", "--batches", "1").returncode == 3


def test_train_missing_file_exits_2(cfg):
    assert run(cfg, "train", str(cfg.parent / "nope.csv")).returncode == 2


def test_bad_config_exits_2(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[service]\nretrain_batch = 0\n")
    assert run(bad, "report").returncode == 2


def test_train_serve_report(cfg):
    d = cfg.parent
    r = run(cfg, "simulate", "--labeled", "120", "--seed", "7", "--out", str(d / "train.csv"))
    assert r.returncode == 0, r.stderr
    r = run(cfg, "train", str(d / "train.csv"), "--seed", "0")
    assert r.returncode == 0, r.stderr
    assert (d / "registry" / "runs.log").exists()

    r = run(cfg, "simulate", "--batches", "3")
    assert r.returncode == 0, r.stderr
    assert (d / "stream.wire").exists()

    r = run(cfg, "serve", "--batches", "3")
    assert r.returncode == 0, r.stderr
    assert "3 batches" in r.stdout

    r = run(cfg, "report")
    assert r.returncode == 0, r.stderr
    assert "processes 3" in r.stdout
