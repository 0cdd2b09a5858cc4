"""
End-to-end tests for the exoforce command line.
"""

import json

import numpy as np
import pandas as pd
import pytest

from src.cli.main import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main
from src.core.logging import setup_logging
from src.models.dataset import FrameRecord
from src.services.dataset.storage import save_manifest
from src.services.scene.pgm import write_pgm_content_addressed

TINY_NETWORK = [
    "--set", "network.input_size=8",
    "--set", "network.conv_filters=[3, 2]",
    "--set", "network.pooled_convs=1",
    "--set", "network.dense_units=[4]",
]


@pytest.fixture(autouse=True)
def reset_logging():
    yield
    setup_logging(level="WARNING")


@pytest.fixture
def tiny_dataset(tmp_path, rng):
    """Ten random 8x8 frames split 6/2/2"""
    directory = tmp_path / "dataset"
    frames = []
    for i, split in enumerate(["train"] * 6 + ["val"] * 2 + ["test"] * 2):
        path = write_pgm_content_addressed(rng.uniform(size=(8, 8)), directory / "images")
        frames.append(
            FrameRecord(
                frame_id=f"f{i}",
                image=f"images/{path.name}",
                labels=rng.uniform(0.0, 1.0, 8).tolist(),
                spec_id="s",
                u=0.1 * i,
                sweep_index=i,
                rod_tip_z=0.01,
                finger_tip_z=0.0,
                split=split,
            )
        )
    save_manifest(frames, directory)
    return directory


class TestUsage:
    """Tests for argument and configuration errors"""

    def test_no_command(self):
        """A subcommand is required"""
        assert main([]) == EXIT_USAGE

    def test_unknown_command(self):
        """Unknown subcommands are usage errors"""
        assert main(["frobnicate"]) == EXIT_USAGE

    def test_malformed_config(self, tmp_path):
        """A broken YAML file exits 1"""
        config = tmp_path / "bad.yaml"
        config.write_text("seed: [unclosed")
        assert main(["--config", str(config), "--out", str(tmp_path / "out"), "verify"]) == EXIT_USAGE

    def test_unknown_suite(self, tmp_path):
        """Unknown oracle suites are configuration errors"""
        assert main(["--out", str(tmp_path), "verify", "--suite", "no.such"]) == EXIT_USAGE

    def test_eval_needs_checkpoint(self, tmp_path, tiny_dataset):
        """eval without a checkpoint exits 1"""
        assert main(["--out", str(tmp_path / "eval"), "eval", "--dataset", str(tiny_dataset)]) == EXIT_USAGE

    def test_estimator_control_needs_checkpoint(self, tmp_path):
        """Estimator feedback without a checkpoint exits 1"""
        argv = ["--out", str(tmp_path), "--set", "control.feedback=estimator", "control"]
        assert main(argv) == EXIT_USAGE

    def test_missing_checkpoint_is_runtime_failure(self, tmp_path, tiny_dataset):
        """A checkpoint path that does not exist exits 3"""
        argv = [
            "--out", str(tmp_path / "eval"),
            "eval", "--dataset", str(tiny_dataset), "--checkpoint", str(tmp_path / "missing.bin"),
        ]
        assert main(argv) == EXIT_RUNTIME


class TestCommands:
    """Tests for successful command runs"""

    def test_verify_single_suite(self, tmp_path, capsys):
        """A passing suite exits 0 and writes the report"""
        assert main(["--out", str(tmp_path), "verify", "--suite", "lie.exp_series"]) == EXIT_OK
        report = json.loads((tmp_path / "verify_report.json").read_text())
        assert [r["name"] for r in report] == ["lie.exp_series"]
        assert report[0]["passed"]
        assert capsys.readouterr().out.startswith("pass lie.exp_series")

    def test_render(self, tmp_path):
        """render writes the frame, the resolved config and the run log"""
        assert main(["--out", str(tmp_path), "--seed", "5", "render", "--u", "0"]) == EXIT_OK
        assert (tmp_path / "render.pgm").read_bytes().startswith(b"P5")
        assert "seed: 5" in (tmp_path / "config.resolved.yaml").read_text()
        assert (tmp_path / "run.log").exists()

    def test_train_follows_run_seed(self, tmp_path, tiny_dataset):
        """--seed fixes the trained weights; another seed changes them"""

        def checkpoint(name, seed):
            out = tmp_path / name
            argv = [
                "--out", str(out), "--seed", str(seed), *TINY_NETWORK,
                "--set", "train.max_epochs=1",
                "train", "--dataset", str(tiny_dataset),
            ]
            assert main(argv) == EXIT_OK
            return (out / "checkpoint.bin").read_bytes()

        first = checkpoint("a", 3)
        assert checkpoint("b", 3) == first
        assert checkpoint("c", 4) != first

    def test_train_then_eval(self, tmp_path, tiny_dataset):
        """A checkpoint from train feeds eval across all six variants"""
        train_out = tmp_path / "train"
        argv = [
            "--out", str(train_out), *TINY_NETWORK,
            "--set", "train.max_epochs=2", "--set", "train.val_every=1",
            "train", "--dataset", str(tiny_dataset),
        ]
        assert main(argv) == EXIT_OK
        assert (train_out / "checkpoint.bin").exists()
        assert len(pd.read_csv(train_out / "training_log.csv")) == 2

        eval_out = tmp_path / "eval"
        argv = [
            "--out", str(eval_out), *TINY_NETWORK,
            "eval", "--dataset", str(tiny_dataset), "--checkpoint", str(train_out / "checkpoint.bin"),
        ]
        assert main(argv) == EXIT_OK
        metrics = pd.read_csv(eval_out / "metrics.csv")
        assert len(metrics) == 54
        predictions = pd.read_csv(eval_out / "predictions.csv")
        assert len(predictions) == 6 * 2 * 7
        assert np.all(predictions.predicted >= 0.0)
