import os

import numpy as np
import pytest

from subnewton.cli import main, read_config
from subnewton.dataset import save_libsvm
from subnewton.errors import SubnewtonError

from helpers import make_blobs


@pytest.fixture
def data_file(tmp_path):
    ds = make_blobs(100, 5, 3, seed=0, separation=3.0)
    path = tmp_path / "blobs.libsvm"
    save_libsvm(ds, path)
    return path


class TestRunCommand:
    def test_newton_run_writes_outputs(self, data_file, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(
            [
                "run",
                "--dataset", str(data_file),
                "--format", "libsvm",
                "--classes", "3",
                "--method", "subnewton-100",
                "--lambda", "1e-3",
                "--cg-tol", "1e-4",
                "--cg-max-iters", "10",
                "--epochs", "4",
                "--split", "0.8",
                "--seed", "1",
                "--out", str(out),
                "--no-figures",
            ]
        )
        assert code == 0
        assert (out / "trace_subnewton-100.csv").exists()
        assert (out / "summary.csv").exists()
        printed = capsys.readouterr().out
        assert "subnewton-100" in printed and "summary" in printed

    def test_first_order_run_with_lr(self, data_file, tmp_path):
        out = tmp_path / "out"
        code = main(
            [
                "run",
                "--dataset", str(data_file),
                "--classes", "3",
                "--method", "adam",
                "--lr", "0.05",
                "--batch-size", "16",
                "--epochs", "3",
                "--out", str(out),
                "--no-figures",
            ]
        )
        assert code == 0
        traces = [p for p in os.listdir(out) if p.startswith("trace_adam")]
        assert len(traces) == 1

    def test_first_order_requires_lr(self, data_file, tmp_path, capsys):
        code = main(
            [
                "run",
                "--dataset", str(data_file),
                "--classes", "3",
                "--method", "adam",
                "--out", str(tmp_path / "o"),
            ]
        )
        assert code == 1
        assert "needs --lr" in capsys.readouterr().err

    def test_missing_dataset_is_clean_error(self, tmp_path, capsys):
        code = main(
            [
                "run",
                "--dataset", str(tmp_path / "nope.libsvm"),
                "--classes", "3",
                "--method", "full-newton",
                "--out", str(tmp_path / "o"),
            ]
        )
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestConfigFile:
    def test_config_supplies_defaults_cli_wins(self, data_file, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(
            "\n".join(
                [
                    f"dataset = {data_file}",
                    "classes = 3",
                    "method = adam",
                    "lr = 0.05",
                    "epochs = 2",
                    "batch-size = 16",
                    "figures = off  # CLI may still override",
                    f"out = {tmp_path / 'from_config'}",
                ]
            )
        )
        code = main(["run", "--config", str(cfg), "--epochs", "3"])
        assert code == 0
        from subnewton.trace import read_trace_csv

        trace_files = [
            p for p in os.listdir(tmp_path / "from_config") if p.startswith("trace_")
        ]
        records = read_trace_csv(tmp_path / "from_config" / trace_files[0])
        assert records[-1].iteration == 3  # CLI --epochs overrode the file

    def test_bad_key_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("no_such_option = 1\n")
        with pytest.raises(SubnewtonError):
            read_config(cfg)

    def test_underscores_and_comments_ok(self, tmp_path):
        cfg = tmp_path / "ok.cfg"
        cfg.write_text("# comment\ncg_max_iters = 25\nbatch_size = 0.2\n")
        values = read_config(cfg)
        assert values["cg-max-iters"] == 25
        assert values["batch-size"] == 0.2


class TestLipschitzCommand:
    def test_prints_L_and_condition_number(self, data_file, capsys):
        code = main(
            [
                "lipschitz",
                "--dataset", str(data_file),
                "--classes", "3",
                "--lambda", "1e-3",
                "--iters", "100",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "L = " in out
        assert "(L + lambda) / lambda" in out
        L = float([l for l in out.splitlines() if l.startswith("L = ")][0][4:])
        cond = float(out.split("=")[-1])
        assert cond == pytest.approx((L + 1e-3) / 1e-3, rel=1e-9)
