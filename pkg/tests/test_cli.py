"""CLI verbs, exit codes, and output artifacts."""

import json
from pathlib import Path

import numpy as np
import pytest

from conftest import synth_config_text
from evspike.cli import EXIT_CONFIG, EXIT_DATA, EXIT_OK, main
from evspike.events import EventRecord, encode_nmnist


@pytest.fixture
def synth_config(synth_dataset, tmp_path):
    path = tmp_path / "config.toml"
    path.write_text(
        synth_config_text(synth_dataset, out_dir=tmp_path / "run", repeats=1, seed=1)
    )
    return path


class TestTrain:
    def test_writes_report_and_artifacts(self, synth_config, tmp_path, capsys):
        assert main(["train", "--config", str(synth_config)]) == EXIT_OK
        out = tmp_path / "run"
        report = json.loads((out / "report.json").read_text())
        assert len(report["accuracies"]) == 1
        assert 0.0 <= report["mean"] <= 1.0
        assert (out / "timing.json").exists()
        assert (out / "kernel_00.npy").exists()
        labels = (out / "labels_00.csv").read_text().splitlines()
        assert labels[0] == "population,label"
        assert len(labels) == 1 + 8
        preds = (out / "predictions_00.csv").read_text().splitlines()
        assert preds[0] == "sample_id,true,predicted"
        assert len(preds) == 1 + 40
        assert "mean accuracy" in capsys.readouterr().out

    def test_flag_overrides(self, synth_config, tmp_path):
        out = tmp_path / "override"
        code = main(
            ["train", "--config", str(synth_config), "--out", str(out),
             "--max-train", "12", "--max-test", "8", "--repeats", "2", "--seed", "9"]
        )
        assert code == EXIT_OK
        report = json.loads((out / "report.json").read_text())
        assert len(report["accuracies"]) == 2
        preds = (out / "predictions_00.csv").read_text().splitlines()
        assert len(preds) == 1 + 8


class TestEval:
    def test_eval_matches_train_accuracy(self, synth_config, tmp_path, capsys):
        assert main(["train", "--config", str(synth_config)]) == EXIT_OK
        out = tmp_path / "run"
        report = json.loads((out / "report.json").read_text())
        code = main(
            ["eval", "--config", str(synth_config),
             "--checkpoint", str(out / "kernel_00.npy"),
             "--labels", str(out / "labels_00.csv"),
             "--out", str(tmp_path / "eval")]
        )
        assert code == EXIT_OK
        printed = capsys.readouterr().out
        assert f"accuracy {report['accuracies'][0]:.4f}" in printed
        eval_preds = (tmp_path / "eval" / "predictions.csv").read_text()
        train_preds = (out / "predictions_00.csv").read_text()
        assert eval_preds == train_preds


class TestExitCodes:
    def test_missing_config_file(self, tmp_path):
        assert main(["train", "--config", str(tmp_path / "nope.toml")]) == EXIT_CONFIG

    def test_invalid_toml(self, tmp_path):
        bad = tmp_path / "bad.toml"
        bad.write_text("not [valid toml")
        assert main(["train", "--config", str(bad)]) == EXIT_CONFIG

    def test_unknown_flag(self):
        assert main(["train", "--frobnicate"]) == EXIT_CONFIG

    def test_help_exits_zero(self):
        assert main(["--help"]) == EXIT_OK

    def test_missing_dataset_dir(self, tmp_path):
        cfg = tmp_path / "c.toml"
        cfg.write_text(synth_config_text(tmp_path / "absent", out_dir=tmp_path))
        assert main(["train", "--config", str(cfg)]) == EXIT_DATA

    def test_corrupt_data_file(self, tmp_path):
        assert (
            main(["convert", "--from", "nmnist", "--to", "text",
                  str(tmp_path / "missing.bin"), str(tmp_path / "o.txt")])
            == EXIT_DATA
        )
        bad = tmp_path / "bad.bin"
        bad.write_bytes(bytes(7))  # not a multiple of the record size
        assert (
            main(["convert", "--from", "nmnist", "--to", "text",
                  str(bad), str(tmp_path / "o.txt")])
            == EXIT_DATA
        )


class TestPhasePortrait:
    def test_lif_csv_crosses_zero_at_rest(self, tmp_path):
        out = tmp_path / "lif.csv"
        code = main(
            ["phase-portrait", "--model", "lif", "--u-min", "-5", "--u-max", "5",
             "--points", "101", "--u-rest", "1.0", "--out", str(out)]
        )
        assert code == EXIT_OK
        rows = np.loadtxt(out, delimiter=",", skiprows=1)
        us, dudt = rows[:, 0], rows[:, 1]
        assert np.all(dudt[us < 1.0] > 0) and np.all(dudt[us > 1.0] < 0)
        assert np.all(np.diff(dudt) < 0)  # monotone decreasing line

    def test_qif_parabola_roots(self, tmp_path):
        out = tmp_path / "qif.csv"
        code = main(
            ["phase-portrait", "--model", "qif", "--u-min", "-2", "--u-max", "12",
             "--points", "701", "--a0", "0.1", "--u-c", "10.0", "--out", str(out)]
        )
        assert code == EXIT_OK
        rows = np.loadtxt(out, delimiter=",", skiprows=1)
        us, dudt = rows[:, 0], rows[:, 1]
        assert np.all(dudt[(us > 0) & (us < 10)] < 0)
        assert np.all(dudt[us < 0] > 0) and np.all(dudt[us > 10] > 0)

    def test_eif_sharpness_overlay_files(self, tmp_path):
        curves = {}
        for dt_sharp in ("0.5", "4.0"):
            out = tmp_path / f"eif_{dt_sharp}.csv"
            code = main(
                ["phase-portrait", "--model", "eif", "--u-min", "0", "--u-max", "15",
                 "--points", "301", "--delta-t", dt_sharp, "--theta-rh", "10",
                 "--out", str(out)]
            )
            assert code == EXIT_OK
            curves[dt_sharp] = np.loadtxt(out, delimiter=",", skiprows=1)
        assert not np.allclose(curves["0.5"][:, 1], curves["4.0"][:, 1])
        # larger sharpness lifts the drive at the rheobase
        at_rh = {k: v[v[:, 0] == 10.0, 1][0] for k, v in curves.items()}
        assert at_rh["4.0"] > at_rh["0.5"]


class TestInspect:
    def test_counts_sum_to_events(self, tmp_path):
        root = tmp_path / "tiny"
        for split in ("Train", "Test"):
            for c in (0, 1):
                (root / split / str(c)).mkdir(parents=True)
        (root / "Train" / "0" / "a.bin").write_bytes(
            encode_nmnist([EventRecord(1, 1, True, 10), EventRecord(2, 2, False, 60_000)])
        )
        (root / "Train" / "1" / "a.bin").write_bytes(encode_nmnist([]))
        cfg = tmp_path / "c.toml"
        cfg.write_text(synth_config_text(root, out_dir=tmp_path))
        out = tmp_path / "stats.csv"
        code = main(
            ["inspect", "--config", str(cfg), "--split", "train",
             "--bin-ms", "10", "--out", str(out)]
        )
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "class,bin_index,start_us,count"
        rows = [ln.split(",") for ln in lines[1:]]
        total = sum(int(r[3]) for r in rows)
        assert total == 2
        zero_rows = [r for r in rows if r[0] == "1"]
        assert zero_rows and all(int(r[3]) == 0 for r in zero_rows)

    def test_synthetic_shows_three_bursts(self, synth_config, tmp_path, capsys):
        out = tmp_path / "stats.csv"
        code = main(
            ["inspect", "--config", str(synth_config), "--split", "train",
             "--bin-ms", "20", "--out", str(out)]
        )
        assert code == EXIT_OK
        rows = np.loadtxt(out, delimiter=",", skiprows=1)
        class0 = rows[rows[:, 0] == 0]
        counts = class0[:, 3]
        starts = class0[:, 2]
        # quiet tails of each 100 ms sweep carry no events
        quiet = counts[(starts % 100_000) >= 80_000]
        busy = counts[(starts % 100_000) < 80_000]
        assert quiet.sum() == 0
        assert np.all(busy > 0)


class TestConvertAndDefaults:
    def test_nmnist_text_round_trip(self, tmp_path):
        events = [EventRecord(3, 5, True, 100), EventRecord(8, 2, False, 2000)]
        src = tmp_path / "sample.bin"
        src.write_bytes(encode_nmnist(events))
        txt = tmp_path / "sample.txt"
        back = tmp_path / "back.bin"
        assert main(["convert", "--from", "nmnist", "--to", "text", str(src), str(txt)]) == EXIT_OK
        assert main(["convert", "--from", "text", "--to", "nmnist", str(txt), str(back)]) == EXIT_OK
        assert back.read_bytes() == src.read_bytes()

    def test_defaults_verb_emits_parseable_config(self, tmp_path, capsys):
        assert main(["defaults"]) == EXIT_OK
        text = capsys.readouterr().out
        from evspike.experiment import parse_config

        cfg = parse_config(text)
        assert cfg.repeats == 11
