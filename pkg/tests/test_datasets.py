"""Dataset directory layouts: gesture recordings with label windows, split
files, caps, and the text fixture format."""

import numpy as np
import pytest

from evspike.datasets import load_dataset, load_gestures, make_synthetic_nmnist
from evspike.events import (
    DataFormatError,
    EventRecord,
    encode_aedat,
    format_text_events,
)
from evspike.experiment import parse_config, run_experiment
from evspike.network import SynapticKernel, init_weights


def gesture_events(class_windows, rng):
    """Events spread over the given (class, start_us, end_us) windows."""
    events = []
    for _c, start, end in class_windows:
        for _ in range(400):
            events.append(
                EventRecord(
                    int(rng.integers(128)), int(rng.integers(128)),
                    bool(rng.integers(2)), int(rng.integers(start, end)),
                )
            )
    events.sort(key=lambda e: e.timestamp_us)
    return events


@pytest.fixture
def gesture_root(tmp_path):
    rng = np.random.default_rng(0)
    layout = {
        "user01_led.aedat": [(1, 0, 50_000), (2, 60_000, 110_000)],
        "user02_led.aedat": [(2, 0, 40_000), (1, 50_000, 120_000), (1, 130_000, 150_000)],
        "user24_led.aedat": [(1, 0, 30_000), (2, 40_000, 90_000)],
    }
    for name, windows in layout.items():
        events = gesture_events(windows, rng)
        (tmp_path / name).write_bytes(encode_aedat(events))
        lines = ["class,startTime_usec,endTime_usec"]
        lines += [f"{c},{s},{e}" for c, s, e in windows]
        (tmp_path / name.replace(".aedat", "_labels.csv")).write_text(
            "\n".join(lines) + "\n"
        )
    return tmp_path


class TestGestureLoading:
    def test_user_number_split(self, gesture_root):
        train = load_gestures(gesture_root, (1, 2), "train")
        test = load_gestures(gesture_root, (1, 2), "test")
        # users 1 and 2 train (2 samples per class), user 24 tests
        assert len(train) == 4 and len(test) == 2
        assert {s.label for s in test} == {1, 2}

    def test_split_listing_files_take_precedence(self, gesture_root):
        (gesture_root / "trials_to_train.txt").write_text("user24_led.aedat\n")
        (gesture_root / "trials_to_test.txt").write_text(
            "user01_led.aedat\nuser02_led.aedat\n"
        )
        train = load_gestures(gesture_root, (1, 2), "train")
        assert len(train) == 2  # only user24's two class windows

    def test_repeated_windows_concatenate(self, gesture_root):
        train = load_gestures(gesture_root, (1, 2), "train")
        user02_class1 = [
            s for s in train if s.label == 1 and len(s.ts) and s.ts.max() < 90_000
        ]
        # user02 has two class-1 windows (70 ms + 20 ms, concatenated)
        assert any(s.ts.max() >= 70_000 for s in user02_class1)

    def test_excluded_class_rejected(self, gesture_root):
        with pytest.raises(ValueError, match="excluded"):
            load_gestures(gesture_root, (1, 11), "train")

    def test_missing_labels_csv(self, gesture_root):
        (gesture_root / "user01_led_labels.csv").unlink()
        with pytest.raises(DataFormatError, match="labels"):
            load_gestures(gesture_root, (1, 2), "train")

    def test_training_runs_with_downsampling(self, gesture_root):
        cfg = parse_config(
            f"""
            [dataset]
            kind = "gestures"
            path = "{gesture_root}"
            classes = [1, 2]
            dt_ms = 5.0
            downsample = 4
            [architecture]
            populations = 4
            kernel_size = 5
            [stdp]
            a_plus = 0.01
            a_minus = -0.005
            [threshold]
            lambda = 0.2
            [run]
            repeats = 1
            seed = 0
            """
        )
        report, outcomes = run_experiment(cfg)
        assert 0.0 <= report.mean <= 1.0
        # 128/4 = 32 input -> 28x28 feature maps
        assert outcomes[0].kernel.shape == (4, 1, 5, 5)


class TestTextDataset:
    def test_text_layout_loads(self, tmp_path):
        for split in ("Train", "Test"):
            for c in (0, 1):
                d = tmp_path / split / str(c)
                d.mkdir(parents=True)
                events = [EventRecord(c, 2, True, 100), EventRecord(3, c, False, 900)]
                (d / "s0.txt").write_text(format_text_events(events))
        samples = load_dataset("text", tmp_path, (0, 1), "train")
        assert len(samples) == 2
        assert samples[0].xs.tolist() in ([0, 3], [1, 3])


class TestSyntheticFixture:
    def test_deterministic_per_seed(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        make_synthetic_nmnist(a, 2, 1, seed=5)
        make_synthetic_nmnist(b, 2, 1, seed=5)
        fa = sorted(p.relative_to(a) for p in a.rglob("*.bin"))
        fb = sorted(p.relative_to(b) for p in b.rglob("*.bin"))
        assert fa == fb
        for rel in fa:
            assert (a / rel).read_bytes() == (b / rel).read_bytes()


class TestKernelCheckpoint:
    def test_npy_round_trip_bit_exact(self, tmp_path):
        kernel = init_weights((3, 1, 5, 5), rng_seed=8)
        path = tmp_path / "kernel.npy"
        kernel.save(path)
        again = SynapticKernel.load(path)
        assert again.weights.dtype == kernel.weights.dtype
        assert np.array_equal(again.weights, kernel.weights)
        kernel.save(tmp_path / "kernel2.npy")
        assert (tmp_path / "kernel2.npy").read_bytes() == path.read_bytes()
