"""Dataset loading for the training pipeline, plus a synthetic fixture set.

Samples are kept as compact coordinate arrays; binning into frames happens
per training pass. Three on-disk layouts are understood:

* ``nmnist``: root/Train/<class>/*.bin and root/Test/<class>/*.bin, each
  file one digit recording in the 5-byte record format.
* ``gestures``: root/*.aedat recordings with companion ``*_labels.csv``
  files; one (recording, class window) pair yields one sample. The
  published split files ``trials_to_train.txt`` / ``trials_to_test.txt``
  are honoured when present, otherwise user numbers <= 23 train.
* ``text``: like ``nmnist`` but with the line-oriented text event format,
  for fixtures.

Desk-scale caps (``max_train`` / ``max_test``) subsample each class evenly
in sorted-filename order, so the subset is stable across runs and repeats.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .events import (
    DataFormatError,
    EventRecord,
    GESTURE_EXCLUDED_CLASS,
    NMNIST_SENSOR_SIZE,
    decode_aedat_arrays,
    decode_nmnist_arrays,
    encode_nmnist,
    events_to_arrays,
    parse_gesture_labels,
    parse_text_events,
)

GESTURE_SENSOR_SIZE = 128

DATASET_KINDS = ("nmnist", "gestures", "text")


@dataclass
class EventSample:
    """One recording's events (polarity already collapsed) and its label."""

    xs: np.ndarray
    ys: np.ndarray
    ts: np.ndarray
    label: int
    width: int
    height: int


def _interleave_cap(per_class: dict[int, list], cap: int | None) -> list:
    """Round-robin across classes until the cap, keeping classes balanced."""
    if cap is None:
        cap = sum(len(v) for v in per_class.values())
    out = []
    idx = 0
    classes = sorted(per_class)
    while len(out) < cap:
        added = False
        for c in classes:
            if idx < len(per_class[c]):
                out.append(per_class[c][idx])
                added = True
                if len(out) == cap:
                    break
        if not added:
            break
        idx += 1
    return out


def _load_class_dir_split(
    root: Path,
    split_dir: str,
    classes: tuple[int, int],
    cap: int | None,
    reader,
    width: int,
    height: int,
) -> list[EventSample]:
    base = root / split_dir
    if not base.is_dir():
        raise DataFormatError(f"missing dataset split directory {base}")
    per_class: dict[int, list[EventSample]] = {}
    for c in classes:
        class_dir = base / str(c)
        if not class_dir.is_dir():
            raise DataFormatError(f"missing class directory {class_dir}")
        samples = []
        for path in sorted(class_dir.iterdir()):
            if path.is_file():
                xs, ys, ts = reader(path)
                samples.append(EventSample(xs, ys, ts, c, width, height))
        per_class[c] = samples
    return _interleave_cap(per_class, cap)


def _read_nmnist_file(path: Path):
    xs, ys, _ps, ts = decode_nmnist_arrays(path.read_bytes())
    return xs, ys, ts


def _read_text_file(path: Path):
    xs, ys, _ps, ts = events_to_arrays(parse_text_events(path.read_text()))
    return xs, ys, ts


def load_nmnist(
    root, classes: tuple[int, int], split: str, max_samples: int | None = None
) -> list[EventSample]:
    split_dir = {"train": "Train", "test": "Test"}[split]
    return _load_class_dir_split(
        Path(root), split_dir, classes, max_samples, _read_nmnist_file,
        NMNIST_SENSOR_SIZE, NMNIST_SENSOR_SIZE,
    )


def load_text_dataset(
    root,
    classes: tuple[int, int],
    split: str,
    max_samples: int | None = None,
    width: int = NMNIST_SENSOR_SIZE,
    height: int = NMNIST_SENSOR_SIZE,
) -> list[EventSample]:
    split_dir = {"train": "Train", "test": "Test"}[split]
    return _load_class_dir_split(
        Path(root), split_dir, classes, max_samples, _read_text_file, width, height
    )


_USER_RE = re.compile(r"user(\d+)")


def _gesture_recordings(root: Path, split: str) -> list[Path]:
    aedats = sorted(p for p in root.iterdir() if p.suffix == ".aedat")
    if not aedats:
        raise DataFormatError(f"no .aedat recordings under {root}")
    listing = root / ("trials_to_train.txt" if split == "train" else "trials_to_test.txt")
    if listing.exists():
        names = {ln.strip() for ln in listing.read_text().splitlines() if ln.strip()}
        return [p for p in aedats if p.name in names]
    chosen = []
    for p in aedats:
        m = _USER_RE.search(p.name)
        user = int(m.group(1)) if m else 0
        if (split == "train") == (user <= 23):
            chosen.append(p)
    return chosen


def load_gestures(
    root, classes: tuple[int, int], split: str, max_samples: int | None = None
) -> list[EventSample]:
    """One sample per (recording, class window group), windows concatenated."""
    root = Path(root)
    for c in classes:
        if c == GESTURE_EXCLUDED_CLASS:
            raise ValueError(
                f"class {GESTURE_EXCLUDED_CLASS} ('Other') is an excluded class"
            )
    per_class: dict[int, list[EventSample]] = {c: [] for c in classes}
    for path in _gesture_recordings(root, split):
        labels_file = path.with_name(path.stem + "_labels.csv")
        if not labels_file.exists():
            raise DataFormatError(f"missing labels CSV for {path.name}")
        spans = parse_gesture_labels(labels_file.read_text())
        xs, ys, _ps, ts = decode_aedat_arrays(path.read_bytes())
        for c in classes:
            windows = sorted(
                (s for s in spans if s.class_id == c), key=lambda s: s.start_us
            )
            if not windows:
                continue
            sel_xs, sel_ys, sel_ts = [], [], []
            offset = 0
            for w in windows:
                inside = (ts >= w.start_us) & (ts < w.end_us)
                sel_xs.append(xs[inside])
                sel_ys.append(ys[inside])
                sel_ts.append(ts[inside] - w.start_us + offset)
                offset += w.end_us - w.start_us
            per_class[c].append(
                EventSample(
                    np.concatenate(sel_xs),
                    np.concatenate(sel_ys),
                    np.concatenate(sel_ts),
                    c,
                    GESTURE_SENSOR_SIZE,
                    GESTURE_SENSOR_SIZE,
                )
            )
    return _interleave_cap(per_class, max_samples)


def load_dataset(
    kind: str, root, classes: tuple[int, int], split: str,
    max_samples: int | None = None,
) -> list[EventSample]:
    if kind == "nmnist":
        return load_nmnist(root, classes, split, max_samples)
    if kind == "gestures":
        return load_gestures(root, classes, split, max_samples)
    if kind == "text":
        return load_text_dataset(root, classes, split, max_samples)
    raise ValueError(f"unknown dataset kind {kind!r}, expected one of {DATASET_KINDS}")


# --------------------------------------------------------------------------
# synthetic fixture dataset
# --------------------------------------------------------------------------

SYNTH_SACCADE_MS = 100
SYNTH_ACTIVE_MS = 80  # events land in the first 80 ms of each saccade
SYNTH_SACCADES = 3


def _synthetic_sample_events(orientation: int, rng: np.random.Generator) -> list[EventRecord]:
    """Oriented-bar recording: even orientation vertical, odd horizontal.

    Events arrive in three saccade-like bursts so the temporal envelope
    resembles a real digit recording.
    """
    size = NMNIST_SENSOR_SIZE
    span = np.arange(6, size - 6)
    anchor = int(rng.integers(10, size - 10))
    if orientation % 2 == 0:
        stroke = [(int(x), int(y)) for y in span for x in (anchor, anchor + 1)]
    else:
        stroke = [(int(x), int(y)) for x in span for y in (anchor, anchor + 1)]

    events = []
    for saccade in range(SYNTH_SACCADES):
        start_us = saccade * SYNTH_SACCADE_MS * 1000
        for (x, y) in stroke:
            for _ in range(6):  # fixed count: classes carry equal charge
                jx = int(np.clip(x + rng.integers(-1, 2), 0, size - 1))
                jy = int(np.clip(y + rng.integers(-1, 2), 0, size - 1))
                t = start_us + int(rng.integers(0, SYNTH_ACTIVE_MS * 1000))
                events.append(EventRecord(jx, jy, bool(rng.integers(2)), t))
        for _ in range(10):  # background clutter
            events.append(
                EventRecord(
                    int(rng.integers(size)),
                    int(rng.integers(size)),
                    bool(rng.integers(2)),
                    start_us + int(rng.integers(0, SYNTH_ACTIVE_MS * 1000)),
                )
            )
    events.sort(key=lambda ev: ev.timestamp_us)
    return events


def make_synthetic_nmnist(
    root,
    n_train_per_class: int,
    n_test_per_class: int,
    classes: tuple[int, int] = (0, 1),
    seed: int = 0,
) -> Path:
    """Write a two-class synthetic dataset in the N-MNIST layout and format.

    Deterministic per seed. Returns the dataset root.
    """
    root = Path(root)
    rng = np.random.default_rng(seed)
    for split, n_per_class in (("Train", n_train_per_class), ("Test", n_test_per_class)):
        for orientation, c in enumerate(classes):
            class_dir = root / split / str(c)
            class_dir.mkdir(parents=True, exist_ok=True)
            for i in range(n_per_class):
                events = _synthetic_sample_events(orientation, rng)
                (class_dir / f"{i:05d}.bin").write_bytes(encode_nmnist(events))
    return root
