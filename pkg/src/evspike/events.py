"""AER event decoding/encoding and time-binning into binary frames.

Two on-disk formats are supported bit-exactly:

* N-MNIST: flat 5-byte records, big-endian 23-bit timestamps.
* AEDAT 3.1: '#'-prefixed ASCII header, then little-endian packets whose
  polarity events are 8 bytes (32-bit address word + 32-bit timestamp).

A whitespace-separated text format ("x y polarity t_us" per line, '#'
comments) is also provided for fixtures and cross-tool exchange.

Binning collapses a window of events into one binary occupancy frame per
time-step: at most one active entry per pixel, polarity ignored (all
events treated as positive), and every frame carrying the spike amplitude
1/t_s so the charge delivered per spike is independent of the step size.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

NMNIST_SENSOR_SIZE = 34
NMNIST_RECORD_BYTES = 5
NMNIST_MAX_TIMESTAMP_US = 1 << 23  # 23-bit timestamp field

AEDAT_MAGIC = b"#!AER-DAT3.1"
AEDAT_HEADER_STRUCT = struct.Struct("<hhiiiiii")
AEDAT_POLARITY_TYPE = 1
AEDAT_POLARITY_EVENT_BYTES = 8

# DVS Gestures class 11 ("Other" random movements) is excluded.
GESTURE_EXCLUDED_CLASS = 11


class DataFormatError(ValueError):
    """Raised when an event file or byte stream violates its format."""


@dataclass(frozen=True, slots=True)
class EventRecord:
    """One AER event: pixel address, polarity, microsecond timestamp."""

    x: int
    y: int
    polarity: bool
    timestamp_us: int


@dataclass
class EventFrame:
    """One time-step's binary occupancy map.

    ``bits[y, x]`` is True iff at least one event hit that (downsampled)
    pixel during the step's window. ``amplitude`` is the charge value a
    set bit injects, fixed at 1/t_s.
    """

    width: int
    height: int
    bits: np.ndarray
    t_index: int
    amplitude: float


@dataclass(frozen=True)
class SampleLabelSpan:
    """A labelled time window inside a gesture recording."""

    class_id: int
    start_us: int
    end_us: int

    def __post_init__(self):
        if not self.start_us < self.end_us:
            raise ValueError(
                f"label span must have start < end, got [{self.start_us}, {self.end_us})"
            )


# --------------------------------------------------------------------------
# array <-> record helpers
# --------------------------------------------------------------------------


def events_to_arrays(events: Sequence[EventRecord]):
    """Split an event list into (x, y, polarity, t) numpy arrays."""
    n = len(events)
    xs = np.empty(n, dtype=np.int64)
    ys = np.empty(n, dtype=np.int64)
    ps = np.empty(n, dtype=bool)
    ts = np.empty(n, dtype=np.int64)
    for i, ev in enumerate(events):
        xs[i] = ev.x
        ys[i] = ev.y
        ps[i] = ev.polarity
        ts[i] = ev.timestamp_us
    return xs, ys, ps, ts


def _arrays_to_events(xs, ys, ps, ts) -> list[EventRecord]:
    return [
        EventRecord(int(x), int(y), bool(p), int(t))
        for x, y, p, t in zip(xs, ys, ps, ts)
    ]


# --------------------------------------------------------------------------
# N-MNIST codec
# --------------------------------------------------------------------------


def decode_nmnist_arrays(data: bytes):
    """Array-returning core of :func:`decode_nmnist`: (x, y, polarity, t)."""
    if len(data) % NMNIST_RECORD_BYTES != 0:
        tail = len(data) - (len(data) % NMNIST_RECORD_BYTES)
        raise DataFormatError(
            f"truncated N-MNIST record at byte offset {tail}: "
            f"{len(data) - tail} trailing bytes (records are {NMNIST_RECORD_BYTES} bytes)"
        )
    raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, NMNIST_RECORD_BYTES)
    xs = raw[:, 0].astype(np.int64)
    ys = raw[:, 1].astype(np.int64)
    ps = (raw[:, 2] >> 7).astype(bool)
    ts = (
        ((raw[:, 2].astype(np.int64) & 0x7F) << 16)
        | (raw[:, 3].astype(np.int64) << 8)
        | raw[:, 4].astype(np.int64)
    )
    bad = np.nonzero((xs >= NMNIST_SENSOR_SIZE) | (ys >= NMNIST_SENSOR_SIZE))[0]
    if bad.size:
        i = int(bad[0])
        raise DataFormatError(
            f"record {i} (byte offset {i * NMNIST_RECORD_BYTES}) has pixel "
            f"({xs[i]}, {ys[i]}) outside the {NMNIST_SENSOR_SIZE}x{NMNIST_SENSOR_SIZE} sensor"
        )
    drops = np.nonzero(np.diff(ts) < 0)[0]
    if drops.size:
        i = int(drops[0]) + 1
        raise DataFormatError(
            f"record {i} (byte offset {i * NMNIST_RECORD_BYTES}) has timestamp "
            f"{ts[i]} us, decreasing from {ts[i - 1]} us"
        )
    return xs, ys, ps, ts


def decode_nmnist(data: bytes) -> list[EventRecord]:
    """Decode flat 5-byte N-MNIST records.

    Record layout: byte0 = x, byte1 = y, byte2 bit 7 = polarity, byte2
    bits 6..0 concatenated with bytes 3..4 form the 23-bit big-endian
    timestamp in microseconds.
    """
    return _arrays_to_events(*decode_nmnist_arrays(data))


def encode_nmnist(events: Sequence[EventRecord]) -> bytes:
    """Encode events as 5-byte N-MNIST records (inverse of decode_nmnist)."""
    raw = np.empty((len(events), NMNIST_RECORD_BYTES), dtype=np.uint8)
    for i, ev in enumerate(events):
        if not (0 <= ev.x < NMNIST_SENSOR_SIZE and 0 <= ev.y < NMNIST_SENSOR_SIZE):
            raise DataFormatError(
                f"event {i}: pixel ({ev.x}, {ev.y}) outside the "
                f"{NMNIST_SENSOR_SIZE}x{NMNIST_SENSOR_SIZE} sensor"
            )
        if not 0 <= ev.timestamp_us < NMNIST_MAX_TIMESTAMP_US:
            raise DataFormatError(
                f"event {i}: timestamp {ev.timestamp_us} us does not fit in 23 bits"
            )
        raw[i, 0] = ev.x
        raw[i, 1] = ev.y
        raw[i, 2] = (int(bool(ev.polarity)) << 7) | ((ev.timestamp_us >> 16) & 0x7F)
        raw[i, 3] = (ev.timestamp_us >> 8) & 0xFF
        raw[i, 4] = ev.timestamp_us & 0xFF
    return raw.tobytes()


# --------------------------------------------------------------------------
# AEDAT 3.1 codec
# --------------------------------------------------------------------------


def decode_aedat_arrays(data: bytes):
    """Array-returning core of :func:`decode_aedat`: (x, y, polarity, t)."""
    if not data.startswith(AEDAT_MAGIC):
        raise DataFormatError(
            f"missing AEDAT 3.1 magic header ({AEDAT_MAGIC.decode()!r})"
        )
    pos = 0
    while pos < len(data) and data[pos : pos + 1] == b"#":
        nl = data.find(b"\n", pos)
        if nl < 0:
            return []  # header-only file without trailing newline
        pos = nl + 1

    out_xs: list[np.ndarray] = []
    out_ys: list[np.ndarray] = []
    out_ps: list[np.ndarray] = []
    out_ts: list[np.ndarray] = []
    while pos < len(data):
        if pos + AEDAT_HEADER_STRUCT.size > len(data):
            raise DataFormatError(f"truncated packet header at byte offset {pos}")
        (
            event_type,
            _event_source,
            event_size,
            _ts_offset,
            _ts_overflow,
            _capacity,
            event_number,
            _event_valid,
        ) = AEDAT_HEADER_STRUCT.unpack_from(data, pos)
        pos += AEDAT_HEADER_STRUCT.size
        if event_size <= 0 or event_number < 0:
            raise DataFormatError(
                f"packet at byte offset {pos - AEDAT_HEADER_STRUCT.size} has "
                f"eventSize={event_size}, eventNumber={event_number}"
            )
        block = event_size * event_number
        if pos + block > len(data):
            raise DataFormatError(
                f"packet at byte offset {pos - AEDAT_HEADER_STRUCT.size} declares "
                f"{event_number} x {event_size} bytes but only {len(data) - pos} remain"
            )
        if event_type == AEDAT_POLARITY_TYPE:
            if event_size != AEDAT_POLARITY_EVENT_BYTES:
                raise DataFormatError(
                    f"polarity packet at byte offset {pos - AEDAT_HEADER_STRUCT.size} "
                    f"has eventSize={event_size}, expected {AEDAT_POLARITY_EVENT_BYTES}"
                )
            words = np.frombuffer(data, dtype="<u4", count=2 * event_number, offset=pos)
            addr = words[0::2].astype(np.int64)
            ts = words[1::2].astype(np.int64)
            valid = (addr & 1).astype(bool)
            out_xs.append((addr >> 17) & 0x7FFF)
            out_ys.append((addr >> 2) & 0x7FFF)
            out_ps.append(((addr >> 1) & 1).astype(bool))
            out_ts.append(ts)
            keep = valid
            out_xs[-1] = out_xs[-1][keep]
            out_ys[-1] = out_ys[-1][keep]
            out_ps[-1] = out_ps[-1][keep]
            out_ts[-1] = out_ts[-1][keep]
        pos += block

    if not out_xs:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy(), np.empty(0, dtype=bool), empty.copy()
    xs = np.concatenate(out_xs)
    ys = np.concatenate(out_ys)
    ps = np.concatenate(out_ps)
    ts = np.concatenate(out_ts)
    return xs, ys, ps, ts


def decode_aedat(data: bytes) -> list[EventRecord]:
    """Decode polarity events from an AEDAT 3.1 container.

    The file must start with the '#!AER-DAT3.1' magic line; every
    subsequent '#' line is skipped. Packets carry a 28-byte little-endian
    header (eventType, eventSource, eventSize, eventTSOffset,
    eventTSOverflow, eventCapacity, eventNumber, eventValid). Polarity
    events are 8 bytes: a 32-bit word (bit 0 validity, bit 1 polarity,
    bits 2-16 y, bits 17-31 x) followed by a 32-bit microsecond timestamp.
    Invalid-flagged events are dropped; non-polarity packets are skipped.
    """
    return _arrays_to_events(*decode_aedat_arrays(data))


def encode_aedat(events: Sequence[EventRecord]) -> bytes:
    """Assemble a minimal single-packet AEDAT 3.1 byte stream.

    Fixture/conversion helper (the datasets themselves are read-only):
    writes the magic line, one comment line, and one polarity packet with
    every event flagged valid.
    """
    header = AEDAT_MAGIC + b"\r\n#End Of ASCII Header\r\n"
    n = len(events)
    packet_header = AEDAT_HEADER_STRUCT.pack(
        AEDAT_POLARITY_TYPE, 0, AEDAT_POLARITY_EVENT_BYTES, 4, 0, n, n, n
    )
    words = np.empty(2 * n, dtype="<u4")
    for i, ev in enumerate(events):
        if not (0 <= ev.x < (1 << 15) and 0 <= ev.y < (1 << 15)):
            raise DataFormatError(f"event {i}: pixel ({ev.x}, {ev.y}) needs 15 bits")
        if not 0 <= ev.timestamp_us < (1 << 32):
            raise DataFormatError(
                f"event {i}: timestamp {ev.timestamp_us} us does not fit in 32 bits"
            )
        words[2 * i] = (ev.x << 17) | (ev.y << 2) | (int(bool(ev.polarity)) << 1) | 1
        words[2 * i + 1] = ev.timestamp_us
    return header + packet_header + words.tobytes()


# --------------------------------------------------------------------------
# gesture label windows
# --------------------------------------------------------------------------


def parse_gesture_labels(text: str) -> list[SampleLabelSpan]:
    """Parse a gesture label CSV (header + class,startTime_usec,endTime_usec)."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DataFormatError("empty label CSV")
    spans = []
    for ln in lines[1:]:  # first line is the header row
        parts = ln.split(",")
        if len(parts) != 3:
            raise DataFormatError(f"label CSV row {ln!r} does not have 3 columns")
        spans.append(
            SampleLabelSpan(int(parts[0]), int(parts[1]), int(parts[2]))
        )
    return spans


def load_gesture_sample(
    events: Sequence[EventRecord],
    labels: Sequence[SampleLabelSpan],
    class_id: int,
) -> list[EventRecord]:
    """Extract one class's events from a recording, re-based to window start.

    Multiple windows of the same class are concatenated: each window's
    events are shifted so the windows abut, keeping timestamps
    non-decreasing.
    """
    if not labels:
        raise DataFormatError("no label spans given")
    if class_id == GESTURE_EXCLUDED_CLASS:
        raise ValueError(f"class {GESTURE_EXCLUDED_CLASS} ('Other') is an excluded class")
    windows = [s for s in labels if s.class_id == class_id]
    if not windows:
        raise ValueError(f"class {class_id} absent from the label spans")
    windows.sort(key=lambda s: s.start_us)
    out = []
    offset = 0
    for w in windows:
        for ev in events:
            if w.start_us <= ev.timestamp_us < w.end_us:
                out.append(
                    EventRecord(
                        ev.x, ev.y, ev.polarity, ev.timestamp_us - w.start_us + offset
                    )
                )
        offset += w.end_us - w.start_us
    return out


# --------------------------------------------------------------------------
# text event format
# --------------------------------------------------------------------------


def parse_text_events(text: str) -> list[EventRecord]:
    """Parse the "x y polarity t_us" line format ('#' starts a comment)."""
    events = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise DataFormatError(
                f"line {lineno}: expected 'x y polarity t_us', got {raw!r}"
            )
        x, y, p, t = (int(v) for v in parts)
        events.append(EventRecord(x, y, bool(p), t))
    return events


def format_text_events(events: Iterable[EventRecord]) -> str:
    """Render events in the "x y polarity t_us" line format."""
    lines = ["# x y polarity t_us"]
    lines += [
        f"{ev.x} {ev.y} {int(ev.polarity)} {ev.timestamp_us}" for ev in events
    ]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# binning
# --------------------------------------------------------------------------


def bin_event_arrays(
    xs: np.ndarray,
    ys: np.ndarray,
    ts: np.ndarray,
    dt_us: int,
    width: int,
    height: int,
    t_s_ms: float,
    downsample: int = 1,
    duration_us: Optional[int] = None,
) -> list[EventFrame]:
    """Array-based core of :func:`bin_events` (same contract)."""
    if dt_us <= 0:
        raise ValueError(f"dt_us must be > 0, got {dt_us}")
    if t_s_ms <= 0:
        raise ValueError(f"t_s_ms must be > 0, got {t_s_ms}")
    if downsample < 1:
        raise ValueError(f"downsample must be >= 1, got {downsample}")
    if width % downsample or height % downsample:
        raise ValueError(
            f"downsample {downsample} must divide width {width} and height {height}"
        )
    out_w = width // downsample
    out_h = height // downsample

    if duration_us is not None:
        n_frames = -(-duration_us // dt_us)  # ceil
    elif len(ts):
        n_frames = int(ts.max()) // dt_us + 1
    else:
        n_frames = 0

    bits = np.zeros((n_frames, out_h, out_w), dtype=bool)
    if len(ts):
        k = ts // dt_us
        keep = k < n_frames  # events past an explicit duration are dropped
        bits[k[keep], ys[keep] // downsample, xs[keep] // downsample] = True

    amplitude = 1.0 / t_s_ms
    return [
        EventFrame(out_w, out_h, bits[i], i, amplitude) for i in range(n_frames)
    ]


def bin_events(
    events: Sequence[EventRecord],
    dt_us: int,
    width: int,
    height: int,
    t_s_ms: float,
    downsample: int = 1,
    duration_us: Optional[int] = None,
) -> list[EventFrame]:
    """Bin events into one binary frame per half-open window [k*dt, (k+1)*dt).

    Duplicate events on a pixel within one window collapse to a single set
    bit, and polarity is ignored (every event counts as positive). Frames
    cover ceil(duration/dt) windows when ``duration_us`` is given,
    otherwise up to the last event's window; with no events and no
    duration the sequence is empty.
    """
    xs, ys, _ps, ts = events_to_arrays(events)
    return bin_event_arrays(
        xs, ys, ts, dt_us, width, height, t_s_ms, downsample, duration_us
    )
