"""Scripting layer over the evspike engine.

Exposes the engine's coarse entry points (step, train, decode_nmnist,
bin_events) to interactive research scripts, with results guaranteed
bit-identical to the core: every call delegates to the engine's own
operations, never re-implementing them.

Sessions own the handles they create; releasing a session invalidates its
handles so stale references fail cleanly instead of computing on dead
state. Sessions are single-threaded; use one per thread. Versioned in
lockstep with the core package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping, Optional

import evspike
from evspike import (
    NeuronModelKind,
    NeuronParams,
    NeuronState,
    config_from_mapping,
)
from evspike import bin_events as _core_bin_events
from evspike import decode_nmnist as _core_decode_nmnist
from evspike import step as _core_step
from evspike.experiment import run_experiment, write_run_outputs

__version__ = "0.1.0"

__all__ = [
    "BoundHandle",
    "Session",
    "SessionClosedError",
    "bin_events",
    "decode_nmnist",
    "open_session",
    "step",
    "train",
]


class SessionClosedError(RuntimeError):
    """An operation used a handle whose session was released."""


@dataclass(frozen=True)
class BoundHandle:
    """Opaque reference to a core object, valid while its session is open."""

    kind: str
    key: int
    session: "Session"


class Session:
    """Owns bound objects and scopes their lifetime."""

    def __init__(self):
        self._objects: Optional[dict[int, Any]] = {}
        self._next_key = 0

    # -- lifetime ---------------------------------------------------------

    @property
    def closed(self) -> bool:
        return self._objects is None

    def release(self) -> None:
        """Invalidate every handle created by this session."""
        self._objects = None

    def __enter__(self) -> "Session":
        return self

    def __exit__(self, *exc) -> None:
        self.release()

    def _bind(self, kind: str, obj) -> BoundHandle:
        if self.closed:
            raise SessionClosedError("session already released")
        key = self._next_key
        self._next_key += 1
        self._objects[key] = obj
        return BoundHandle(kind=kind, key=key, session=self)

    def _lookup(self, handle: BoundHandle):
        if self.closed:
            raise SessionClosedError(
                f"{handle.kind} handle used after its session was released"
            )
        if handle.session is not self or handle.key not in self._objects:
            raise SessionClosedError(f"foreign or stale {handle.kind} handle")
        return self._objects[handle.key]

    # -- bound objects ----------------------------------------------------

    def params(self, **fields) -> BoundHandle:
        """Bind a neuron parameter set (fields as for the core engine)."""
        return self._bind("params", NeuronParams(**fields))

    def step(
        self,
        model: str,
        params: BoundHandle | Mapping[str, float],
        u: float,
        current: float,
        now: int = 0,
    ) -> tuple[float, bool]:
        """One integration step from potential ``u``; returns (new_u, spiked)."""
        if isinstance(params, BoundHandle):
            p = self._lookup(params)
        else:
            if self.closed:
                raise SessionClosedError("session already released")
            p = NeuronParams(**dict(params))
        outcome = _core_step(
            NeuronModelKind(model), NeuronState(u=u), current, p, now
        )
        return outcome.new_u, outcome.spiked


def open_session() -> Session:
    return Session()


# -- module-level one-shot API (an implicit throwaway session each call) ---


def step(
    model: str, params: Mapping[str, float], u: float, current: float, now: int = 0
) -> tuple[float, bool]:
    """One neuron step with params given as a mapping; (new_u, spiked)."""
    with open_session() as session:
        return session.step(model, params, u, current, now)


def train(config: Mapping[str, Any], out_dir=None) -> dict:
    """Run the full train/evaluate protocol described by a config mapping.

    The mapping mirrors the config file's sections. Returns the run report
    as a plain dict, identical to the CLI's report.json payload; pass
    ``out_dir`` to also write the CLI's artifacts there.
    """
    cfg = config_from_mapping(dict(config))
    report, outcomes = run_experiment(cfg)
    if out_dir is not None:
        write_run_outputs(out_dir, cfg, report, outcomes)
    payload = {"config": {"seed": cfg.seed, "model": cfg.neuron.kind.value}}
    payload.update(report.payload())
    return payload


def decode_nmnist(data: bytes) -> list[tuple[int, int, bool, int]]:
    """Decode 5-byte records to (x, y, polarity, timestamp_us) tuples."""
    return [
        (ev.x, ev.y, ev.polarity, ev.timestamp_us)
        for ev in _core_decode_nmnist(data)
    ]


def bin_events(
    events,
    dt_us: int,
    width: int,
    height: int,
    t_s_ms: float,
    downsample: int = 1,
    duration_us: Optional[int] = None,
) -> list:
    """Bin (x, y, polarity, t_us) tuples into binary frames.

    Returns the core EventFrame objects (numpy-backed bit maps).
    """
    records = [evspike.EventRecord(x, y, bool(p), t) for x, y, p, t in events]
    return _core_bin_events(
        records, dt_us, width, height, t_s_ms, downsample, duration_us
    )
