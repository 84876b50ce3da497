"""Parity suite: scripting-layer results must be bit-identical to the core
engine and the CLI."""

import json

import numpy as np
import pytest

import evspike
import evspike_scripting as scripting
from evspike.cli import main as cli_main
from evspike.datasets import make_synthetic_nmnist
from evspike.neurons import (
    NeuronModelKind,
    NeuronParams,
    NeuronState,
    step as core_step,
)

PARAM_SETS = {
    "lif": dict(tau_m=10.0, u_rest=-1.0, v_thresh=15.0, t_s=0.5),
    "qif": dict(
        tau_m=10.0, u_rest=-1.0, v_thresh=15.0, t_s=0.5,
        a0=0.1, u_c=8.0, v_peak=25.0,
    ),
    "eif": dict(
        tau_m=10.0, u_rest=-1.0, v_thresh=15.0, t_s=0.5,
        delta_t=1.5, theta_rh=9.0, v_peak=25.0,
    ),
}

CONFIG = {
    "dataset": {
        "kind": "nmnist", "path": "", "classes": [0, 1], "dt_ms": 2.0,
    },
    "neuron": {"kind": "lif", "tau_m_ms": 10.0},
    "stdp": {"a_plus": 0.01, "a_minus": -0.005},
    "threshold": {"lambda": 0.4},
    "architecture": {"populations": 4, "kernel_size": 5},
    "run": {"repeats": 2, "seed": 1, "out_dir": ""},
}


def test_versions_locked():
    assert scripting.__version__ == evspike.__version__


def test_step_parity_random_inputs():
    rng = np.random.default_rng(99)
    for kind, fields in PARAM_SETS.items():
        params = NeuronParams(**fields)
        for _ in range(10_000 // 3):
            u = float(rng.uniform(-30.0, 24.0))
            current = float(rng.uniform(-50.0, 50.0))
            got = scripting.step(kind, fields, u, current)
            expected = core_step(
                NeuronModelKind(kind), NeuronState(u=u), current, params, 0
            )
            assert got == (expected.new_u, expected.spiked)


def test_resting_lif_stays_at_rest():
    fields = PARAM_SETS["lif"]
    new_u, spiked = scripting.step("lif", fields, fields["u_rest"], 0.0)
    assert new_u == fields["u_rest"]
    assert spiked is False


def test_session_handles_and_release():
    session = scripting.open_session()
    handle = session.params(**PARAM_SETS["lif"])
    new_u, spiked = session.step("lif", handle, 1.0, 0.0)
    assert not spiked
    session.release()
    with pytest.raises(scripting.SessionClosedError):
        session.step("lif", handle, 1.0, 0.0)
    with pytest.raises(scripting.SessionClosedError):
        session.params(**PARAM_SETS["lif"])


def test_foreign_handle_rejected():
    a = scripting.open_session()
    b = scripting.open_session()
    handle = a.params(**PARAM_SETS["lif"])
    with pytest.raises(scripting.SessionClosedError, match="foreign"):
        b.step("lif", handle, 0.0, 0.0)


def test_invalid_config_key_named():
    config = {k: dict(v) for k, v in CONFIG.items()}
    config["neuron"]["bogus_knob"] = 3
    with pytest.raises(ValueError, match="bogus_knob"):
        scripting.train(config)


def test_train_parity_with_cli(tmp_path):
    data = tmp_path / "data"
    make_synthetic_nmnist(data, n_train_per_class=8, n_test_per_class=4, seed=0)

    config = {k: dict(v) for k, v in CONFIG.items()}
    config["dataset"]["path"] = str(data)
    config["run"]["out_dir"] = str(tmp_path / "cli-run")

    lines = []
    for section, table in config.items():
        lines.append(f"[{section}]")
        for key, value in table.items():
            lines.append(f"{key} = {json.dumps(value)}")
    (tmp_path / "config.toml").write_text("\n".join(lines))
    assert cli_main(["train", "--config", str(tmp_path / "config.toml")]) == 0
    cli_report = json.loads((tmp_path / "cli-run" / "report.json").read_text())

    report = scripting.train(config, out_dir=tmp_path / "binding-run")
    assert report == cli_report

    for name in ("kernel_00.npy", "kernel_01.npy", "labels_00.csv",
                 "predictions_00.csv", "report.json"):
        assert (
            (tmp_path / "binding-run" / name).read_bytes()
            == (tmp_path / "cli-run" / name).read_bytes()
        ), name


def test_decode_and_bin_delegate_to_core():
    events = [
        evspike.EventRecord(2, 3, True, 50),
        evspike.EventRecord(4, 5, False, 1800),
    ]
    data = evspike.encode_nmnist(events)
    tuples = scripting.decode_nmnist(data)
    assert tuples == [(2, 3, True, 50), (4, 5, False, 1800)]

    frames = scripting.bin_events(tuples, dt_us=1000, width=8, height=8, t_s_ms=1.0)
    core_frames = evspike.bin_events(events, dt_us=1000, width=8, height=8, t_s_ms=1.0)
    assert len(frames) == len(core_frames) == 2
    for a, b in zip(frames, core_frames):
        assert np.array_equal(a.bits, b.bits)
        assert a.amplitude == b.amplitude
