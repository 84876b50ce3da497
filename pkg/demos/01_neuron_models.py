#!/usr/bin/env python3
"""Walk through the three neuron models one step at a time.

Drives a LIF, a QIF and an EIF neuron with the same square current pulse,
prints their voltage traces side by side, and samples each model's
du/dt-vs-u curve to CSV (the data behind a phase-portrait figure).

Run:  python demos/01_neuron_models.py
"""

from pathlib import Path

from evspike import (
    NeuronModelKind,
    NeuronParams,
    NeuronState,
    apply_outcome,
    phase_curve,
    step,
)

OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

# One parameter set per model; t_s = 1 ms, so step index == milliseconds.
PARAMS = {
    NeuronModelKind.LIF: NeuronParams(tau_m=10.0, v_thresh=12.0, t_s=1.0),
    NeuronModelKind.QIF: NeuronParams(
        tau_m=10.0, v_thresh=12.0, t_s=1.0, a0=0.08, u_c=8.0, v_peak=25.0
    ),
    NeuronModelKind.EIF: NeuronParams(
        tau_m=10.0, v_thresh=12.0, t_s=1.0, delta_t=1.5, theta_rh=9.0, v_peak=25.0
    ),
}


def current_pulse(now: int) -> float:
    """2.0 units of current between 10 ms and 40 ms, nothing elsewhere."""
    return 2.0 if 10 <= now < 40 else 0.0


print("=== 60 ms under a square current pulse (spikes marked with *) ===")
traces = {}
for kind, params in PARAMS.items():
    state = NeuronState(u=params.u_rest)
    trace, spikes = [], []
    for now in range(60):
        outcome = step(kind, state, current_pulse(now), params, now)
        state = apply_outcome(state, outcome, params, now)
        trace.append(state.u)
        if outcome.spiked:
            spikes.append(now)
    traces[kind] = (trace, spikes)
    print(f"{kind.value:>4}: spikes at {spikes if spikes else 'none'} ms")

print("\n  t(ms)   LIF       QIF       EIF")
for t in range(0, 60, 3):
    row = "  ".join(
        f"{traces[k][0][t]:7.3f}{'*' if t in traces[k][1] else ' '}"
        for k in PARAMS
    )
    print(f"  {t:5d}  {row}")

print("\n=== Phase portraits: where du/dt crosses zero ===")
print("LIF crosses once at u_rest; QIF at u_rest and u_c; the EIF upswing")
print("starts where the exponential term outgrows the leak.")
for kind, params in PARAMS.items():
    curve = phase_curve(kind, params, -5.0, 20.0, 501)
    path = OUT / f"phase_{kind.value}.csv"
    with path.open("w") as fh:
        fh.write("u,dudt\n")
        for u, d in curve:
            fh.write(f"{float(u)!r},{float(d)!r}\n")
    print(f"  wrote {path}")

# The same overlay the sharpness comparison uses: two EIF curves that agree
# far below the rheobase and split above it.
for delta_t in (0.5, 4.0):
    params = NeuronParams(
        tau_m=10.0, v_thresh=12.0, t_s=1.0,
        delta_t=delta_t, theta_rh=9.0, v_peak=25.0,
    )
    curve = phase_curve(NeuronModelKind.EIF, params, -5.0, 20.0, 501)
    path = OUT / f"phase_eif_sharpness_{delta_t}.csv"
    with path.open("w") as fh:
        fh.write("u,dudt\n")
        for u, d in curve:
            fh.write(f"{float(u)!r},{float(d)!r}\n")
    print(f"  wrote {path}")
