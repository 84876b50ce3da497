"""Single-variable integrate-and-fire neuron models (LIF, QIF, EIF).

All three models evolve one state variable, the membrane potential ``u``,
under a model-specific drive ``du/dt = f(u, I)``, integrated with forward
Euler at a fixed step ``t_s``. Spike emission, reset and refractoriness are
handled uniformly:

* LIF spikes when the updated potential reaches ``v_thresh``.
* QIF and EIF diverge once past their unstable region, so they spike when
  the potential reaches the numerical cap ``v_peak``.

Time is handled in integer step counts (``now`` is a step index, one step
= ``t_s`` milliseconds). Refractory arithmetic is therefore exact;
conversion to milliseconds happens only at I/O boundaries.

The drive functions accept scalars or numpy arrays, so a whole layer can
be stepped with one vectorized call using the exact same arithmetic as the
scalar step operations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np

# Clamp for the EIF exponential argument. exp(50) ~ 5e21: far past any
# sensible v_peak, so a clamped drive still guarantees a spike next step,
# while never overflowing float64.
EXP_ARG_MAX = 50.0

# Default gap between v_thresh and the divergence cap v_peak.
DEFAULT_V_PEAK_OFFSET = 10.0

# Default refractory period in ms.
DEFAULT_T_REF = 2.0


class NeuronModelKind(str, Enum):
    """The three supported integrate-and-fire variants."""

    LIF = "lif"
    QIF = "qif"
    EIF = "eif"

    def __str__(self) -> str:  # serialized as lowercase name
        return self.value


@dataclass(frozen=True)
class NeuronParams:
    """Parameters shared by the integrate-and-fire models.

    Parameters
    ----------
    tau_m : float
        Membrane time constant (ms), > 0.
    u_rest : float
        Resting potential (mV).
    resistance : float
        Membrane resistance R (dimensionless units), > 0. The capacitance
        is derived as C = tau_m / R, so tau_m = R * C holds by construction.
    v_thresh : float
        Firing threshold, > u_rest. Spike criterion for LIF; for QIF/EIF it
        anchors the derived quantities (v_peak default, rheobase/cut-off
        fractions) while the spike criterion is v_peak.
    v_reset : float, optional
        Post-spike potential. Defaults to u_rest.
    t_ref : float
        Refractory period (ms), >= 0.
    t_s : float
        Integration time-step (ms), > 0. Euler stability wants t_s <= tau_m;
        a warning is emitted otherwise.
    delta_t : float, optional
        EIF sharpness of the exponential upswing, > 0.
    theta_rh : float, optional
        EIF rheobase threshold; above it the exponential term dominates.
    a0 : float, optional
        QIF curvature of the quadratic drive, > 0.
    u_c : float, optional
        QIF cut-off potential, > u_rest; above it the potential grows
        until a spike even with I = 0.
    v_peak : float, optional
        Divergence cap for QIF/EIF, >= v_thresh. Defaults to
        v_thresh + 10 when either model's extra parameters are present.
    """

    tau_m: float
    u_rest: float = 0.0
    resistance: float = 1.0
    v_thresh: float = 1.0
    v_reset: Optional[float] = None
    t_ref: float = DEFAULT_T_REF
    t_s: float = 1.0
    delta_t: Optional[float] = None
    theta_rh: Optional[float] = None
    a0: Optional[float] = None
    u_c: Optional[float] = None
    v_peak: Optional[float] = None

    def __post_init__(self):
        if not (self.tau_m > 0 and math.isfinite(self.tau_m)):
            raise ValueError(f"tau_m must be finite and > 0, got {self.tau_m}")
        if not (self.resistance > 0 and math.isfinite(self.resistance)):
            raise ValueError(f"resistance must be finite and > 0, got {self.resistance}")
        if not (self.t_s > 0 and math.isfinite(self.t_s)):
            raise ValueError(f"t_s must be finite and > 0, got {self.t_s}")
        if self.t_ref < 0:
            raise ValueError(f"t_ref must be >= 0, got {self.t_ref}")
        if not self.v_thresh > self.u_rest:
            raise ValueError(
                f"v_thresh ({self.v_thresh}) must exceed u_rest ({self.u_rest})"
            )
        if self.v_reset is None:
            object.__setattr__(self, "v_reset", self.u_rest)
        if self.v_peak is None and (self.delta_t is not None or self.a0 is not None):
            object.__setattr__(self, "v_peak", self.v_thresh + DEFAULT_V_PEAK_OFFSET)
        if self.delta_t is not None and not self.delta_t > 0:
            raise ValueError(f"delta_t must be > 0, got {self.delta_t}")
        if self.a0 is not None and not self.a0 > 0:
            raise ValueError(f"a0 must be > 0, got {self.a0}")
        if self.u_c is not None and not self.u_c > self.u_rest:
            raise ValueError(f"u_c ({self.u_c}) must exceed u_rest ({self.u_rest})")
        if self.v_peak is not None and self.v_peak < self.v_thresh:
            raise ValueError(
                f"v_peak ({self.v_peak}) must be >= v_thresh ({self.v_thresh})"
            )
        if self.t_s > self.tau_m:
            warnings.warn(
                f"t_s ({self.t_s} ms) exceeds tau_m ({self.tau_m} ms); "
                "forward Euler may be unstable",
                stacklevel=2,
            )

    @property
    def capacitance(self) -> float:
        """Membrane capacitance, derived so that tau_m = R * C."""
        return self.tau_m / self.resistance

    @property
    def refractory_steps(self) -> int:
        """Refractory period expressed in whole integration steps."""
        return int(round(self.t_ref / self.t_s))

    def validate_for(self, kind: NeuronModelKind) -> None:
        """Raise if a model-specific parameter is missing for `kind`."""
        if kind is NeuronModelKind.EIF:
            if self.delta_t is None or self.theta_rh is None:
                raise ValueError("EIF requires delta_t and theta_rh")
            if self.v_peak is None:
                raise ValueError("EIF requires v_peak")
        elif kind is NeuronModelKind.QIF:
            if self.a0 is None or self.u_c is None:
                raise ValueError("QIF requires a0 and u_c")
            if self.v_peak is None:
                raise ValueError("QIF requires v_peak")

    def with_threshold(
        self,
        v_thresh: float,
        theta_rh_frac: Optional[float] = None,
        u_c_frac: Optional[float] = None,
        v_peak_offset: float = DEFAULT_V_PEAK_OFFSET,
    ) -> "NeuronParams":
        """Return a copy re-anchored to a new firing threshold.

        Used by homeostatic threshold adaptation: quantities expressed as
        fractions of the threshold (EIF rheobase, QIF cut-off) track it,
        and v_peak keeps its offset above it.
        """
        updates = {"v_thresh": v_thresh}
        if self.v_peak is not None:
            updates["v_peak"] = v_thresh + v_peak_offset
        if theta_rh_frac is not None:
            updates["theta_rh"] = self.u_rest + theta_rh_frac * (v_thresh - self.u_rest)
        if u_c_frac is not None:
            updates["u_c"] = self.u_rest + u_c_frac * (v_thresh - self.u_rest)
        return replace(self, **updates)


@dataclass
class NeuronState:
    """Mutable per-neuron state.

    ``refractory_until`` and ``last_spike_time`` are step indices: the
    neuron ignores input while ``now < refractory_until``.
    """

    u: float
    refractory_until: int = 0
    last_spike_time: Optional[int] = None


@dataclass(frozen=True)
class StepOutcome:
    """Result of one integration step."""

    new_u: float
    spiked: bool
    spike_time: Optional[int] = None


def lif_drive(u, current, params: NeuronParams):
    """du/dt for the leaky model: linear decay to rest plus R*I, over tau_m."""
    return (-(u - params.u_rest) + params.resistance * current) / params.tau_m


def eif_drive(u, current, params: NeuronParams):
    """du/dt for the exponential model.

    The exponential argument is clamped at EXP_ARG_MAX to avoid overflow;
    any clamped value corresponds to a potential already far past v_peak.
    """
    arg = np.minimum((u - params.theta_rh) / params.delta_t, EXP_ARG_MAX)
    return (
        -(u - params.u_rest) + params.delta_t * np.exp(arg) + params.resistance * current
    ) / params.tau_m


def qif_drive(u, current, params: NeuronParams):
    """du/dt for the quadratic model: a0*(u-u_c)*(u-u_rest) plus R*I, over tau_m."""
    return (
        params.a0 * (u - params.u_c) * (u - params.u_rest) + params.resistance * current
    ) / params.tau_m


_DRIVES = {
    NeuronModelKind.LIF: lif_drive,
    NeuronModelKind.QIF: qif_drive,
    NeuronModelKind.EIF: eif_drive,
}


def drive_fn(kind: NeuronModelKind):
    """The du/dt function for a model kind (vectorized over u and current)."""
    return _DRIVES[NeuronModelKind(kind)]


def spike_criterion(kind: NeuronModelKind, params: NeuronParams) -> float:
    """Potential at or above which the model emits a spike."""
    if NeuronModelKind(kind) is NeuronModelKind.LIF:
        return params.v_thresh
    return params.v_peak


def _check_current(current) -> None:
    if not math.isfinite(current):
        raise ValueError(f"input current must be finite, got {current}")


def _step(
    kind: NeuronModelKind,
    state: NeuronState,
    current: float,
    params: NeuronParams,
    now: int,
) -> StepOutcome:
    _check_current(current)
    params.validate_for(kind)
    if now < state.refractory_until:
        return StepOutcome(new_u=state.u, spiked=False, spike_time=None)
    u = state.u + params.t_s * float(drive_fn(kind)(state.u, current, params))
    if u >= spike_criterion(kind, params):
        return StepOutcome(new_u=params.v_reset, spiked=True, spike_time=now)
    return StepOutcome(new_u=u, spiked=False, spike_time=None)


def lif_step(
    state: NeuronState, current: float, params: NeuronParams, now: int
) -> StepOutcome:
    """One Euler step of the leaky model; spike when u reaches v_thresh.

    Pure in its inputs: the caller commits the outcome with
    :func:`apply_outcome`. During refractoriness (``now <
    refractory_until``) the potential is frozen and no spike is emitted.
    """
    return _step(NeuronModelKind.LIF, state, current, params, now)


def eif_step(
    state: NeuronState, current: float, params: NeuronParams, now: int
) -> StepOutcome:
    """One Euler step of the exponential model; spike when u reaches v_peak."""
    return _step(NeuronModelKind.EIF, state, current, params, now)


def qif_step(
    state: NeuronState, current: float, params: NeuronParams, now: int
) -> StepOutcome:
    """One Euler step of the quadratic model; spike when u reaches v_peak."""
    return _step(NeuronModelKind.QIF, state, current, params, now)


_STEPS = {
    NeuronModelKind.LIF: lif_step,
    NeuronModelKind.QIF: qif_step,
    NeuronModelKind.EIF: eif_step,
}


def step(
    kind: NeuronModelKind,
    state: NeuronState,
    current: float,
    params: NeuronParams,
    now: int,
) -> StepOutcome:
    """Dispatch one integration step by model kind."""
    return _STEPS[NeuronModelKind(kind)](state, current, params, now)


def apply_outcome(
    state: NeuronState, outcome: StepOutcome, params: NeuronParams, now: int
) -> NeuronState:
    """Commit a step outcome, returning the successor state."""
    if outcome.spiked:
        return NeuronState(
            u=outcome.new_u,
            refractory_until=now + params.refractory_steps,
            last_spike_time=outcome.spike_time,
        )
    return NeuronState(
        u=outcome.new_u,
        refractory_until=state.refractory_until,
        last_spike_time=state.last_spike_time,
    )


def phase_curve(
    kind: NeuronModelKind,
    params: NeuronParams,
    u_min: float,
    u_max: float,
    n_points: int,
    current: float = 0.0,
) -> np.ndarray:
    """Sample du/dt over a potential range.

    Returns an (n_points, 2) array of (u, du/dt) pairs on a uniform grid
    over [u_min, u_max]. Zero crossings are the model's fixed points: the
    LIF drive vanishes at u_rest only, the QIF drive at u_rest and u_c.
    """
    if not u_min < u_max:
        raise ValueError(f"u_min ({u_min}) must be < u_max ({u_max})")
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    _check_current(current)
    params.validate_for(kind)
    us = np.linspace(u_min, u_max, n_points)
    dudt = drive_fn(kind)(us, current, params)
    return np.column_stack([us, dudt])
