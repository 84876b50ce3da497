"""Single-layer spiking convolutional network trained with bounded STDP.

The convolution kernel is the connectivity: population ``n``'s feature map
is the valid (no padding, stride 1) correlation of the input frame with
kernel ``n``, scaled by the frame's spike amplitude. Each output location
holds one neuron. Per time-step:

1. every non-refractory neuron integrates its convolution current;
2. populations with at least one spike inhibit their non-spiking members
   (refractory until now + t_ref);
3. a single winner (k = 1) takes the STDP update: LTP on kernel positions
   aligned with an active input bit, LTD on the rest, both through the
   bounded parabolic rule dW = a * (W - LB) * (UB - W);
4. the homeostatic threshold is recomputed from the updated mean weight.

Weight updates vanish smoothly at both bounds, so weights stay strictly
inside (LB, UB) forever.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .events import EventFrame
from .neurons import (
    DEFAULT_V_PEAK_OFFSET,
    NeuronModelKind,
    NeuronParams,
    drive_fn,
    spike_criterion,
)

WEIGHT_CLAMP_MARGIN = 1e-6  # relative margin keeping initial weights off the bounds


@dataclass(frozen=True)
class StdpConfig:
    """Scales and bounds of the parabolic STDP rule.

    ``a_plus`` (> 0) scales LTP, ``a_minus`` (< 0) scales LTD. Both
    magnitudes must stay below 1/(UB - LB): that is exactly the condition
    under which one update cannot carry a weight across a bound.
    """

    a_plus: float
    a_minus: float
    lower_bound: float = 0.0
    upper_bound: float = 1.0

    def __post_init__(self):
        if not self.lower_bound < self.upper_bound:
            raise ValueError(
                f"need lower_bound < upper_bound, got [{self.lower_bound}, {self.upper_bound}]"
            )
        if not self.a_plus > 0:
            raise ValueError(f"a_plus must be > 0, got {self.a_plus}")
        if not self.a_minus < 0:
            raise ValueError(f"a_minus must be < 0, got {self.a_minus}")
        span = self.upper_bound - self.lower_bound
        if self.a_plus * span >= 1 or -self.a_minus * span >= 1:
            raise ValueError(
                "update scales too large to preserve the open weight interval: "
                f"need |a| < 1/(UB-LB) = {1 / span}"
            )


@dataclass(frozen=True)
class ThresholdConfig:
    """Inputs of the homeostatic threshold rule.

    The threshold is the fraction ``lam`` of the potential jump a neuron
    would receive from one fully dense input window:
    lam * A * (t_s / C) * mean_weight * (W_k * H_k * N_c).
    """

    lam: float
    spike_amplitude: float
    capacitance: float
    t_s: float

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lam must be in [0, 1], got {self.lam}")
        if self.spike_amplitude <= 0:
            raise ValueError(f"spike_amplitude must be > 0, got {self.spike_amplitude}")
        if self.capacitance <= 0:
            raise ValueError(f"capacitance must be > 0, got {self.capacitance}")
        if self.t_s <= 0:
            raise ValueError(f"t_s must be > 0, got {self.t_s}")


def compute_threshold(
    cfg: ThresholdConfig, mean_weight: float, w_k: int, h_k: int, n_c: int
) -> float:
    """Homeostatic firing threshold for the current mean synaptic weight."""
    if not np.isfinite(mean_weight):
        raise ValueError(f"mean_weight must be finite, got {mean_weight}")
    return (
        cfg.lam
        * cfg.spike_amplitude
        * (cfg.t_s / cfg.capacitance)
        * mean_weight
        * (w_k * h_k * n_c)
    )


@dataclass
class SynapticKernel:
    """Convolution weights, one kernel per neuron population.

    ``weights`` has shape (populations, channels, kernel_height,
    kernel_width), float64, every entry strictly inside the STDP bounds.
    """

    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.ndim != 4:
            raise ValueError(
                f"kernel weights must be 4D (N, C, Hk, Wk), got shape {self.weights.shape}"
            )

    @property
    def populations(self) -> int:
        return self.weights.shape[0]

    @property
    def channels(self) -> int:
        return self.weights.shape[1]

    @property
    def kernel_height(self) -> int:
        return self.weights.shape[2]

    @property
    def kernel_width(self) -> int:
        return self.weights.shape[3]

    def mean_weight(self) -> float:
        return float(self.weights.mean())

    def save(self, path) -> None:
        """Checkpoint to a .npy dump (self-describing shape header, row-major)."""
        np.save(path, self.weights)

    @classmethod
    def load(cls, path) -> "SynapticKernel":
        return cls(weights=np.load(path))


def init_weights(
    shape: tuple[int, int, int, int],
    rng_seed: int,
    mean: float = 0.8,
    std: float = 0.05,
    bounds: tuple[float, float] = (0.0, 1.0),
) -> SynapticKernel:
    """Draw a kernel from a clamped normal distribution, deterministic per seed."""
    lb, ub = bounds
    if not lb < ub:
        raise ValueError(f"need lb < ub, got [{lb}, {ub}]")
    rng = np.random.default_rng(rng_seed)
    eps = WEIGHT_CLAMP_MARGIN * (ub - lb)
    w = np.clip(rng.normal(mean, std, size=shape), lb + eps, ub - eps)
    return SynapticKernel(weights=w)


@dataclass(frozen=True)
class LayerSpike:
    """One spike within a time-step, with the potential that crossed the criterion."""

    population: int
    y: int
    x: int
    potential: float


@dataclass(frozen=True)
class WinnerRecord:
    """The time-step's single STDP-eligible spike (k = 1)."""

    population: int
    y: int
    x: int
    step: int
    potential: float


@dataclass
class LayerState:
    """Per-neuron membrane state for one layer.

    ``u`` and ``refractory_until`` have shape (populations, H_out, W_out);
    ``thresholds`` holds the adaptive firing threshold per population
    (updated uniformly from the global mean weight).
    """

    u: np.ndarray
    refractory_until: np.ndarray
    thresholds: np.ndarray
    params: NeuronParams
    refractory_horizon: int = 0  # max of refractory_until; lets quiet steps skip masking

    @classmethod
    def at_rest(
        cls, populations: int, out_height: int, out_width: int, params: NeuronParams,
        threshold: float,
    ) -> "LayerState":
        shape = (populations, out_height, out_width)
        return cls(
            u=np.full(shape, params.u_rest, dtype=np.float64),
            refractory_until=np.zeros(shape, dtype=np.int64),
            thresholds=np.full(populations, threshold, dtype=np.float64),
            params=params.with_threshold(threshold),
        )

    def reset(self) -> None:
        """Back to rest with refractoriness cleared (sample boundary)."""
        self.u.fill(self.params.u_rest)
        self.refractory_until.fill(0)
        self.refractory_horizon = 0

    def set_threshold(
        self,
        threshold: float,
        theta_rh_frac: Optional[float] = None,
        u_c_frac: Optional[float] = None,
        v_peak_offset: float = DEFAULT_V_PEAK_OFFSET,
    ) -> None:
        """Apply a recomputed homeostatic threshold to every population."""
        self.thresholds.fill(threshold)
        self.params = self.params.with_threshold(
            threshold, theta_rh_frac, u_c_frac, v_peak_offset
        )


# Below this many active pixels, scattering shifted kernels beats the
# dense window-matrix product.
SPARSE_CONV_MAX_ACTIVE = 24


def _convolve_matmul(bits: np.ndarray, kernel: SynapticKernel) -> np.ndarray:
    kh, kw = kernel.kernel_height, kernel.kernel_width
    windows = np.lib.stride_tricks.sliding_window_view(bits, (kh, kw))
    out_h, out_w = windows.shape[0], windows.shape[1]
    flat = windows.reshape(out_h * out_w, kh * kw).astype(np.float64)
    w = kernel.weights.reshape(kernel.populations, kh * kw)
    currents = flat @ w.T  # (out_h*out_w, populations)
    return np.ascontiguousarray(currents.T.reshape(kernel.populations, out_h, out_w))


def _convolve_scatter(bits: np.ndarray, kernel: SynapticKernel) -> np.ndarray:
    # each active pixel deposits the flipped kernel over the output
    # locations whose window contains it; padding absorbs the borders
    kh, kw = kernel.kernel_height, kernel.kernel_width
    h, w = bits.shape
    out_h, out_w = h - kh + 1, w - kw + 1
    buf = np.zeros((kernel.populations, h + kh - 1, w + kw - 1))
    flipped = kernel.weights[:, 0, ::-1, ::-1]
    ys, xs = np.nonzero(bits)
    for py, px in zip(ys, xs):
        buf[:, py : py + kh, px : px + kw] += flipped
    return np.ascontiguousarray(
        buf[:, kh - 1 : kh - 1 + out_h, kw - 1 : kw - 1 + out_w]
    )


def convolve(frame: EventFrame, kernel: SynapticKernel) -> np.ndarray:
    """Post-synaptic currents: amplitude-scaled valid correlation.

    current[n, y, x] = A * sum_{c,i,j} weights[n,c,i,j] * bits[c, y+i, x+j].
    Returns shape (populations, H - Hk + 1, W - Wk + 1).
    """
    if kernel.channels != 1:
        raise ValueError(
            f"frame provides 1 channel but kernel expects {kernel.channels}"
        )
    kh, kw = kernel.kernel_height, kernel.kernel_width
    if frame.height < kh or frame.width < kw:
        raise ValueError(
            f"frame {frame.height}x{frame.width} smaller than kernel {kh}x{kw}"
        )
    bits = frame.bits
    n_active = int(np.count_nonzero(bits))
    if n_active == 0:
        currents = np.zeros(
            (kernel.populations, frame.height - kh + 1, frame.width - kw + 1)
        )
    elif n_active <= SPARSE_CONV_MAX_ACTIVE:
        currents = _convolve_scatter(bits, kernel)
    else:
        currents = _convolve_matmul(bits, kernel)
    currents *= frame.amplitude
    return currents


def step_layer(
    frame: EventFrame,
    kernel: SynapticKernel,
    layer: LayerState,
    model: NeuronModelKind,
    now: int,
) -> list[LayerSpike]:
    """Advance every neuron one step and apply population-wide inhibition.

    Phase 1 integrates all non-refractory neurons on the frame's currents;
    phase 2 puts the non-spiking members of every spiking population into
    refractoriness until now + t_ref. Returns the step's spikes.
    """
    params = layer.params
    if layer.u.shape[0] != kernel.populations:
        raise ValueError(
            f"layer has {layer.u.shape[0]} populations, kernel {kernel.populations}"
        )
    currents = convolve(frame, kernel)
    if currents.shape != layer.u.shape:
        raise ValueError(
            f"kernel output {currents.shape} does not match layer {layer.u.shape}"
        )

    nobody_refractory = layer.refractory_horizon <= now
    u_new = layer.u + params.t_s * drive_fn(model)(layer.u, currents, params)
    if not nobody_refractory:
        active = layer.refractory_until <= now
        u_new = np.where(active, u_new, layer.u)

    criterion = spike_criterion(model, params)
    if NeuronModelKind(model) is NeuronModelKind.LIF:
        spiked = u_new >= layer.thresholds[:, None, None]
        spike_potentials = u_new
    else:
        spiked = u_new >= criterion
        spike_potentials = np.minimum(u_new, criterion)  # cap at v_peak
    if not nobody_refractory:
        spiked &= active

    if not spiked.any():
        layer.u = u_new
        return []

    layer.u = np.where(spiked, params.v_reset, u_new)
    refractory_end = now + params.refractory_steps
    layer.refractory_until[spiked] = refractory_end
    # population-wide inhibition of the non-spikers
    pop_spiked = spiked.any(axis=(1, 2))
    inhibited = pop_spiked[:, None, None] & ~spiked
    layer.refractory_until[inhibited] = refractory_end
    layer.refractory_horizon = max(layer.refractory_horizon, refractory_end)
    ns, ys, xs = np.nonzero(spiked)
    pots = spike_potentials[ns, ys, xs]
    return [
        LayerSpike(int(n), int(y), int(x), float(p))
        for n, y, x, p in zip(ns, ys, xs, pots)
    ]


def select_winner(spikes: list[LayerSpike], step: int) -> Optional[WinnerRecord]:
    """k = 1 winner-take-all over one step's spikes.

    Highest potential wins; ties break toward the lowest
    (population, y, x) index. None when the step had no spikes.
    """
    if not spikes:
        return None
    best = min(spikes, key=lambda s: (-s.potential, s.population, s.y, s.x))
    return WinnerRecord(best.population, best.y, best.x, step, best.potential)


def stdp_update(
    kernel: SynapticKernel,
    winner: WinnerRecord,
    frame: EventFrame,
    cfg: StdpConfig,
) -> SynapticKernel:
    """Apply the bounded parabolic update to the winner's kernel, in place.

    Kernel positions aligned with an active input bit get LTP
    (a_plus * (W - LB) * (UB - W)); the rest get LTD with a_minus. Other
    populations' kernels are untouched. Returns the (mutated) kernel.
    """
    kh, kw = kernel.kernel_height, kernel.kernel_width
    if not (
        0 <= winner.population < kernel.populations
        and 0 <= winner.y <= frame.height - kh
        and 0 <= winner.x <= frame.width - kw
    ):
        raise ValueError(
            f"winner at (pop={winner.population}, y={winner.y}, x={winner.x}) "
            f"out of range for frame {frame.height}x{frame.width}, kernel {kh}x{kw}"
        )
    aligned = frame.bits[winner.y : winner.y + kh, winner.x : winner.x + kw]
    w = kernel.weights[winner.population]
    scale = np.where(aligned, cfg.a_plus, cfg.a_minus)
    updated = w + scale * (w - cfg.lower_bound) * (cfg.upper_bound - w)
    # In exact arithmetic the parabolic rule never reaches a bound, but
    # float rounding can absorb a weight onto it; keep strictly-inside
    # weights strictly inside. Weights sitting exactly on a bound receive
    # the rule's exact zero update and stay put.
    inside = (w > cfg.lower_bound) & (w < cfg.upper_bound)
    clipped = np.clip(
        updated,
        np.nextafter(cfg.lower_bound, cfg.upper_bound),
        np.nextafter(cfg.upper_bound, cfg.lower_bound),
    )
    w[...] = np.where(inside, clipped, updated)
    return kernel


@dataclass
class SampleResult:
    """Spike log of one sample pass: (population, step) per spike, in order."""

    spike_populations: np.ndarray
    spike_steps: np.ndarray
    n_winners: int

    def __len__(self) -> int:
        return len(self.spike_populations)


@dataclass
class SpikingConvPipeline:
    """Kernel + layer + learning rule, driven one frame sequence at a time.

    The homeostatic threshold is a pure function of the mean weight, so it
    is initialized from the freshly drawn kernel and recomputed after every
    STDP update. ``theta_rh_frac`` / ``u_c_frac``, when set, re-anchor the
    EIF rheobase / QIF cut-off to each new threshold.
    """

    kernel: SynapticKernel
    model: NeuronModelKind
    stdp: StdpConfig
    threshold_cfg: ThresholdConfig
    layer: LayerState
    theta_rh_frac: Optional[float] = None
    u_c_frac: Optional[float] = None
    v_peak_offset: float = DEFAULT_V_PEAK_OFFSET

    @classmethod
    def create(
        cls,
        kernel: SynapticKernel,
        model: NeuronModelKind,
        params: NeuronParams,
        stdp: StdpConfig,
        threshold_cfg: ThresholdConfig,
        input_height: int,
        input_width: int,
        theta_rh_frac: Optional[float] = None,
        u_c_frac: Optional[float] = None,
        v_peak_offset: float = DEFAULT_V_PEAK_OFFSET,
    ) -> "SpikingConvPipeline":
        model = NeuronModelKind(model)
        out_h = input_height - kernel.kernel_height + 1
        out_w = input_width - kernel.kernel_width + 1
        if out_h < 1 or out_w < 1:
            raise ValueError(
                f"kernel {kernel.kernel_height}x{kernel.kernel_width} larger than "
                f"input {input_height}x{input_width}"
            )
        thresh = compute_threshold(
            threshold_cfg,
            kernel.mean_weight(),
            kernel.kernel_width,
            kernel.kernel_height,
            kernel.channels,
        )
        anchored = params.with_threshold(
            thresh, theta_rh_frac, u_c_frac, v_peak_offset
        )
        anchored.validate_for(model)
        layer = LayerState.at_rest(kernel.populations, out_h, out_w, anchored, thresh)
        return cls(
            kernel=kernel,
            model=model,
            stdp=stdp,
            threshold_cfg=threshold_cfg,
            layer=layer,
            theta_rh_frac=theta_rh_frac,
            u_c_frac=u_c_frac,
            v_peak_offset=v_peak_offset,
        )

    def _recompute_threshold(self) -> None:
        thresh = compute_threshold(
            self.threshold_cfg,
            self.kernel.mean_weight(),
            self.kernel.kernel_width,
            self.kernel.kernel_height,
            self.kernel.channels,
        )
        self.layer.set_threshold(
            thresh, self.theta_rh_frac, self.u_c_frac, self.v_peak_offset
        )

    def run_sample(self, frames: list[EventFrame], learn: bool) -> SampleResult:
        """Feed one sample's frames in order; STDP and threshold updates only when learning.

        The layer is reset to rest at the sample boundary. Every spike (not
        only winners) lands in the returned log, ordered by (step,
        population, y, x).
        """
        self.layer.reset()
        pops: list[int] = []
        steps: list[int] = []
        n_winners = 0
        for frame in frames:
            now = frame.t_index
            spikes = step_layer(frame, self.kernel, self.layer, self.model, now)
            if spikes:
                pops.extend(s.population for s in spikes)
                steps.extend(now for _ in spikes)
                if learn:
                    winner = select_winner(spikes, now)
                    if winner is not None:
                        stdp_update(self.kernel, winner, frame, self.stdp)
                        self._recompute_threshold()
                        n_winners += 1
        return SampleResult(
            spike_populations=np.asarray(pops, dtype=np.int64),
            spike_steps=np.asarray(steps, dtype=np.int64),
            n_winners=n_winners,
        )
