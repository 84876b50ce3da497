"""Experiment configuration and orchestration.

A config file (TOML syntax, sectioned key-value) fully determines an
experiment: dataset and class pair, neuron model and its constants, STDP
scales, homeostatic threshold fraction, architecture, repeat count and
seeds. Every run is deterministic given (config, seed): repeat ``i`` uses
seed + i for its weight draw and its training-order shuffle, so the spread
over repeats measures exactly the presentation-order sensitivity of the
learning rule.

The wall-clock section of a run's outputs lives in a separate timing file
so the canonical report is byte-reproducible.
"""

from __future__ import annotations

import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import hpo as hpo_mod
from .classifier import (
    ConfusionCounts,
    LabelMap,
    SpikeCountTable,
    accuracy,
    assign_labels,
    infer,
)
from .datasets import DATASET_KINDS, EventSample, load_dataset
from .events import bin_event_arrays
from .network import (
    SpikingConvPipeline,
    StdpConfig,
    SynapticKernel,
    ThresholdConfig,
    init_weights,
)
from .neurons import NeuronModelKind, NeuronParams


class ConfigError(ValueError):
    """Raised when a configuration file or value is invalid."""


# --------------------------------------------------------------------------
# configuration schema
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DatasetConfig:
    kind: str
    path: str
    classes: tuple[int, int]
    dt_ms: float = 1.0
    downsample: int = 1
    max_train: Optional[int] = None
    max_test: Optional[int] = None

    def __post_init__(self):
        if self.kind not in DATASET_KINDS:
            raise ConfigError(
                f"dataset.kind must be one of {DATASET_KINDS}, got {self.kind!r}"
            )
        if len(self.classes) != 2 or self.classes[0] == self.classes[1]:
            raise ConfigError(
                f"dataset.classes must name exactly two distinct classes, got {self.classes}"
            )
        if self.dt_ms <= 0:
            raise ConfigError(f"dataset.dt_ms must be > 0, got {self.dt_ms}")
        if self.downsample < 1:
            raise ConfigError(f"dataset.downsample must be >= 1, got {self.downsample}")

    @property
    def dt_us(self) -> int:
        return int(round(self.dt_ms * 1000))


@dataclass(frozen=True)
class NeuronConfig:
    """Model kind plus constants; threshold-linked fields are fractions.

    The firing threshold itself is homeostatic (recomputed from the mean
    weight), so the config anchors the EIF rheobase and QIF cut-off as
    fractions of it. Model-specific fields default when the kind needs
    them and stay unset otherwise.
    """

    kind: NeuronModelKind = NeuronModelKind.LIF
    tau_m_ms: float = 10.0
    u_rest: float = 0.0
    resistance: float = 1.0
    t_ref_ms: float = 2.0
    delta_t: Optional[float] = None
    theta_rh_frac: Optional[float] = None
    a0: Optional[float] = None
    u_c_frac: Optional[float] = None
    v_peak_offset: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "kind", NeuronModelKind(self.kind))
        if self.kind is NeuronModelKind.EIF:
            if self.delta_t is None:
                object.__setattr__(self, "delta_t", 2.0)
            if self.theta_rh_frac is None:
                object.__setattr__(self, "theta_rh_frac", 0.7)
        if self.kind is NeuronModelKind.QIF:
            if self.a0 is None:
                object.__setattr__(self, "a0", 0.1)
            if self.u_c_frac is None:
                object.__setattr__(self, "u_c_frac", 0.5)

    def to_params(self, dt_ms: float) -> NeuronParams:
        # v_thresh is a placeholder: the pipeline re-anchors it from the
        # homeostatic threshold before any neuron steps.
        return NeuronParams(
            tau_m=self.tau_m_ms,
            u_rest=self.u_rest,
            resistance=self.resistance,
            v_thresh=self.u_rest + 1.0,
            t_ref=self.t_ref_ms,
            t_s=dt_ms,
            delta_t=self.delta_t,
            a0=self.a0,
        )


@dataclass(frozen=True)
class ArchitectureConfig:
    populations: int = 16
    kernel_size: int = 5

    def __post_init__(self):
        if self.populations < 1:
            raise ConfigError(f"architecture.populations must be >= 1, got {self.populations}")
        if self.kernel_size < 1:
            raise ConfigError(f"architecture.kernel_size must be >= 1, got {self.kernel_size}")


@dataclass(frozen=True)
class HpoConfig:
    iterations: int = 24
    max_budget: Optional[int] = None  # default: size of the HPO training pool
    eta: int = 3
    val_fraction: float = 0.2

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigError(f"hpo.iterations must be >= 1, got {self.iterations}")
        if not 0.0 < self.val_fraction < 1.0:
            raise ConfigError(
                f"hpo.val_fraction must be in (0, 1), got {self.val_fraction}"
            )


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetConfig
    neuron: NeuronConfig = NeuronConfig()
    stdp: StdpConfig = StdpConfig(a_plus=0.004, a_minus=-0.003)
    lam: float = 0.2
    arch: ArchitectureConfig = ArchitectureConfig()
    repeats: int = 11
    seed: int = 0
    workers: int = 1
    out_dir: str = "runs/experiment"
    hpo: HpoConfig = HpoConfig()

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigError(f"threshold.lambda must be in [0, 1], got {self.lam}")
        if self.repeats < 1:
            raise ConfigError(f"run.repeats must be >= 1, got {self.repeats}")
        if self.workers < 1:
            raise ConfigError(f"run.workers must be >= 1, got {self.workers}")


# --------------------------------------------------------------------------
# config file parsing / serialization
# --------------------------------------------------------------------------

_SECTION_FIELDS = {
    "dataset": {
        "kind": "kind",
        "path": "path",
        "classes": "classes",
        "dt_ms": "dt_ms",
        "downsample": "downsample",
        "max_train": "max_train",
        "max_test": "max_test",
    },
    "neuron": {
        "kind": "kind",
        "tau_m_ms": "tau_m_ms",
        "u_rest": "u_rest",
        "resistance": "resistance",
        "t_ref_ms": "t_ref_ms",
        "delta_t": "delta_t",
        "theta_rh_frac": "theta_rh_frac",
        "a0": "a0",
        "u_c_frac": "u_c_frac",
        "v_peak_offset": "v_peak_offset",
    },
    "stdp": {
        "a_plus": "a_plus",
        "a_minus": "a_minus",
        "lower_bound": "lower_bound",
        "upper_bound": "upper_bound",
    },
    "threshold": {"lambda": "lam"},
    "architecture": {"populations": "populations", "kernel_size": "kernel_size"},
    "run": {
        "repeats": "repeats",
        "seed": "seed",
        "workers": "workers",
        "out_dir": "out_dir",
    },
    "hpo": {
        "iterations": "iterations",
        "max_budget": "max_budget",
        "eta": "eta",
        "val_fraction": "val_fraction",
    },
}


def _section_kwargs(doc: dict, section: str) -> dict:
    raw = doc.get(section, {})
    if not isinstance(raw, dict):
        raise ConfigError(f"config section [{section}] must be a table")
    known = _SECTION_FIELDS[section]
    kwargs = {}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(f"unknown config key {section}.{key}")
        kwargs[known[key]] = value
    return kwargs


def config_from_mapping(doc: dict) -> ExperimentConfig:
    """Build a config from a nested mapping (the TOML document structure);
    unknown sections or keys are errors naming the offender."""
    unknown = set(doc) - set(_SECTION_FIELDS)
    if unknown:
        raise ConfigError(f"unknown config section(s): {sorted(unknown)}")
    if "dataset" not in doc:
        raise ConfigError("config must have a [dataset] section")

    ds_kwargs = _section_kwargs(doc, "dataset")
    if "classes" in ds_kwargs:
        ds_kwargs["classes"] = tuple(int(c) for c in ds_kwargs["classes"])
    try:
        dataset = DatasetConfig(**ds_kwargs)
        neuron = NeuronConfig(**_section_kwargs(doc, "neuron"))
        stdp = StdpConfig(
            **{**{"a_plus": 0.004, "a_minus": -0.003}, **_section_kwargs(doc, "stdp")}
        )
        threshold = _section_kwargs(doc, "threshold")
        arch = ArchitectureConfig(**_section_kwargs(doc, "architecture"))
        run = _section_kwargs(doc, "run")
        hpo_cfg = HpoConfig(**_section_kwargs(doc, "hpo"))
        return ExperimentConfig(
            dataset=dataset,
            neuron=neuron,
            stdp=stdp,
            arch=arch,
            hpo=hpo_cfg,
            **threshold,
            **run,
        )
    except TypeError as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(text: str) -> ExperimentConfig:
    """Parse a TOML experiment config."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc
    return config_from_mapping(doc)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        text = repr(float(value))
        return text if any(c in text for c in ".einf") else text + ".0"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    if isinstance(value, NeuronModelKind):
        return json.dumps(value.value)
    raise ConfigError(f"cannot serialize config value {value!r}")


def serialize_config(cfg: ExperimentConfig) -> str:
    """Render a config as TOML such that parse(serialize(cfg)) == cfg."""
    sections = {
        "dataset": cfg.dataset,
        "neuron": cfg.neuron,
        "stdp": cfg.stdp,
        "threshold": cfg,
        "architecture": cfg.arch,
        "run": cfg,
        "hpo": cfg.hpo,
    }
    lines = []
    for section, obj in sections.items():
        lines.append(f"[{section}]")
        for key, attr in _SECTION_FIELDS[section].items():
            value = getattr(obj, attr)
            if value is None:
                continue
            lines.append(f"{key} = {_toml_value(value)}")
        lines.append("")
    return "\n".join(lines)


def reference_config_text() -> str:
    """A fully populated default config with every key present, for documentation."""
    cfg = ExperimentConfig(
        dataset=DatasetConfig(
            kind="nmnist",
            path="data/n-mnist",
            classes=(0, 1),
            max_train=500,
            max_test=200,
        )
    )
    return (
        "# Reference experiment configuration: every key at its default.\n"
        "# Optional model-specific keys (neuron.delta_t, neuron.theta_rh_frac,\n"
        "# neuron.a0, neuron.u_c_frac) appear when the model kind needs them.\n"
        + serialize_config(cfg)
    )


# --------------------------------------------------------------------------
# training / evaluation
# --------------------------------------------------------------------------


@dataclass
class RepeatOutcome:
    accuracy: float
    kernel: np.ndarray
    label_map: LabelMap
    predictions: list[tuple[int, int, int]]  # (sample index, true, predicted)
    wall_time_s: float


@dataclass(frozen=True)
class RunReport:
    """Accuracy over repeats; timing kept apart from the canonical fields."""

    accuracies: tuple[float, ...]
    mean: float
    std: float
    best: float
    wall_times_s: tuple[float, ...]

    @classmethod
    def from_outcomes(cls, outcomes: Sequence[RepeatOutcome]) -> "RunReport":
        accs = tuple(o.accuracy for o in outcomes)
        return cls(
            accuracies=accs,
            mean=float(np.mean(accs)),
            std=float(np.std(accs, ddof=1)) if len(accs) > 1 else 0.0,
            best=max(accs),
            wall_times_s=tuple(o.wall_time_s for o in outcomes),
        )

    def payload(self) -> dict:
        return {
            "accuracies": list(self.accuracies),
            "mean": self.mean,
            "std": self.std,
            "best": self.best,
            "repeats": len(self.accuracies),
        }

    def timing_payload(self) -> dict:
        return {"wall_times_s": list(self.wall_times_s)}


def _sample_frames(sample: EventSample, cfg: ExperimentConfig):
    return bin_event_arrays(
        sample.xs,
        sample.ys,
        sample.ts,
        dt_us=cfg.dataset.dt_us,
        width=sample.width,
        height=sample.height,
        t_s_ms=cfg.dataset.dt_ms,
        downsample=cfg.dataset.downsample,
    )


def build_pipeline(cfg: ExperimentConfig, input_height: int, input_width: int,
                   weight_seed: int) -> SpikingConvPipeline:
    kernel = init_weights(
        (cfg.arch.populations, 1, cfg.arch.kernel_size, cfg.arch.kernel_size),
        rng_seed=weight_seed,
        bounds=(cfg.stdp.lower_bound, cfg.stdp.upper_bound),
    )
    params = cfg.neuron.to_params(cfg.dataset.dt_ms)
    threshold_cfg = ThresholdConfig(
        lam=cfg.lam,
        spike_amplitude=1.0 / cfg.dataset.dt_ms,
        capacitance=params.capacitance,
        t_s=cfg.dataset.dt_ms,
    )
    return SpikingConvPipeline.create(
        kernel=kernel,
        model=cfg.neuron.kind,
        params=params,
        stdp=cfg.stdp,
        threshold_cfg=threshold_cfg,
        input_height=input_height,
        input_width=input_width,
        theta_rh_frac=cfg.neuron.theta_rh_frac,
        u_c_frac=cfg.neuron.u_c_frac,
        v_peak_offset=cfg.neuron.v_peak_offset,
    )


def train_and_evaluate(
    cfg: ExperimentConfig,
    train_samples: Sequence[EventSample],
    eval_samples: Sequence[EventSample],
    seed: int,
) -> RepeatOutcome:
    """One independent run: shuffled STDP pass, label assignment, test pass."""
    if not train_samples:
        raise ValueError("no training samples")
    if not eval_samples:
        raise ValueError("no evaluation samples")
    start = time.perf_counter()
    ds = cfg.dataset
    height = train_samples[0].height // ds.downsample
    width = train_samples[0].width // ds.downsample
    pipeline = build_pipeline(cfg, height, width, weight_seed=seed)

    order = np.random.default_rng(seed).permutation(len(train_samples))
    table = SpikeCountTable(labels=ds.classes, n_populations=cfg.arch.populations)
    for idx in order:
        sample = train_samples[idx]
        result = pipeline.run_sample(_sample_frames(sample, cfg), learn=True)
        table.record(result.spike_populations, sample.label)

    label_map = assign_labels(table)
    fallback = min(ds.classes)  # nothing learned: predict the lower class id
    predictions = []
    for i, sample in enumerate(eval_samples):
        result = pipeline.run_sample(_sample_frames(sample, cfg), learn=False)
        if label_map.assigned_labels():
            predicted = infer(result.spike_populations, result.spike_steps, label_map)
        else:
            predicted = fallback
        predictions.append((i, sample.label, predicted))

    confusion = ConfusionCounts.from_pairs(
        [t for _, t, _ in predictions],
        [p for _, _, p in predictions],
        positive=ds.classes[0],
    )
    return RepeatOutcome(
        accuracy=accuracy(confusion),
        kernel=pipeline.kernel.weights.copy(),
        label_map=label_map,
        predictions=predictions,
        wall_time_s=time.perf_counter() - start,
    )


_WORKER_CTX: dict = {}


def _init_repeat_worker(cfg: ExperimentConfig, train, test) -> None:
    _WORKER_CTX["args"] = (cfg, train, test)


def _run_repeat(repeat_idx: int) -> RepeatOutcome:
    cfg, train, test = _WORKER_CTX["args"]
    return train_and_evaluate(cfg, train, test, seed=cfg.seed + repeat_idx)


def load_split_samples(cfg: ExperimentConfig):
    ds = cfg.dataset
    train = load_dataset(ds.kind, ds.path, ds.classes, "train", ds.max_train)
    test = load_dataset(ds.kind, ds.path, ds.classes, "test", ds.max_test)
    return train, test


def run_experiment(
    cfg: ExperimentConfig,
    train_samples: Optional[Sequence[EventSample]] = None,
    test_samples: Optional[Sequence[EventSample]] = None,
) -> tuple[RunReport, list[RepeatOutcome]]:
    """Run ``cfg.repeats`` independent trainings with derived seeds seed+i."""
    if train_samples is None or test_samples is None:
        train_samples, test_samples = load_split_samples(cfg)
    if cfg.workers > 1:
        with ProcessPoolExecutor(
            max_workers=cfg.workers,
            initializer=_init_repeat_worker,
            initargs=(cfg, list(train_samples), list(test_samples)),
        ) as pool:
            outcomes = list(pool.map(_run_repeat, range(cfg.repeats)))
    else:
        outcomes = [
            train_and_evaluate(cfg, train_samples, test_samples, seed=cfg.seed + i)
            for i in range(cfg.repeats)
        ]
    return RunReport.from_outcomes(outcomes), outcomes


def write_run_outputs(
    out_dir, cfg: ExperimentConfig, report: RunReport, outcomes: Sequence[RepeatOutcome]
) -> Path:
    """Write report.json, timing.json and per-repeat artifacts; returns out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {"config": {"seed": cfg.seed, "model": cfg.neuron.kind.value}}
    payload.update(report.payload())
    (out / "report.json").write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    (out / "timing.json").write_text(
        json.dumps(report.timing_payload(), sort_keys=True, indent=2) + "\n"
    )
    for i, o in enumerate(outcomes):
        SynapticKernel(o.kernel).save(out / f"kernel_{i:02d}.npy")
        label_lines = ["population,label"]
        label_lines += [
            f"{pop},{lbl}" for pop, lbl in enumerate(o.label_map.assignments)
        ]
        (out / f"labels_{i:02d}.csv").write_text("\n".join(label_lines) + "\n")
        pred_lines = ["sample_id,true,predicted"]
        pred_lines += [f"{s},{t},{p}" for s, t, p in o.predictions]
        (out / f"predictions_{i:02d}.csv").write_text("\n".join(pred_lines) + "\n")
    return out


def evaluate_checkpoint(
    cfg: ExperimentConfig,
    kernel: SynapticKernel,
    label_map: LabelMap,
    test_samples: Sequence[EventSample],
) -> tuple[float, list[tuple[int, int, int]]]:
    """Accuracy of a saved kernel + label map on a test split.

    The homeostatic threshold is a pure function of the mean weight, so
    the checkpoint fully determines the inference-time network.
    """
    if not test_samples:
        raise ValueError("no evaluation samples")
    ds = cfg.dataset
    height = test_samples[0].height // ds.downsample
    width = test_samples[0].width // ds.downsample
    params = cfg.neuron.to_params(ds.dt_ms)
    threshold_cfg = ThresholdConfig(
        lam=cfg.lam,
        spike_amplitude=1.0 / ds.dt_ms,
        capacitance=params.capacitance,
        t_s=ds.dt_ms,
    )
    pipeline = SpikingConvPipeline.create(
        kernel=kernel,
        model=cfg.neuron.kind,
        params=params,
        stdp=cfg.stdp,
        threshold_cfg=threshold_cfg,
        input_height=height,
        input_width=width,
        theta_rh_frac=cfg.neuron.theta_rh_frac,
        u_c_frac=cfg.neuron.u_c_frac,
        v_peak_offset=cfg.neuron.v_peak_offset,
    )
    fallback = min(ds.classes)
    predictions = []
    for i, sample in enumerate(test_samples):
        result = pipeline.run_sample(_sample_frames(sample, cfg), learn=False)
        if label_map.assigned_labels():
            predicted = infer(result.spike_populations, result.spike_steps, label_map)
        else:
            predicted = fallback
        predictions.append((i, sample.label, predicted))
    confusion = ConfusionCounts.from_pairs(
        [t for _, t, _ in predictions],
        [p for _, _, p in predictions],
        positive=ds.classes[0],
    )
    return accuracy(confusion), predictions


# --------------------------------------------------------------------------
# hyperparameter search wiring
# --------------------------------------------------------------------------


def build_search_space(kind: NeuronModelKind) -> hpo_mod.SearchSpace:
    """Default searchable ranges; model-specific dimensions appended."""
    params = [
        hpo_mod.ParamSpec("tau_m_ms", "log", 1.0, 100.0),
        hpo_mod.ParamSpec("lambda", "linear", 0.05, 1.0),
        hpo_mod.ParamSpec("a_plus", "log", 1e-4, 1e-1),
        hpo_mod.ParamSpec("a_minus_mag", "log", 1e-4, 1e-1),
        hpo_mod.ParamSpec("dt_ms", "categorical", choices=(0.5, 1.0, 2.0, 5.0)),
    ]
    kind = NeuronModelKind(kind)
    if kind is NeuronModelKind.EIF:
        params.append(hpo_mod.ParamSpec("delta_t", "log", 0.1, 10.0))
        params.append(hpo_mod.ParamSpec("theta_rh_frac", "linear", 0.3, 0.95))
    elif kind is NeuronModelKind.QIF:
        params.append(hpo_mod.ParamSpec("a0", "log", 0.01, 1.0))
        params.append(hpo_mod.ParamSpec("u_c_frac", "linear", 0.1, 0.9))
    return hpo_mod.SearchSpace(params=tuple(params))


def apply_hpo_values(cfg: ExperimentConfig, values: dict) -> ExperimentConfig:
    """Materialize sampled values into a concrete experiment config."""
    dataset = replace(cfg.dataset, dt_ms=float(values["dt_ms"]))
    neuron = replace(
        cfg.neuron,
        tau_m_ms=float(values["tau_m_ms"]),
        delta_t=float(values["delta_t"]) if "delta_t" in values else cfg.neuron.delta_t,
        theta_rh_frac=(
            float(values["theta_rh_frac"])
            if "theta_rh_frac" in values
            else cfg.neuron.theta_rh_frac
        ),
        a0=float(values["a0"]) if "a0" in values else cfg.neuron.a0,
        u_c_frac=(
            float(values["u_c_frac"]) if "u_c_frac" in values else cfg.neuron.u_c_frac
        ),
    )
    stdp = replace(
        cfg.stdp,
        a_plus=float(values["a_plus"]),
        a_minus=-float(values["a_minus_mag"]),
    )
    return replace(cfg, dataset=dataset, neuron=neuron, stdp=stdp, lam=float(values["lambda"]))


def hpo_split(cfg: ExperimentConfig, train_samples: Sequence[EventSample]):
    """Deterministic train-pool / validation split for HPO objectives."""
    rng = np.random.default_rng(cfg.seed)
    perm = rng.permutation(len(train_samples))
    n_val = max(1, int(round(cfg.hpo.val_fraction * len(train_samples))))
    if n_val >= len(train_samples):
        raise ConfigError("hpo.val_fraction leaves no training samples")
    val = [train_samples[i] for i in perm[:n_val]]
    pool = [train_samples[i] for i in perm[n_val:]]
    return pool, val


def make_hpo_objective(
    cfg: ExperimentConfig,
    pool: Sequence[EventSample],
    val: Sequence[EventSample],
):
    """Objective: validation accuracy after training on `budget` pool samples."""

    def objective(sample: hpo_mod.ConfigSample) -> float:
        trial_cfg = apply_hpo_values(cfg, sample.values)
        order = np.random.default_rng(sample.seed).permutation(len(pool))
        budget = min(sample.budget, len(pool))
        subset = [pool[i] for i in order[:budget]]
        outcome = train_and_evaluate(trial_cfg, subset, val, seed=sample.seed)
        return outcome.accuracy

    return objective


def run_hpo_campaign(
    cfg: ExperimentConfig,
    train_samples: Optional[Sequence[EventSample]] = None,
    log_path=None,
    iterations: Optional[int] = None,
) -> tuple[hpo_mod.TrialResult, list[hpo_mod.TrialResult]]:
    if train_samples is None:
        ds = cfg.dataset
        train_samples = load_dataset(ds.kind, ds.path, ds.classes, "train", ds.max_train)
    pool, val = hpo_split(cfg, train_samples)
    space = build_search_space(cfg.neuron.kind)
    objective = make_hpo_objective(cfg, pool, val)
    return hpo_mod.run_optimization(
        objective,
        space,
        total_iterations=iterations or cfg.hpo.iterations,
        max_budget=cfg.hpo.max_budget or len(pool),
        eta=cfg.hpo.eta,
        rng_seed=cfg.seed,
        log_path=log_path,
        workers=cfg.workers,
    )
