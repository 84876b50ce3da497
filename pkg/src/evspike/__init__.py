"""Event-driven spiking neural network engine.

Integrate-and-fire neuron models (LIF, QIF, EIF), AER event decoding and
binning, an STDP-trained spiking convolution layer with winner-take-all
competition, an unsupervised spike-count classifier, and a Hyperband-based
hyperparameter optimizer.
"""

from .classifier import (
    ConfusionCounts,
    LabelMap,
    SpikeCountTable,
    UNASSIGNED,
    accuracy,
    assign_labels,
    harmonic_weight,
    infer,
)
from .datasets import EventSample, load_dataset, make_synthetic_nmnist
from .events import (
    DataFormatError,
    EventFrame,
    EventRecord,
    SampleLabelSpan,
    bin_event_arrays,
    bin_events,
    decode_aedat,
    decode_nmnist,
    encode_aedat,
    encode_nmnist,
    format_text_events,
    load_gesture_sample,
    parse_gesture_labels,
    parse_text_events,
)
from .experiment import (
    ArchitectureConfig,
    ConfigError,
    DatasetConfig,
    ExperimentConfig,
    HpoConfig,
    NeuronConfig,
    RunReport,
    config_from_mapping,
    evaluate_checkpoint,
    load_config,
    parse_config,
    run_experiment,
    run_hpo_campaign,
    serialize_config,
    train_and_evaluate,
)
from .hpo import (
    Bracket,
    ConfigSample,
    ParamSpec,
    SearchSpace,
    TrialResult,
    hyperband_schedule,
    run_optimization,
    sample_config,
)
from .network import (
    LayerSpike,
    LayerState,
    SampleResult,
    SpikingConvPipeline,
    StdpConfig,
    SynapticKernel,
    ThresholdConfig,
    WinnerRecord,
    compute_threshold,
    convolve,
    init_weights,
    select_winner,
    stdp_update,
    step_layer,
)
from .neurons import (
    NeuronModelKind,
    NeuronParams,
    NeuronState,
    StepOutcome,
    apply_outcome,
    eif_step,
    lif_step,
    phase_curve,
    qif_step,
    step,
)

__version__ = "0.1.0"
