"""synlab: a simulation lab for multi-level spike-timing-dependent
plasticity built from compound synapses of bistable stochastic resistive
devices behind dendritic attenuators.

The package covers the full pipeline: spike waveforms and exact pair
net-potential peaks, the Gaussian-threshold switching model, the compound
synapse and its exact Poisson binomial level distribution, reproducible
Monte Carlo window sweeps, and exponential/linear window fits.
"""

from .device import (
    DeviceModel,
    DeviceState,
    device_curve,
    reset_probability,
    sample_transition,
    set_probability,
)
from .errors import ConfigurationError, FitNonConvergenceError, SynlabError
from .experiment import (
    ComparisonResult,
    DeviceCurves,
    GridPointStats,
    StateCurves,
    StdpProtocol,
    StdpWindowResult,
    compare_modes,
    flat_variant,
    per_device_probability_curves,
    run_stdp_window,
    state_probability_curves,
)
from .fitting import FitOptions, FitResult, fit_exponential, fit_linear, fit_window
from .rng import RngStream, gaussian_from_uniform
from .synapse import (
    BranchProbabilities,
    CompoundSynapse,
    DendriticBranch,
    apply_spike_pair,
    branch_probabilities,
    expected_conductance,
    expected_normalized_conductance,
    make_linear_attenuators,
    state_distribution,
)
from .waveform import (
    NetPeaks,
    SpikeWaveform,
    WaveformParams,
    evaluate,
    make_default_waveform,
    net_peak_values,
    net_peaks,
    net_potential,
    scale_waveform,
)

__version__ = "0.1.0"

__all__ = [
    "BranchProbabilities",
    "ComparisonResult",
    "CompoundSynapse",
    "ConfigurationError",
    "DendriticBranch",
    "DeviceCurves",
    "DeviceModel",
    "DeviceState",
    "FitNonConvergenceError",
    "FitOptions",
    "FitResult",
    "GridPointStats",
    "NetPeaks",
    "RngStream",
    "SpikeWaveform",
    "StateCurves",
    "StdpProtocol",
    "StdpWindowResult",
    "SynlabError",
    "WaveformParams",
    "apply_spike_pair",
    "branch_probabilities",
    "compare_modes",
    "device_curve",
    "evaluate",
    "expected_conductance",
    "expected_normalized_conductance",
    "fit_exponential",
    "fit_linear",
    "fit_window",
    "flat_variant",
    "gaussian_from_uniform",
    "make_default_waveform",
    "make_linear_attenuators",
    "net_peak_values",
    "net_peaks",
    "net_potential",
    "per_device_probability_curves",
    "reset_probability",
    "run_stdp_window",
    "sample_transition",
    "scale_waveform",
    "set_probability",
    "state_distribution",
    "state_probability_curves",
    "__version__",
]
