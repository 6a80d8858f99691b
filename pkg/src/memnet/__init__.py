"""Simulator and analysis toolkit for networks of threshold-memristive
elements: nodal dynamics with implicit-Euler stepping, Fourier-space
mimicry scoring, and a trainable linear readout."""

__version__ = "0.1.0"

from .elements import MemristorParams, clamp_resistance, rate
from .network import (
    Link,
    Network,
    NetworkFormatError,
    NetworkValidationError,
    NodeRole,
    build_cube,
    build_series_benchmark,
    load,
    load_file,
    store,
    store_file,
    validate,
)
from .signals import Signal, Waveform, evaluate
from .dynamics import (
    ConvergenceError,
    DriveError,
    NetworkState,
    SimulationConfig,
    SimulationStepError,
    SimulationTrace,
    SingularSystemError,
    initial_state,
    kcl_residuals,
    simulate,
    solve_node_voltages,
    source_balance,
    step_implicit_euler,
)
from .spectral import (
    DegenerateBasisWarning,
    DissimilarityReport,
    LinearFit,
    Spectrum,
    ZeroOutputError,
    analyze_outputs,
    combine,
    dft,
    dissimilarity,
    fit_linear_combination,
    rank_outputs,
    spectrum_norm,
)
from .readout import (
    FeatureMatrix,
    RankDeficientWarning,
    ReadoutWeights,
    WaveformTaskConfig,
    WaveformTaskResult,
    classify,
    train_readout,
    waveform_task,
)

__all__ = [
    "MemristorParams", "clamp_resistance", "rate",
    "Link", "Network", "NetworkFormatError", "NetworkValidationError",
    "NodeRole", "build_cube", "build_series_benchmark", "load", "load_file",
    "store", "store_file", "validate",
    "Signal", "Waveform", "evaluate",
    "ConvergenceError", "DriveError", "NetworkState", "SimulationConfig",
    "SimulationStepError", "SimulationTrace", "SingularSystemError",
    "initial_state", "kcl_residuals", "simulate", "solve_node_voltages",
    "source_balance", "step_implicit_euler",
    "DegenerateBasisWarning", "DissimilarityReport", "LinearFit", "Spectrum",
    "ZeroOutputError", "analyze_outputs", "combine", "dft", "dissimilarity",
    "fit_linear_combination", "rank_outputs", "spectrum_norm",
    "FeatureMatrix", "RankDeficientWarning", "ReadoutWeights",
    "WaveformTaskConfig", "WaveformTaskResult", "classify", "train_readout",
    "waveform_task",
    "__version__",
]
