"""Carrier frequency offset estimation lab over dual chirp-rate preambles."""

__version__ = "0.1.0"

from .channel import (
    ChannelProfile,
    ChannelRealization,
    ImpairmentSpec,
    ReceivedFrame,
    draw_channel,
    transmit,
)
from .errors import ConfigError, DegenerateSignalError, ResolutionError
from .estimator import (
    CfoDecomposition,
    CfoEstimate,
    PeakReport,
    compensate,
    decompose_cfo,
    estimate_cfo,
    estimate_ffo,
    freq_correlate,
    resolve_ifo,
    time_autocorr,
    wrap_offset,
)
from .sca import ScaPreamble, sca_build_preamble, sca_estimate
from .signal import (
    CazacParams,
    PreambleFrame,
    PreambleSpec,
    build_preamble,
    cazac_generate,
    dft,
    idft,
)
from .simlab import (
    ESTIMATOR_PROPOSED,
    ESTIMATOR_SCA,
    ExperimentConfig,
    SweepCell,
    SweepResult,
    TrialRecord,
    dump_correlations,
    run_single_frame,
    run_sweep,
    run_trial,
    wilson_interval,
)

__all__ = [
    "CazacParams",
    "CfoDecomposition",
    "CfoEstimate",
    "ChannelProfile",
    "ChannelRealization",
    "ConfigError",
    "DegenerateSignalError",
    "ESTIMATOR_PROPOSED",
    "ESTIMATOR_SCA",
    "ExperimentConfig",
    "ImpairmentSpec",
    "PeakReport",
    "PreambleFrame",
    "PreambleSpec",
    "ReceivedFrame",
    "ResolutionError",
    "ScaPreamble",
    "SweepCell",
    "SweepResult",
    "TrialRecord",
    "build_preamble",
    "cazac_generate",
    "compensate",
    "decompose_cfo",
    "dft",
    "draw_channel",
    "dump_correlations",
    "estimate_cfo",
    "estimate_ffo",
    "freq_correlate",
    "idft",
    "resolve_ifo",
    "run_single_frame",
    "run_sweep",
    "run_trial",
    "sca_build_preamble",
    "sca_estimate",
    "time_autocorr",
    "transmit",
    "wilson_interval",
    "wrap_offset",
]
