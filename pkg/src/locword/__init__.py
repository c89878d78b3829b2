"""Random word potentials on the one-dimensional lattice: sampling,
transfer-matrix cocycles, Lyapunov exponents, finite-box spectra and Green
functions, quantum dynamics, and disorder-averaged experiments."""

from .errors import (
    CoverageError,
    EmptyBandError,
    InsufficientTrialsError,
    LocwordError,
    NearSingularError,
    ParameterError,
    ReflectionError,
)
from .words import (
    PotentialRealization,
    ValueStream,
    Word,
    WordDistribution,
    distribution_from_json,
    distribution_to_json,
    preset,
    sample_potential,
    shift_realization,
)
from .transfer import (
    LyapunovCurve,
    LyapunovEstimate,
    detect_critical_energies,
    interval_transfer,
    lyapunov_curve,
    lyapunov_estimate,
    min_word_trace,
    one_step,
    word_transfer,
)
from .operators import (
    ChebyshevCheck,
    EigenSystem,
    GreenValue,
    RegularityVerdict,
    TridiagonalOperator,
    chebyshev_bound_check,
    eigensystem,
    green,
    green_log_magnitude,
    localization_centers,
    regularity,
    restrict,
    transfer_determinant_entries,
)
from .fitting import DecayFit, fit_log_linear, fit_log_log
from .dynamics import (
    SpectralProjection,
    TransportSeries,
    evolve_amplitude,
    evolved_state,
    growth_exponent_fit,
    spectral_projection,
    transport_moment,
    transport_series,
)
from .experiments import (
    DecayProfile,
    EigenDecaySummary,
    EnsembleSpec,
    LdpResult,
    RegularityProbability,
    TransportEnsemble,
    correlator_profile,
    deviation_probability,
    edl_kernel_decay,
    eigen_decay_vs_lyapunov,
    gamma_reference,
    ldp_rate_fit,
    regularity_probability,
    transport_ensemble,
)
from .reporting import LIBRARY_VERSION

__version__ = LIBRARY_VERSION

__all__ = [
    "ChebyshevCheck",
    "CoverageError",
    "DecayFit",
    "DecayProfile",
    "EigenDecaySummary",
    "EigenSystem",
    "EmptyBandError",
    "EnsembleSpec",
    "GreenValue",
    "InsufficientTrialsError",
    "LdpResult",
    "LocwordError",
    "LyapunovCurve",
    "LyapunovEstimate",
    "NearSingularError",
    "ParameterError",
    "PotentialRealization",
    "ReflectionError",
    "RegularityProbability",
    "RegularityVerdict",
    "SpectralProjection",
    "TransportEnsemble",
    "TransportSeries",
    "TridiagonalOperator",
    "ValueStream",
    "Word",
    "WordDistribution",
    "chebyshev_bound_check",
    "correlator_profile",
    "detect_critical_energies",
    "deviation_probability",
    "distribution_from_json",
    "distribution_to_json",
    "edl_kernel_decay",
    "eigen_decay_vs_lyapunov",
    "eigensystem",
    "evolve_amplitude",
    "evolved_state",
    "fit_log_linear",
    "fit_log_log",
    "gamma_reference",
    "green",
    "green_log_magnitude",
    "growth_exponent_fit",
    "interval_transfer",
    "ldp_rate_fit",
    "localization_centers",
    "lyapunov_curve",
    "lyapunov_estimate",
    "min_word_trace",
    "one_step",
    "preset",
    "regularity",
    "regularity_probability",
    "restrict",
    "sample_potential",
    "shift_realization",
    "spectral_projection",
    "transfer_determinant_entries",
    "transport_ensemble",
    "transport_moment",
    "transport_series",
    "word_transfer",
]
