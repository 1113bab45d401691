"""Phase squeezing of large-amplitude coherent pulses by single-photon post-selection.

A single photon in a Mach-Zehnder interferometer imprints a weak cross-Kerr
phase on a strong coherent pulse; detecting the photon in one output port
projects the pulse onto a two-component superposition that, for the right
beam-splitter transmissivity, has high fidelity to a phase-squeezed state.
This package models that apparatus in closed form (cancellation-safe up to
mean photon numbers of a few million), estimates the achievable squeezing by
derivative-free fidelity maximization, validates every formula against a
truncated number-basis oracle, and ships a CLI that regenerates the reference
tables and curves as CSV/JSON.
"""

__version__ = "0.1.0"

from .amplitudes import (
    CONVENTION,
    PLANCK_H,
    SPEED_OF_LIGHT,
    QuadratureConvention,
    SqueezeTarget,
    flux_to_power,
    gamma_for_photon_number,
    mean_photon_squeezed,
    overlap_coherent,
    overlap_squeezed_coherent,
    power_to_flux,
    quadrature_wavefunction_coherent,
    squeeze_db,
)
from .errors import (
    ConfigError,
    ConstraintInfeasibleError,
    CutoffMismatchError,
    DegeneratePostSelectionError,
    DomainError,
    KerrSqueezeError,
    MonotonicityError,
    NotConvergedError,
    PathDisagreementError,
    PrecisionEnvelopeError,
    TargetRangeError,
    TruncationError,
)
from .estimator import (
    SqueezingEstimate,
    SweepPoint,
    classify_phase_squeezed,
    find_transmissivity,
    maximize_fidelity,
    sweep,
    sweep_grid,
)
from .fock import (
    FockVector,
    coherent_fock,
    expectation_fock,
    fock_moments,
    overlap_fock,
    quadrature_density_fock,
    squeezed_coherent_fock,
    superpose_fock,
)
from .interferometer import (
    AUTO,
    CatState,
    InterferometerConfig,
    QuadratureMoments,
    back_action_phase,
    build_cat,
    fidelity,
    min_quadrature_variance,
    quadrature_density,
    quadrature_moments,
    success_probability,
)
from .logamp import LogAmplitude, combine, wrap_phase
from .validation import run_oracle_suite

__all__ = [
    "__version__",
    "AUTO",
    "CONVENTION",
    "PLANCK_H",
    "SPEED_OF_LIGHT",
    "CatState",
    "ConfigError",
    "ConstraintInfeasibleError",
    "CutoffMismatchError",
    "DegeneratePostSelectionError",
    "DomainError",
    "FockVector",
    "InterferometerConfig",
    "KerrSqueezeError",
    "LogAmplitude",
    "MonotonicityError",
    "NotConvergedError",
    "PathDisagreementError",
    "PrecisionEnvelopeError",
    "QuadratureConvention",
    "QuadratureMoments",
    "SqueezeTarget",
    "SqueezingEstimate",
    "SweepPoint",
    "TargetRangeError",
    "TruncationError",
    "back_action_phase",
    "build_cat",
    "classify_phase_squeezed",
    "coherent_fock",
    "combine",
    "expectation_fock",
    "fidelity",
    "find_transmissivity",
    "flux_to_power",
    "fock_moments",
    "gamma_for_photon_number",
    "maximize_fidelity",
    "mean_photon_squeezed",
    "min_quadrature_variance",
    "overlap_coherent",
    "overlap_fock",
    "overlap_squeezed_coherent",
    "power_to_flux",
    "quadrature_density",
    "quadrature_density_fock",
    "quadrature_moments",
    "quadrature_wavefunction_coherent",
    "run_oracle_suite",
    "squeeze_db",
    "squeezed_coherent_fock",
    "success_probability",
    "superpose_fock",
    "sweep",
    "sweep_grid",
    "wrap_phase",
]
