"""Cramer-Rao bounds, optimal sampling kernels and estimator benchmarks for FRI signals."""

from ._core import BACKEND
from .design import (
    KernelBudgetPlan,
    SpectrumDesign,
    bayes_linear_mse,
    brute_force_design_objective,
    klt_subspace,
    periodic_spectrum,
    top_n_kernels,
)
from .errors import (
    ConfigError,
    ConstraintViolationError,
    DegenerateSchemeError,
    DiagnosticError,
    FriError,
    NoiseModelError,
    NumericalError,
    SpectralNullError,
    UnidentifiableError,
)
from .estimators import (
    EstimateReport,
    bayes_linear_reconstruct,
    matrix_pencil,
    signal_mse,
    subspace_consistent,
    subspace_consistent_mse,
)
from .fisher import (
    CrbValue,
    FisherMatrix,
    crb_continuous,
    crb_trace,
    fim_continuous,
    fim_sampled,
    identifiability,
    m_matrix,
    sampled_crb,
    subspace_crb,
)
from .sampling import NoiseSpec, SamplingScheme, measurement_mean, sample_noisy
from .signal_model import (
    FourierCoeffVector,
    FourierPulse,
    JacobianMatrix,
    Model,
    PulseStreamTheta,
    SubspaceBasis,
    evaluate_time,
    jacobian_fourier,
    rate_of_innovation,
    synthesize_fourier,
)
from .simlab import (
    ExperimentConfig,
    ExperimentResult,
    monte_carlo_mse,
    run_crb_vs_n,
    run_experiment,
    run_periodic_vs_semiperiodic,
    run_pulse_spacing,
)

__version__ = "0.1.0"
