"""Cramer-Rao bounds for parameters encoded in multimode Gaussian light."""

from .core import (
    GaussianState,
    SingularCovarianceError,
    apply_passive_transform,
    inner_product,
    sample,
    squeezed_vacuum_state,
    symplectic_eigenvalues,
    wigner_log_density,
)
from .estimation import (
    DetectionBasis,
    FisherBreakdown,
    ParameterizedModel,
    cramer_rao_bound,
    detection_basis,
    detection_mode,
    fisher_information,
    fisher_simplified,
    mean_field_derivative,
)
from .resources import SqueezingBudget, optimal_covariance, optimal_crb, spectral_bound_report

__version__ = "0.1.0"
