"""Balanced homodyne detection with the local oscillator in the detection mode.

Intensities are in normalized photon-number units (the ``hbar omega / 2 eps0 c T``
prefactor is dropped). With the LO in mode ``v1`` and zero relative phase, the
intensity difference per shot is ``sqrt(N0) (2 sqrt(N) p / p_c + dY)``, where
``dY`` is the fluctuation of ``Y+`` of ``v1``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .core import GaussianState, inverse_covariance, is_normalized, quadrature_embedding, sample
from .estimation import DetectionBasis, ParameterizedModel, cramer_rao_bound, model_detection_basis


@dataclass(frozen=True)
class HomodyneConfig:
    lo_mode: np.ndarray | None = None
    lo_photons: float = 1e6
    relative_phase: float = 0.0
    n_samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if self.lo_photons <= 0:
            raise ValueError("local oscillator photon number must be positive")


@dataclass(frozen=True)
class EstimationReport:
    p_true: float
    estimator_mean: float
    estimator_variance: float
    crb: float
    variance_over_crb_sq: float
    n_samples: int

    def to_dict(self) -> dict:
        return asdict(self)


def lo_quadrature(detection: DetectionBasis, config: HomodyneConfig) -> np.ndarray:
    """Quadrature direction read by the detector for the configured LO."""
    lo = detection.v1 if config.lo_mode is None else np.asarray(config.lo_mode, dtype=complex)
    if not is_normalized(lo, 1e-10):
        raise ValueError("local oscillator mode must be normalized")
    return quadrature_embedding(np.exp(1j * config.relative_phase) * lo)


def intensity_difference_samples(
    model: ParameterizedModel,
    detection: DetectionBasis,
    cov,
    config: HomodyneConfig,
    p_true: float,
) -> np.ndarray:
    """Simulated intensity-difference records, one per shot.

    Quadrature noise is drawn from the full zero-mean Wigner distribution with
    covariance ``cov`` (working basis) and projected on the LO quadrature.
    """
    w = lo_quadrature(detection, config)
    cov = np.asarray(cov, dtype=float)
    noise = sample(GaussianState(np.zeros(cov.shape[0]), cov), config.n_samples, config.seed) @ w
    signal = 2.0 * np.sqrt(model.N) * p_true / detection.p_c * np.cos(config.relative_phase)
    return np.sqrt(config.lo_photons) * (signal + noise)


def unbiased_estimator(
    samples, N: float, N0: float, p_c: float, crb: float, p_true: float = float("nan")
) -> EstimationReport:
    """Per-shot estimates ``p_c I / (2 sqrt(N N0))`` and their statistics."""
    if N <= 0 or N0 <= 0:
        raise ValueError("N and N0 must be positive")
    samples = np.asarray(samples, dtype=float)
    if samples.size < 2:
        raise ValueError("need at least two samples for a variance")
    p_hat = p_c * samples / (2.0 * np.sqrt(N * N0))
    var = float(np.var(p_hat, ddof=1))
    return EstimationReport(
        p_true=float(p_true),
        estimator_mean=float(np.mean(p_hat)),
        estimator_variance=var,
        crb=float(crb),
        variance_over_crb_sq=var / crb**2,
        n_samples=int(samples.size),
    )


def per_shot_estimates(samples, N: float, N0: float, p_c: float) -> np.ndarray:
    return p_c * np.asarray(samples, dtype=float) / (2.0 * np.sqrt(N * N0))


def p_sql(sigma_y1: float, N: float, du_norm: float) -> float:
    """Parameter value at unit signal-to-noise: ``sigma / (2 sqrt(N) |du|)``."""
    return float(sigma_y1 / (2.0 * np.sqrt(N) * du_norm))


def simulate(
    model: ParameterizedModel, config: HomodyneConfig, p_true: float, cov=None
) -> tuple[np.ndarray, np.ndarray, EstimationReport]:
    """Run the homodyne experiment on ``model``.

    Returns the intensity-difference records, the per-shot estimates and the
    report; the reported bound is the mean-field CRB of the same covariance.
    """
    detection = model_detection_basis(model)
    cov = model.cov() if cov is None else np.asarray(cov, dtype=float)
    w = quadrature_embedding(detection.v1)
    fisher = 4.0 * model.N / detection.p_c**2 * float(w @ inverse_covariance(cov) @ w)
    records = intensity_difference_samples(model, detection, cov, config, p_true)
    report = unbiased_estimator(
        records, model.N, config.lo_photons, detection.p_c, cramer_rao_bound(fisher), p_true
    )
    return records, per_shot_estimates(records, model.N, config.lo_photons, detection.p_c), report
