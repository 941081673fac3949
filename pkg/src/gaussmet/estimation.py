"""Detection mode, Fisher information and Cramer-Rao bound for a parameterized model.

The mean field of the model is ``sqrt(N) * u1(p)`` (amplitude per reference
mode), so the quadrature mean is ``2 sqrt(N) (Re u1(p), Im u1(p))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    GaussianState,
    check_covariance,
    complete_basis,
    inner_product,
    inverse_covariance,
    is_normalized,
    quadrature_embedding,
    sample,
    to_basis,
    unit_mode,
    wigner_log_density,
)

ModeFamily = Callable[[float], np.ndarray]
CovFamily = Callable[[float], np.ndarray]

ZERO_DIFF_TOL = 1e-13
DEGENERATE_TOL = 1e-10
CURVATURE_STEP = 1e-3


class ZeroDerivativeError(ValueError):
    """The mean-field mode does not depend on the parameter."""


@dataclass(frozen=True)
class ParameterizedModel:
    """Family ``p -> (u1(p), N, cov(p))`` around the expansion point ``p0``.

    Attributes:
        u1: normalized mean-field mode as a function of ``p``.
        N: mean total photon number, independent of ``p``.
        cov_family: covariance in the fixed working (reference) basis.
        p0: expansion point.
        du: optional analytic derivative of ``u1``; used verbatim if given.
        spec: JSON description the model was built from, if any.
    """

    u1: ModeFamily
    N: float
    cov_family: CovFamily
    p0: float = 0.0
    du: ModeFamily | None = None
    spec: dict | None = None

    def __post_init__(self):
        if not np.isfinite(self.N) or self.N <= 0:
            raise ValueError(f"photon number must be positive, got {self.N}")

    def mode(self, p: float) -> np.ndarray:
        u = np.asarray(self.u1(p), dtype=complex)
        if not is_normalized(u, 1e-10):
            raise ValueError(f"mean-field mode is not normalized at p={p}")
        return u

    @property
    def dim(self) -> int:
        return self.mode(self.p0).size

    def mean(self, p: float) -> np.ndarray:
        return 2.0 * np.sqrt(self.N) * quadrature_embedding(self.mode(p))

    def cov(self, p: float | None = None) -> np.ndarray:
        return np.asarray(self.cov_family(self.p0 if p is None else p), dtype=float)

    def state(self, p: float | None = None) -> GaussianState:
        p = self.p0 if p is None else p
        return GaussianState(self.mean(p), self.cov(p))


@dataclass(frozen=True)
class DetectionBasis:
    """Detection mode ``v1``, companion ``v2``, scale ``p_c`` and overlaps.

    ``u1(p0) = 1j * c11 * v1 + c12 * v2``.
    """

    v1: np.ndarray
    v2: np.ndarray
    p_c: float
    c11: float
    c12: complex
    degenerate: bool = False

    def modes(self) -> np.ndarray:
        """Full orthonormal basis with ``v1, v2`` first (rows)."""
        return complete_basis([self.v1, self.v2])


@dataclass(frozen=True)
class FisherBreakdown:
    """The two Fisher-information terms for a single parameter.

    ``classical_cov_term`` is ``1/2 Tr[(cov^-1 cov')^2]``, reported alongside
    ``cov_term`` because the two differ when ``det cov(p)`` varies.
    """

    mean_term: float
    cov_term: float
    total: float
    classical_cov_term: float = 0.0


def default_step(p0: float) -> float:
    return 1e-5 * max(1.0, abs(p0))


def mean_field_derivative(model: ParameterizedModel, h: float | None = None) -> np.ndarray:
    """``du1/dp`` at ``p0`` (analytic if the model provides it, else central difference)."""
    if model.du is not None:
        du = np.asarray(model.du(model.p0), dtype=complex)
        if np.linalg.norm(du) < ZERO_DIFF_TOL:
            raise ZeroDerivativeError("derivative indistinguishable from zero")
        return du
    h = default_step(model.p0) if h is None else h
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    diff = model.mode(model.p0 + h) - model.mode(model.p0 - h)
    if not np.all(np.isfinite(diff)):
        raise FloatingPointError("non-finite mean-field difference")
    if np.linalg.norm(diff) < ZERO_DIFF_TOL:
        raise ZeroDerivativeError("derivative indistinguishable from zero")
    return diff / (2.0 * h)


def detection_mode(du) -> tuple[np.ndarray, float]:
    """Normalize the mean-field derivative: ``v1 = p_c * du`` with ``p_c = 1/|du|``."""
    du = np.asarray(du, dtype=complex)
    norm = np.linalg.norm(du)
    if norm <= 1e-12:
        raise ZeroDerivativeError("parameter is not encoded in the mean field (zero derivative)")
    p_c = 1.0 / norm
    return du * p_c, float(p_c)


def _orthogonal_unit(v1: np.ndarray) -> np.ndarray:
    # reference vector least aligned with v1, then Gram-Schmidt
    k = int(np.argmin(np.abs(v1)))
    w = unit_mode(k, v1.size)
    w = w - np.vdot(v1, w) * v1
    return w / np.linalg.norm(w)


def detection_basis(u1_at_p0, v1, p_c: float) -> DetectionBasis:
    """Build ``v2`` in span{u1(p0), v1} and the overlaps ``c11``, ``c12``."""
    u0 = np.asarray(u1_at_p0, dtype=complex)
    v1 = np.asarray(v1, dtype=complex)
    if not (is_normalized(u0, 1e-10) and is_normalized(v1, 1e-10)):
        raise ValueError("u1(p0) and v1 must be normalized")
    overlap = inner_product(v1, u0)
    if abs(overlap.real) > 1e-8:
        raise ValueError(
            f"<v1, u1(p0)> must be imaginary for a normalized mode family (real part {overlap.real:.3e})"
        )
    c11 = float((-1j * overlap).real)
    residual = u0 - overlap * v1
    rnorm = np.linalg.norm(residual)
    if rnorm > DEGENERATE_TOL:
        v2 = residual / rnorm
        degenerate = False
    else:
        if v1.size < 2:
            raise ValueError("u1(p0) is parallel to i*v1 and there is no room for a second mode")
        v2 = _orthogonal_unit(v1)
        degenerate = True
    c12 = inner_product(v2, u0)
    if degenerate:
        c12 = 0j
    return DetectionBasis(v1=v1, v2=v2, p_c=float(p_c), c11=c11, c12=c12, degenerate=degenerate)


def model_detection_basis(model: ParameterizedModel, h: float | None = None) -> DetectionBasis:
    v1, p_c = detection_mode(mean_field_derivative(model, h))
    return detection_basis(model.mode(model.p0), v1, p_c)


def _curvature_terms(model: ParameterizedModel, h2: float) -> tuple[float, float]:
    p0 = model.p0
    covs = [check_covariance(model.cov(p)) for p in (p0 - h2, p0, p0 + h2)]
    invs = [inverse_covariance(c) for c in covs]
    d2_inv = (invs[2] - 2.0 * invs[1] + invs[0]) / h2**2
    d_cov = (covs[2] - covs[0]) / (2.0 * h2)
    if not (np.all(np.isfinite(d2_inv)) and np.all(np.isfinite(d_cov))):
        raise FloatingPointError("non-finite covariance difference")
    cov_term = 0.5 * float(np.trace(covs[1] @ d2_inv))
    A = invs[1] @ d_cov
    classical = 0.5 * float(np.trace(A @ A))
    return cov_term, classical


def fisher_information(
    model: ParameterizedModel,
    basis_choice: str = "working",
    h: float | None = None,
    h2: float = CURVATURE_STEP,
) -> FisherBreakdown:
    """Fisher information with both the mean-field and the covariance-curvature term.

    Args:
        model: the parameterized model.
        basis_choice: ``"working"`` evaluates the quadratic form with the
            embedded detection mode in the working basis; ``"detection"``
            first rotates the covariance into the detection basis and reads
            the top-left element of its inverse. Both give the same value.
        h: step for the mean-field derivative.
        h2: step for the second derivative of the inverse covariance.
    """
    v1, p_c = detection_mode(mean_field_derivative(model, h))
    cov0 = check_covariance(model.cov())
    scale = 2.0 * np.sqrt(model.N) / p_c
    if basis_choice == "working":
        inv = inverse_covariance(cov0)
        dY = scale * quadrature_embedding(v1)
        mean_term = float(dY @ inv @ dY)
    elif basis_choice == "detection":
        db = detection_basis(model.mode(model.p0), v1, p_c)
        cov_det = to_basis(cov0, db.modes())
        mean_term = fisher_simplified(model.N, p_c, cov_det)
    else:
        raise ValueError(f"unknown basis choice {basis_choice!r}")

    cov_term, classical = _curvature_terms(model, h2)
    if -1e-8 <= cov_term < 0.0:
        cov_term = 0.0
    if -1e-8 <= classical < 0.0:
        classical = 0.0
    return FisherBreakdown(mean_term, cov_term, mean_term + cov_term, classical)


def fisher_simplified(N: float, p_c: float, cov_at_p0, v1_index: int = 0) -> float:
    """``4 N (cov^-1)[v1, v1] / p_c**2`` for a covariance in a basis containing ``v1``."""
    inv = inverse_covariance(check_covariance(cov_at_p0))
    return float(4.0 * N * inv[v1_index, v1_index] / p_c**2)


def cramer_rao_bound(fisher: float) -> float:
    if not fisher > 0:
        raise ValueError(f"Fisher information must be positive, got {fisher}")
    return float(1.0 / np.sqrt(fisher))


def fisher_oracle_mc(
    model: ParameterizedModel, n: int, seed: int, h: float | None = None
) -> tuple[float, float]:
    """Brute-force Fisher information: mean of ``-d^2/dp^2 log W_p(Y)`` over ``Y ~ W_p0``.

    Returns ``(estimate, standard_error)``.
    """
    p0 = model.p0
    if h is None:
        h = 1e-3 * max(1.0, abs(p0))
    Y = sample(model.state(p0), n, seed)
    lm = wigner_log_density(model.state(p0 - h), Y)
    l0 = wigner_log_density(model.state(p0), Y)
    lp = wigner_log_density(model.state(p0 + h), Y)
    vals = -(lp - 2.0 * l0 + lm) / h**2
    return float(np.mean(vals)), float(np.std(vals, ddof=1) / np.sqrt(n))
