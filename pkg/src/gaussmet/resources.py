"""Allocation of a fixed budget of squeezed vacua to minimize the Cramer-Rao bound."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import (
    beamsplitter,
    check_covariance,
    complete_basis,
    embed_unitary,
    from_basis,
    inverse_covariance,
    passive_symplectic,
    quadrature_embedding,
)
from .estimation import ParameterizedModel, cramer_rao_bound, detection_mode, mean_field_derivative

BOUND_RTOL = 1e-9


class SpectralBoundError(ValueError):
    """A covariance exceeds the spectral-radius bound of its claimed budget."""


@dataclass(frozen=True)
class SqueezingBudget:
    """Available squeezed vacua, given by the r.m.s. of their squeezed quadrature.

    Values above one are read as squeezing of the conjugate quadrature, so
    the effective squeezed r.m.s. of each resource is ``min(s, 1/s)``.
    """

    sigmas: tuple[float, ...]

    def __post_init__(self):
        sig = tuple(float(s) for s in np.atleast_1d(self.sigmas))
        if len(sig) < 1:
            raise ValueError("budget needs at least one resource")
        if any(not np.isfinite(s) or s <= 0 for s in sig):
            raise ValueError("squeezing r.m.s. values must be positive")
        object.__setattr__(self, "sigmas", sig)

    @property
    def effective(self) -> np.ndarray:
        s = np.asarray(self.sigmas)
        return np.minimum(s, 1.0 / s)

    @property
    def sigma_min(self) -> float:
        return float(np.min(self.effective))

    def ordered(self) -> np.ndarray:
        """Effective values with the most squeezed first (ties: lowest index wins)."""
        eff = self.effective
        k = int(np.argmin(eff))
        return np.concatenate([[eff[k]], np.delete(eff, k)])


def _diag_cov(variances_plus: np.ndarray, M: int) -> np.ndarray:
    vp = np.ones(M)
    vp[: variances_plus.size] = variances_plus
    return np.diag(np.concatenate([vp, 1.0 / vp]))


def optimal_covariance(budget: SqueezingBudget, M: int) -> np.ndarray:
    """Detection-basis covariance with the most squeezed resource on ``Y+`` of mode 1."""
    s = len(budget.sigmas)
    if s > M:
        raise ValueError(f"{s} resources do not fit in {M} modes")
    return _diag_cov(budget.ordered() ** 2, M)


def optimal_crb(budget: SqueezingBudget, N: float, p_c: float) -> float:
    if N <= 0 or p_c <= 0:
        raise ValueError("N and p_c must be positive")
    return float(p_c * budget.sigma_min / (2.0 * np.sqrt(N)))


@dataclass(frozen=True)
class SpectralReport:
    value: float
    bound: float
    attained: bool


def spectral_bound_report(cov, budget: SqueezingBudget) -> SpectralReport:
    """Compare ``(cov^-1)[0, 0]`` with the spectral radius ``1/sigma_min**2``.

    Raises:
        SpectralBoundError: if the value exceeds the bound, which means
            ``cov`` was not reachable from ``budget`` by passive transforms.
    """
    inv = inverse_covariance(check_covariance(cov))
    value = float(inv[0, 0])
    bound = 1.0 / budget.sigma_min**2
    if value > bound * (1 + BOUND_RTOL):
        raise SpectralBoundError(f"(cov^-1)[0,0] = {value} exceeds the spectral radius {bound}")
    return SpectralReport(value, bound, abs(value - bound) < BOUND_RTOL * bound)


def detection_cross_correlation(cov) -> float:
    """Largest off-diagonal magnitude in the detection-quadrature row."""
    row = np.asarray(cov, dtype=float)[0].copy()
    row[0] = 0.0
    return float(np.max(np.abs(row)))


def allocation_sweep(
    budget: SqueezingBudget, model: ParameterizedModel, candidate_modes
) -> list[dict]:
    """CRB for every placement of the budget onto ``candidate_modes``.

    For each candidate ``j`` the most squeezed resource goes on ``Y+`` of
    candidate ``j`` and the rest fill the other candidates in order. Each
    placement is also entangled pairwise by a balanced coupler, either with
    both ellipses aligned (``bs``) or with the second one turned by 90 degrees
    first, which makes a two-mode squeezed pair (``tms``).

    Returns rows with keys ``placement``, ``entanglement``, ``crb`` and
    ``ratio_to_optimal``.
    """
    cands = np.atleast_2d(np.asarray(candidate_modes, dtype=complex))
    K, D = cands.shape
    s = len(budget.sigmas)
    if s > K:
        raise ValueError(f"{s} resources need at least {s} candidate modes, got {K}")
    basis = complete_basis(cands, D)
    v1, p_c = detection_mode(mean_field_derivative(model))
    w = quadrature_embedding(v1)
    best = optimal_crb(budget, model.N, p_c)
    scale = 4.0 * model.N / p_c**2
    ordered = budget.ordered()

    def crb(cov_cand: np.ndarray) -> float:
        inv = inverse_covariance(from_basis(cov_cand, basis))
        return cramer_rao_bound(scale * float(w @ inv @ w))

    rows = []
    for j in range(K):
        slots = [j] + [k for k in range(K) if k != j]
        vp = np.ones(D)
        vp[slots[:s]] = ordered**2
        cov = np.diag(np.concatenate([vp, 1.0 / vp]))
        value = crb(cov)
        rows.append({"placement": f"mode{j}", "entanglement": "none", "crb": value, "ratio_to_optimal": value / best})
        for a, b in combinations(range(K), 2):
            S = passive_symplectic(embed_unitary(beamsplitter(), [a, b], D))
            R = passive_symplectic(embed_unitary(np.array([[1j]]), [b], D))
            for label, pre in (("bs", np.eye(2 * D)), ("tms", R)):
                c = S @ pre @ cov @ pre.T @ S.T
                value = crb(c)
                rows.append(
                    {"placement": f"mode{j}", "entanglement": f"{label}({a},{b})", "crb": value, "ratio_to_optimal": value / best}
                )
    return rows
