"""Two-mode phase estimation: a Michelson-type interferometer with response ``F``.

The output mean-field mode is ``u1(phi) = cos(F(phi/2)) v1 + sin(F(phi/2)) v2``
in the basis of the two output ports. ``F(x) = x`` for empty arms; cavities in
the arms steepen ``F`` around the operating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import (
    GaussianState,
    apply_passive_transform,
    beamsplitter,
    check_covariance,
    inverse_covariance,
    passive_symplectic,
    squeezed_vacuum_state,
    to_basis,
)
from .estimation import (
    ParameterizedModel,
    cramer_rao_bound,
    detection_basis,
    detection_mode,
    fisher_simplified,
)

NUMERIC_DERIVATIVE_STEP = 1e-6


@dataclass(frozen=True)
class Profile:
    """Phase response ``F`` with an optional analytic derivative."""

    name: str
    F: Callable[[float], float]
    dF: Callable[[float], float] | None = None

    def derivative(self, x: float) -> float:
        if self.dF is not None:
            return float(self.dF(x))
        h = NUMERIC_DERIVATIVE_STEP
        return float((self.F(x + h) - self.F(x - h)) / (2 * h))


def make_profile(name: str = "linear", k: float = 1.0) -> Profile:
    """Named response profiles.

    ``linear``: ``F(x) = x``; ``scaled``: ``F(x) = k x``; ``cavity``:
    ``F(x) = arctan(k tan x)``, a Fabry-Perot-like gain of ``k`` at ``x = 0``.
    A ``"name:k"`` string sets ``k`` inline.
    """
    if ":" in name:
        name, ks = name.split(":", 1)
        k = float(ks)
    if name == "linear":
        return Profile("linear", lambda x: x, lambda x: 1.0)
    if name == "scaled":
        return Profile(f"scaled:{k:g}", lambda x: k * x, lambda x: k)
    if name == "cavity":
        return Profile(
            f"cavity:{k:g}",
            lambda x: np.arctan2(k * np.sin(x), np.cos(x)),
            lambda x: k / (np.cos(x) ** 2 + (k * np.sin(x)) ** 2),
        )
    raise ValueError(f"unknown interferometer profile {name!r}")


def interferometer_family(profile: Profile):
    """``(u1, du)`` for the output mean-field mode as a function of the phase."""

    def u1(phi):
        a = profile.F(phi / 2)
        return np.array([np.cos(a), np.sin(a)], dtype=complex)

    def du(phi):
        a = profile.F(phi / 2)
        return 0.5 * profile.derivative(phi / 2) * np.array([-np.sin(a), np.cos(a)], dtype=complex)

    return u1, du


@dataclass(frozen=True)
class InterferometerSpec:
    profile: Profile = field(default_factory=make_profile)
    phi0: float = 0.0
    N: float = 1.0
    input: GaussianState | None = None

    @property
    def Fprime(self) -> float:
        return self.profile.derivative(self.phi0 / 2)


def mean_output_mode(spec: InterferometerSpec, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Output mean-field mode ``u1(phi)`` and its orthogonal companion ``u2(phi)``."""
    a = spec.profile.F(phi / 2)
    c, s = np.cos(a), np.sin(a)
    return np.array([c, s], dtype=complex), np.array([-s, c], dtype=complex)


def interferometer_unitary(spec: InterferometerSpec, phi: float | None = None) -> np.ndarray:
    """Passive transform taking input port 1 to ``u1(phi)`` and port 2 to ``u2(phi)``."""
    u1, u2 = mean_output_mode(spec, spec.phi0 if phi is None else phi)
    return np.column_stack([u1, u2])


def phase_crb(spec: InterferometerSpec, cov_in_detection_basis) -> float:
    """``1 / (|F'| sqrt(N (cov^-1)[0, 0]))`` with the detection mode listed first."""
    Fp = spec.Fprime
    if Fp == 0 or not np.isfinite(Fp):
        raise ValueError("F'(phi0/2) is zero: the interferometer has no phase sensitivity")
    inv = inverse_covariance(check_covariance(cov_in_detection_basis))
    return float(1.0 / (abs(Fp) * np.sqrt(spec.N * inv[0, 0])))


def interferometer_model(spec: InterferometerSpec, cov_working) -> ParameterizedModel:
    """Generic model for the interferometer output with a fixed output covariance."""
    u1, du = interferometer_family(spec.profile)
    cov = np.array(cov_working, dtype=float)
    return ParameterizedModel(u1=u1, N=spec.N, cov_family=lambda p: cov, p0=spec.phi0, du=du)


def generic_phase_crb(spec: InterferometerSpec, cov_working) -> float:
    """Phase CRB through detection mode, simplified Fisher information and bound."""
    u1, du = interferometer_family(spec.profile)
    v1, p_c = detection_mode(du(spec.phi0))
    db = detection_basis(u1(spec.phi0), v1, p_c)
    cov_det = to_basis(cov_working, db.modes())
    return cramer_rao_bound(fisher_simplified(spec.N, p_c, cov_det))


def output_in_detection_basis(spec: InterferometerSpec, cov_working) -> np.ndarray:
    u1, du = interferometer_family(spec.profile)
    v1, p_c = detection_mode(du(spec.phi0))
    return to_basis(cov_working, detection_basis(u1(spec.phi0), v1, p_c).modes())


def _with_mean(cov_in, N: float) -> GaussianState:
    # coherent amplitude sqrt(N) in input port 1
    return GaussianState(np.array([2 * np.sqrt(N), 0.0, 0.0, 0.0]), cov_in)


def caves_scheme(N: float, sigma: float, spec: InterferometerSpec | None = None) -> GaussianState:
    """Output of coherent light in port 1 and squeezed vacuum in port 2."""
    if N <= 0:
        raise ValueError("photon number must be positive")
    if not 0 < sigma <= 1:
        raise ValueError("squeezing r.m.s. must lie in (0, 1]")
    spec = InterferometerSpec(N=N) if spec is None else spec
    cov_in = squeezed_vacuum_state([1.0, sigma], 2).cov
    return apply_passive_transform(_with_mean(cov_in, N), interferometer_unitary(spec))


def _rotated(cov, theta: float, mode: int) -> np.ndarray:
    phases = np.ones(2, dtype=complex)
    phases[mode] = np.exp(1j * theta)
    S = passive_symplectic(np.diag(phases))
    return S @ cov @ S.T


def input_allocation_sweep(
    spec: InterferometerSpec, sigma: float, n_angles: int = 8
) -> list[tuple[str, float]]:
    """Phase CRB for Gaussian inputs built from one squeezed vacuum ``sigma``.

    Enumerates the squeezer in either port with its ellipse at ``n_angles``
    orientations, and the squeezer entangled with the other port by balanced
    couplers of several phases. Row ``"caves"`` is the coherent + squeezed
    vacuum arrangement.
    """
    U = interferometer_unitary(spec)
    rows = []

    def crb_of(cov_in):
        out = apply_passive_transform(_with_mean(cov_in, spec.N), U)
        return generic_phase_crb(spec, out.cov)

    rows.append(("caves", crb_of(squeezed_vacuum_state([1.0, sigma], 2).cov)))
    rows.append(("vacuum", crb_of(np.eye(4))))
    angles = np.linspace(0, np.pi, n_angles, endpoint=False)
    for port in (0, 1):
        base = squeezed_vacuum_state([1.0, sigma] if port else [sigma, 1.0], 2).cov
        for theta in angles[1:] if port else angles:
            rows.append((f"port{port + 1}-angle{theta:.4f}", crb_of(_rotated(base, theta, port))))
    for bs_phase in angles:
        for theta in angles:
            sq = _rotated(squeezed_vacuum_state([1.0, sigma], 2).cov, theta, 1)
            S = passive_symplectic(beamsplitter(np.pi / 4, bs_phase))
            rows.append((f"entangled-bs{bs_phase:.4f}-angle{theta:.4f}", crb_of(S @ sq @ S.T)))
    return rows


def sensitivity_table(profile: Profile, sigmas, N: float, phi0s) -> list[dict]:
    """Rows ``(phi0, sigma, N, Fprime, delta_phi)`` for the Caves arrangement."""
    rows = []
    for phi0 in phi0s:
        spec = InterferometerSpec(profile=profile, phi0=float(phi0), N=N)
        for sigma in sigmas:
            out = caves_scheme(N, sigma, spec)
            rows.append(
                {
                    "phi0": float(phi0),
                    "sigma": float(sigma),
                    "N": float(N),
                    "Fprime": spec.Fprime,
                    "delta_phi": phase_crb(spec, output_in_detection_basis(spec, out.cov)),
                }
            )
    return rows
