"""Modes, quadratures and multimode Gaussian states.

Conventions used throughout the package:

* A mode is a complex coefficient vector in a fixed orthonormal reference
  basis of dimension ``D``.
* Quadratures are ``Y+ = b^dag + b`` and ``Y- = i(b^dag - b)``, so the vacuum
  covariance is the identity and a coherent amplitude ``alpha`` has mean
  quadratures ``(2 Re alpha, 2 Im alpha)``.
* Quadrature vectors are ordered ``(Y+_1, ..., Y+_M, Y-_1, ..., Y-_M)``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

NORM_TOL = 1e-12
ORTHO_TOL = 1e-10
UNITARY_TOL = 1e-10
SYMMETRY_TOL = 1e-12
PURITY_TOL = 1e-9

# Rows per independent random substream in ``sample``; fixed so that results
# never depend on the worker count.
SAMPLE_CHUNK = 1 << 16


class SingularCovarianceError(np.linalg.LinAlgError):
    """Raised when a covariance matrix cannot be inverted or factorized."""


# ---------------------------------------------------------------------------
# Modes
# ---------------------------------------------------------------------------


def mode_vector(coeffs, normalize: bool = False) -> np.ndarray:
    """Return ``coeffs`` as a 1-D complex mode vector, optionally normalized."""
    v = np.asarray(coeffs, dtype=complex).reshape(-1)
    if v.size < 1:
        raise ValueError("a mode needs at least one coefficient")
    if normalize:
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero mode")
        v = v / norm
    return v


def unit_mode(index: int, dim: int) -> np.ndarray:
    """Reference basis vector ``e_index`` of dimension ``dim``."""
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def is_normalized(v, tol: float = NORM_TOL) -> bool:
    return abs(np.vdot(v, v).real - 1.0) < tol


def inner_product(u, v) -> complex:
    """Mode overlap ``sum_k conj(u_k) v_k`` (conjugate-linear in ``u``)."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise ValueError(f"mode dimension mismatch: {u.shape} vs {v.shape}")
    return complex(np.vdot(u, v))


def check_orthonormal(modes, tol: float = ORTHO_TOL) -> None:
    """Raise ``ValueError`` unless the modes (rows) are pairwise orthonormal."""
    V = np.atleast_2d(np.asarray(modes, dtype=complex))
    if V.shape[0] > V.shape[1]:
        raise ValueError(f"{V.shape[0]} modes cannot be orthonormal in dimension {V.shape[1]}")
    gram = V.conj() @ V.T
    err = np.max(np.abs(gram - np.eye(V.shape[0])))
    if err >= tol:
        raise ValueError(f"modes are not orthonormal (max Gram error {err:.3e})")


def complete_basis(modes, dim: int | None = None) -> np.ndarray:
    """Extend orthonormal ``modes`` to a full orthonormal basis.

    Returns a ``(D, D)`` array whose rows are the basis modes, the given ones
    first and in order.
    """
    V = np.atleast_2d(np.asarray(modes, dtype=complex))
    D = V.shape[1] if dim is None else dim
    check_orthonormal(V)
    basis = [row for row in V]
    for k in range(D):
        if len(basis) == D:
            break
        cand = unit_mode(k, D)
        for b in basis:
            cand = cand - np.vdot(b, cand) * b
        # second pass for numerical orthogonality
        for b in basis:
            cand = cand - np.vdot(b, cand) * b
        norm = np.linalg.norm(cand)
        if norm > 1e-6:
            basis.append(cand / norm)
    return np.array(basis)


def quadrature_embedding(v) -> np.ndarray:
    """Real 2D-vector ``(Re v, Im v)``: the ``Y+`` direction of mode ``v``.

    A field with amplitude ``alpha`` in mode ``v`` has mean quadrature vector
    ``2 * (Re(alpha v), Im(alpha v))`` in the reference ordering.
    """
    v = np.asarray(v, dtype=complex)
    return np.concatenate([v.real, v.imag])


def coherent_mean(amplitudes) -> np.ndarray:
    """Mean quadrature vector of coherent amplitudes ``alpha_k`` per mode."""
    a = np.asarray(amplitudes, dtype=complex)
    return 2.0 * np.concatenate([a.real, a.imag])


# ---------------------------------------------------------------------------
# Covariance algebra
# ---------------------------------------------------------------------------


def omega(M: int) -> np.ndarray:
    """Symplectic form ``[[0, I], [-I, 0]]`` for the fixed quadrature ordering."""
    I = np.eye(M)
    Z = np.zeros((M, M))
    return np.block([[Z, I], [-I, Z]])


def passive_symplectic(U) -> np.ndarray:
    """Orthogonal symplectic matrix ``[[Re U, -Im U], [Im U, Re U]]``.

    ``U`` maps mode amplitudes ``b -> U b``.
    """
    U = np.asarray(U, dtype=complex)
    return np.block([[U.real, -U.imag], [U.imag, U.real]])


def basis_change_unitary(basis_modes) -> np.ndarray:
    """Unitary taking reference-basis amplitudes to amplitudes in ``basis_modes``.

    Row ``j`` of the result is ``conj(v_j)``, i.e. ``b'_j = <v_j, b>``.
    """
    V = np.atleast_2d(np.asarray(basis_modes, dtype=complex))
    return V.conj()


def to_basis(cov, basis_modes) -> np.ndarray:
    """Express a reference-basis covariance in the basis given by ``basis_modes``."""
    S = passive_symplectic(basis_change_unitary(basis_modes))
    return S @ np.asarray(cov, dtype=float) @ S.T


def from_basis(cov, basis_modes) -> np.ndarray:
    """Inverse of :func:`to_basis`."""
    S = passive_symplectic(basis_change_unitary(basis_modes))
    return S.T @ np.asarray(cov, dtype=float) @ S


def check_covariance(cov, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Validate symmetry, even size and positive definiteness; return as array."""
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
        raise ValueError(f"covariance must be square with even side, got {cov.shape}")
    scale = max(1.0, np.max(np.abs(cov)))
    if np.max(np.abs(cov - cov.T)) > tol * scale:
        raise ValueError("covariance matrix is not symmetric")
    try:
        np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise SingularCovarianceError("covariance matrix is not positive definite") from exc
    return cov


def inverse_covariance(cov) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    try:
        inv = np.linalg.inv(cov)
    except np.linalg.LinAlgError as exc:
        raise SingularCovarianceError("covariance matrix is singular") from exc
    if not np.all(np.isfinite(inv)) or np.linalg.cond(cov) > 1e14:
        raise SingularCovarianceError("covariance matrix is numerically singular")
    return inv


def symplectic_eigenvalues(cov) -> np.ndarray:
    """Symplectic spectrum of ``cov`` (``M`` values, ascending).

    Uses the Hermitian matrix ``sqrt(cov) (i Omega) sqrt(cov)``, which is
    similar to ``i Omega cov``; its eigenvalues come in ``+-nu`` pairs.
    """
    cov = check_covariance(cov)
    M = cov.shape[0] // 2
    w, V = np.linalg.eigh(cov)
    root = (V * np.sqrt(w)) @ V.T
    H = root @ (1j * omega(M)) @ root
    H = 0.5 * (H + H.conj().T)
    nu = np.sort(np.abs(np.linalg.eigvalsh(H)))
    return nu[::2]


def satisfies_uncertainty(cov, tol: float = 1e-10) -> bool:
    """True if ``cov + i Omega`` is positive semidefinite within ``tol``."""
    cov = np.asarray(cov, dtype=float)
    M = cov.shape[0] // 2
    return bool(np.min(np.linalg.eigvalsh(cov + 1j * omega(M))) >= -tol)


def is_pure(cov, tol: float = PURITY_TOL) -> bool:
    return bool(np.all(np.abs(symplectic_eigenvalues(cov) - 1.0) < tol))


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianState:
    """Multimode Gaussian state given by its mean quadratures and covariance.

    Attributes:
        mean: length-2M quadrature mean in the fixed ordering.
        cov: 2M x 2M covariance (vacuum = identity).
        basis: optional (M, D) array whose rows are the modes the quadratures
            refer to; ``None`` means the reference basis itself.
    """

    mean: np.ndarray
    cov: np.ndarray
    basis: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = check_covariance(self.cov)
        if mean.shape[0] != cov.shape[0]:
            raise ValueError(f"mean length {mean.shape[0]} does not match covariance side {cov.shape[0]}")
        if self.basis is not None:
            basis = np.atleast_2d(np.asarray(self.basis, dtype=complex))
            if 2 * basis.shape[0] != cov.shape[0]:
                raise ValueError("basis size does not match covariance")
            check_orthonormal(basis)
            object.__setattr__(self, "basis", basis)
        mean.flags.writeable = False
        cov = cov.copy()
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def num_modes(self) -> int:
        return self.cov.shape[0] // 2

    @property
    def photon_number(self) -> float:
        return float(self.mean @ self.mean / 4.0 + (np.trace(self.cov) - 2 * self.num_modes) / 4.0)

    def is_pure(self, tol: float = PURITY_TOL) -> bool:
        return is_pure(self.cov, tol)

    def __eq__(self, other):
        if not isinstance(other, GaussianState):
            return NotImplemented
        return np.array_equal(self.mean, other.mean) and np.array_equal(self.cov, other.cov)

    def allclose(self, other: GaussianState, atol: float = 1e-12) -> bool:
        return (
            self.mean.shape == other.mean.shape
            and np.allclose(self.mean, other.mean, rtol=0, atol=atol)
            and np.allclose(self.cov, other.cov, rtol=0, atol=atol)
        )


def vacuum_state(M: int) -> GaussianState:
    return GaussianState(np.zeros(2 * M), np.eye(2 * M))


def squeezed_vacuum_state(sigmas, M: int) -> GaussianState:
    """Product of squeezed vacua on modes ``1..s``, vacuum on the rest.

    ``sigmas[i]`` is the r.m.s. value of the squeezed ``Y+`` quadrature of
    mode ``i``; the conjugate ``Y-`` variance is ``1 / sigmas[i]**2``.
    """
    sigmas = np.asarray(sigmas, dtype=float).reshape(-1)
    if sigmas.size > M:
        raise ValueError(f"{sigmas.size} squeezed modes do not fit in {M} modes")
    if np.any(~np.isfinite(sigmas)) or np.any(sigmas <= 0):
        raise ValueError("squeezing r.m.s. values must be positive")
    var_plus = np.ones(M)
    var_plus[: sigmas.size] = sigmas**2
    return GaussianState(np.zeros(2 * M), np.diag(np.concatenate([var_plus, 1.0 / var_plus])))


def coherent_state(amplitudes) -> GaussianState:
    a = np.asarray(amplitudes, dtype=complex).reshape(-1)
    return GaussianState(coherent_mean(a), np.eye(2 * a.size))


def check_unitary(U, tol: float = UNITARY_TOL) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError(f"unitary must be square, got shape {U.shape}")
    err = np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])))
    if err >= tol:
        raise ValueError(f"matrix is not unitary (max deviation {err:.3e})")
    return U


def apply_passive_transform(state: GaussianState, U) -> GaussianState:
    """Act on ``state`` with the linear coupler ``b -> U b``."""
    U = check_unitary(U)
    if U.shape[0] != state.num_modes:
        raise ValueError(f"unitary acts on {U.shape[0]} modes, state has {state.num_modes}")
    S = passive_symplectic(U)
    cov = S @ state.cov @ S.T
    return GaussianState(S @ state.mean, 0.5 * (cov + cov.T), state.basis)


def beamsplitter(theta: float = np.pi / 4, phi: float = 0.0) -> np.ndarray:
    """2x2 beamsplitter unitary; the default is a balanced (50:50) coupler."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -np.exp(-1j * phi) * s], [np.exp(1j * phi) * s, c]])


def embed_unitary(U, modes, M: int) -> np.ndarray:
    """Embed a k-mode unitary acting on ``modes`` into an M-mode identity."""
    full = np.eye(M, dtype=complex)
    idx = np.asarray(modes)
    full[np.ix_(idx, idx)] = U
    return full


def haar_unitary(M: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a complex Ginibre matrix."""
    Z = (rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))) / np.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


# ---------------------------------------------------------------------------
# Wigner density and sampling
# ---------------------------------------------------------------------------


def wigner_log_density(state: GaussianState, y) -> np.ndarray | float:
    """Log of the Gaussian Wigner density at ``y`` (one vector or a batch).

    The general normalizer ``-M ln(2 pi) - 1/2 ln det cov`` is kept so that
    mixed states integrate to one.
    """
    y = np.asarray(y, dtype=float)
    n = state.cov.shape[0]
    if y.shape[-1] != n:
        raise ValueError(f"quadrature vector length {y.shape[-1]} does not match state dimension {n}")
    sign, logdet = np.linalg.slogdet(state.cov)
    if sign <= 0:
        raise SingularCovarianceError("covariance matrix is singular")
    L = np.linalg.cholesky(state.cov)
    d = np.atleast_2d(y - state.mean)
    z = np.linalg.solve(L, d.T)
    quad = np.sum(z * z, axis=0)
    out = -state.num_modes * np.log(2 * np.pi) - 0.5 * logdet - 0.5 * quad
    return float(out[0]) if y.ndim == 1 else out


def worker_count() -> int:
    """Worker bound from ``GAUSSMET_THREADS`` (default: machine parallelism)."""
    env = os.environ.get("GAUSSMET_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"GAUSSMET_THREADS must be an integer, got {env!r}") from None
        return max(1, n)
    return os.cpu_count() or 1


def sample(state: GaussianState, n: int, seed: int, workers: int | None = None) -> np.ndarray:
    """Draw ``n`` quadrature vectors from the state's Wigner distribution.

    Draws are made in fixed-size chunks, each from its own substream spawned
    from ``seed``, so the output depends only on ``(seed, n)`` and not on the
    number of workers.
    """
    if n < 1:
        raise ValueError("sample count must be at least 1")
    try:
        L = np.linalg.cholesky(state.cov)
    except np.linalg.LinAlgError as exc:
        raise SingularCovarianceError("covariance matrix is not positive definite") from exc
    dim = state.cov.shape[0]
    n_chunks = -(-n // SAMPLE_CHUNK)
    streams = np.random.SeedSequence(seed).spawn(n_chunks)
    out = np.empty((n, dim))

    def fill(k: int) -> None:
        lo = k * SAMPLE_CHUNK
        hi = min(n, lo + SAMPLE_CHUNK)
        z = np.random.default_rng(streams[k]).standard_normal((hi - lo, dim))
        out[lo:hi] = state.mean + z @ L.T

    workers = worker_count() if workers is None else max(1, workers)
    if workers == 1 or n_chunks == 1:
        for k in range(n_chunks):
            fill(k)
    else:
        with ThreadPoolExecutor(max_workers=min(workers, n_chunks)) as pool:
            list(pool.map(fill, range(n_chunks)))
    return out
