"""Named mode/covariance families and the JSON formats for states, modes and models.

Model documents look like::

    {
      "N": 10000,
      "p0": 0.0,
      "mode": {"family": "rotation", "dim": 2, "rate": 0.5},
      "cov": {"family": "constant", "sigmas": [0.5]}
    }

Mode families: ``rotation``, ``phase``, ``interferometer``, ``custom-table``.
Covariance families: ``constant``, ``rotating-squeezed``, ``table``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .core import GaussianState, passive_symplectic, squeezed_vacuum_state, unit_mode
from .estimation import ParameterizedModel


class ModelError(ValueError):
    """Malformed model or state document."""


# ---------------------------------------------------------------------------
# Mode families
# ---------------------------------------------------------------------------


def rotation_family(dim: int = 2, rate: float = 1.0, src: int = 0, dst: int = 1):
    """``u1(p) = cos(rate p) e_src + sin(rate p) e_dst``; returns ``(u1, du)``."""
    if src == dst:
        raise ModelError("rotation needs two distinct modes")
    a, b = unit_mode(src, dim), unit_mode(dst, dim)

    def u1(p):
        return np.cos(rate * p) * a + np.sin(rate * p) * b

    def du(p):
        return rate * (-np.sin(rate * p) * a + np.cos(rate * p) * b)

    return u1, du


def phase_family(dim: int = 1, mode: int = 0, rate: float = 1.0):
    """``u1(p) = exp(i rate p) e_mode``: pure phase encoding."""
    e = unit_mode(mode, dim)

    def u1(p):
        return np.exp(1j * rate * p) * e

    def du(p):
        return 1j * rate * np.exp(1j * rate * p) * e

    return u1, du


def table_family(p_grid, coeffs):
    """Cubic-spline interpolation of tabulated modes, renormalized at every ``p``."""
    p_grid = np.asarray(p_grid, dtype=float)
    coeffs = np.asarray(coeffs, dtype=complex)
    if p_grid.ndim != 1 or coeffs.shape[0] != p_grid.size or p_grid.size < 4:
        raise ModelError("custom-table needs at least 4 grid points and one mode per point")
    if np.any(np.diff(p_grid) <= 0):
        raise ModelError("custom-table p grid must be strictly increasing")
    spline = CubicSpline(p_grid, coeffs, axis=0)
    dspline = spline.derivative()

    def u1(p):
        s = spline(p)
        return s / np.linalg.norm(s)

    def du(p):
        s, ds = spline(p), dspline(p)
        n = np.linalg.norm(s)
        return ds / n - s * np.vdot(s, ds).real / n**3

    return u1, du


# ---------------------------------------------------------------------------
# Covariance families
# ---------------------------------------------------------------------------


def constant_cov(cov):
    cov = np.array(cov, dtype=float)

    def family(p):
        return cov

    return family


def rotating_squeezed_cov(sigma: float, dim: int = 1, mode: int = 0, rate: float = 1.0):
    """Squeezed vacuum on ``mode`` whose squeezing ellipse turns by ``rate * p``."""
    base = squeezed_vacuum_state([sigma], dim).cov
    perm = np.arange(dim)
    perm[[0, mode]] = perm[[mode, 0]]
    P = np.eye(dim)[perm]
    S_perm = passive_symplectic(P)
    base = S_perm @ base @ S_perm.T

    def family(p):
        phases = np.ones(dim, dtype=complex)
        phases[mode] = np.exp(1j * rate * p)
        S = passive_symplectic(np.diag(phases))
        return S @ base @ S.T

    return family


def table_cov(p_grid, covs):
    p_grid = np.asarray(p_grid, dtype=float)
    covs = np.asarray(covs, dtype=float)
    if covs.ndim != 3 or covs.shape[0] != p_grid.size or p_grid.size < 4:
        raise ModelError("table covariance needs at least 4 grid points and one matrix per point")
    spline = CubicSpline(p_grid, covs, axis=0)

    def family(p):
        c = spline(p)
        return 0.5 * (c + c.T)

    return family


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def _require(d: dict, key: str, where: str):
    if not isinstance(d, dict):
        raise ModelError(f"{where}: expected an object")
    if key not in d:
        raise ModelError(f"{where}: missing field {key!r}")
    return d[key]


def _number(d: dict, key: str, where: str, default=None) -> float:
    if key not in d:
        if default is None:
            raise ModelError(f"{where}: missing field {key!r}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ModelError(f"{where}.{key}: expected a number, got {v!r}")
    return float(v)


def _int(d: dict, key: str, where: str, default=None) -> int:
    v = _number(d, key, where, default)
    if v != int(v):
        raise ModelError(f"{where}.{key}: expected an integer, got {v!r}")
    return int(v)


def _complex_array(obj, where: str) -> np.ndarray:
    if isinstance(obj, dict):
        re = np.asarray(_require(obj, "re", where), dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape:
            raise ModelError(f"{where}: 're' and 'im' shapes differ")
        return re + 1j * im
    return np.asarray(obj, dtype=float).astype(complex)


def mode_to_dict(v) -> dict:
    v = np.asarray(v, dtype=complex)
    return {"re": v.real.tolist(), "im": v.imag.tolist()}


def mode_from_dict(d: dict) -> np.ndarray:
    return _complex_array(d, "mode").reshape(-1)


def state_to_dict(state: GaussianState) -> dict:
    return {"M": state.num_modes, "mean": state.mean.tolist(), "cov": state.cov.tolist()}


def state_from_dict(d: dict) -> GaussianState:
    M = _int(d, "M", "state")
    mean = np.asarray(_require(d, "mean", "state"), dtype=float)
    cov = np.asarray(_require(d, "cov", "state"), dtype=float)
    if mean.shape != (2 * M,):
        raise ModelError(f"state.mean: expected {2 * M} entries, got {mean.size}")
    if cov.shape != (2 * M, 2 * M):
        raise ModelError(f"state.cov: expected {2 * M}x{2 * M} matrix, got shape {cov.shape}")
    return GaussianState(mean, cov)


def _build_mode(d: dict, where: str = "mode"):
    from .interferometer import make_profile, interferometer_family

    fam = _require(d, "family", where)
    if fam == "rotation":
        dim = _int(d, "dim", where, 2)
        return rotation_family(dim, _number(d, "rate", where, 1.0), _int(d, "from", where, 0), _int(d, "to", where, 1))
    if fam == "phase":
        return phase_family(_int(d, "dim", where, 1), _int(d, "mode", where, 0), _number(d, "rate", where, 1.0))
    if fam == "interferometer":
        profile = make_profile(d.get("profile", "linear"), _number(d, "k", where, 1.0))
        return interferometer_family(profile)
    if fam == "custom-table":
        p = _require(d, "p", where)
        coeffs = _complex_array(_require(d, "u", where), f"{where}.u")
        return table_family(p, coeffs)
    raise ModelError(f"{where}.family: unknown mode family {fam!r}")


def _build_cov(d: dict, dim: int, where: str = "cov"):
    fam = _require(d, "family", where)
    if fam == "constant":
        if "cov" in d:
            cov = np.asarray(d["cov"], dtype=float)
        elif "sigmas" in d:
            cov = squeezed_vacuum_state(d["sigmas"], dim).cov
        else:
            cov = np.eye(2 * dim)
        if cov.shape != (2 * dim, 2 * dim):
            raise ModelError(f"{where}.cov: expected {2 * dim}x{2 * dim} matrix, got shape {cov.shape}")
        return constant_cov(cov)
    if fam == "rotating-squeezed":
        return rotating_squeezed_cov(
            _number(d, "sigma", where), dim, _int(d, "mode", where, 0), _number(d, "rate", where, 1.0)
        )
    if fam == "table":
        return table_cov(_require(d, "p", where), _require(d, "covs", where))
    raise ModelError(f"{where}.family: unknown covariance family {fam!r}")


def model_from_dict(d: dict) -> ParameterizedModel:
    if not isinstance(d, dict):
        raise ModelError("model: expected a JSON object")
    N = _number(d, "N", "model")
    p0 = _number(d, "p0", "model", 0.0)
    try:
        u1, du = _build_mode(_require(d, "mode", "model"))
        dim = np.asarray(u1(p0)).size
        cov = _build_cov(d.get("cov", {"family": "constant"}), dim)
        model = ParameterizedModel(u1=u1, N=N, cov_family=cov, p0=p0, du=du, spec=d)
        model.state()
    except ModelError:
        raise
    except (ValueError, TypeError) as exc:
        raise ModelError(f"model: {exc}") from exc
    return model


def model_to_dict(model: ParameterizedModel) -> dict:
    if model.spec is None:
        raise ModelError("model was not built from a document and cannot be serialized")
    return json.loads(json.dumps(model.spec))


def dumps(obj) -> str:
    # repr-based float output is the shortest string that round-trips exactly
    return json.dumps(obj, indent=2)


def load_json(path) -> dict:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def load_model(path) -> ParameterizedModel:
    return model_from_dict(load_json(path))
