"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that ``conftest.py`` prints in the terminal
summary. Run alone with ``pytest tests/test_acceptance.py``.
"""

import time

import numpy as np

from gaussmet.core import (
    apply_passive_transform,
    beamsplitter,
    embed_unitary,
    from_basis,
    haar_unitary,
    squeezed_vacuum_state,
    to_basis,
)
from gaussmet.estimation import (
    ParameterizedModel,
    cramer_rao_bound,
    fisher_information,
    fisher_oracle_mc,
    fisher_simplified,
    model_detection_basis,
)
from gaussmet.homodyne import HomodyneConfig, p_sql, simulate
from gaussmet.interferometer import (
    InterferometerSpec,
    caves_scheme,
    generic_phase_crb,
    input_allocation_sweep,
    make_profile,
    output_in_detection_basis,
    phase_crb,
)
from gaussmet.models import phase_family, rotating_squeezed_cov, rotation_family
from gaussmet.resources import (
    SpectralBoundError,
    SqueezingBudget,
    detection_cross_correlation,
    optimal_covariance,
    optimal_crb,
    spectral_bound_report,
)

RESULTS: list[str] = []


def record(name: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def const(cov):
    cov = np.asarray(cov, dtype=float)
    return lambda p: cov


def rel(a, b):
    return abs(a - b) / abs(b)


def test_1_shot_noise_baseline():
    t = time.perf_counter()
    u1, du = rotation_family(2, 0.5)
    m = ParameterizedModel(u1=u1, N=1e4, cov_family=const(np.eye(4)), du=du)
    fb = fisher_information(m)
    dp = cramer_rao_bound(fb.total)
    b = model_detection_basis(m)
    inv11 = np.linalg.inv(to_basis(m.cov(), b.modes()))[0, 0]
    closed = float(b.p_c / (2 * np.sqrt(m.N)) / np.sqrt(inv11))
    dt = time.perf_counter() - t
    ok = rel(dp, 0.01) < 1e-12 and rel(closed, 0.01) < 1e-12 and b.p_c == 2 and dt < 1.0
    record("1 shot-noise baseline", ok, f"delta_p={dp!r} closed_form={closed!r} p_c={b.p_c} ({dt:.3f}s)")


def test_2_optimized_bound():
    t = time.perf_counter()
    budget = SqueezingBudget((0.1,))
    direct = optimal_crb(budget, 1e6, 2.0)
    pipeline = cramer_rao_bound(fisher_simplified(1e6, 2.0, optimal_covariance(budget, 2)))
    # full model pipeline with the optimal covariance placed in the working basis
    u1, du = rotation_family(2, 0.5)
    m0 = ParameterizedModel(u1=u1, N=1e6, cov_family=const(np.eye(4)), du=du)
    cov = from_basis(optimal_covariance(budget, 2), model_detection_basis(m0).modes())
    full = cramer_rao_bound(fisher_information(ParameterizedModel(u1=u1, N=1e6, cov_family=const(cov), du=du)).total)
    dt = time.perf_counter() - t
    ok = all(rel(x, 1e-4) < 1e-12 for x in (direct, pipeline, full)) and dt < 1.0
    record("2 optimized bound", ok, f"optimal_crb={direct!r} pipeline={pipeline!r} model={full!r} ({dt:.3f}s)")


def test_3_spectral_radius():
    t = time.perf_counter()
    budget = SqueezingBudget((0.5, 0.7))
    base = squeezed_vacuum_state([0.5, 0.7], 3)
    rng = np.random.default_rng(2024)
    worst, violations, attained, eq_corr = 0.0, 0, 0, 0.0
    for _ in range(1000):
        cov = apply_passive_transform(base, haar_unitary(3, rng)).cov
        try:
            r = spectral_bound_report(cov, budget)
        except SpectralBoundError:
            violations += 1
            continue
        worst = max(worst, r.value / r.bound)
        if r.attained:
            attained += 1
            eq_corr = max(eq_corr, detection_cross_correlation(cov))
    # equality cases: transforms that leave the detection mode alone
    for _ in range(200):
        U = embed_unitary(haar_unitary(2, rng), [1, 2], 3)
        cov = apply_passive_transform(base, U).cov
        r = spectral_bound_report(cov, budget)
        attained += r.attained
        eq_corr = max(eq_corr, detection_cross_correlation(cov))
    dt = time.perf_counter() - t
    ok = violations == 0 and worst <= 1 + 1e-9 and attained >= 200 and eq_corr < 1e-8 and dt < 10.0
    record(
        "3 spectral-radius bound",
        ok,
        f"violations={violations} max value/bound={worst:.6f} equality cases={attained} "
        f"max cross-corr={eq_corr:.1e} ({dt:.2f}s)",
    )


def test_4_homodyne_attains_crb():
    t = time.perf_counter()
    budget = SqueezingBudget((0.5,))
    N, N0, p_true, n = 1e4, 1e6, 1e-4, 100_000
    u1, du = rotation_family(2, 0.5)
    m0 = ParameterizedModel(u1=u1, N=N, cov_family=const(np.eye(4)), du=du)
    cov = from_basis(optimal_covariance(budget, 2), model_detection_basis(m0).modes())
    m = ParameterizedModel(u1=u1, N=N, cov_family=const(cov), du=du)
    _, _, rep = simulate(m, HomodyneConfig(lo_photons=N0, n_samples=n, seed=20240), p_true)
    se = np.sqrt(rep.estimator_variance / n)
    dt = time.perf_counter() - t
    unbiased = abs(rep.estimator_mean - p_true) < 3 * se
    ok = unbiased and 0.97 <= rep.variance_over_crb_sq <= 1.03 and dt < 10.0
    record(
        "4 homodyne attains CRB",
        ok,
        f"bias={(rep.estimator_mean - p_true) / se:+.2f} SE, var/crb^2={rep.variance_over_crb_sq:.4f} "
        f"crb={rep.crb:.3e} ({dt:.2f}s)",
    )


def test_5_fisher_oracle():
    t = time.perf_counter()
    rng = np.random.default_rng(5)
    cases = []
    # M = 1: phase encoding, squeezed state at an arbitrary ellipse angle
    u1, du = phase_family(1, 0, 1.0)
    cov1 = apply_passive_transform(squeezed_vacuum_state([0.6], 1), np.array([[np.exp(0.4j)]])).cov
    cases.append(ParameterizedModel(u1=u1, N=50, cov_family=const(cov1), du=du))
    # M = 2: rotation with a correlated two-mode covariance
    u1, du = rotation_family(2, 0.8)
    cov2 = apply_passive_transform(squeezed_vacuum_state([0.5, 0.8], 2), haar_unitary(2, rng)).cov
    cases.append(ParameterizedModel(u1=u1, N=100, cov_family=const(cov2), du=du))
    details, ok = [], True
    for M, m in zip((1, 2), cases):
        fb = fisher_information(m)
        est, se = fisher_oracle_mc(m, 1_000_000, seed=M)
        r = rel(est, fb.total)
        ok &= r < 0.02
        details.append(f"M={M}: analytic={fb.total:.4f} oracle={est:.4f}+-{se:.4f} rel={r:.2e}")
    dt = time.perf_counter() - t
    ok &= dt < 60.0
    record("5 Fisher oracle equivalence", ok, "; ".join(details) + f" ({dt:.2f}s)")


def test_6_second_term_pure_family():
    sigma = 0.5
    m = ParameterizedModel(
        u1=rotation_family(2, 1.0)[0], N=1, cov_family=rotating_squeezed_cov(sigma, 2, 1, 1.0)
    )
    fb = fisher_information(m)
    analytic = (sigma**2 - sigma**-2) ** 2
    r1, r2 = rel(fb.cov_term, analytic), rel(fb.classical_cov_term, analytic)
    ok = r1 < 1e-4 and r2 < 1e-4
    record(
        "6 second-term equivalence",
        ok,
        f"curvature={fb.cov_term:.8f} classical={fb.classical_cov_term:.8f} analytic={analytic} "
        f"rel=({r1:.1e}, {r2:.1e})",
    )


def test_7_interferometer():
    t = time.perf_counter()
    N, sigma = 1e4, 0.1
    worst_pipe, worst_bias, worst_slack = 0.0, 0.0, -np.inf
    for k in (1, 5, 20):
        vals = []
        for phi0 in np.linspace(-np.pi, np.pi, 16, endpoint=False):
            spec = InterferometerSpec(make_profile("scaled", k), phi0, N)
            out = caves_scheme(N, sigma, spec)
            a = phase_crb(spec, output_in_detection_basis(spec, out.cov))
            b = generic_phase_crb(spec, out.cov)
            worst_pipe = max(worst_pipe, rel(a, b))
            vals.append(a)
        vals = np.array(vals)
        worst_bias = max(worst_bias, np.max(np.abs(vals / vals[0] - 1)))
        rows = dict(input_allocation_sweep(InterferometerSpec(make_profile("scaled", k), 0.3, N), sigma))
        caves = rows.pop("caves")
        worst_slack = max(worst_slack, (caves - min(rows.values())) / caves)
    dt = time.perf_counter() - t
    ok = worst_pipe <= 1e-12 and worst_bias <= 1e-12 and worst_slack <= 1e-9 and dt < 5.0
    record(
        "7 interferometer consistency",
        ok,
        f"pipeline rel={worst_pipe:.1e} bias spread={worst_bias:.1e} caves slack={worst_slack:.1e} ({dt:.2f}s)",
    )


def test_8_p_sql_identity():
    N = 1e4
    u1, du = rotation_family(2, 0.5)
    p_c, du_norm = 2.0, 0.5
    # uncorrelated detection mode squeezed at sigma_min
    sigma_min = 0.3
    cov_unc = optimal_covariance(SqueezingBudget((sigma_min, 0.7)), 2)
    crb_unc = cramer_rao_bound(fisher_simplified(N, p_c, cov_unc))
    sql_unc = p_sql(np.sqrt(cov_unc[0, 0]), N, du_norm)
    # correlated: 50:50 coupler on asymmetric squeezing
    cov_cor = apply_passive_transform(squeezed_vacuum_state([0.5, 0.8], 2), beamsplitter()).cov
    crb_cor = cramer_rao_bound(fisher_simplified(N, p_c, cov_cor))
    sql_cor = p_sql(np.sqrt(cov_cor[0, 0]), N, du_norm)
    ok = rel(sql_unc, crb_unc) < 1e-12 and sql_cor > crb_cor and detection_cross_correlation(cov_cor) > 1e-3
    record(
        "8 p_SQL identity",
        ok,
        f"uncorrelated p_sql={sql_unc!r} crb={crb_unc!r}; correlated p_sql={sql_cor:.6e} > crb={crb_cor:.6e}",
    )
