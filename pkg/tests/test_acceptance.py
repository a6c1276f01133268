"""Acceptance harness: one PASS/FAIL line per criterion at the stated tolerances.

Criteria that the physics does not support are computed faithfully and left
failing; see the decisions ledger for the analysis.
"""

import math
import time

import numpy as np
import pytest

from qichernoff.asymptotics import default_regime_path, sweep_ratio, validation_suite
from qichernoff.chernoff import chernoff_exponent_exact, gaussian_s_overlap
from qichernoff.fock import fock_density, fock_s_overlaps
from qichernoff.perturbative import perturbative_xi
from qichernoff.scene import SpatialGrid, Target, decompose, hermite_gauss_basis
from qichernoff.states import GaussianState, ScenarioParams, build_ci, build_qi

import oracles
import test_properties as props


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {number}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        assert ok, detail

    return emit


def test_criterion_1_factor_four_limit(report):
    start = time.perf_counter()
    rows = sweep_ratio(default_regime_path(5), ([1.0, 0.0], [0.0, 1.0]))
    elapsed = time.perf_counter() - start
    ratios = [r.ratio_exact for r in rows]
    dist = [abs(x - 4) for x in ratios]
    monotone = all(a > b for a, b in zip(dist, dist[1:]))
    deepest = dist[-1] / 4
    ok = deepest <= 0.1 and monotone and elapsed <= 60
    detail = f"ratios {', '.join(f'{x:.4f}' for x in ratios)}; deepest rel. gap {deepest:.2e}; {elapsed:.1f} s"
    report(1, "exact xi_Q/xi_C -> 4 on the K=5 path", ok, detail)


def _closed_form_gaps(kappa):
    p = ScenarioParams(1e-2, 20.0)
    c1, c2 = [1.0, 0.0], [0.0, 1.0]
    xc = chernoff_exponent_exact(build_ci(p, kappa, c1, 60), build_ci(p, kappa, c2, 60)).xi
    xq = chernoff_exponent_exact(build_qi(p, kappa, c1, 60), build_qi(p, kappa, c2, 60)).xi
    ac, aq = kappa * p.n_s / (2 * p.n_b), 2 * kappa * p.n_s / p.n_b
    return abs(xc - ac) / ac, abs(xq - aq) / aq


def test_criterion_2_closed_forms(report):
    gc, gq = _closed_form_gaps(1e-5)
    gc10, gq10 = _closed_form_gaps(1e-6)
    within = gc <= 0.1 and gq <= 0.1
    shrinks = gc10 < gc and gq10 < gq
    detail = (
        f"gap CI {gc:.2%}, QI {gq:.2%} (tol 10%); at kappa/10: CI {gc10:.2%}, QI {gq10:.2%} "
        f"({'shrinks' if shrinks else 'does not shrink'})"
    )
    report(2, "exact vs closed-form exponents", within and shrinks, detail)


FOCK_FIXTURES = [
    ("CI n=1", build_ci, ScenarioParams(0.5, 0.5), (0.0, [1.0]), (0.3, [1.0]), (60,)),
    ("CI n=1 phase", build_ci, ScenarioParams(0.5, 1.0), (0.2, [1.0]), (0.2, [1j]), (60,)),
    ("CI n=2", build_ci, ScenarioParams(0.3, 0.2), (0.1, [1.0, 0.0]), (0.1, [0.0, 1.0]), (60, 60)),
    ("QI n=1", build_qi, ScenarioParams(0.2, 1.0), (0.1, [1.0]), (0.15, [1.0]), (60, 60)),
]


def test_criterion_3_engine_cross_validation(report):
    s_values = (0.25, 0.5, 0.75)
    worst, parts = 0.0, []
    for name, build, params, t1, t2, caps in FOCK_FIXTURES:
        a, b = build(params, *t1), build(params, *t2)
        fock = fock_s_overlaps(fock_density(a, caps), fock_density(b, caps), s_values)
        err = max(abs(gaussian_s_overlap(a, b, s) - f) / f for s, f in zip(s_values, fock))
        worst = max(worst, err)
        parts.append(f"{name} {err:.1e}")
    report(3, "Gaussian vs Fock Q_s", worst <= 1e-6, "; ".join(parts) + " (tol 1e-6)")


def test_criterion_4_analytic_anchors(report):
    vac = 0.25 * np.eye(2)
    a1, a2 = 0.2 + 0.1j, -0.15 + 0.35j
    st1 = GaussianState(np.array([a1.real, a1.imag]), vac)
    st2 = GaussianState(np.array([a2.real, a2.imag]), vac)
    xi = chernoff_exponent_exact(st1, st2).xi
    coh = abs(xi - abs(a1 - a2) ** 2)
    th = [GaussianState(np.zeros(2), (n / 2 + 0.25) * np.eye(2)) for n in (1.0, 2.0)]
    thermal = abs(gaussian_s_overlap(th[0], th[1], 0.5) - oracles.thermal_overlap(1.0, 2.0, 0.5))
    ok = coh <= 1e-10 and thermal <= 1e-10
    report(4, "coherent and thermal anchors", ok, f"coherent |dxi| {coh:.1e}; thermal |dQ| {thermal:.1e} (tol 1e-10)")


def test_criterion_5_perturbative_formula(report):
    p = ScenarioParams(1e-2, 2.0)
    t0, t1 = Target(0.0, [1.0]), Target(1e-4, [1.0])
    rel, pert = {}, {}
    for flavor, build in (("CI", build_ci), ("QI", build_qi)):
        exact = chernoff_exponent_exact(build(p, 0.0, [1.0], 40), build(p, 1e-4, [1.0], 40)).xi
        pert[flavor] = perturbative_xi(p, t0, t1, flavor, cutoffs=120, idler_cutoff=4)
        rel[flavor] = abs(pert[flavor] - exact) / exact
    ratio = pert["QI"] / pert["CI"]
    ok = rel["CI"] <= 0.05 and rel["QI"] <= 0.05 and 3.5 <= ratio <= 4.5
    detail = f"vs exact: CI {rel['CI']:.2%}, QI {rel['QI']:.2%} (tol 5%); ratio {ratio:.3f} (need [3.5, 4.5])"
    report(5, "perturbative exponents", ok, detail)


def test_criterion_6_expansion_validators(report):
    start = time.perf_counter()
    reps = validation_suite()
    elapsed = time.perf_counter() - start
    parts = []
    for r in reps:
        worst = max(pt.residual / pt.bound for pt in r.points)
        parts.append(f"{r.name} {'ok' if r.passed else 'FAIL'} (residual/bound {worst:.4g})")
    ok = all(r.passed for r in reps) and elapsed <= 30
    report(6, "expansion validators", ok, "; ".join(parts) + f"; {elapsed:.1f} s")


PROPERTY_CHECKS = [
    "test_overlap_symmetry",
    "test_log_overlap_convex",
    "test_gaussian_unitary_invariance",
    "test_mode_basis_rotation_invariance",
    "test_idler_sign_invariance",
    "test_identical_targets_have_zero_exponent",
    "test_library_minimum_is_pairwise_min",
]


@pytest.mark.filterwarnings("ignore::qichernoff.errors.IndistinguishablePair")
def test_criterion_7_structural_invariants(report):
    failed = []
    for name in PROPERTY_CHECKS:
        try:
            getattr(props, name)()
        except Exception as exc:  # report every property, not just the first failure
            failed.append(f"{name}: {type(exc).__name__}")
    detail = f"{len(PROPERTY_CHECKS) - len(failed)}/{len(PROPERTY_CHECKS)} properties hold"
    if failed:
        detail += " (" + "; ".join(failed) + ")"
    report(7, "structural invariants", not failed, detail)


def test_criterion_8_mode_decomposition(report):
    grid = SpatialGrid.uniform(6.0, 129)
    fld = oracles.spot(grid)
    c10 = decompose(Target(0.1, field=fld), hermite_gauss_basis(grid, 3), span_tol=1.0).values
    coef_err = float(np.max(np.abs(c10 - oracles.brute_force_hg(3))))
    c_full = decompose(Target(0.1, field=fld), hermite_gauss_basis(grid, 10)).values
    parseval = abs(float(np.sum(np.abs(c_full) ** 2)) - 1.0)
    ok = coef_err <= 1e-5 and parseval <= 1e-8
    detail = f"max |C - C_refined| {coef_err:.1e} (tol 1e-5); Parseval defect {parseval:.1e} (tol 1e-8)"
    report(8, "HG decomposition", ok, detail)
