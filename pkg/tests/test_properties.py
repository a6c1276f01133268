"""Structural invariants of the exact exponent, checked on random scenarios."""

import itertools

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from qichernoff.asymptotics import default_regime_path
from qichernoff.chernoff import chernoff_exponent_exact, gaussian_log_s_overlap, library_exponent
from qichernoff.states import GaussianState, ScenarioParams, build_ci, build_qi
from qichernoff.symplectic import is_p_representable, random_symplectic

SETTINGS = settings(max_examples=25, deadline=None)

params_st = st.builds(
    ScenarioParams,
    n_s=st.floats(0.01, 1.0),
    n_b=st.floats(0.05, 5.0),
)
kappa_st = st.floats(0.0, 0.6)
flavor_st = st.sampled_from(["CI", "QI"])


@st.composite
def unit_vectors(draw, n=None):
    n = n or draw(st.integers(1, 3))
    parts = draw(st.lists(st.floats(-1, 1), min_size=2 * n, max_size=2 * n))
    c = np.array(parts[:n]) + 1j * np.array(parts[n:])
    norm = np.linalg.norm(c)
    if norm < 1e-3:
        c = np.zeros(n, complex)
        c[0] = 1.0
        return c
    return c / norm


def build(flavor, params, kappa, c, **kw):
    return (build_ci if flavor == "CI" else build_qi)(params, kappa, c, **kw)


@st.composite
def state_pair(draw):
    params = draw(params_st)
    flavor = draw(flavor_st)
    c1 = draw(unit_vectors())
    c2 = draw(unit_vectors(c1.size))
    return flavor, params, draw(kappa_st), c1, draw(kappa_st), c2


def transform(state, s):
    return GaussianState(s @ state.mean, s @ state.cov @ s.T, state.has_idler)


@SETTINGS
@given(state_pair(), st.floats(0.05, 0.95))
def test_overlap_symmetry(pair, s):
    flavor, p, k1, c1, k2, c2 = pair
    a, b = build(flavor, p, k1, c1), build(flavor, p, k2, c2)
    assert gaussian_log_s_overlap(a, b, s) == pytest.approx(gaussian_log_s_overlap(b, a, 1 - s), rel=1e-8, abs=1e-13)


@SETTINGS
@given(state_pair())
def test_log_overlap_convex(pair):
    flavor, p, k1, c1, k2, c2 = pair
    a, b = build(flavor, p, k1, c1), build(flavor, p, k2, c2)
    s = np.linspace(0.05, 0.95, 19)
    vals = np.array([gaussian_log_s_overlap(a, b, x) for x in s])
    scale = max(1e-300, np.max(np.abs(vals)))
    assert np.all(np.diff(vals, 2) >= -1e-7 * scale - 1e-13)
    assert np.all(vals <= 1e-12)


@SETTINGS
@given(state_pair(), st.integers(0, 2**31))
def test_gaussian_unitary_invariance(pair, seed):
    flavor, p, k1, c1, k2, c2 = pair
    a, b = build(flavor, p, k1, c1), build(flavor, p, k2, c2)
    s = random_symplectic(a.n_modes, np.random.default_rng(seed), scale=0.3)
    x0 = chernoff_exponent_exact(a, b).xi
    x1 = chernoff_exponent_exact(transform(a, s), transform(b, s)).xi
    assert x1 == pytest.approx(x0, rel=1e-6, abs=1e-12)


@SETTINGS
@given(state_pair(), st.integers(0, 2**31))
def test_mode_basis_rotation_invariance(pair, seed):
    flavor, p, k1, c1, k2, c2 = pair
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(c1.size, c1.size)) + 1j * rng.normal(size=(c1.size, c1.size)))
    x0 = chernoff_exponent_exact(build(flavor, p, k1, c1), build(flavor, p, k2, c2)).xi
    x1 = chernoff_exponent_exact(build(flavor, p, k1, q @ c1), build(flavor, p, k2, q @ c2)).xi
    assert x1 == pytest.approx(x0, rel=1e-6, abs=1e-12)


@SETTINGS
@given(state_pair())
def test_idler_sign_invariance(pair):
    _, p, k1, c1, k2, c2 = pair
    x0 = chernoff_exponent_exact(build_qi(p, k1, c1), build_qi(p, k2, c2)).xi
    x1 = chernoff_exponent_exact(build_qi(p, k1, c1, cq_scale=-1.0), build_qi(p, k2, c2, cq_scale=-1.0)).xi
    assert x1 == pytest.approx(x0, rel=1e-9, abs=1e-14)


@SETTINGS
@given(params_st, flavor_st, kappa_st, unit_vectors())
def test_identical_targets_have_zero_exponent(p, flavor, kappa, c):
    assert chernoff_exponent_exact(build(flavor, p, kappa, c), build(flavor, p, kappa, c.copy())).xi == 0.0


@pytest.mark.filterwarnings("ignore::qichernoff.errors.IndistinguishablePair")
@SETTINGS
@given(params_st, flavor_st, st.lists(kappa_st, min_size=3, max_size=3), st.integers(0, 2**31))
def test_library_minimum_is_pairwise_min(p, flavor, kappas, seed):
    rng = np.random.default_rng(seed)
    targets = []
    for k in kappas:
        c = rng.normal(size=2) + 1j * rng.normal(size=2)
        targets.append((k, c / np.linalg.norm(c)))
    xi = np.zeros((3, 3))
    for i, j in itertools.combinations(range(3), 2):
        xi[i, j] = xi[j, i] = chernoff_exponent_exact(build(flavor, p, *targets[i]), build(flavor, p, *targets[j])).xi
    value, (i, j) = library_exponent(xi)
    assert value == min(xi[0, 1], xi[0, 2], xi[1, 2]) == xi[i, j]
    two, _ = library_exponent(xi[:2, :2])
    assert value <= two


def test_sweep_states_are_p_representable():
    path = default_regime_path(5)
    for t in path.ts:
        k1, _, ns, nb = path.point(t)
        p = ScenarioParams(ns, nb)
        assert is_p_representable(build_qi(p, k1, [1.0, 0.0]).cov)
        assert is_p_representable(build_ci(p, k1, [1.0, 0.0]).cov)
