import math

import numpy as np
import pytest

from qichernoff.chernoff import (
    asymptotic_xi,
    chernoff_exponent_exact,
    gaussian_log_s_overlap,
    gaussian_s_overlap,
    library_exponent,
    pairwise_matrix,
)
from qichernoff.errors import DimensionMismatch, IndistinguishablePair, NeedTwoTargets
from qichernoff.scene import Target
from qichernoff.states import GaussianState, ScenarioParams, build_ci, build_qi
from qichernoff.symplectic import thermal_covariance

from oracles import thermal_overlap


def thermal(nbar, n=1, mean=None):
    return GaussianState(np.zeros(2 * n) if mean is None else np.asarray(mean, float), thermal_covariance(nbar, n))


def test_identical_states():
    st = build_qi(ScenarioParams(0.1, 1.0), 0.1, [1.0])
    assert gaussian_s_overlap(st, st, 0.3) == pytest.approx(1.0, abs=1e-13)
    res = chernoff_exponent_exact(st, st)
    assert res.xi == 0.0 and res.s_star == 0.5


def test_coherent_states():
    vac = 0.25 * np.eye(2)
    a = GaussianState(np.array([0.1, -0.2]), vac)
    b = GaussianState(np.array([0.4, 0.2]), vac)
    d2 = 0.3**2 + 0.4**2
    for s in (0.1, 0.5, 0.9):
        assert gaussian_log_s_overlap(a, b, s) == pytest.approx(-d2, rel=1e-12)
    res = chernoff_exponent_exact(a, b, n_curve=11)
    assert res.xi == pytest.approx(d2, rel=1e-12)
    assert res.s_star == 0.5
    np.testing.assert_allclose([v for _, v in res.curve[1:-1]], d2, rtol=1e-12)


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_thermal_pair_matches_fock_sum(s):
    assert gaussian_s_overlap(thermal(1.0), thermal(2.0), s) == pytest.approx(thermal_overlap(1.0, 2.0, s), rel=1e-12)


def test_mp_backend_matches_float():
    p = ScenarioParams(0.05, 3.0)
    s1, s2 = build_qi(p, 0.01, [0.6, 0.8]), build_qi(p, 0.02, [0.8, -0.6])
    lf = gaussian_log_s_overlap(s1, s2, 0.4)
    lm = gaussian_log_s_overlap(s1, s2, 0.4, dps=40)
    assert lf == pytest.approx(lm, rel=1e-9)


def test_mp_resolves_tiny_exponent():
    # deep regime: float64 loses relative accuracy, mpmath does not
    p = ScenarioParams(1e-6, 1000.0)
    s1, s2 = build_ci(p, 0.0, [1.0], dps=50), build_ci(p, 1e-9, [1.0], dps=50)
    res = chernoff_exponent_exact(s1, s2)
    asym = asymptotic_xi(p, Target(0.0, [1.0]), Target(1e-9, [1.0]), "CI")
    assert res.xi == pytest.approx(asym, rel=1e-3)


def test_ci_pair_near_asymptote():
    p = ScenarioParams(1e-2, 5.0)
    res = chernoff_exponent_exact(build_ci(p, 0.0, [1.0]), build_ci(p, 1e-4, [1.0]))
    assert res.xi == pytest.approx(5e-8, rel=0.1)
    assert 0 < res.s_star < 1


def test_convex_curve_and_optimum():
    p = ScenarioParams(0.3, 0.5)
    res = chernoff_exponent_exact(build_qi(p, 0.0, [1.0]), build_qi(p, 0.1, [1.0]), n_curve=21)
    vals = np.array([v for _, v in res.curve])
    assert vals[0] == vals[-1] == 0.0
    assert np.all(np.diff(vals, 2) <= 1e-12)
    assert res.xi >= vals.max() - 1e-12
    assert res.xi >= res.xi_bhattacharyya


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        chernoff_exponent_exact(thermal(1.0, 1), thermal(1.0, 2))


def test_asymptotic_closed_forms():
    p = ScenarioParams(1e-2, 20.0)
    a, b = Target(1e-5, [1.0, 0.0]), Target(1e-5, [0.0, 1.0])
    assert asymptotic_xi(p, a, b, "CI") == pytest.approx(1e-5 * 1e-2 / 40, rel=1e-14)
    assert asymptotic_xi(p, a, b, "QI") == pytest.approx(2e-5 * 1e-2 / 20, rel=1e-14)
    assert asymptotic_xi(p, a, a, "QI") == 0.0
    c = Target(3e-5, [0.6, 0.8j])
    assert asymptotic_xi(p, a, c, "QI") / asymptotic_xi(p, a, c, "CI") == 4.0


def test_library_exponent():
    m = np.array([[0, 0.1, 0.2], [0.1, 0, 0.3], [0.2, 0.3, 0]])
    assert library_exponent(m) == (0.1, (0, 1))
    assert library_exponent(m[:2, :2]) == (0.1, (0, 1))
    with pytest.warns(IndistinguishablePair):
        assert library_exponent(np.zeros((3, 3))) == (0.0, (0, 1))
    with pytest.raises(NeedTwoTargets):
        library_exponent(np.zeros((1, 1)))


def test_pairwise_matrix_symmetric():
    m = pairwise_matrix([1.0, 2.0, 4.0], lambda a, b: abs(a - b))
    np.testing.assert_array_equal(m, [[0, 1, 3], [1, 0, 2], [3, 2, 0]])
