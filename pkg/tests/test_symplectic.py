import numpy as np
import pytest

from qichernoff.errors import DegenerateSpectrum, InvalidCovariance
from qichernoff.states import ScenarioParams, build_qi
from qichernoff.symplectic import (
    is_p_representable,
    is_symplectic,
    omega,
    random_symplectic,
    symplectic_spectrum,
    thermal_covariance,
    williamson,
)


def test_vacuum_spectrum():
    np.testing.assert_allclose(symplectic_spectrum(0.25 * np.eye(4)), [0.25, 0.25], atol=1e-15)


def test_thermal_spectrum():
    np.testing.assert_allclose(symplectic_spectrum(thermal_covariance(2.0)), [1.25], rtol=1e-14)


def test_recovers_constructed_spectrum():
    rng = np.random.default_rng(3)
    d = np.array([0.3, 0.7, 2.1])
    s = random_symplectic(3, rng)
    v = s @ np.diag(np.concatenate([d, d])) @ s.T
    np.testing.assert_allclose(np.sort(symplectic_spectrum(v)), d, rtol=1e-9)


def test_williamson_round_trip():
    rng = np.random.default_rng(7)
    d = np.array([0.26, 0.9])
    s0 = random_symplectic(2, rng)
    v = s0 @ np.diag(np.concatenate([d, d])) @ s0.T
    s, nu = williamson(v)
    assert is_symplectic(s)
    recon = s @ np.diag(np.concatenate([nu, nu])) @ s.T
    assert np.max(np.abs(recon - v)) <= 1e-9 * np.max(np.abs(v))


def test_williamson_thermal_is_identity():
    with pytest.warns(DegenerateSpectrum):
        s, nu = williamson(thermal_covariance(1.5, 2))
    np.testing.assert_allclose(np.abs(s), np.eye(4), atol=1e-12)
    np.testing.assert_allclose(nu, [1.0, 1.0])


def test_pure_tmsv_spectrum():
    # lossless, noiseless return: the state is a pure two-mode squeezed vacuum
    st = build_qi(ScenarioParams(0.7, 0.0), 1.0, [1.0])
    np.testing.assert_allclose(symplectic_spectrum(st.cov), [0.25, 0.25], atol=1e-12)


def test_spectrum_invariant_under_symplectic_conjugation():
    rng = np.random.default_rng(11)
    st = build_qi(ScenarioParams(0.1, 2.0), 0.2, [0.6, 0.8j])
    s = random_symplectic(3, rng)
    a = np.sort(symplectic_spectrum(st.cov))
    b = np.sort(symplectic_spectrum(s @ st.cov @ s.T))
    np.testing.assert_allclose(a, b, rtol=1e-9)


def test_p_representable():
    assert not is_p_representable(0.25 * np.eye(2))
    assert is_p_representable(thermal_covariance(1.0))
    assert is_p_representable(build_qi(ScenarioParams(1e-2, 5.0), 1e-4, [1.0]).cov)


def test_omega_shape():
    om = omega(2)
    np.testing.assert_array_equal(om @ om, -np.eye(4))


@pytest.mark.parametrize(
    "bad",
    [np.array([[1.0, 0.2], [0.0, 1.0]]), -np.eye(2), np.eye(3)],
)
def test_invalid_covariance(bad):
    with pytest.raises(InvalidCovariance):
        symplectic_spectrum(bad)
