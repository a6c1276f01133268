import csv
import io
import math

import numpy as np
import pytest

from qichernoff.asymptotics import (
    SWEEP_COLUMNS,
    default_regime_path,
    format_number,
    sweep_csv,
    sweep_ratio,
    validate_det_expansion,
    validate_exponent_expansion,
    validate_p_expansion,
    validation_suite,
    zeroth_order_samples,
)
from qichernoff.states import ScenarioParams

P = ScenarioParams(1e-2, 10.0)
ORTHO = ([1.0, 0.0], [0.0, 1.0])


@pytest.fixture(scope="module")
def rows():
    return sweep_ratio(default_regime_path(5), ORTHO)


def test_path_first_point():
    path = default_regime_path(3, c_s=0.1, c_kappa=1.0)
    k1, k2, ns, nb = path.point(0.25)
    assert nb == 4.0
    assert ns == pytest.approx(6.25e-3)
    assert k1 == k2 == pytest.approx(3.90625e-4)
    assert k1 * nb / ns == pytest.approx(0.25)


def test_path_diagnostics_shrink():
    path = default_regime_path(5)
    for t in path.ts:
        k, _, ns, nb = path.point(t)
        assert k * nb / ns == pytest.approx(t)
    first, last = path.point(path.ts[0]), path.point(path.ts[-1])
    assert last[0] * last[3] / last[2] < first[0] * first[3] / first[2]
    assert 1 / last[3] < 1 / first[3]
    assert last[2] < first[2]


def test_path_needs_two_points():
    with pytest.raises(ValueError):
        default_regime_path(1)


def test_identical_targets_flagged():
    out = sweep_ratio(default_regime_path(2), ([1.0], [1.0]))
    for r in out:
        assert r.status == "identical"
        assert r.xi_c_exact == r.xi_q_exact == 0.0
        assert math.isnan(r.ratio_exact)


def test_ratio_approaches_four(rows):
    dist = [abs(r.ratio_exact - 4) for r in rows]
    assert all(a > b for a, b in zip(dist, dist[1:]))
    assert dist[-1] / 4 <= 0.1


def test_quantum_advantage_at_every_point(rows):
    assert all(r.xi_q_exact > r.xi_c_exact for r in rows)


def test_gaps_shrink_along_path(rows):
    for key in ("gap_c", "gap_q"):
        gaps = [getattr(r, key) for r in rows]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))


def test_asymptotic_ratio_is_four(rows):
    assert all(r.ratio_asym == 4.0 for r in rows)


def test_sweep_csv_round_trips(rows):
    text = sweep_csv(rows)
    reader = csv.reader(io.StringIO(text))
    assert next(reader) == list(SWEEP_COLUMNS)
    first = next(reader)
    assert float(first[5]) == rows[0].xi_c_exact
    assert float(first[9]) == rows[0].ratio_exact


def test_format_number():
    assert format_number(0.1) == "0.10000000000000001"
    assert float(format_number(math.pi)) == math.pi


def test_samples_are_reproducible():
    a = zeroth_order_samples(P, 1, "QI", 50, seed=4)
    b = zeroth_order_samples(P, 1, "QI", 50, seed=4)
    np.testing.assert_array_equal(a, b)
    assert a.shape == (50, 4)


def test_zero_kappa_residuals_vanish():
    assert validate_det_expansion(P, [1.0], [0.0]).points[0].residual <= 1e-12
    for flavor in ("CI", "QI"):
        assert validate_exponent_expansion(P, [1.0], flavor, 0.0).points[0].residual <= 1e-10
        assert validate_p_expansion(P, [1.0], flavor, 0.0).points[0].residual <= 1e-10


def test_quadratic_and_p_checks_pass():
    for rep in validation_suite(P)[1:]:
        assert rep.passed, rep.to_dict()
        assert all(4 / 3 <= r <= 3 for r in rep.halving_ratios)


def test_determinant_residual_is_first_order():
    rep = validate_det_expansion(P, [1.0])
    assert rep.slope == pytest.approx(1.0, abs=0.05)


def test_corrupted_correlation_is_detected():
    reps = {r.name: r for r in validation_suite(P, cq_scale=1.5)}
    assert not reps["quadratic form (QI)"].passed
    assert not reps["P-function (QI)"].passed
    assert reps["quadratic form (CI)"].passed
