import math

import numpy as np
import pytest
from scipy import sparse

from qichernoff.chernoff import chernoff_exponent_exact
from qichernoff.errors import FockSpaceTooLarge, InvalidZerothOrder, TruncationDeficit
from qichernoff.fock import FockOperator
from qichernoff.perturbative import (
    PerturbationPair,
    build_perturbation_pair,
    frechet_sqrt,
    perturbative_chernoff,
    perturbative_xi,
    sqrt_divided_difference,
)
from qichernoff.scene import Target
from qichernoff.states import ScenarioParams, build_ci, build_qi

P = ScenarioParams(1e-2, 2.0)
ABSENT, PRESENT = Target(0.0, [1.0]), Target(1e-4, [1.0])


def coupled_shifts(op, rel=1e-12):
    m = op.matrix.tocoo()
    keep = np.abs(m.data) > rel * np.abs(m.data).max()
    return {
        tuple(b - a for a, b in zip(op.occupations(r), op.occupations(c)))
        for r, c in zip(m.row[keep], m.col[keep])
    }


def test_absent_target_has_zero_perturbation():
    pair = build_perturbation_pair(P, (ABSENT, PRESENT), "CI", cutoffs=40)
    assert pair.nu1.matrix.nnz == 0


def test_ci_perturbation_structure():
    pair = build_perturbation_pair(P, (ABSENT, PRESENT), "CI", cutoffs=40)
    assert abs(pair.nu2.trace()) <= 1e-10
    assert coupled_shifts(pair.nu2) == {(1,), (-1,)}


def test_qi_perturbation_couples_photon_pairs():
    # return-idler correlation <a a_I> adds or removes one photon in each arm
    pair = build_perturbation_pair(P, (ABSENT, PRESENT), "QI", cutoffs=40, idler_cutoff=4)
    assert abs(pair.nu2.trace()) <= 1e-10
    assert coupled_shifts(pair.nu2) == {(1, 1), (-1, -1)}


def test_two_mode_ci_couples_one_mode_at_a_time():
    pair = build_perturbation_pair(P, (Target(0.0, [1.0, 0.0]), Target(1e-4, [0.6, 0.8j])), "CI", cutoffs=30)
    assert coupled_shifts(pair.nu2) == {(1, 0), (-1, 0), (0, 1), (0, -1)}


def test_equal_perturbations_give_zero():
    pair = build_perturbation_pair(P, (PRESENT, PRESENT), "QI", cutoffs=30, idler_cutoff=4)
    assert perturbative_chernoff(pair).xi == 0.0


def test_ci_displaced_thermal_closed_form():
    # Bhattacharyya exponent of a displaced thermal state: |d alpha|^2 / (sqrt(N+1) + sqrt(N))^2
    expected = 1e-4 * 1e-2 / (math.sqrt(3.0) + math.sqrt(2.0)) ** 2
    res = perturbative_chernoff(build_perturbation_pair(P, (ABSENT, PRESENT), "CI", cutoffs=120))
    assert res.xi == pytest.approx(expected, rel=1e-9)
    assert res.s_star == 0.5 and res.method == "perturbative"


@pytest.mark.parametrize("flavor", ["CI", "QI"])
def test_agrees_with_exact_engine(flavor):
    build = build_ci if flavor == "CI" else build_qi
    exact = chernoff_exponent_exact(build(P, 0.0, [1.0], 40), build(P, 1e-4, [1.0], 40)).xi
    pert = perturbative_xi(P, ABSENT, PRESENT, flavor, cutoffs=120, idler_cutoff=4)
    assert pert == pytest.approx(exact, rel=0.05)


def test_sqrt_divided_difference():
    a = np.array([4.0, 1.0, 0.0, 0.0])
    b = np.array([1.0, 1.0, 0.0, 9.0])
    np.testing.assert_allclose(sqrt_divided_difference(a, b), [1 / 3, 0.5, 0.0, 1 / 3])


def test_frechet_matches_finite_difference():
    rng = np.random.default_rng(0)
    lam = np.array([0.5, 0.3, 0.2])
    h = rng.normal(size=(3, 3))
    h = h + h.T
    eps = 1e-7

    def sqrtm(m):
        w, v = np.linalg.eigh(m)
        return (v * np.sqrt(w)) @ v.T

    fd = (sqrtm(np.diag(lam) + eps * h) - sqrtm(np.diag(lam) - eps * h)) / (2 * eps)
    rho0 = FockOperator((2,), sparse.diags(lam, format="csr"))
    np.testing.assert_allclose(frechet_sqrt(rho0, h).toarray(), fd, atol=1e-6)


def test_non_diagonal_ground_state():
    rho0 = FockOperator((1,), sparse.csr_matrix(np.array([[0.5, 0.1], [0.1, 0.5]])))
    zero = FockOperator((1,), sparse.csr_matrix((2, 2)))
    with pytest.raises(InvalidZerothOrder):
        perturbative_chernoff(PerturbationPair(rho0, zero, zero, "CI"))


def test_truncation_deficit():
    with pytest.raises(TruncationDeficit) as err:
        build_perturbation_pair(ScenarioParams(1e-2, 20.0), (ABSENT, PRESENT), "CI", cutoffs=100)
    assert err.value.suggested_cutoffs[0] >= 200


def test_space_too_large():
    t1, t2 = Target(0.0, np.ones(6) / math.sqrt(6)), Target(1e-4, np.ones(6) / math.sqrt(6))
    with pytest.raises(FockSpaceTooLarge):
        build_perturbation_pair(P, (t1, t2), "CI")
