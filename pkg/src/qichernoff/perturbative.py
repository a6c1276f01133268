"""Leading-order exponents from a common thermal ground state.

Both hypotheses are written as ``rho = rho0 + nu`` with ``rho0`` a product of
thermal states (return modes at ``N_B``, idler at ``N_S``). To leading order
the exponent is attained at ``s = 1/2`` and equals

    xi = 1/2 Tr[L^2],   L = D sqrt(rho0) [nu1 - nu2],

where the Frechet derivative of the square root acts elementwise in the
eigenbasis of ``rho0`` through the divided difference of ``sqrt``.

The perturbations are the first-order terms of the P-functions around the
thermal ground state:

* CI: ``nu = 2 sqrt(kappa N_S) / N_B * sum_j (Re C_j X_j + Im C_j P_j)``;
* QI: ``nu = 2 sqrt(kappa / N_S) / N_B * sum_j [Re C_j (X_j X_I - P_j P_I)
  + Im C_j (X_j P_I + P_j X_I)]``,

where ``X = int P_th x |alpha><alpha|`` and ``P`` likewise with ``p``, each
computed by Gauss-Hermite quadrature of the thermal P-function.
"""

from dataclasses import dataclass
from functools import reduce
import math

import numpy as np
from scipy import sparse

from .chernoff import ChernoffResult
from .errors import DimensionMismatch, FockSpaceTooLarge, InvalidZerothOrder, TruncationDeficit
from .fock import DEFICIT_TOL, FockOperator, default_cutoff, thermal_diagonal, thermal_quadrature_ops
from .states import coefficient_vector

# largest tensor-product dimension the sparse engine will attempt
MAX_DIM = 4_000_000


@dataclass(frozen=True, eq=False)
class PerturbationPair:
    """Common ground state and the two first-order perturbations."""

    rho0: FockOperator
    nu1: FockOperator
    nu2: FockOperator
    flavor: str


def _sparse(m, rel_tol=1e-14):
    m = np.asarray(m)
    scale = np.max(np.abs(m)) if m.size else 0.0
    m = np.where(np.abs(m) > rel_tol * scale, m, 0.0)
    return sparse.csr_matrix(m)


def _kron_all(factors):
    return reduce(lambda a, b: sparse.kron(a, b, format="csr"), factors)


def perturbation_cutoffs(params, n_modes, flavor, cutoffs=None, idler_cutoff=None):
    """Per-mode caps: ``cutoffs`` for returns (scalar or sequence), idler separate."""
    if cutoffs is None:
        ret = [default_cutoff(params.n_b)] * n_modes
    elif np.ndim(cutoffs) == 0:
        ret = [int(cutoffs)] * n_modes
    else:
        ret = [int(c) for c in cutoffs]
        if len(ret) != n_modes:
            raise DimensionMismatch(f"{len(ret)} cutoffs for {n_modes} return modes")
    if flavor == "QI":
        ret.append(int(idler_cutoff) if idler_cutoff is not None else default_cutoff(params.n_s))
    return tuple(ret)


def _coupling_ops(params, cutoffs, flavor):
    """Thermal diagonals and ``(X, P)`` quadrature operators for every mode."""
    nbars = [params.n_b] * len(cutoffs)
    if flavor == "QI":
        nbars[-1] = params.n_s
    diags, ops = [], []
    for nbar, c in zip(nbars, cutoffs):
        diags.append(thermal_diagonal(nbar, c))
        ops.append(thermal_quadrature_ops(nbar, c))
    return diags, ops


def _nu_operator(params, coeffs, kappa, flavor, diags, ops):
    c = coefficient_vector(coeffs)
    n = c.size
    thermal = [sparse.diags(d, format="csr") for d in diags]
    dim = int(np.prod([d.size for d in diags]))
    total = sparse.csr_matrix((dim, dim), dtype=complex)
    if kappa == 0:
        return total
    if flavor == "CI":
        pref = 2.0 * math.sqrt(kappa * params.n_s) / params.n_b
        for j in range(n):
            x, p = ops[j]
            local = c[j].real * x + c[j].imag * p
            factors = list(thermal)
            factors[j] = _sparse(local)
            total = total + pref * _kron_all(factors)
        return total
    pref = 2.0 * math.sqrt(kappa / params.n_s) / params.n_b
    xi_, pi_ = ops[-1]
    xi_s, pi_s = _sparse(xi_), _sparse(pi_)
    for j in range(n):
        x, p = (_sparse(o) for o in ops[j])
        for ret_op, idl_op, weight in (
            (x, xi_s, c[j].real),
            (p, pi_s, -c[j].real),
            (x, pi_s, c[j].imag),
            (p, xi_s, c[j].imag),
        ):
            if weight == 0:
                continue
            factors = list(thermal)
            factors[j] = ret_op
            factors[-1] = idl_op
            total = total + (pref * weight) * _kron_all(factors)
    return total


def build_perturbation_pair(params, targets, flavor, cutoffs=None, idler_cutoff=None, deficit_tol=DEFICIT_TOL):
    """Ground state and perturbations for two targets.

    Parameters
    ----------
    params : ScenarioParams
    targets : pair of Target
        Objects with ``kappa`` and unit-norm ``values``.
    flavor : {"CI", "QI"}
    cutoffs : int or sequence of int, optional
        Photon caps of the return modes; default ``ceil(8 (N_B + 1))``.
    idler_cutoff : int, optional
        Idler photon cap for QI; default ``ceil(8 (N_S + 1))``.
    """
    flavor = flavor.upper()
    if flavor not in ("CI", "QI"):
        raise ValueError(f"flavor must be 'CI' or 'QI', got {flavor!r}")
    t1, t2 = targets
    n = coefficient_vector(t1.values).size
    if coefficient_vector(t2.values).size != n:
        raise DimensionMismatch("targets have different coefficient lengths")
    caps = perturbation_cutoffs(params, n, flavor, cutoffs, idler_cutoff)
    dim = math.prod(c + 1 for c in caps)
    if dim > MAX_DIM:
        raise FockSpaceTooLarge(f"Fock space of dimension {dim} for cutoffs {caps} exceeds {MAX_DIM}")
    diags, ops = _coupling_ops(params, caps, flavor)

    lam = reduce(np.kron, diags)
    deficit = 1.0 - float(lam.sum())
    if deficit > deficit_tol:
        nbars = [params.n_b] * n + ([params.n_s] if flavor == "QI" else [])
        suggested = tuple(max(default_cutoff(nb), 2 * c) for nb, c in zip(nbars, caps))
        raise TruncationDeficit(
            f"ground state truncation discards {deficit:.3e}; try cutoffs {suggested}", deficit, suggested
        )
    rho0 = FockOperator(caps, sparse.diags(lam, format="csr"))
    nu1 = FockOperator(caps, _nu_operator(params, t1.values, t1.kappa, flavor, diags, ops))
    nu2 = FockOperator(caps, _nu_operator(params, t2.values, t2.kappa, flavor, diags, ops))
    return PerturbationPair(rho0, nu1, nu2, flavor)


def sqrt_divided_difference(a, b):
    """First divided difference of ``sqrt`` at eigenvalue pairs.

    Off the diagonal ``(sqrt(a) - sqrt(b)) / (a - b)``, written as
    ``1 / (sqrt(a) + sqrt(b))`` to avoid cancellation; at ``a == b`` the
    derivative ``1 / (2 sqrt(a))``. Pairs with ``a = b = 0`` give 0.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ra, rb = np.sqrt(a), np.sqrt(b)
    with np.errstate(divide="ignore"):
        out = np.where(a == b, 0.5 / np.where(ra > 0, ra, np.inf), 1.0 / (ra + rb))
    return np.where((a == 0) & (b == 0), 0.0, out)


def _ground_eigenvalues(rho0):
    m = rho0.matrix
    if sparse.issparse(m):
        off = m - sparse.diags(m.diagonal())
        off_max = abs(off).max() if off.nnz else 0.0
    else:
        off_max = np.max(np.abs(m - np.diag(np.diag(m))))
    if off_max > 1e-14:
        raise InvalidZerothOrder(f"ground state is not diagonal in the Fock basis (|off-diagonal| = {off_max:.3e})")
    return np.real(m.diagonal())


def frechet_sqrt(rho0, delta):
    """``L_{m m'} = [sqrt; lambda_m, lambda_m'] delta_{m m'}`` as a sparse matrix."""
    lam = _ground_eigenvalues(rho0)
    d = sparse.coo_matrix(delta.matrix if isinstance(delta, FockOperator) else delta)
    k = sqrt_divided_difference(lam[d.row], lam[d.col])
    return sparse.csr_matrix((d.data * k, (d.row, d.col)), shape=d.shape)


def perturbative_chernoff(pair):
    """Leading-order exponent ``1/2 Tr(L^2)`` at ``s = 1/2``."""
    lam = _ground_eigenvalues(pair.rho0)
    delta = sparse.coo_matrix(pair.nu1.matrix - pair.nu2.matrix)
    delta.sum_duplicates()
    k = sqrt_divided_difference(lam[delta.row], lam[delta.col])
    # L is Hermitian, so Tr(L^2) is the squared Frobenius norm
    xi = 0.5 * float(np.sum(np.abs(delta.data * k) ** 2))
    return ChernoffResult(
        s_star=0.5,
        xi=xi,
        q_at_s_star=math.exp(-xi),
        method="perturbative",
        xi_bhattacharyya=xi,
        details={"flavor": pair.flavor, "cutoffs": pair.rho0.cutoffs},
    )


def perturbative_xi(params, t1, t2, flavor, cutoffs=None, idler_cutoff=None):
    """Convenience wrapper: build the pair and return the exponent."""
    return perturbative_chernoff(build_perturbation_pair(params, (t1, t2), flavor, cutoffs, idler_cutoff)).xi
