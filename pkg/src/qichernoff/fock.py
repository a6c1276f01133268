"""Truncated Fock-basis representation of Gaussian states.

This is the independent oracle for the symplectic engine. A P-representable
state is the mixture ``rho = int P(r) |alpha><alpha| dr`` with ``alpha =
x + i p``; its matrix elements are

    <m|rho|m'> = int P(r) exp(-|alpha|^2) alpha^m conj(alpha)^m' / sqrt(m! m'!) dr.

The factor ``exp(-|alpha|^2)`` is folded into the Gaussian weight, leaving a
polynomial moment of a Gaussian. Small problems use Gauss-Hermite tensor
quadrature, which is exact for these polynomial degrees. Larger ones use the
Gaussian moment (Wick) recursion, which is also exact and costs one pass
over the output tensor.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DimensionMismatch, TruncationDeficit
from .states import p_function_covariance
from . import _precision as prec

DEFICIT_TOL = 1e-3
QUADRATURE_BUDGET = 2_000_000


def default_cutoff(mean_photons):
    """Photon-number cap ``ceil(8 (nbar + 1))`` for one mode."""
    return int(math.ceil(8.0 * (mean_photons + 1.0)))


def mode_occupations(state):
    """Mean photon number of each mode of a Gaussian state."""
    cov = prec.to_float(state.cov)
    mean = prec.to_float(state.mean)
    n = cov.shape[0] // 2
    q, p = np.arange(n), np.arange(n, 2 * n)
    return cov[q, q] + cov[p, p] - 0.5 + mean[q] ** 2 + mean[p] ** 2


def default_cutoffs(state):
    return tuple(default_cutoff(nbar) for nbar in mode_occupations(state))


@dataclass(frozen=True, eq=False)
class FockOperator:
    """Operator on the product Fock space with per-mode photon caps.

    Mode 0 is the most significant index in the flattened basis. ``matrix``
    is a dense array or a scipy sparse matrix.
    """

    cutoffs: tuple
    matrix: object

    def __post_init__(self):
        object.__setattr__(self, "cutoffs", tuple(int(c) for c in self.cutoffs))
        if self.matrix.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"matrix shape {self.matrix.shape} does not match dimension {self.dim}")

    @property
    def dims(self):
        return tuple(c + 1 for c in self.cutoffs)

    @property
    def dim(self):
        return int(np.prod(self.dims))

    def index(self, occupations):
        return int(np.ravel_multi_index(tuple(occupations), self.dims))

    def occupations(self, index):
        return tuple(int(k) for k in np.unravel_index(index, self.dims))

    def dense(self):
        m = self.matrix
        return m.toarray() if hasattr(m, "toarray") else np.asarray(m)

    def trace(self):
        return complex(self.matrix.diagonal().sum())


# --- Gaussian weight with the coherent-state factor absorbed -------------------


def absorbed_weight(mean, sigma_p):
    """Fold ``exp(-r.r)`` into a Gaussian ``N(mean, sigma_p)``.

    Returns ``(mu_w, sigma_w, z)`` with ``N(r; mean, sigma_p) exp(-r.r) =
    z N(r; mu_w, sigma_w)``.
    """
    prec_p = np.linalg.inv(sigma_p)
    prec_w = prec_p + 2.0 * np.eye(sigma_p.shape[0])
    sigma_w = np.linalg.inv(prec_w)
    sigma_w = 0.5 * (sigma_w + sigma_w.T)
    mu_w = sigma_w @ prec_p @ mean
    _, logdet_w = np.linalg.slogdet(sigma_w)
    _, logdet_p = np.linalg.slogdet(sigma_p)
    log_z = 0.5 * (logdet_w - logdet_p) - 0.5 * mean @ prec_p @ mean + 0.5 * mu_w @ prec_w @ mu_w
    return mu_w, sigma_w, math.exp(log_z)


def _complex_moments(mu_w, sigma_w):
    """Mean and pairing matrix of ``z = (alpha_1..alpha_N, conj(alpha)_1..N)``."""
    n = mu_w.size // 2
    sxx = sigma_w[:n, :n]
    spp = sigma_w[n:, n:]
    sxp = sigma_w[:n, n:]
    a = mu_w[:n] + 1j * mu_w[n:]
    c = sxx - spp + 1j * (sxp + sxp.T)  # Cov(alpha_k, alpha_j)
    d = sxx + spp + 1j * (sxp.T - sxp)  # Cov(alpha_k, conj(alpha_j))
    mean = np.concatenate([a, a.conj()])
    pair = np.block([[c, d], [d.T, c.conj()]])
    return mean, pair


def _moment_tensor(mu_w, sigma_w, cutoffs):
    """``E[z^n] / sqrt(n!)`` for all multi-indices up to the caps, by recursion.

    ``R[n + e_k] = (A_k R[n] + sum_j P_kj sqrt(n_j) R[n - e_j]) / sqrt(n_k + 1)``
    where ``A`` and ``P`` are the mean and pairing matrix of ``z``.
    """
    mean, pair = _complex_moments(mu_w, sigma_w)
    dims = tuple(c + 1 for c in cutoffs) * 2
    nax = len(dims)
    r = np.zeros(dims, dtype=complex)
    r[(0,) * nax] = 1.0
    for k in range(nax):
        tail = (0,) * (nax - k - 1)
        roots = [np.sqrt(np.arange(dims[j])) for j in range(k)]
        for level in range(dims[k] - 1):
            cur = r[tuple([slice(None)] * k) + (level,) + tail]
            new = mean[k] * cur
            for j in range(k):
                if pair[k, j] == 0:
                    continue
                shifted = np.zeros_like(cur)
                src = [slice(None)] * k
                dst = [slice(None)] * k
                src[j] = slice(0, dims[j] - 1)
                dst[j] = slice(1, dims[j])
                shape = [1] * k
                shape[j] = dims[j] - 1
                shifted[tuple(dst)] = cur[tuple(src)] * roots[j][1:].reshape(shape)
                new = new + pair[k, j] * shifted
            if level > 0:
                prev = r[tuple([slice(None)] * k) + (level - 1,) + tail]
                new = new + pair[k, k] * math.sqrt(level) * prev
            r[tuple([slice(None)] * k) + (level + 1,) + tail] = new / math.sqrt(level + 1)
    return r


def _quadrature_matrix(mu_w, sigma_w, cutoffs, linear=None):
    """``E_w[f(r) v(r) v(r)^dagger]`` with ``v_m = alpha^m / sqrt(m!)`` by Gauss-Hermite.

    ``linear`` is an optional coefficient vector ``c`` making ``f(r) = c.r``.
    """
    dim = mu_w.size
    n = dim // 2
    degree = 2 * sum(cutoffs) + (1 if linear is not None else 0)
    k = degree // 2 + 1
    t, w = np.polynomial.hermite.hermgauss(k)
    grids = np.meshgrid(*([t] * dim), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids])  # (dim, k^dim)
    weights = np.prod(np.meshgrid(*([w] * dim), indexing="ij"), axis=0).ravel() / np.pi ** (dim / 2)
    chol = np.linalg.cholesky(sigma_w)
    r = mu_w[:, None] + math.sqrt(2.0) * chol @ nodes
    alpha = r[:n] + 1j * r[n:]

    vec = np.ones((1, weights.size), dtype=complex)
    for mode in range(n):
        c = cutoffs[mode]
        powers = np.empty((c + 1, weights.size), dtype=complex)
        powers[0] = 1.0
        for m in range(c):
            powers[m + 1] = powers[m] * alpha[mode] / math.sqrt(m + 1)
        vec = (vec[:, None, :] * powers[None, :, :]).reshape(-1, weights.size)
    f = weights if linear is None else weights * (np.asarray(linear) @ r)
    return (vec * f) @ vec.conj().T


def _maybe_real(m, tol=1e-15):
    scale = max(np.max(np.abs(m)), np.finfo(float).tiny)
    if np.max(np.abs(m.imag)) <= tol * scale:
        return np.ascontiguousarray(m.real)
    return m


def fock_density(state, cutoffs=None, method="auto", deficit_tol=DEFICIT_TOL):
    """Truncated density matrix of a P-representable Gaussian state.

    Parameters
    ----------
    state : GaussianState
    cutoffs : sequence of int, optional
        Photon-number cap per mode; defaults to :func:`default_cutoffs`.
    method : {"auto", "quadrature", "moments"}
        ``auto`` uses quadrature when the node count is small.
    deficit_tol : float
        Largest allowed ``1 - Tr(rho)`` before :class:`TruncationDeficit`.
    """
    sigma_p = p_function_covariance(state)
    mean = prec.to_float(state.mean)
    n = sigma_p.shape[0] // 2
    cutoffs = tuple(cutoffs) if cutoffs is not None else default_cutoffs(state)
    if len(cutoffs) != n:
        raise DimensionMismatch(f"{len(cutoffs)} cutoffs for a {n}-mode state")
    mu_w, sigma_w, z = absorbed_weight(mean, sigma_p)

    if method == "auto":
        k = sum(cutoffs) + 1
        method = "quadrature" if k ** (2 * n) * np.prod([c + 1 for c in cutoffs]) <= QUADRATURE_BUDGET else "moments"
    if method == "quadrature":
        rho = _quadrature_matrix(mu_w, sigma_w, cutoffs)
    elif method == "moments":
        dim = int(np.prod([c + 1 for c in cutoffs]))
        rho = _moment_tensor(mu_w, sigma_w, cutoffs).reshape(dim, dim)
    else:
        raise ValueError(f"unknown method {method!r}")
    rho = z * rho
    rho = _maybe_real(0.5 * (rho + rho.conj().T))

    deficit = 1.0 - float(np.trace(rho).real)
    if deficit > deficit_tol:
        suggested = tuple(max(default_cutoff(nb), 2 * c) for nb, c in zip(mode_occupations(state), cutoffs))
        raise TruncationDeficit(
            f"truncation discards {deficit:.3e} of the trace (tolerance {deficit_tol:g}); try cutoffs {suggested}",
            deficit,
            suggested,
        )
    return FockOperator(cutoffs, rho)


def _psd_eig(matrix, floor=1e-14):
    w, v = np.linalg.eigh(matrix)
    w = np.where(w < floor, 0.0, w)
    return w, v


def fock_s_overlap(r1, r2, s):
    """``Tr(rho1^s rho2^(1-s))`` from eigendecompositions of both operators.

    Eigenvalues below 1e-14 are set to zero before taking powers.
    """
    return float(fock_s_overlaps(r1, r2, [s])[0])


def fock_s_overlaps(r1, r2, s_values):
    """Vectorised :func:`fock_s_overlap`; both operators are diagonalised once."""
    if r1.cutoffs != r2.cutoffs:
        raise DimensionMismatch(f"cutoffs differ: {r1.cutoffs} vs {r2.cutoffs}")
    s_values = np.atleast_1d(np.asarray(s_values, dtype=float))
    if np.any((s_values < 0) | (s_values > 1)):
        raise ValueError("s must lie in [0, 1]")
    w1, v1 = _psd_eig(r1.dense())
    w2, v2 = _psd_eig(r2.dense())
    overlap = np.abs(v1.conj().T @ v2) ** 2
    out = []
    for s in s_values:
        p1 = _power(w1, s)
        p2 = _power(w2, 1.0 - s)
        out.append(p1 @ overlap @ p2)
    return np.array(out)


def _power(w, p):
    # 0^0 is taken as 1 only on the support, so Q_0 = Tr(P_1 rho2)
    if p == 0:
        return (w > 0).astype(float)
    return np.where(w > 0, w, 0.0) ** p


# --- single-mode thermal building blocks -----------------------------------------


def thermal_diagonal(nbar, cutoff):
    """``nbar^m / (nbar + 1)^(m + 1)`` for ``m = 0..cutoff``."""
    m = np.arange(cutoff + 1)
    if nbar == 0:
        return (m == 0).astype(float)
    return np.exp(m * math.log(nbar / (nbar + 1.0)) - math.log1p(nbar))


def thermal_quadrature_ops(nbar, cutoff):
    """``int P_th(r) x |alpha><alpha|`` and the ``p`` analogue by quadrature.

    Returns ``(X, P)`` as dense ``(cutoff+1)^2`` arrays for a thermal state of
    mean occupation ``nbar > 0``.
    """
    sigma_p = 0.5 * nbar * np.eye(2)
    mu_w, sigma_w, z = absorbed_weight(np.zeros(2), sigma_p)
    x = z * _quadrature_matrix(mu_w, sigma_w, (cutoff,), linear=np.array([1.0, 0.0]))
    p = z * _quadrature_matrix(mu_w, sigma_w, (cutoff,), linear=np.array([0.0, 1.0]))
    return x, p


def thermal_ladder_ops(nbar, cutoff):
    """Closed forms ``X = (a rho + rho a^dagger)/2`` and ``P = (a rho - rho a^dagger)/(2i)``."""
    lam = thermal_diagonal(nbar, cutoff)
    a = np.diag(np.sqrt(np.arange(1, cutoff + 1)), 1)
    rho = np.diag(lam)
    ar = a @ rho
    ra = rho @ a.T
    return 0.5 * (ar + ra), (ar - ra) / 2j
