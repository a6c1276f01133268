"""Exact Gaussian s-overlaps, Chernoff exponents, and the library rule.

The overlap ``Q_s = Tr(rho1^s rho2^(1-s))`` of two Gaussian states is
evaluated with the symplectic formula of Pirandola and Lloyd (2008). That
formula is written for vacuum variance 1, so the package covariances are
converted once by :func:`to_unit_vacuum`.

Everything is done in log space. For each state the symplectic spectrum and
the matrix ``W = V^{1/2} U`` (``U`` diagonalising ``V^{1/2} Omega^T V Omega
V^{1/2}``) are computed once; the "power" covariance then follows as
``V(p) = W diag(Lambda_p(nu) / nu) W^T`` for any ``p`` without a Williamson
decomposition.

Two backends share the formulas: float64 numpy and mpmath. The mpmath path
is selected when a state carries ``dps`` and is needed once exponents drop
below roughly 1e-12.
"""

from dataclasses import dataclass, field
import itertools
import math
import warnings

import mpmath
import numpy as np
from scipy.optimize import minimize_scalar

from . import _precision as prec
from .errors import DimensionMismatch, IllConditioned, IndistinguishablePair, InvalidCovariance, NeedTwoTargets
from .scene import pair_distance
from .symplectic import omega

LN2 = math.log(2.0)


@dataclass(frozen=True)
class ChernoffResult:
    """Outcome of an exponent computation.

    ``curve`` holds ``(s, -ln Q_s)`` pairs when requested.
    """

    s_star: float
    xi: float
    q_at_s_star: float
    method: str
    curve: tuple = ()
    xi_bhattacharyya: float | None = None
    details: dict = field(default_factory=dict)

    def total(self, m_copies):
        """Exponent of the M-copy error probability."""
        return m_copies * self.xi


def to_unit_vacuum(state):
    """Mean and covariance in vacuum-variance-1 units: ``V -> 4V``, ``mu -> 2mu``."""
    return state.mean * 2, state.cov * 4


# --- per-state spectral data -------------------------------------------------


@dataclass(frozen=True)
class _Spectral:
    nu: object  # 2N symplectic eigenvalues (each twice), vacuum 1
    w: object  # V^{1/2} U
    mean: object


def _spectral_f64(state):
    mean, v = to_unit_vacuum(state.as_float())
    v = 0.5 * (v + v.T)
    ev, e = np.linalg.eigh(v)
    if ev[0] <= 0:
        raise InvalidCovariance(f"covariance is not positive definite (min eigenvalue {ev[0]:.3e})")
    half = (e * np.sqrt(ev)) @ e.T
    om = omega(v.shape[0] // 2)
    m = half @ om.T @ v @ om @ half
    nu2, u = np.linalg.eigh(0.5 * (m + m.T))
    nu = np.sqrt(np.clip(nu2, 1.0, None))
    return _Spectral(nu, half @ u, np.asarray(mean, dtype=float))


def _spectral_mp(state, dps):
    mean, v = to_unit_vacuum(state)
    with mpmath.workdps(dps):
        v = prec.to_mp_matrix(v, dps)
        v = (v + v.T) / 2
        ev, e = mpmath.eigsy(v)
        if min(ev) <= 0:
            raise InvalidCovariance("covariance is not positive definite")
        dim = v.rows
        half = e * mpmath.diag([mpmath.sqrt(x) for x in ev]) * e.T
        om = prec.to_mp_matrix(omega(dim // 2), dps)
        m = half * om.T * v * om * half
        m = (m + m.T) / 2
        nu2, u = mpmath.eigsy(m)
        nu = [mpmath.sqrt(max(x, mpmath.mpf(1))) for x in nu2]
        return _Spectral(nu, half * u, prec.to_mp_matrix(mean, dps))


# --- scalar functions of the symplectic eigenvalues --------------------------


def _log_g_f64(p, nu):
    """``ln G_p(nu) = ln[2^p / ((nu+1)^p - (nu-1)^p)]`` without cancellation."""
    r = (nu - 1.0) / (nu + 1.0)
    out = p * LN2 - p * np.log(nu + 1.0)
    pos = r > 0
    out[pos] -= np.log(-np.expm1(p * np.log(r[pos])))
    return out


def _lambda_over_nu_f64(p, nu):
    r = (nu - 1.0) / (nu + 1.0)
    rp = np.zeros_like(r)
    pos = r > 0
    rp[pos] = np.exp(p * np.log(r[pos]))
    denom = np.where(pos, -np.expm1(p * np.log(np.where(pos, r, 1.0))), 1.0)
    return (1.0 + rp) / denom / nu


def _log_g_mp(p, nu):
    r = (nu - 1) / (nu + 1)
    out = p * mpmath.log(2) - p * mpmath.log(nu + 1)
    if r > 0:
        out -= mpmath.log(-mpmath.expm1(p * mpmath.log(r)))
    return out


def _lambda_over_nu_mp(p, nu):
    r = (nu - 1) / (nu + 1)
    if r <= 0:
        return 1 / nu
    rp = mpmath.exp(p * mpmath.log(r))
    return (1 + rp) / (-mpmath.expm1(p * mpmath.log(r))) / nu


# --- log overlap ---------------------------------------------------------------


def _log_q_f64(a, b, s):
    n = a.nu.size // 2
    p1, p2 = s, 1.0 - s
    sigma = (a.w * _lambda_over_nu_f64(p1, a.nu)) @ a.w.T + (b.w * _lambda_over_nu_f64(p2, b.nu)) @ b.w.T
    sigma = 0.5 * (sigma + sigma.T)
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise IllConditioned(
            "overlap covariance sum is not positive definite",
            {"s": s, "min_eig": float(np.linalg.eigvalsh(sigma)[0])},
        ) from exc
    diag = np.diag(chol)
    if diag.min() / diag.max() < 1e-7:
        raise IllConditioned("overlap covariance sum is numerically singular", {"s": s, "cond_sqrt": diag.max() / diag.min()})
    logdet = 2.0 * np.sum(np.log(diag))
    d = a.mean - b.mean
    z = np.linalg.solve(chol, d)
    quad = float(z @ z)
    return (
        n * LN2
        + 0.5 * np.sum(_log_g_f64(p1, a.nu))
        + 0.5 * np.sum(_log_g_f64(p2, b.nu))
        - 0.5 * logdet
        - 0.5 * quad
    )


def _weighted_gram_mp(w, weights):
    scaled = w.copy()
    for j, x in enumerate(weights):
        for i in range(w.rows):
            scaled[i, j] *= x
    return scaled * w.T


def _log_q_mp(a, b, s, dps):
    with mpmath.workdps(dps):
        s = mpmath.mpf(s)
        p1, p2 = s, 1 - s
        n = len(a.nu) // 2
        sigma = _weighted_gram_mp(a.w, [_lambda_over_nu_mp(p1, x) for x in a.nu]) + _weighted_gram_mp(
            b.w, [_lambda_over_nu_mp(p2, x) for x in b.nu]
        )
        sigma = (sigma + sigma.T) / 2
        try:
            chol = mpmath.cholesky(sigma)
        except ValueError as exc:
            raise IllConditioned("overlap covariance sum is not positive definite", {"s": float(s)}) from exc
        logdet = 2 * mpmath.fsum(mpmath.log(chol[i, i]) for i in range(sigma.rows))
        d = a.mean - b.mean
        # z = L^{-1} d so that z.z = d^T sigma^{-1} d
        z = mpmath.lu_solve(chol, d)
        quad = mpmath.fsum(x * x for x in z)
        total = (
            n * mpmath.log(2)
            + mpmath.fsum(_log_g_mp(p1, x) for x in a.nu) / 2
            + mpmath.fsum(_log_g_mp(p2, x) for x in b.nu) / 2
            - logdet / 2
            - quad / 2
        )
        return total


class _Overlap:
    """``ln Q_s`` for a fixed pair of states, with spectral data cached."""

    def __init__(self, s1, s2, dps=None):
        if s1.cov.shape != s2.cov.shape:
            raise DimensionMismatch(f"states have {s1.n_modes} and {s2.n_modes} modes")
        if dps is None:
            dps = max(s1.dps or 0, s2.dps or 0) or None
        self.dps = dps
        if dps is None:
            self.a, self.b = _spectral_f64(s1), _spectral_f64(s2)
        else:
            self.a, self.b = _spectral_mp(s1, dps), _spectral_mp(s2, dps)

    def log_q(self, s):
        """``ln Q_s``; exactly 0 at the endpoints."""
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"s must lie in [0, 1], got {s}")
        if s == 0.0 or s == 1.0:
            return 0.0
        if self.dps is None:
            return float(_log_q_f64(self.a, self.b, s))
        return float(_log_q_mp(self.a, self.b, s, self.dps))


def gaussian_log_s_overlap(s1, s2, s, dps=None):
    """``ln Tr(rho1^s rho2^(1-s))`` for two Gaussian states."""
    return _Overlap(s1, s2, dps).log_q(s)


def gaussian_s_overlap(s1, s2, s, dps=None):
    """``Q_s = Tr(rho1^s rho2^(1-s))`` for two Gaussian states.

    Examples
    --------
    >>> from qichernoff.states import GaussianState
    >>> import numpy as np
    >>> vac = np.eye(2) / 4
    >>> a = GaussianState(np.array([0.0, 0.0]), vac)
    >>> b = GaussianState(np.array([0.5, 0.0]), vac)
    >>> round(gaussian_s_overlap(a, b, 0.3), 12) == round(float(np.exp(-0.25)), 12)
    True
    """
    return math.exp(gaussian_log_s_overlap(s1, s2, s, dps))


def _identical(s1, s2):
    return (
        s1.cov.shape == s2.cov.shape
        and np.array_equal(s1.cov, s2.cov)
        and np.array_equal(s1.mean, s2.mean)
    )


def chernoff_exponent_exact(s1, s2, s_tol=1e-6, dps=None, n_curve=0):
    """Quantum Chernoff exponent ``xi = max_s -ln Q_s`` of two Gaussian states.

    ``ln Q_s`` is convex in ``s``, so a bounded Brent search (golden section
    with parabolic steps) finds the optimum. A 1001-point scan is used if the
    search reports failure.

    Parameters
    ----------
    s1, s2 : GaussianState
    s_tol : float
        Absolute tolerance on ``s_star``.
    dps : int, optional
        Force the mpmath backend at this precision.
    n_curve : int
        Number of evenly spaced ``s`` samples to return in ``curve``.
    """
    if s1.cov.shape != s2.cov.shape:
        raise DimensionMismatch(f"states have {s1.n_modes} and {s2.n_modes} modes")
    if _identical(s1, s2):
        curve = tuple((float(s), 0.0) for s in np.linspace(0, 1, n_curve)) if n_curve else ()
        return ChernoffResult(0.5, 0.0, 1.0, "exact", curve, 0.0)

    ov = _Overlap(s1, s2, dps)
    res = minimize_scalar(ov.log_q, bounds=(0.0, 1.0), method="bounded", options={"xatol": s_tol})
    if res.success:
        s_star, log_q = float(res.x), float(res.fun)
        how = "bounded-brent"
    else:
        grid = np.linspace(0.0, 1.0, 1001)
        vals = np.array([ov.log_q(s) for s in grid])
        k = int(np.argmin(vals))
        s_star, log_q = float(grid[k]), float(vals[k])
        how = "grid-scan"
    half = ov.log_q(0.5)
    # flat curves (pure states, identical spectra) report the midpoint
    if half <= log_q + 8 * np.finfo(float).eps * abs(log_q):
        s_star, log_q = 0.5, half
    xi = max(0.0, -log_q)
    curve = ()
    if n_curve:
        curve = tuple((float(s), -ov.log_q(float(s))) for s in np.linspace(0.0, 1.0, n_curve))
    return ChernoffResult(
        s_star=s_star,
        xi=xi,
        q_at_s_star=math.exp(-xi),
        method="exact",
        curve=curve,
        xi_bhattacharyya=max(0.0, -half),
        details={"optimizer": how, "dps": ov.dps},
    )


def asymptotic_xi(params, t1, t2, flavor):
    """Leading-order exponent in the low-brightness, high-noise, high-loss regime.

    ``CI``: ``N_S / (4 N_B) * d``; ``QI``: ``N_S / N_B * d`` with ``d`` the
    :func:`~qichernoff.scene.pair_distance` of the two targets.
    """
    d = pair_distance(t1, t2)
    flavor = flavor.upper()
    if flavor == "CI":
        return params.n_s / (4.0 * params.n_b) * d
    if flavor == "QI":
        return params.n_s / params.n_b * d
    raise ValueError(f"flavor must be 'CI' or 'QI', got {flavor!r}")


def library_exponent(pairwise):
    """Smallest off-diagonal exponent of a symmetric pairwise matrix.

    Returns ``(xi_min, (i, j))`` with ``i < j``; ties go to the
    lexicographically first pair. Warns with :class:`IndistinguishablePair`
    when the minimum is zero.
    """
    xi = np.asarray(pairwise, dtype=float)
    if xi.ndim != 2 or xi.shape[0] != xi.shape[1]:
        raise ValueError("pairwise exponents must form a square matrix")
    n = xi.shape[0]
    if n < 2:
        raise NeedTwoTargets(f"need at least two targets, got {n}")
    best, pair = math.inf, None
    for i, j in itertools.combinations(range(n), 2):
        if xi[i, j] < best:
            best, pair = float(xi[i, j]), (i, j)
    if best == 0.0:
        warnings.warn(f"targets {pair[0]} and {pair[1]} are indistinguishable", IndistinguishablePair, stacklevel=2)
    return best, pair


def pairwise_matrix(items, exponent, executor=None):
    """Symmetric matrix of ``exponent(items[i], items[j])`` over ``i < j``.

    ``exponent`` returns a float. With an executor the pairs are mapped
    concurrently; results are placed deterministically.
    """
    n = len(items)
    pairs = list(itertools.combinations(range(n), 2))
    mapper = executor.map if executor is not None else map
    values = list(mapper(lambda ij: exponent(items[ij[0]], items[ij[1]]), pairs))
    out = np.zeros((n, n))
    for (i, j), v in zip(pairs, values):
        out[i, j] = out[j, i] = v
    return out
