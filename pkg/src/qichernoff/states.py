"""Gaussian return states for classical (CI) and quantum (QI) illumination.

All covariances are stored as ``V`` in vacuum-1/4 units. The CI state lives
on the ``n`` sorted return modes; the QI state appends the retained idler as
mode ``n + 1``.

Complex target coefficients enter through the photon-number correlation
matrix ``H_jk = <a_j^dagger a_k>`` and the return-idler correlation
``K_j = <a_j a_I>``, using the real embedding

    V = I/4 + 1/2 [[Re H, Im H], [-Im H, Re H]]      (phase-insensitive part)
    V(q_j, q_I) = -V(p_j, p_I) = Re K_j / 2
    V(q_j, p_I) =  V(p_j, q_I) = Im K_j / 2.

For real coefficients this is exactly the displayed compact form.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import _precision as prec
from .errors import InvalidTransmissivity, NotPRepresentable
from .symplectic import VACUUM_VARIANCE


@dataclass(frozen=True)
class ScenarioParams:
    """Source and background parameters shared by every hypothesis.

    ``n_b = 0`` is accepted so that lossless pure-state limits can be built.
    """

    n_s: float
    n_b: float
    m_copies: int = 1
    n_modes: int | None = None

    def __post_init__(self):
        if not self.n_s > 0:
            raise ValueError(f"n_s must be positive, got {self.n_s}")
        if not self.n_b >= 0:
            raise ValueError(f"n_b must be non-negative, got {self.n_b}")
        if int(self.m_copies) != self.m_copies or self.m_copies < 1:
            raise ValueError(f"m_copies must be a positive integer, got {self.m_copies}")
        if self.n_modes is not None and self.n_modes < 1:
            raise ValueError("n_modes must be positive")


@dataclass(frozen=True)
class GaussianState:
    """Mean vector and covariance in ``(q..., p...)`` ordering.

    ``dps`` is the mpmath working precision when ``mean``/``cov`` hold
    multiprecision entries, ``None`` for float64.
    """

    mean: np.ndarray
    cov: np.ndarray
    has_idler: bool = False
    dps: int | None = None

    @property
    def n_modes(self):
        return self.cov.shape[0] // 2

    def as_float(self):
        if self.dps is None:
            return self
        return GaussianState(prec.to_float(self.mean), prec.to_float(self.cov), self.has_idler, None)


@dataclass(frozen=True)
class CovarianceBlocks:
    """Building blocks with ``2 V_Q = I/2 + D - s A + cq B``."""

    d_diag: np.ndarray
    a_block: np.ndarray
    b_block: np.ndarray
    s_coef: float
    cq_coef: float


def coefficient_vector(coeffs, tol=1e-8):
    """Return coefficients as a complex array, checking unit norm."""
    values = getattr(coeffs, "values", coeffs)
    c = np.atleast_1d(np.asarray(values, dtype=complex))
    if c.ndim != 1:
        raise ValueError("coefficient vector must be one-dimensional")
    norm2 = float(np.sum(np.abs(c) ** 2))
    if abs(norm2 - 1.0) > tol:
        raise ValueError(f"coefficient vector must have unit norm, got sum |C|^2 = {norm2:.12g}")
    return c


def _check_kappa(kappa):
    if not 0.0 <= kappa <= 1.0:
        raise InvalidTransmissivity(f"kappa must lie in [0, 1], got {kappa}")


def _check_modes(params, c):
    if params.n_modes is not None and params.n_modes != c.size:
        raise ValueError(f"scenario has n_modes={params.n_modes} but coefficients have length {c.size}")


def cross_correlation(kappa, n_s, scale=1.0):
    """Return-idler correlation ``sqrt(kappa N_S (N_S + 1))`` of a lossy TMSV."""
    return scale * math.sqrt(kappa * n_s * (n_s + 1.0))


def _projector_parts(c, dps):
    """Real and imaginary parts of ``conj(C) C^T`` in the requested precision."""
    a = np.array([prec.scalar(v, dps) for v in c.real], dtype=object if dps else float)
    b = np.array([prec.scalar(v, dps) for v in c.imag], dtype=object if dps else float)
    return a, b, np.outer(a, a) + np.outer(b, b), np.outer(a, b) - np.outer(b, a)


def _embed(re_h, im_h, dps):
    n = re_h.shape[0]
    half = prec.scalar(0.5, dps)
    v = np.block([[re_h, im_h], [-im_h, re_h]]) * half
    for k in range(2 * n):
        v[k, k] = v[k, k] + prec.scalar(VACUUM_VARIANCE, dps)
    return v


def build_ci(params, kappa, coeffs, dps=None):
    """Coherent-state illumination return state for one target.

    Parameters
    ----------
    params : ScenarioParams
    kappa : float
        Round-trip transmissivity in ``[0, 1]``; 0 is the no-target limit.
    coeffs : array_like or TargetCoefficients
        Unit-norm mode coefficients of the returned field.
    dps : int, optional
        Build in mpmath with this many decimal digits.
    """
    _check_kappa(kappa)
    c = coefficient_vector(coeffs)
    _check_modes(params, c)
    n = c.size
    k = prec.scalar(kappa, dps)
    nb = prec.scalar(params.n_b, dps)
    ns = prec.scalar(params.n_s, dps)
    a, b, re_p, im_p = _projector_parts(c, dps)

    eye = np.eye(n) if dps is None else np.eye(n, dtype=object)
    re_h = eye * nb - re_p * (k * nb)
    im_h = -im_p * (k * nb)
    cov = _embed(re_h, im_h, dps)
    amp = prec.sqrt(k * ns, dps)
    mean = np.concatenate([a, b]) * amp
    return GaussianState(mean=mean, cov=cov, has_idler=False, dps=dps)


def build_qi(params, kappa, coeffs, dps=None, cq_scale=1.0):
    """Entangled (TMSV) illumination return-plus-idler state for one target.

    ``cq_scale`` multiplies the return-idler correlation; it exists only for
    sensitivity checks and must be 1 for physical results.
    """
    _check_kappa(kappa)
    c = coefficient_vector(coeffs)
    _check_modes(params, c)
    n = c.size
    k = prec.scalar(kappa, dps)
    nb = prec.scalar(params.n_b, dps)
    ns = prec.scalar(params.n_s, dps)
    a, b, re_p, im_p = _projector_parts(c, dps)
    if dps is None:
        cq = cross_correlation(kappa, params.n_s, cq_scale)
    else:
        cq = prec.sqrt(k * ns * (ns + 1), dps) * prec.scalar(cq_scale, dps)

    m = n + 1
    re_h = prec.zeros((m, m), dps)
    im_h = prec.zeros((m, m), dps)
    s = k * (nb - ns)
    re_h[:n, :n] = -re_p * s
    im_h[:n, :n] = -im_p * s
    for j in range(n):
        re_h[j, j] = re_h[j, j] + nb
    re_h[n, n] = ns
    cov = _embed(re_h, im_h, dps)

    half = prec.scalar(0.5, dps)
    idx_qi, idx_pi = n, 2 * n + 1
    for j in range(n):
        re_k = cq * a[j] * half
        im_k = cq * b[j] * half
        cov[j, idx_qi] = cov[idx_qi, j] = re_k
        cov[n + 1 + j, idx_pi] = cov[idx_pi, n + 1 + j] = -re_k
        cov[j, idx_pi] = cov[idx_pi, j] = im_k
        cov[n + 1 + j, idx_qi] = cov[idx_qi, n + 1 + j] = im_k
    mean = prec.zeros(2 * m, dps)
    return GaussianState(mean=mean, cov=cov, has_idler=True, dps=dps)


def qi_blocks(params, kappa, coeffs, cq_scale=1.0):
    """The grouped matrices ``D, A, B`` and scalars ``s, cq`` of the QI covariance."""
    _check_kappa(kappa)
    c = coefficient_vector(coeffs)
    n = c.size
    m = n + 1
    d = np.diag([params.n_b] * n + [params.n_s] + [params.n_b] * n + [params.n_s])
    cpad = np.concatenate([c, [0.0]])
    proj = np.outer(cpad.conj(), cpad)
    a_block = np.block([[proj.real, proj.imag], [-proj.imag, proj.real]])
    b_block = np.zeros((2 * m, 2 * m))
    for j in range(n):
        b_block[j, n] = b_block[n, j] = c[j].real
        b_block[m + j, 2 * m - 1] = b_block[2 * m - 1, m + j] = -c[j].real
        b_block[j, 2 * m - 1] = b_block[2 * m - 1, j] = c[j].imag
        b_block[m + j, n] = b_block[n, m + j] = c[j].imag
    return CovarianceBlocks(
        d_diag=d,
        a_block=a_block,
        b_block=b_block,
        s_coef=kappa * (params.n_b - params.n_s),
        cq_coef=cross_correlation(kappa, params.n_s, cq_scale),
    )


def p_function_covariance(state):
    """``V - I/4``, raising if the state has no proper P-function."""
    cov = prec.to_float(state.cov)
    sigma = 0.5 * (cov + cov.T) - VACUUM_VARIANCE * np.eye(cov.shape[0])
    w = np.linalg.eigvalsh(sigma)
    # relative floor: rounding in V - I/4 is ~1e-16 of the largest entry
    if w[0] <= 1e-15 * max(1.0, abs(w[-1])):
        raise NotPRepresentable(f"V - I/4 is not positive definite (min eigenvalue {w[0]:.3e})")
    return sigma


def log_p_function(state, r):
    """Natural log of the Glauber-Sudarshan P-function at phase-space points ``r``.

    ``r`` holds coherent amplitudes ``(x..., p...)`` with ``alpha = x + i p``;
    shape ``(2N,)`` or ``(k, 2N)``.
    """
    sigma = p_function_covariance(state)
    mu = prec.to_float(state.mean)
    r = np.asarray(r, dtype=float)
    chol = np.linalg.cholesky(sigma)
    dim = sigma.shape[0]
    z = np.linalg.solve(chol, (r - mu).T)
    quad = np.sum(z * z, axis=0)
    log_norm = 0.5 * dim * np.log(2 * np.pi) + np.sum(np.log(np.diag(chol)))
    out = -0.5 * quad - log_norm
    return out if r.ndim > 1 else float(out)


def evaluate_p_function(state, r):
    """P-function value; a Gaussian density with covariance ``V - I/4``."""
    return np.exp(log_p_function(state, r))


@dataclass(frozen=True)
class RegimeEntry:
    kappa: float
    kappa_nb_over_ns: float
    ns_exp_nb: float
    inv_nb: float
    flags: dict = field(default_factory=dict)

    @property
    def deep(self):
        return all(v for v in self.flags.values() if v is not None)


def regime_diagnostics(params, kappas, thresholds=(0.1, math.inf, 0.2)):
    """Dimensionless regime ratios per target, flagged against thresholds.

    A flag is ``True`` when the ratio is at or below its threshold (inside
    the low-brightness, high-loss, high-noise regime). An infinite threshold
    disables that check and its flag is ``None``. Advisory only.
    """
    t_kappa, t_ns, t_nb = thresholds
    entries = []
    for kappa in kappas:
        ratio = kappa * params.n_b / params.n_s
        try:
            ns_exp = params.n_s * math.exp(params.n_b)
        except OverflowError:
            ns_exp = math.inf
        inv_nb = math.inf if params.n_b == 0 else 1.0 / params.n_b
        flags = {
            "kappa_nb_over_ns": ratio <= t_kappa,
            "ns_exp_nb": None if math.isinf(t_ns) else ns_exp <= t_ns,
            "inv_nb": inv_nb <= t_nb,
        }
        entries.append(RegimeEntry(kappa, ratio, ns_exp, inv_nb, flags))
    return entries
