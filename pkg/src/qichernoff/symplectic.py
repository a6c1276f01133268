"""Symplectic spectral calculus for covariance matrices.

Conventions used throughout the package:

* quadrature ordering ``(q_1, ..., q_N, p_1, ..., p_N)``;
* ``q = (a + a^dagger) / 2`` so the vacuum covariance is ``I / 4``;
* symplectic form ``Omega = [[0, I], [-I, 0]]``.
"""

import warnings

import numpy as np
from scipy.linalg import expm, schur

from .errors import DegenerateSpectrum, InvalidCovariance

VACUUM_VARIANCE = 0.25


def omega(n):
    """Return the ``2n x 2n`` symplectic form in ``(q..., p...)`` ordering."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def _check_covariance(cov, rtol=1e-12):
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
        raise InvalidCovariance(f"covariance must be square with even size, got {cov.shape}")
    scale = max(np.max(np.abs(cov)), np.finfo(float).tiny)
    if np.max(np.abs(cov - cov.T)) > rtol * scale:
        raise InvalidCovariance("covariance is not symmetric")
    cov = 0.5 * (cov + cov.T)
    w = np.linalg.eigvalsh(cov)
    if w[0] <= 0:
        raise InvalidCovariance(f"covariance is not positive definite (min eigenvalue {w[0]:.3e})")
    return cov


def _sqrtm_pd(cov):
    w, e = np.linalg.eigh(cov)
    return (e * np.sqrt(w)) @ e.T, (e / np.sqrt(w)) @ e.T


def symplectic_spectrum(cov):
    """Symplectic eigenvalues of a covariance matrix, sorted descending.

    Computed from the symmetric matrix ``V^{1/2} Omega^T V Omega V^{1/2}``,
    whose eigenvalues are the squared symplectic eigenvalues, each twice.

    Parameters
    ----------
    cov : array_like, shape (2N, 2N)
        Symmetric positive definite covariance.

    Returns
    -------
    ndarray, shape (N,)
    """
    cov = _check_covariance(cov)
    n = cov.shape[0] // 2
    om = omega(n)
    half, _ = _sqrtm_pd(cov)
    m = half @ om.T @ cov @ om @ half
    nu2 = np.linalg.eigvalsh(0.5 * (m + m.T))
    nu = np.sqrt(np.clip(nu2, 0.0, None))[::-1]
    # eigenvalues come in equal pairs
    return 0.5 * (nu[0::2] + nu[1::2])


def williamson(cov):
    """Williamson normal form ``V = S diag(nu, nu) S^T``.

    Returns
    -------
    S : ndarray, shape (2N, 2N)
        Symplectic matrix (``S Omega S^T = Omega``).
    nu : ndarray, shape (N,)
        Symplectic eigenvalues sorted descending. Column ``k`` and ``k + N``
        of ``S`` belong to ``nu[k]``; each such pair is sign-normalised so the
        first entry of column ``k`` with magnitude above 1e-12 is positive.
    """
    cov = _check_covariance(cov)
    n = cov.shape[0] // 2
    om = omega(n)
    _, inv_half = _sqrtm_pd(cov)
    # antisymmetric; its real Schur form is 2x2 blocks [[0, 1/nu], [-1/nu, 0]]
    a = inv_half @ om @ inv_half
    t, k = schur(0.5 * (a - a.T), output="real")

    nus = np.empty(n)
    qcols = np.empty((2 * n, n))
    pcols = np.empty((2 * n, n))
    for j in range(n):
        b = t[2 * j, 2 * j + 1]
        u, v = k[:, 2 * j], k[:, 2 * j + 1]
        if b < 0:
            u, v, b = v, u, -b
        nus[j] = 1.0 / b
        qcols[:, j] = u
        pcols[:, j] = v

    order = np.argsort(-nus, kind="stable")
    nus = nus[order]
    qcols = qcols[:, order]
    pcols = pcols[:, order]

    gaps = np.abs(np.diff(nus))
    if np.any(gaps <= 1e-12 * max(1.0, nus[0])):
        warnings.warn(
            "degenerate symplectic eigenvalues; the basis inside the degenerate block is arbitrary",
            DegenerateSpectrum,
            stacklevel=2,
        )

    kk = np.hstack([qcols, pcols])
    s = cov @ inv_half @ kk / np.sqrt(np.concatenate([nus, nus]))
    # V^{1/2} K D^{-1/2} maps onto the same normal form as (V^{-1/2} K D^{1/2})^{-T}
    for j in range(n):
        col = s[:, j]
        lead = np.flatnonzero(np.abs(col) > 1e-12)
        if lead.size and col[lead[0]] < 0:
            s[:, j] *= -1
            s[:, j + n] *= -1
    return s, nus


def is_p_representable(cov, tol=1e-12):
    """True iff ``V - I/4`` is positive definite (smallest eigenvalue > tol)."""
    cov = np.asarray(cov, dtype=float)
    sym = 0.5 * (cov + cov.T)
    w = np.linalg.eigvalsh(sym - VACUUM_VARIANCE * np.eye(sym.shape[0]))
    return bool(w[0] > tol)


def is_symplectic(s, atol=1e-9):
    s = np.asarray(s)
    om = omega(s.shape[0] // 2)
    return bool(np.allclose(s @ om @ s.T, om, atol=atol, rtol=0))


def random_symplectic(n, rng=None, scale=1.0):
    """Random symplectic matrix ``expm(Omega H)`` with ``H`` symmetric.

    The generator is rescaled so its spectral norm is at most ``scale``.
    """
    rng = np.random.default_rng(rng)
    h = rng.standard_normal((2 * n, 2 * n))
    h = 0.5 * (h + h.T)
    gen = omega(n) @ h
    norm = np.linalg.norm(gen, 2)
    if norm > scale:
        gen *= scale / norm
    return expm(gen)


def thermal_covariance(n_mean, n_modes=1):
    """Covariance of a product of identical thermal states."""
    return (n_mean / 2 + VACUUM_VARIANCE) * np.eye(2 * n_modes)
