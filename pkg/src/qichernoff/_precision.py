"""Scalar helpers shared by float64 and mpmath code paths.

Arrays in the multiprecision path are numpy object arrays holding
``mpmath.mpf`` entries. ``dps=None`` selects plain float64.
"""

import mpmath
import numpy as np


def is_mp_array(a):
    return isinstance(a, np.ndarray) and a.dtype == object


def scalar(x, dps):
    if dps is None:
        return float(x)
    with mpmath.workdps(dps):
        return mpmath.mpf(x)


def sqrt(x, dps):
    if dps is None:
        return float(np.sqrt(x))
    with mpmath.workdps(dps):
        return mpmath.sqrt(x)


def zeros(shape, dps):
    if dps is None:
        return np.zeros(shape)
    out = np.empty(shape, dtype=object)
    out.fill(mpmath.mpf(0))
    return out


def to_float(a):
    if is_mp_array(a):
        return np.array([[float(v) for v in row] for row in a]) if a.ndim == 2 else np.array(
            [float(v) for v in a]
        )
    return np.asarray(a, dtype=float)


def to_mp_matrix(a, dps):
    with mpmath.workdps(dps):
        a = np.asarray(a)
        if a.ndim == 1:
            return mpmath.matrix([mpmath.mpf(v) for v in a])
        return mpmath.matrix([[mpmath.mpf(v) for v in row] for row in a])
