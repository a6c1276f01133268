"""Receiver mode bases, target return fields, and their overlap coefficients.

Fields are sampled on a tensor-product grid and stored with shape
``(n_pol, nx, ny)`` where ``n_pol`` is 1 (scalar) or 2 (x and y polarisation).
The inner product is ``<f, g> = sum_points w * f . conj(g)``.
"""

import csv
from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from scipy.integrate import simpson
from scipy.special import eval_hermite

from .errors import BasisNotOrthonormal, DimensionMismatch, GridMismatch, SpanDeficient


def quadrature_weights(x, rule="auto"):
    """1D quadrature weights on strictly increasing samples.

    ``rule="auto"`` uses composite Simpson for an odd number of points and
    the trapezoid rule otherwise.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("need at least 2 samples per axis")
    if np.any(np.diff(x) <= 0):
        raise ValueError("samples must be strictly increasing")
    if rule == "auto":
        rule = "simpson" if x.size % 2 == 1 and x.size >= 3 else "trapezoid"
    if rule == "simpson":
        return simpson(np.eye(x.size), x=x, axis=-1)
    if rule == "trapezoid":
        w = np.zeros_like(x)
        dx = np.diff(x)
        w[:-1] += dx / 2
        w[1:] += dx / 2
        return w
    raise ValueError(f"unknown quadrature rule {rule!r}")


@dataclass(frozen=True, eq=False)
class SpatialGrid:
    x: np.ndarray
    y: np.ndarray
    rule: str = "auto"
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        w = np.outer(quadrature_weights(x, self.rule), quadrature_weights(y, self.rule))
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, half_width, npts, rule="auto"):
        """Square grid ``[-half_width, half_width]^2`` with ``npts`` per axis."""
        axis = np.linspace(-half_width, half_width, npts)
        return cls(axis, axis, rule)

    @property
    def shape(self):
        return (self.x.size, self.y.size)

    @property
    def area(self):
        return (self.x[-1] - self.x[0]) * (self.y[-1] - self.y[0])

    def mesh(self):
        return np.meshgrid(self.x, self.y, indexing="ij")

    def same_as(self, other):
        return (
            self is other
            or (self.shape == other.shape and np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y))
        )


def inner_product(grid, f, g):
    """Weighted inner product of two sampled fields of shape ``(n_pol, nx, ny)``."""
    return complex(np.sum(grid.weights * np.sum(f * np.conj(g), axis=0)))


@dataclass(frozen=True, eq=False)
class SampledField:
    grid: SpatialGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim == 2:
            v = v[None]
        if v.ndim != 3 or v.shape[0] not in (1, 2) or v.shape[1:] != self.grid.shape:
            raise ValueError(f"field shape {v.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", v)

    def norm(self):
        return math.sqrt(max(inner_product(self.grid, self.values, self.values).real, 0.0))

    def normalized(self):
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("cannot normalise a zero field")
        return SampledField(self.grid, self.values / nrm)


@dataclass(frozen=True, eq=False)
class ModeBasis:
    """Grid-sampled vector mode functions, shape ``(n, n_pol, nx, ny)``."""

    grid: SpatialGrid
    modes: np.ndarray
    labels: tuple = ()
    interleaved: bool = False

    def __post_init__(self):
        m = np.asarray(self.modes, dtype=complex)
        if m.ndim == 3:
            m = m[:, None]
        if m.ndim != 4 or m.shape[2:] != self.grid.shape:
            raise GridMismatch(f"mode array shape {m.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "modes", m)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(j + 1) for j in range(m.shape[0])))

    def __len__(self):
        return self.modes.shape[0]

    @property
    def n_pol(self):
        return self.modes.shape[1]


def gram_matrix(basis):
    """``G_jk = <zeta_j, zeta_k>`` on the basis grid."""
    w = basis.grid.weights
    flat = (basis.modes * np.sqrt(w)).reshape(len(basis), -1)
    return flat @ flat.conj().T


def check_orthonormal(basis, tol=1e-6):
    g = gram_matrix(basis)
    err = float(np.max(np.abs(g - np.eye(len(basis)))))
    if err > tol:
        raise BasisNotOrthonormal(f"Gram matrix deviates from identity by {err:.3e} (tolerance {tol:g})")
    return err


def hermite_gauss_1d(x, order, waist=1.0):
    """Normalised 1D Hermite-Gauss function with ``|u|^2`` integrating to 1."""
    norm = (2 / np.pi) ** 0.25 / math.sqrt(2.0**order * math.factorial(order) * waist)
    return norm * eval_hermite(order, math.sqrt(2) * x / waist) * np.exp(-((x / waist) ** 2))


def hermite_gauss_modes(grid, max_order, waist=1.0, center=(0.0, 0.0)):
    """Scalar HG_mn modes with ``m + n <= max_order``.

    Ordered by total order, then by decreasing ``m``.
    Returns ``(modes, labels)`` with modes of shape ``(n, nx, ny)``.
    """
    modes, labels = [], []
    for total in range(max_order + 1):
        for m in range(total, -1, -1):
            k = total - m
            ux = hermite_gauss_1d(grid.x - center[0], m, waist)
            uy = hermite_gauss_1d(grid.y - center[1], k, waist)
            modes.append(np.outer(ux, uy))
            labels.append(f"HG{m}{k}")
    return np.array(modes, dtype=complex), labels


def hermite_gauss_basis(grid, max_order, waist=1.0, polarization="scalar"):
    modes, labels = hermite_gauss_modes(grid, max_order, waist)
    if polarization == "scalar":
        return ModeBasis(grid, modes, tuple(labels))
    if polarization == "interleaved":
        return interleave_polarizations(grid, modes, 2 * len(modes), labels)
    raise ValueError(f"unknown polarization scheme {polarization!r}")


def pixel_basis(grid, nx_pix, ny_pix):
    """Indicator functions of ``nx_pix x ny_pix`` equal blocks of grid points.

    Each indicator is normalised with the grid weights, so the Gram matrix is
    the identity up to rounding.
    """
    nx, ny = grid.shape
    xb = np.array_split(np.arange(nx), nx_pix)
    yb = np.array_split(np.arange(ny), ny_pix)
    modes, labels = [], []
    for i, xs in enumerate(xb):
        for j, ys in enumerate(yb):
            m = np.zeros(grid.shape)
            m[np.ix_(xs, ys)] = 1.0
            m /= math.sqrt(np.sum(grid.weights * m))
            modes.append(m)
            labels.append(f"pix{i}_{j}")
    return ModeBasis(grid, np.array(modes, dtype=complex), tuple(labels))


def interleave_polarizations(grid, scalar_modes, n, labels=None):
    """Vector modes alternating y and x polarisation over a scalar set.

    With 1-based index ``j``: even ``j`` is ``x * zeta_{j/2}``, odd ``j`` is
    ``y * zeta_{ceil(j/2)}``.
    """
    scalar_modes = np.asarray(scalar_modes, dtype=complex)
    needed = math.ceil(n / 2)
    if scalar_modes.shape[0] < needed:
        raise ValueError(f"need {needed} scalar modes for {n} vector modes")
    out = np.zeros((n, 2) + grid.shape, dtype=complex)
    names = []
    for j in range(1, n + 1):
        if j % 2 == 0:
            src, pol, tag = j // 2, 0, "x"
        else:
            src, pol, tag = math.ceil(j / 2), 1, "y"
        out[j - 1, pol] = scalar_modes[src - 1]
        base = labels[src - 1] if labels is not None else str(src)
        names.append(f"{tag}{base}")
    return ModeBasis(grid, out, tuple(names), interleaved=True)


@dataclass(frozen=True, eq=False)
class TargetCoefficients:
    values: np.ndarray
    residual: float = 0.0
    span_deficient: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", np.atleast_1d(np.asarray(self.values, dtype=complex)))

    def __len__(self):
        return self.values.size

    def normalized(self):
        """Coefficients rescaled to unit norm, dropping the out-of-span part."""
        nrm = float(np.linalg.norm(self.values))
        return TargetCoefficients(self.values / nrm, 0.0, self.span_deficient)


@dataclass(frozen=True, eq=False)
class Target:
    """A hypothesis: round-trip transmissivity plus return-field signature.

    ``coefficients`` are used directly when given; otherwise ``field`` is
    decomposed against a basis with :func:`decompose`.
    """

    kappa: float
    coefficients: object = None
    field: SampledField | None = None
    name: str = ""

    def __post_init__(self):
        if not 0.0 <= self.kappa <= 1.0:
            raise ValueError(f"kappa must lie in [0, 1], got {self.kappa}")
        if (self.coefficients is None) == (self.field is None):
            raise ValueError("give exactly one of coefficients or field")
        if self.coefficients is not None:
            c = self.coefficients
            if not isinstance(c, TargetCoefficients):
                c = TargetCoefficients(np.asarray(c, dtype=complex))
            norm2 = float(np.sum(np.abs(c.values) ** 2)) + c.residual**2
            if abs(norm2 - 1) > 1e-10:
                raise ValueError(f"coefficients must have unit norm, got {norm2:.12g}")
            object.__setattr__(self, "coefficients", c)
        else:
            object.__setattr__(self, "field", self.field.normalized())

    @property
    def values(self):
        if self.coefficients is None:
            raise ValueError("target has no coefficients; decompose its field first")
        return self.coefficients.values

    def with_coefficients(self, coeffs):
        return Target(self.kappa, coefficients=coeffs, name=self.name)


def decompose(target, basis, gram_tol=1e-6, span_tol=1e-3):
    """Overlap coefficients ``C_j = <psi, zeta_j>`` of a target field.

    Targets that already carry coefficients are returned unchanged. A
    :class:`SpanDeficient` warning is emitted (and recorded on the result)
    when the out-of-span residual exceeds ``span_tol``.
    """
    if target.coefficients is not None:
        return target.coefficients
    fld = target.field
    if not fld.grid.same_as(basis.grid):
        raise GridMismatch("target field and basis are sampled on different grids")
    if fld.values.shape[0] != basis.n_pol:
        raise DimensionMismatch(
            f"field has {fld.values.shape[0]} polarisation components, basis has {basis.n_pol}"
        )
    check_orthonormal(basis, gram_tol)
    w = basis.grid.weights
    c = np.einsum("pxy,jpxy->j", fld.values * w, np.conj(basis.modes))
    residual = math.sqrt(max(0.0, 1.0 - float(np.sum(np.abs(c) ** 2))))
    deficient = residual > span_tol
    if deficient:
        warnings.warn(
            f"target {target.name or '?'} has out-of-span residual {residual:.3e} > {span_tol:g}",
            SpanDeficient,
            stacklevel=2,
        )
    return TargetCoefficients(c, residual, deficient)


def pair_distance(t1, t2):
    """``|| sqrt(kappa2) C2 - sqrt(kappa1) C1 ||^2`` for two targets."""
    c1, c2 = np.asarray(t1.values), np.asarray(t2.values)
    if c1.shape != c2.shape:
        raise DimensionMismatch(f"coefficient lengths differ: {c1.size} vs {c2.size}")
    diff = math.sqrt(t2.kappa) * c2 - math.sqrt(t1.kappa) * c1
    return float(np.sum(np.abs(diff) ** 2))


_SCALAR_HEADER = ["x", "y", "re", "im"]
_VECTOR_HEADER = ["x", "y", "re_x", "im_x", "re_y", "im_y"]


def read_field_csv(path, rule="auto"):
    """Read a sampled return field from CSV.

    Accepted headers are ``x,y,re,im`` (single polarisation) and
    ``x,y,re_x,im_x,re_y,im_y``. The grid is the set of unique coordinates;
    every grid point must appear exactly once.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        rows = [[float(v) for v in row] for row in reader if row]
    if header == _SCALAR_HEADER:
        npol = 1
    elif header == _VECTOR_HEADER:
        npol = 2
    else:
        raise ValueError(f"unrecognised field CSV header {header}")
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    xs, ix = np.unique(data[:, 0], return_inverse=True)
    ys, iy = np.unique(data[:, 1], return_inverse=True)
    if data.shape[0] != xs.size * ys.size:
        raise ValueError(f"{data.shape[0]} rows do not cover a {xs.size}x{ys.size} grid")
    values = np.full((npol, xs.size, ys.size), np.nan + 0j)
    for p in range(npol):
        values[p, ix, iy] = data[:, 2 + 2 * p] + 1j * data[:, 3 + 2 * p]
    if np.isnan(values.real).any():
        raise ValueError("duplicate grid points in field CSV")
    return SampledField(SpatialGrid(xs, ys, rule), values)


def write_field_csv(path, fld):
    """Write a sampled field in the format read by :func:`read_field_csv`."""
    npol = fld.values.shape[0]
    header = _SCALAR_HEADER if npol == 1 else _VECTOR_HEADER
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, xv in enumerate(fld.grid.x):
            for j, yv in enumerate(fld.grid.y):
                row = [repr(float(xv)), repr(float(yv))]
                for p in range(npol):
                    v = fld.values[p, i, j]
                    row += [repr(float(v.real)), repr(float(v.imag))]
                writer.writerow(row)
