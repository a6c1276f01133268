"""Regime-path sweeps of the QI/CI exponent ratio and checks of the expansions.

The default path drives ``kappa N_B / N_S``, ``1 / N_B`` and ``N_S`` to zero
together:

    N_B = 1/t,   N_S = c_S t^2,   kappa = c_kappa t N_S / N_B,

for ``t = 4^-1, ..., 4^-K``. Exponents along it fall to ~1e-24, so the
exact engine runs in mpmath there.

The validators compare exact Gaussian quantities against their truncated
low-brightness expansions and report the residual next to the stated order
times a safety factor.
"""

from functools import partial
import csv
from dataclasses import asdict, dataclass, field
import io
import json
import math

import numpy as np

from ._parallel import ordered_map
from .chernoff import asymptotic_xi, chernoff_exponent_exact
from .scene import Target, pair_distance
from .states import ScenarioParams, build_ci, build_qi, coefficient_vector, log_p_function
from . import _precision as prec

SAFETY_FACTOR = 100.0
SWEEP_DPS = 60
SWEEP_COLUMNS = (
    "t",
    "kappa1",
    "kappa2",
    "ns",
    "nb",
    "xi_c_exact",
    "xi_q_exact",
    "xi_c_asym",
    "xi_q_asym",
    "ratio_exact",
)


@dataclass(frozen=True)
class RegimePath:
    """Parameterised approach ``t -> (kappa1, kappa2, N_S, N_B)``.

    ``kappa_weights`` scale the common transmissivity ``kappa(t)`` for the two
    targets, e.g. ``(0, 1)`` for presence/absence detection.
    """

    ts: tuple
    c_s: float = 0.1
    c_kappa: float = 1.0
    kappa_weights: tuple = (1.0, 1.0)
    label: str = "polynomial proxy"

    def __post_init__(self):
        if len(self.ts) < 2:
            raise ValueError("a regime path needs at least two evaluation points")
        if any(b >= a for a, b in zip(self.ts, self.ts[1:])):
            raise ValueError("evaluation points must be strictly decreasing")

    def n_b(self, t):
        return 1.0 / t

    def n_s(self, t):
        return self.c_s * t * t

    def kappa(self, t):
        return self.c_kappa * t * self.n_s(t) / self.n_b(t)

    def point(self, t):
        k = self.kappa(t)
        return k * self.kappa_weights[0], k * self.kappa_weights[1], self.n_s(t), self.n_b(t)

    def ratios(self, t):
        """The three regime ratios ``kappa N_B / N_S``, ``N_S e^N_B``, ``1/N_B``."""
        _, _, ns, nb = self.point(t)
        k = max(self.kappa_weights) * self.kappa(t)
        with np.errstate(over="ignore"):
            return k * nb / ns, ns * math.exp(min(nb, 700.0)), 1.0 / nb


def default_regime_path(depth, c_s=0.1, c_kappa=1.0, kappa_weights=(1.0, 1.0)):
    """Path over ``t = 4^-1 ... 4^-depth`` with ``N_B = 1/t``, ``N_S = c_S t^2``."""
    if int(depth) != depth or depth < 2:
        raise ValueError(f"depth must be an integer >= 2, got {depth}")
    ts = tuple(4.0 ** -k for k in range(1, int(depth) + 1))
    return RegimePath(ts, c_s, c_kappa, tuple(kappa_weights))


@dataclass
class SweepRow:
    t: float
    kappa1: float
    kappa2: float
    ns: float
    nb: float
    xi_c_exact: float
    xi_q_exact: float
    xi_c_asym: float
    xi_q_asym: float
    ratio_exact: float
    ratio_asym: float
    gap_c: float
    gap_q: float
    status: str = "ok"

    def csv_values(self):
        return [getattr(self, c) for c in SWEEP_COLUMNS]


def _ratio(num, den):
    return num / den if den > 0 else math.nan


def sweep_point(path, coeffs, t, dps=SWEEP_DPS, s_tol=1e-6):
    """One :class:`SweepRow` for fixed target coefficients at path parameter ``t``."""
    k1, k2, ns, nb = path.point(t)
    c1, c2 = coefficient_vector(coeffs[0]), coefficient_vector(coeffs[1])
    t1, t2 = Target(k1, c1), Target(k2, c2)
    params = ScenarioParams(ns, nb)
    asym_c = asymptotic_xi(params, t1, t2, "CI")
    asym_q = asymptotic_xi(params, t1, t2, "QI")
    if pair_distance(t1, t2) == 0.0:
        return SweepRow(t, k1, k2, ns, nb, 0.0, 0.0, 0.0, 0.0, math.nan, math.nan, math.nan, math.nan, "identical")
    try:
        xc = chernoff_exponent_exact(build_ci(params, k1, c1, dps), build_ci(params, k2, c2, dps), s_tol).xi
        xq = chernoff_exponent_exact(build_qi(params, k1, c1, dps), build_qi(params, k2, c2, dps), s_tol).xi
    except (ArithmeticError, ValueError) as exc:
        nan = math.nan
        return SweepRow(t, k1, k2, ns, nb, nan, nan, asym_c, asym_q, nan, 4.0, nan, nan, f"failed: {exc}")
    return SweepRow(
        t,
        k1,
        k2,
        ns,
        nb,
        xc,
        xq,
        asym_c,
        asym_q,
        _ratio(xq, xc),
        _ratio(asym_q, asym_c),
        abs(xc - asym_c) / asym_c,
        abs(xq - asym_q) / asym_q,
    )


def sweep_ratio(path, coeffs, dps=SWEEP_DPS, s_tol=1e-6, jobs=1):
    """Exact and asymptotic exponents along a regime path.

    Parameters
    ----------
    path : RegimePath
    coeffs : pair of array_like
        Unit-norm coefficient vectors of the two targets, fixed along the path.
    dps : int
        mpmath precision for the exact engine.
    jobs : int
        Rows computed concurrently.

    Returns
    -------
    list of SweepRow
        Ordered by decreasing ``t``. Rows that fail carry NaNs and a status.
    """
    return ordered_map(partial(sweep_point, path, coeffs, dps=dps, s_tol=s_tol), path.ts, jobs)


def format_number(x):
    """17 significant digits; round-trips every float exactly."""
    return format(float(x), ".17g")


def sweep_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([format_number(v) for v in row.csv_values()])
    return buf.getvalue()


# --- expansion validators ----------------------------------------------------------


@dataclass
class CheckPoint:
    kappa: float
    residual: float
    bound: float

    @property
    def within(self):
        return self.residual <= self.bound


@dataclass
class ValidationReport:
    """Residuals of one displayed expansion along a decreasing ``kappa`` sequence."""

    name: str
    order: str
    points: list
    safety_factor: float = SAFETY_FACTOR
    slope: float | None = None
    halving_ratios: list = field(default_factory=list)
    shrinking: bool = True
    passed: bool = False

    def to_dict(self):
        d = asdict(self)
        d["points"] = [dict(asdict(p), within=p.within) for p in self.points]
        return d


def _finish(report, slope_min=0.9, halving_window=(2 / 1.5, 2 * 1.5)):
    nonzero = [p for p in report.points if p.kappa > 0]
    res = np.array([p.residual for p in nonzero])
    kap = np.array([p.kappa for p in nonzero])
    if len(nonzero) >= 2 and np.all(res > 0):
        report.slope = float(np.polyfit(np.log(kap), np.log(res), 1)[0])
        report.halving_ratios = [float(a / b) for a, b in zip(res, res[1:])]
        if report.name.startswith("determinant"):
            report.shrinking = report.slope >= slope_min
        else:
            lo, hi = halving_window
            report.shrinking = all(lo <= r <= hi for r in report.halving_ratios)
    elif len(nonzero) >= 2:
        report.shrinking = bool(np.all(np.diff(res) <= 0))
    report.passed = bool(report.shrinking and all(p.within for p in report.points))
    return report


def _halving(kappa, count):
    return [kappa / 2**k for k in range(count)]


def validate_det_expansion(params, coeffs, kappas=(1e-5, 5e-6, 2.5e-6), safety=SAFETY_FACTOR, cq_scale=1.0):
    """Normalisation of the QI P-function against ``2^(n+1) det(D)^(-1/2) (1 + kappa)``.

    The residual is relative to the leading term ``2^(n+1) det(D)^(-1/2)``;
    the bound is ``safety * kappa N_S / N_B``.
    """
    c = coefficient_vector(coeffs)
    n = c.size
    log_lead = (n + 1) * math.log(2.0) - 0.5 * (2 * n * math.log(params.n_b) + 2 * math.log(params.n_s))
    points = []
    for kappa in kappas:
        state = build_qi(params, kappa, c, cq_scale=cq_scale)
        sigma = prec.to_float(state.cov) - 0.25 * np.eye(2 * (n + 1))
        sign, logdet = np.linalg.slogdet(sigma)
        if sign <= 0:
            raise ValueError(f"V - I/4 is not positive definite at kappa={kappa}")
        lhs_rel = math.exp(-0.5 * logdet - log_lead)
        residual = abs(lhs_rel - (1.0 + kappa))
        # at kappa = 0 both sides coincide; allow rounding only
        points.append(CheckPoint(kappa, residual, max(safety * kappa * params.n_s / params.n_b, 1e-12)))
    report = ValidationReport("determinant (QI)", "kappa N_S / N_B", points, safety)
    return _finish(report)


def zeroth_order_samples(params, n, flavor, count=1000, seed=0):
    """Draws from the thermal (``kappa = 0``) P-function, shape ``(count, 2M)``."""
    rng = np.random.default_rng(seed)
    var = [params.n_b / 2] * n + ([params.n_s / 2] if flavor == "QI" else [])
    sd = np.sqrt(np.array(var * 2))
    return rng.standard_normal((count, sd.size)) * sd


def _split(r, n, flavor):
    m = n + 1 if flavor == "QI" else n
    x, p = r[:, :m], r[:, m:]
    if flavor == "QI":
        return x[:, :n], p[:, :n], x[:, n], p[:, n]
    return x, p, None, None


def _first_order(params, c, kappa, r, flavor):
    """Displayed leading terms: zeroth-order quadratic form and the linear correction."""
    n = c.size
    xc, pc, xi, pi = _split(r, n, flavor)
    quad0 = (np.sum(xc**2, axis=1) + np.sum(pc**2, axis=1)) / params.n_b
    if flavor == "CI":
        lin = 2 * math.sqrt(kappa * params.n_s) / params.n_b * (xc @ c.real + pc @ c.imag)
    else:
        quad0 = quad0 + (xi**2 + pi**2) / params.n_s
        cross = xi * (xc @ c.real) - pi * (pc @ c.real) + xi * (pc @ c.imag) + pi * (xc @ c.imag)
        lin = 2 * math.sqrt(kappa / params.n_s) / params.n_b * cross
    return quad0, lin


def _exact_quadratic(state, r):
    sigma = prec.to_float(state.cov) - 0.25 * np.eye(state.cov.shape[0])
    d = r - prec.to_float(state.mean)
    return 0.5 * np.einsum("ij,ij->i", d, np.linalg.solve(sigma, d.T).T)


def _build(params, kappa, c, flavor, cq_scale):
    if flavor == "CI":
        return build_ci(params, kappa, c)
    return build_qi(params, kappa, c, cq_scale=cq_scale)


def _bound(params, kappa, flavor, safety):
    if flavor == "CI":
        return safety * kappa / params.n_b
    return safety * kappa / (params.n_s * params.n_b)


def validate_exponent_expansion(
    params, coeffs, flavor="QI", kappa=1e-6, steps=2, count=1000, seed=0, safety=SAFETY_FACTOR, cq_scale=1.0
):
    """Quadratic form of the P-function exponent against its first-order truncation.

    Residual: max over sample points of ``|exact - truncated|``. Bound:
    ``safety * kappa / N_B`` (CI) or ``safety * kappa / (N_S N_B)`` (QI).
    """
    flavor = flavor.upper()
    c = coefficient_vector(coeffs)
    r = zeroth_order_samples(params, c.size, flavor, count, seed)
    points = []
    for k in _halving(kappa, steps) if kappa > 0 else [0.0]:
        exact = _exact_quadratic(_build(params, k, c, flavor, cq_scale), r)
        quad0, lin = _first_order(params, c, k, r, flavor)
        residual = float(np.max(np.abs(exact - (quad0 - lin))))
        points.append(CheckPoint(k, residual, _bound(params, k, flavor, safety) if k > 0 else 1e-10))
    order = "kappa / N_B" if flavor == "CI" else "kappa / (N_S N_B)"
    return _finish(ValidationReport(f"quadratic form ({flavor})", order, points, safety))


def validate_p_expansion(
    params, coeffs, flavor="QI", kappa=1e-6, steps=2, count=1000, seed=0, safety=SAFETY_FACTOR, cq_scale=1.0
):
    """P-function against ``P_0 (1 + linear term)``; residual is the max relative error.

    The linear term carries the sign implied by the exact quadratic form
    (``P ~ exp(-quadratic form)``).
    """
    flavor = flavor.upper()
    c = coefficient_vector(coeffs)
    n = c.size
    r = zeroth_order_samples(params, n, flavor, count, seed)
    m = n + 1 if flavor == "QI" else n
    log_norm0 = -m * math.log(math.pi) - n * math.log(params.n_b)
    if flavor == "QI":
        log_norm0 -= math.log(params.n_s)
    points = []
    for k in _halving(kappa, steps) if kappa > 0 else [0.0]:
        state = _build(params, k, c, flavor, cq_scale)
        log_exact = log_p_function(state, r)
        quad0, lin = _first_order(params, c, k, r, flavor)
        rel = np.abs(np.expm1(log_exact - (log_norm0 - quad0)) - lin) / np.abs(1.0 + lin)
        residual = float(np.max(rel))
        points.append(CheckPoint(k, residual, _bound(params, k, flavor, safety) if k > 0 else 1e-10))
    order = "kappa / N_B" if flavor == "CI" else "kappa / (N_S N_B)"
    return _finish(ValidationReport(f"P-function ({flavor})", order, points, safety))


def validation_suite(params=None, coeffs=(1.0,), cq_scale=1.0):
    """All expansion validators at the reference deep-regime point."""
    params = params or ScenarioParams(n_s=1e-2, n_b=10.0)
    return [
        validate_det_expansion(params, coeffs, cq_scale=cq_scale),
        validate_exponent_expansion(params, coeffs, "QI", cq_scale=cq_scale),
        validate_exponent_expansion(params, coeffs, "CI"),
        validate_p_expansion(params, coeffs, "QI", cq_scale=cq_scale),
        validate_p_expansion(params, coeffs, "CI"),
    ]


def reports_json(reports, extra=None):
    payload = {"checks": [r.to_dict() for r in reports], "all_passed": all(r.passed for r in reports)}
    if extra:
        payload.update(extra)
    return json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")
