"""Pairwise exponents over a target library with any of the four engines."""

from dataclasses import dataclass, field
from functools import partial
import itertools
import math
import warnings

import numpy as np

from ._parallel import ordered_map
from .chernoff import ChernoffResult, asymptotic_xi, chernoff_exponent_exact, library_exponent
from .errors import IndistinguishablePair, NeedTwoTargets
from .perturbative import build_perturbation_pair, perturbative_chernoff
from .states import build_ci, build_qi

METHODS = ("exact", "perturbative", "asymptotic")
FLAVORS = ("CI", "QI")
# below this the float64 exact engine loses relative accuracy
AUTO_MP_THRESHOLD = 1e-9
AUTO_DPS = 40


def exact_pair(params, t1, t2, flavor, s_tol=1e-6, dps="auto"):
    """Exact exponent of two targets; ``dps="auto"`` reruns in mpmath for tiny exponents."""
    build = build_ci if flavor == "CI" else build_qi
    if dps == "auto":
        res = chernoff_exponent_exact(build(params, t1.kappa, t1.values), build(params, t2.kappa, t2.values), s_tol)
        if res.xi >= AUTO_MP_THRESHOLD or res.xi == 0.0:
            return res
        dps = AUTO_DPS
    return chernoff_exponent_exact(
        build(params, t1.kappa, t1.values, dps), build(params, t2.kappa, t2.values, dps), s_tol
    )


def asymptotic_pair(params, t1, t2, flavor):
    xi = asymptotic_xi(params, t1, t2, flavor)
    return ChernoffResult(0.5, xi, math.exp(-xi), "asymptotic", xi_bhattacharyya=xi)


def pair_exponent(params, t1, t2, flavor, method, s_tol=1e-6, dps="auto", cutoffs=None, idler_cutoff=None):
    flavor = flavor.upper()
    if method == "exact":
        return exact_pair(params, t1, t2, flavor, s_tol, dps)
    if method == "perturbative":
        return perturbative_chernoff(build_perturbation_pair(params, (t1, t2), flavor, cutoffs, idler_cutoff))
    if method == "asymptotic":
        return asymptotic_pair(params, t1, t2, flavor)
    raise ValueError(f"unknown method {method!r}")


@dataclass
class PairOutcome:
    i: int
    j: int
    results: dict = field(default_factory=dict)  # (flavor, method) -> ChernoffResult
    errors: dict = field(default_factory=dict)  # (flavor, method) -> message

    @property
    def failed(self):
        return bool(self.errors)


def _pair_job(ij, params, targets, methods, flavors, opts):
    out = PairOutcome(*ij)
    for flavor in flavors:
        for method in methods:
            try:
                out.results[(flavor, method)] = pair_exponent(params, targets[ij[0]], targets[ij[1]], flavor, method, **opts)
            except (ArithmeticError, ValueError, MemoryError) as exc:
                out.errors[(flavor, method)] = f"{type(exc).__name__}: {exc}"
    return out


def compute_pairs(params, targets, methods=METHODS, flavors=FLAVORS, jobs=1, **opts):
    """Every requested (flavor, method) exponent for every target pair ``i < j``.

    Engine failures are recorded on the pair instead of raised.
    """
    if len(targets) < 2:
        raise NeedTwoTargets(f"need at least two targets, got {len(targets)}")
    pairs = itertools.combinations(range(len(targets)), 2)
    job = partial(_pair_job, params=params, targets=targets, methods=methods, flavors=flavors, opts=opts)
    return ordered_map(job, pairs, jobs)


def exponent_matrix(outcomes, n, flavor, method):
    """Symmetric matrix of exponents; NaN where a pair failed."""
    xi = np.zeros((n, n))
    for o in outcomes:
        r = o.results.get((flavor, method))
        xi[o.i, o.j] = xi[o.j, o.i] = r.xi if r is not None else math.nan
    return xi


def library_minimum(outcomes, n, flavor, method):
    """``(xi_min, pair, indistinguishable)`` for one engine; pairs that failed are skipped."""
    xi = exponent_matrix(outcomes, n, flavor, method)
    masked = np.where(np.isnan(xi), np.inf, xi)
    np.fill_diagonal(masked, 0.0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IndistinguishablePair)
        value, pair = library_exponent(masked)
    flagged = any(issubclass(w.category, IndistinguishablePair) for w in caught)
    return value, pair, flagged
