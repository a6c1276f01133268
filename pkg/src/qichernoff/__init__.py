"""Quantum Chernoff exponents for target-library discrimination.

Coherent-state illumination (CI) and Gaussian entangled illumination (QI)
are compared through the exact Gaussian exponent, a truncated Fock-space
cross-check, a leading-order perturbative formula and closed-form
low-brightness asymptotics.
"""

__version__ = "0.1.0"

from .asymptotics import (
    RegimePath,
    SweepRow,
    default_regime_path,
    sweep_ratio,
    validate_det_expansion,
    validate_exponent_expansion,
    validate_p_expansion,
    validation_suite,
)
from .chernoff import (
    ChernoffResult,
    asymptotic_xi,
    chernoff_exponent_exact,
    gaussian_log_s_overlap,
    gaussian_s_overlap,
    library_exponent,
    pairwise_matrix,
)
from .fock import FockOperator, fock_density, fock_s_overlap, fock_s_overlaps
from .library import compute_pairs, library_minimum, pair_exponent
from .perturbative import build_perturbation_pair, perturbative_chernoff, perturbative_xi
from .scene import (
    ModeBasis,
    SampledField,
    SpatialGrid,
    Target,
    TargetCoefficients,
    decompose,
    hermite_gauss_basis,
    pixel_basis,
    read_field_csv,
    write_field_csv,
)
from .states import GaussianState, ScenarioParams, build_ci, build_qi, regime_diagnostics
from .symplectic import symplectic_spectrum, williamson
