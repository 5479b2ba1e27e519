"""Multidimensional polynomial phase estimation.

Recover the coefficients of a complex exponential whose phase is a
multivariate polynomial, from noisy samples on a rectangular window, with
linear-time sequential estimation, circular averaging, optional lag
refinement, and CRB-based quality assessment.
"""

__version__ = "0.1.0"

from .degrees import (
    DegreeSet,
    DegreeSetReport,
    binom,
    build_total_order,
    downward_closure,
    multi_binom,
    partial_leq,
    validate_degree_set,
)
from .basis import (
    BINOMIAL,
    MONOMIAL,
    ChangeOfBasis,
    CoefficientVector,
    binomial_to_monomial_matrix,
    binomial_transform,
    compute_lattice_point,
    compute_new_coordinate,
    eval_binomial,
    eval_monomial,
    wrap_to_cell,
)
from .signal import (
    RealField,
    Signal,
    add_noise,
    arg_field,
    finite_difference,
    phase_diff,
    phase_diff_multi,
    project_unit_circle,
    read_signal,
    synthesize,
    write_signal,
)
from .weights import (
    NoiseCovariance,
    WeightField,
    covariance_matrix,
    weight_1d,
    weight_multi,
    weight_via_inversion,
)
from .estimator import (
    AveragingKind,
    Estimate,
    EstimatorConfig,
    average,
    estimate,
    estimate_coefficients,
    estimate_coefficients_direct,
    estimate_coefficients_general,
    estimate_coefficients_multilag,
    parameter_invariance_witness,
)
from .analysis import (
    DecompositionPair,
    FisherMatrix,
    crb,
    decomposition,
    fisher_matrix,
    naive_penalty,
    orthogonal_poly,
    outlier_predicate,
    reconstruction_bound,
    tr_kj,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    TrialResult,
    empirical_covariance,
    run_sweep,
    run_trial,
    snr_db_to_linear,
)

__all__ = [name for name in dir() if not name.startswith("_")]
