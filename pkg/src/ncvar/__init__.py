"""Variance inequalities over tensor products of matrix algebras.

A library plus CLI for finite-dimensional noncommutative probability:
elements of tensor products of matrix algebras under the normalized
trace, conditional expectations via partial traces, independence
diagnostics, a suite of checkable variance and norm inequalities, and
seeded Monte Carlo verification of their classical corollaries.
"""

from .core import (
    DEFAULT_DIM_CAP,
    EIG_TOL,
    HERMITIAN_TOL,
    PSD_TOL,
    AlgebraShape,
    Element,
    SpectralDecomposition,
    element_from_dict,
    element_from_json,
    element_to_dict,
    element_to_json,
    embed_in_factors,
    hermitian_part,
    l2_distance,
    l2_norm,
    layer_cake_norm,
    matrix_to_pairs,
    normalized_trace,
    pairs_to_matrix,
    partial_trace,
    schatten_norm,
    spectral_decomposition,
    spectral_projection,
    tail_probability,
    tensor_embed,
    trace_product,
    variance,
    variance_inf_lambda_check,
)
from .conditioning import (
    FactorSet,
    conditional_expectation,
    conditional_independence_check,
    martingale_decomposition,
    martingale_orthogonality_check,
    martingale_sum_check,
    module_property_check,
    tower_identity_check,
    trace_preservation_check,
    variance_additivity_check,
)
from .independence import (
    asymptotic_freeness_diagnostic,
    boolean_independence_check,
    boolean_variance_infimum_check,
    haar_unitary,
    independent_copy_extension,
    random_hermitian,
    tensor_independence_check,
)
from .inequalities import (
    efron_stein_check,
    kadison_step_check,
    lemma_variance_bound,
    matrix_efron_stein_check,
    norm_inequality_check,
    steele_check,
    trace_jensen_check,
)
from .montecarlo import (
    EstimatorReport,
    MatrixFunction,
    ScalarDistribution,
    ScalarFunction,
    classical_efron_stein_mc,
    matrix_efron_stein_mc,
    sample_stream,
)
from .polynomials import NcPolynomial, eval_poly, sum_of_inputs, variables
from .reports import (
    CheckReport,
    Hypothesis,
    InequalityReport,
    build_check_report,
    build_inequality_report,
    check_hypothesis,
    record_failed,
)
from .fuzz import Tolerances, build_scenario, hand_cases, run_scenario, run_suite

__version__ = "0.1.0"
