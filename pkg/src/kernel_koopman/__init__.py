"""Koopman and Perron-Frobenius operators as exact finite-rank computations on kernel sections."""

from . import dynamics, kernels, operators, semigroups, structure
from .dynamics import (
    Conjugacy,
    DiscreteMap,
    Factor,
    Flow,
    Symmetry,
    VectorField,
    affine_map,
    apply_map,
    check_relation,
    check_semiflow,
    constant_field,
    disc_automorphism,
    expression_field,
    expression_map,
    flow_map,
    harmonic_oscillator,
    identity_map,
    linear_field,
    linear_map,
    logistic_map,
    mobius_fixed_point,
    mobius_map,
    permutation_map,
    rotation,
    scaling_map,
    snapshot_map,
    translation_map,
    van_der_pol,
    zero_field,
)
from .errors import (
    CapabilityError,
    DegenerateDictionaryError,
    DivergenceError,
    DomainError,
    EvaluationError,
    InconsistentPairError,
    KoopmanError,
    ParameterError,
    NumericalError,
    ParseError,
    RelationShapeError,
    ShapeError,
    UnknownSourceError,
)
from .kernels import (
    check_invariance,
    eval_kernel,
    grad_x_kernel,
    gram,
    make_kernel,
    make_pullback,
)
from .operators import (
    AtomicMeasure,
    Dictionary,
    delta,
    embed_eval,
    embed_eval_many,
    koopman_eval,
    norm_bound_estimate,
    pair,
    pf_apply,
    pf_project,
    rep_matrix_discrete,
    rep_matrix_linear,
    rkhs_norm,
    section,
    span_function,
    spectrum,
)
from .semigroups import (
    TransportProblem,
    generator_identity_check,
    growth_bound,
    koopman_generator_eval,
    lyapunov_check,
    path_integral,
    pf_generator_section,
    pf_semigroup_apply,
    span_norm_derivative,
    transport_residual,
    transport_solve,
)
from .structure import (
    conjugacy_commutator,
    factor_intertwiner,
    koopman_symmetry_check,
    symmetry_commutator,
)

__version__ = "0.1.0"
