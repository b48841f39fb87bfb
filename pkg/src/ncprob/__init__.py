"""Numerical workbench for noncommutative independence and CP-map dilations."""

from .algebra_core import (
    CheckResult,
    MapKind,
    MatrixStarAlgebra,
    PositiveMap,
    StructuralError,
    VerificationReport,
    algebra_from_basis,
    average_with_involution,
    choi_matrix,
    compose_maps,
    cp_from_kraus,
    cp_from_stochastic,
    cp_kernel,
    diagonal_algebra,
    diagonal_compression,
    full_matrix_algebra,
    identity_map,
    independent_columns,
    induced_density,
    iterate_map,
    map_from_images,
    normalized_trace_state,
    pauli_algebra,
    scalar_algebra,
    state_from_density,
    subalgebra_project,
    verify_algebra,
    verify_positive_map,
)

__version__ = "0.1.0"

from .hilbert_module import (
    AdjointableOperator,
    HilbertModule,
    LeftAction,
    ModuleTensor,
    QuotientInfo,
    apply,
    compose_adjointable,
    extended_gram,
    gns_construct,
    identity_operator,
    left_action_operator,
    operator_distance,
    quotient_module,
    quotient_null_space,
    rank_one,
    restrict_left_action,
    solve_adjoint,
    tensor_over_base,
    trivial_left_action,
    vector_norm,
    verify_adjointable,
    verify_module,
    zero_operator,
)
from .independence import (
    AlternatingWord,
    ConditionalTensorProduct,
    IndependenceReport,
    JointRealization,
    QuantumProbabilitySpace,
    classical_coins_oracle,
    coins_game,
    conditional_monotone_embed,
    conditional_monotone_moment_formula,
    conditional_tensor_realize,
    monotone_moment_formula,
    monotone_realize,
    random_alternating_word,
    tensor_moment_formula,
    tensor_realize,
    verify_independence,
)
from .dilation import (
    BudgetExceededError,
    DilationScenario,
    DiscreteProductSystem,
    HorizonError,
    IncrementReport,
    MarkovModel,
    central_unit_fiber,
    dilate_discrete,
    markov_scenario,
    random_unital_cp,
    random_window_operator,
    scalar_fiber,
    verify_dilation,
    verify_product_system,
    white_noise_increment_check,
    white_noise_scenario,
)
from .serialization import (
    SCHEMA_TAG,
    SchemaError,
    algebra_from_json,
    algebra_to_json,
    dilation_scenario_from_json,
    emit_json,
    independence_scenario_from_json,
    load_json_file,
    map_from_json,
    map_to_json,
    matrix_from_json,
    matrix_to_json,
    module_from_json,
    module_to_json,
    word_from_json,
    word_to_json,
    words_from_json,
)
from .suites import SUITE_NAMES, RunConfig, run_suite
from .demos import DEMO_NAMES, run_demo
