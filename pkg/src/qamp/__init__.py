"""State-vector simulation of amplitude amplification, search and statistics estimators."""
from .amplify import (
    AmplificationProblem,
    CouplingReport,
    IterationTrace,
    amplify_general,
    build_q,
    build_q_rotated,
    compose_algorithm,
    coupling,
    invert_algorithm,
    optimal_iterations,
    run,
    success_probability,
    two_by_two,
)
from .errors import (
    ContractViolation,
    DataFormatError,
    DomainError,
    NotUnitaryError,
    QampError,
    ResourceLimitError,
    ZeroCouplingError,
)
from .search_apps import (
    NearbyProblem,
    SearchResult,
    classical_search,
    nearby_coupling,
    nearby_search,
    search_from_basis,
    search_from_zero,
    stirling_steps,
)
from .statevector import (
    Dense,
    Diagonal,
    LinearOp,
    PairBlocks,
    Sequence,
    SingleQubit,
    StateVector,
    adjoint,
    apply,
    inner_product,
    is_unitary,
    materialize,
    random_unitary,
)
from .statistics import (
    DataSet,
    born_sample,
    epsilon_of,
    estimate_epsilon,
    estimate_mean,
    estimate_median,
    estimate_mu_stage,
    load_values,
    mean_unitary,
    median_unitary,
    sample_outcomes,
)
from .transforms import (
    Predicate,
    alpha_gate,
    ancilla_oracle,
    invert_state,
    m_gate,
    selective_inversion,
    selective_phase,
    tensor_gate,
    walsh_hadamard,
)

__version__ = "0.1.0"
