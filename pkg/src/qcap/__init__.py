"""Entanglement-assisted classical capacities of quantum channels, numerically.

All entropic quantities are in bits.
"""

from .capacity import (
    CapacityEstimate,
    EncodingEnsemble,
    IsometryEncoder,
    PinchingCapacity,
    StrongConverse,
    assisted_holevo,
    assisted_mutual,
    assisted_mutual_upper,
    assisted_values,
    average_output,
    channel_mutual_information,
    covariant_assisted_capacity,
    erasure_assisted_capacity,
    holevo_information,
    holevo_kkt_spread,
    holevo_upper_bound,
    identity_encoding,
    lemma2_residual,
    max_sandwiched_divergence,
    mutual_information_wrt,
    optimal_pinching_assist,
    pinching_capacity,
    random_cq_state,
    shor_rate,
    strong_converse_exponent,
)
from .channels import (
    ChoiMatrix,
    QuantumChannel,
    apply,
    channel_from_spec,
    check_unitary_covariance,
    depolarizing_channel,
    erasure_channel,
    identity_channel,
    pinching_channel,
    random_channel,
    replacement_channel,
    tensor_power,
    unitary_channel,
)
from .coding import (
    SemiGlobalOp,
    TypeClass,
    dephasing_mutual_chain,
    enumerate_types,
    lemma8_gap,
    normalize_rounds,
)
from .discord import (
    Decomposition,
    discord_of_formation_value,
    eigen_decomposition,
    entanglement_of_formation_pure,
    gap_bound_check,
    relative_entropy_of_discord,
)
from .entropy import (
    binary_entropy,
    binary_renyi,
    conditional_entropy,
    mutual_information,
    relative_entropy,
    sandwiched_renyi,
    von_neumann_entropy,
)
from .qcore import (
    BipartitePureState,
    DensityOperator,
    DimensionError,
    WeylPhaseSet,
    dephase_ensemble,
    maximally_entangled,
    partial_trace,
    permutation_operator,
    purify,
    tensor,
    weyl_phase_set,
)

__version__ = "0.1.0"
