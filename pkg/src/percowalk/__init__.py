"""Coined quantum walks on dynamically percolated graphs.

Each step applies a coin and then a shift whose edges are independently
present with probability ``p``. Missing edges reflect the walker in place.
The averaged dynamics is a random unitary channel. Its attractor space fixes
the long-time behaviour.
"""

from .analysis import (
    MixingError,
    MixingReport,
    asymptotic_purity_localized,
    fidelity_mixed,
    joint_distribution,
    manhattan,
    mixing_time_estimate,
    mixing_time_measured,
    mixing_times,
    position_marginal,
    purity,
    trace_distance,
)
from .attractors import (
    AttractorBasis,
    AttractorError,
    CatalogError,
    JordanBlockError,
    asymptotic_state,
    catalog_1d,
    classify_asymptotics,
    cycle_case,
    solve_attractors_spectral,
    solve_attractors_twostep,
    time_averaged_state,
)
from .channel import (
    ChannelError,
    LocalChannel,
    Superoperator,
    Trajectory,
    apply_channel_bruteforce,
    apply_channel_local,
    build_superoperator,
    evolve,
    monte_carlo_evolve,
)
from .graph import (
    EdgeConfig,
    EnumerationCapError,
    GraphError,
    PercolationGraph,
    enumerate_configs,
    from_adjacency,
    make_cycle,
    make_line,
)
from .walk import (
    AlphaRational,
    CoinOperator,
    ReflectionOperator,
    WalkError,
    coin_family,
    coin_from_matrix,
    default_reflection,
    hadamard,
    localized_initial_state,
    maximally_mixed,
    reverse_direction_reflection,
    step_operator,
    walk_unitary,
)

__version__ = "0.1.0"
