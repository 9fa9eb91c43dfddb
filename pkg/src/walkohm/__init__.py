"""Random walks on finite networks and the electrical quantities that describe them."""

from .errors import *  # noqa: F401,F403
from .network import (
    Network,
    build_network,
    check_reversibility,
    from_resistances,
    network_from_chain,
    parse_edge_list,
    read_edge_list,
    stationary_vector,
    transition_matrix,
)
from .dirichlet import (
    BoundaryProblem,
    HarmonicSolution,
    check_harmonic,
    solve_exact,
    solve_monte_carlo,
    solve_relaxation,
)

from .chains import (
    AbsorbingChain,
    AbsorbingChainSolution,
    absorbing_chain,
    dirichlet_via_chain,
    fundamental_matrix,
    make_absorbing,
    power_matrix,
)
from .electric import (
    EdgeFlow,
    TwoPointAnalysis,
    analyze_two_point,
    effective_resistance,
    energy_dissipation,
    escape_probability,
    expected_visits_before_absorption,
    reduce_series_parallel,
    verify_conservation_of_energy,
    verify_thomson,
)
from .rayleigh import (
    Bridge,
    Cut,
    ScaleEdge,
    Short,
    apply_edit,
    bridge_update_exact,
    monotonicity_check,
    rank_one_inverse_update,
)
from .lattices import (
    ball_escape_sequence,
    build_ball,
    classify_type,
    flow_certificate_bound,
    k_fuzz,
    orthant_flow,
    shorted_2d_lower_bound,
    tree_resistance,
)
from .classical import (
    expected_returns,
    return_probability_3d,
    u2n,
    u2n_upper_bound_3d,
    watson_integral_check,
)

__version__ = "0.1.0"
