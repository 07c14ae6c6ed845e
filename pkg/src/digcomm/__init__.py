"""Hub and authority communicability of directed graphs.

Global indices (``T_hC``, ``T_aC``, ``TC``), node and edge centralities built
from generalized matrix functions, and a greedy engine that adds or removes
edges to steer those indices.
"""

from .centrality import CentralityMethod, EdgeScoreTable, node_scores, score_candidates
from .communicability import (
    GlobalIndices,
    NodeCommunicabilities,
    global_indices,
    node_communicabilities,
    total_authority_communicability,
    total_communicability,
    total_hub_communicability,
)
from .engine import (
    BruteForceObjective,
    ModificationPlan,
    ModificationTrajectory,
    compare_methods,
    run_brute_force,
    run_greedy,
    run_rank2,
)
from .errors import (
    CapacityError,
    DigcommError,
    InvalidModificationError,
    MethodInapplicable,
    NumericalFailure,
    ParameterError,
    ParseError,
    UnsupportedFormatError,
)
from .graph import (
    DOWNDATE,
    UPDATE,
    Digraph,
    apply_modification,
    bipartite_lift,
    degrees,
    enumerate_candidates,
    load_edge_list,
    load_graph,
    load_matrix_market,
    permute,
    random_digraph,
    restrict_candidates,
)
from .spectral import compact_svd, dominant_eigpair_lr, dominant_triplet

__version__ = "0.1.0"
