"""anchorot: anchor-based comparison of measures on heterogeneous spaces.

Each point of a measured metric set is represented by the 1D distribution
of its weighted costs to all points of its set.  On top of that feature
the package provides the anchor energy distance (with an exact Fenwick
sweep evaluator), the entropic anchor Wasserstein distance, anchor energy
plans, an entropic Gromov-Wasserstein baseline, rank-based robustification
and energy-distance permutation tests.
"""

from .core import (
    AnchorFamily,
    Dist1D,
    MMSet,
    anchor_family,
    ot1d,
    rank_transform,
    validate_mmset,
)
from .errors import AnchorError, ValidationError
from .graphs import (
    Graph,
    Matching,
    ba_generate,
    er_generate,
    extract_matching,
    geodesic_cost,
    graph_feature,
    order_correlation,
    read_edgelist,
    write_edgelist,
)
from .stats import TestReport, energy_statistic, permutation_test
from .sweep import anchor_energy, cross_sum_naive, cross_sum_sweep
from .transport import (
    AWResult,
    GWResult,
    SinkhornResult,
    SolverConfig,
    TransportPlan,
    aep,
    anchor_cost_matrix,
    anchor_wasserstein,
    entropic_gw,
    sinkhorn_log,
)

__version__ = "0.1.0"

__all__ = [
    "AnchorFamily", "Dist1D", "MMSet", "anchor_family", "ot1d",
    "rank_transform", "validate_mmset",
    "AnchorError", "ValidationError",
    "Graph", "Matching", "ba_generate", "er_generate", "extract_matching",
    "geodesic_cost", "graph_feature", "order_correlation", "read_edgelist",
    "write_edgelist",
    "TestReport", "energy_statistic", "permutation_test",
    "anchor_energy", "cross_sum_naive", "cross_sum_sweep",
    "AWResult", "GWResult", "SinkhornResult", "SolverConfig", "TransportPlan",
    "aep", "anchor_cost_matrix", "anchor_wasserstein", "entropic_gw",
    "sinkhorn_log",
]
