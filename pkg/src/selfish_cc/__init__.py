"""Coded caching with selfish cache placement: structures, schemes, converse bounds and oracles."""

from .bounds import (
    GainSummary,
    TradeoffPoint,
    coding_gain_bound,
    f_coefficient,
    f_coefficient_sum,
    lp_lower_bound,
    lp_vertex_enumeration,
    r_lb,
    r_lb_curve,
    r_man,
    ratio_to_man,
    uncoded_loads,
)
from .delivery import (
    DecodeReport,
    DeliveryScheme,
    alpha_demand_scheme,
    circular_scheme_5_4,
    circular_scheme_6_5_t3,
    dumps,
    loads,
    man_scheme,
    uncoded_scheme,
    verify_decodability,
)
from .demands import (
    UserPermutation,
    alpha_demand_witness,
    circular_witness,
    count_circular_demands,
    enumerate_circular_demands,
    fds_request_graph,
    make_alpha_demand,
)
from .fds import CapExceededError, Demand, FdsStructure, UserSet, is_valid_demand
from .oracle import (
    acyclic_set,
    alpha_demand_converse,
    averaged_circular_bound,
    index_coding_bound,
    side_info_graph,
    subfile_appearance_count,
)
from .placement import Placement, SubfileId, selfish_man_placement, unselfish_man_placement

__version__ = "0.1.0"

__all__ = [
    "acyclic_set",
    "alpha_demand_converse",
    "alpha_demand_scheme",
    "alpha_demand_witness",
    "averaged_circular_bound",
    "CapExceededError",
    "circular_scheme_5_4",
    "circular_scheme_6_5_t3",
    "circular_witness",
    "coding_gain_bound",
    "count_circular_demands",
    "DecodeReport",
    "DeliveryScheme",
    "Demand",
    "dumps",
    "enumerate_circular_demands",
    "f_coefficient",
    "f_coefficient_sum",
    "fds_request_graph",
    "FdsStructure",
    "GainSummary",
    "index_coding_bound",
    "is_valid_demand",
    "loads",
    "lp_lower_bound",
    "lp_vertex_enumeration",
    "make_alpha_demand",
    "man_scheme",
    "Placement",
    "r_lb",
    "r_lb_curve",
    "r_man",
    "ratio_to_man",
    "selfish_man_placement",
    "side_info_graph",
    "subfile_appearance_count",
    "SubfileId",
    "TradeoffPoint",
    "uncoded_loads",
    "uncoded_scheme",
    "unselfish_man_placement",
    "UserPermutation",
    "UserSet",
    "verify_decodability",
]
