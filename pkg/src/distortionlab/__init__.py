"""Metric-distortion voting laboratory."""

from .dynamics import (
    Coalition,
    CoordinationResult,
    DynamicsResult,
    coordination_dynamics,
    core_membership,
    greedy_dynamics,
    max_coalition_against,
)
from .election import (
    Election,
    Embedding,
    check_consistency,
    check_wave_premise,
    derive_profile,
    realized_distortion,
    social_cost,
    social_costs,
    wave_bound,
)
from .errors import DistortionLabError
from .generators import (
    bound_value,
    gen_random_euclidean,
    gen_random_graph,
    gen_random_power,
    gen_rho_lb,
    gen_split_profile,
    gen_sq_euclid_lb,
    gen_stv_tree_lb,
    gen_ultrametric_lb,
    harmonic,
)
from .metric import (
    GENERAL,
    SQUARED,
    ULTRA,
    BinaryOperator,
    DistanceMatrix,
    GraphSpec,
    MetricClass,
    aspect_ratio,
    check_metric,
    cover_ball,
    doubling_constant,
    euclidean_metric,
    minimax_metric,
    operator_class,
    rho_approx,
    shortest_path_metric,
    uniform_metric,
)
from .roundlog import RoundLog
from .rules import (
    ScoreRule,
    WinnerSet,
    integral_domination_graph,
    perfect_matching,
    plurality_matching_winner,
    score_winners,
    scores,
    stv_trace,
    stv_winners,
    validate_elimination_sequence,
)
from .worstcase import WorstCaseResult, build_lp, worst_case_distortion

__version__ = "0.1.0"
