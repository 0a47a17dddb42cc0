"""Many-to-one matching markets with social-network peer effects.

Exchange stability, greedy and heat-bath solvers, a brute-force oracle for
small markets, and price-of-anarchy bounds driven by network clustering.
"""
from .errors import *  # noqa: F401,F403
from .market import (
    EPS,
    AdditiveScoring,
    HouseScoring,
    HouseSpec,
    Instance,
    InstanceConfig,
    Matching,
    SocialNetwork,
    ZeroScoring,
    apply_swap,
    build_instance,
    house_utility,
    potential,
    social_welfare,
    student_utility,
    welfare_delta,
)
from .stability import (
    StabilityReport,
    SwapAssessment,
    alpha,
    assess_swap,
    is_one_sided_exchange_stable,
    is_two_sided_exchange_stable,
)
from .solvers import (
    GreedyConfig,
    McmcConfig,
    SolveTrace,
    acceptance_probability,
    polish,
    random_matching,
    solve_greedy,
    solve_mcmc,
)
from .metrics import (
    BoundReport,
    HeuristicConfig,
    PartitionMetrics,
    bound_report,
    check_cross_edge_lemma,
    check_gamma_lower_bound,
    gamma_star_exact,
    gamma_star_heuristic,
    partition_metrics,
    poa_bound_general,
    poa_bound_simple,
    q_ratio,
)
from .oracle import (
    ExactSummary,
    enumerate_matchings,
    exact_extremes,
    verify_potential_maxima_stable,
    verify_theorem1,
    verify_theorem2,
    verify_welfare_maxima_stable,
)
from .generators import generate_random_instance, generate_tight_example, generate_unbounded_poa

__version__ = "0.1.0"
