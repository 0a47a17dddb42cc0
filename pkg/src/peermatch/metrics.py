"""Edge metrics of a matching, the clustering coefficient gamma, and the
price-of-anarchy bounds with their supporting inequality checks.

The bounds hold for one-sided markets (indifferent houses) where every real
student values the houses identically and quotas are exactly filled. The
checkers refuse to evaluate outside those conditions and name the condition
that failed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import DegenerateDelta, EmptyNetwork, HypothesisViolated, TooLarge
from .market import Instance, InstanceConfig, HouseSpec, Matching, SocialNetwork, build_instance

TOL = 1e-9


@dataclass(frozen=True)
class PartitionMetrics:
    total_edge_weight: float
    internal_weight: float
    cross_weights: np.ndarray
    gamma: float


def partition_metrics(inst: Instance, mu: Matching) -> PartitionMetrics:
    inst.check_matching(mu)
    M = mu.onehot()
    cross = np.asarray(M.T @ (inst.network.matrix @ M))
    cross[np.diag_indices_from(cross)] *= 0.5
    total = inst.network.total_weight
    internal = float(np.trace(cross))
    gamma = internal / total if total > 0 else 0.0
    cross.setflags(write=False)
    return PartitionMetrics(total, internal, cross, gamma)


def internal_weights(inst: Instance, assignments: np.ndarray) -> np.ndarray:
    """E_in for each row of an ``(K, n)`` assignment stack."""
    X = np.asarray(assignments)
    edges = inst.network.edges()
    if not edges:
        return np.zeros(X.shape[0])
    u, v, w = (np.array(c) for c in zip(*edges))
    return (X[:, u] == X[:, v]) @ w


def gamma_star_exact(inst: Instance, cap: int = 12, limit: int = 10**7) -> float:
    """Maximum gamma over all quota-exact partitions, by enumeration.

    Houses with equal quotas are interchangeable for gamma, so each unordered
    partition is visited once.
    """
    from .oracle import enumerate_assignments, matching_count

    if inst.n > cap:
        raise TooLarge(f"{inst.n} students exceeds the enumeration cap {cap}")
    if matching_count(inst.quotas) > limit:
        raise TooLarge("too many matchings to enumerate")
    total = inst.network.total_weight
    if total == 0:
        return 0.0
    best = 0.0
    for block in enumerate_assignments(inst.quotas, quotient=True, block=50_000):
        best = max(best, float(internal_weights(inst, block).max()))
    return best / total


@dataclass(frozen=True)
class HeuristicConfig:
    restarts: int = 3
    mcmc_iterations: int = 20_000
    temperature: float = 2.0
    seed: int = 0


def gamma_star_heuristic(inst: Instance, cfg: HeuristicConfig | None = None) -> float:
    """Lower bound on gamma* from the solvers.

    With D = 0 and indifferent houses, welfare is twice the internal weight,
    so the best welfare found gives the best gamma found.
    """
    from .solvers import GreedyConfig, McmcConfig, random_matching, solve_greedy, solve_mcmc

    cfg = cfg or HeuristicConfig()
    total = inst.network.total_weight
    if total == 0:
        return 0.0
    flat = inst.with_houses_zeroed()
    rng = np.random.default_rng(cfg.seed)
    best = 0.0
    for _ in range(cfg.restarts):
        start = random_matching(flat, rng)
        g, _ = solve_greedy(flat, start, GreedyConfig(seed=int(rng.integers(2**31))))
        best = max(best, partition_metrics(flat, g).gamma)
        mc, _ = solve_mcmc(flat, start, McmcConfig(max_iterations=cfg.mcmc_iterations, temperature=cfg.temperature,
                                                   seed=int(rng.integers(2**31)), polish=True))
        best = max(best, partition_metrics(flat, mc).gamma)
    return best


def gamma_star_trend(network: SocialNetwork, house_counts, cfg: HeuristicConfig | None = None) -> list[dict]:
    """Heuristic gamma* of one graph split into equal-quota houses, per house count."""
    n = network.student_count
    rows = []
    for m in house_counts:
        if n % m:
            raise ValueError(f"{n} students do not split evenly into {m} houses")
        q = n // m
        cfgi = InstanceConfig(n, [HouseSpec(h, q, 0.0) for h in range(m)], network.edges())
        inst = build_instance(cfgi)
        rows.append({"m": m, "quota": q, "gamma_star": gamma_star_heuristic(inst, cfg)})
    return rows


# -------------------------------------------------------------- hypotheses

def _one_sided_violation(inst: Instance) -> tuple[str, str] | None:
    if inst.scoring.mode != "zero":
        return "zero-house-utility", "houses must be indifferent (zero scoring)"
    if not inst.has_exact_quotas:
        return "exact-quotas", f"{inst.hole_count} hole(s) present"
    if not inst.has_objective_desirability:
        return "objective-desirability", "students value houses differently"
    return None


def _require_one_sided(inst: Instance) -> None:
    v = _one_sided_violation(inst)
    if v:
        raise HypothesisViolated(*v)


def unit_weight_violation(inst: Instance) -> tuple[str, str] | None:
    """First failed condition of the unweighted bound, or None."""
    v = _one_sided_violation(inst)
    if v:
        return v
    if not inst.network.is_unit_weight():
        return "unit-weights", "edge weights must all be 0 or 1"
    if inst.quotas.min() < 2:
        return "quota-at-least-2", "every quota must be >= 2"
    dv = inst.house_values
    if not np.all(dv == np.round(dv)):
        return "integer-desirability", "house desirabilities must be non-negative integers"
    if not (np.all(inst.quotas == inst.quotas[0]) or np.all(dv == dv[0])):
        return "equal-quotas-or-equal-desirability", "need equal quotas and/or equal house values"
    return None


def q_ratio(inst: Instance) -> float:
    """Desirability mass over friendship mass: sum q_h D_h / (2|E|)."""
    if not inst.has_objective_desirability:
        raise HypothesisViolated("objective-desirability", "Q needs common house values")
    total = inst.network.total_weight
    if total == 0:
        raise EmptyNetwork("Q is undefined for an empty network")
    return float(inst.quotas @ inst.house_values) / (2.0 * total)


def d_delta(values) -> float:
    """Smallest gap between consecutive sorted house values."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    if v.size < 2:
        raise DegenerateDelta("need at least two houses")
    gap = float(np.diff(v).min())
    if gap <= 0:
        raise DegenerateDelta("two houses share a desirability value")
    return gap


def poa_bound_simple(inst: Instance, gamma_star: float) -> float:
    """1 + 2(m-1) gamma*, for unit weights and equal quotas or equal values."""
    v = unit_weight_violation(inst)
    if v:
        raise HypothesisViolated(*v)
    return 1.0 + 2.0 * (inst.m - 1) * gamma_star


def poa_bound_general(inst: Instance, gamma_star: float) -> float:
    """1 + 2(m-1)(gamma* + q_max w_max / D_delta) for weighted networks."""
    _require_one_sided(inst)
    if inst.m < 2:
        raise HypothesisViolated("at-least-two-houses", "D_delta needs two houses")
    dd = d_delta(inst.house_values)
    q_max = int(inst.quotas.max())
    w_max = inst.network.max_weight
    return 1.0 + 2.0 * (inst.m - 1) * (gamma_star + q_max * w_max / dd)


def _ordered(inst: Instance) -> np.ndarray:
    """House indices sorted by value, ties broken by index."""
    return np.lexsort((np.arange(inst.m), inst.house_values))


def ordered_gap_sum(quotas, values) -> float:
    """sum over ordered pairs g < h of q_h (D_h - D_g)."""
    q = np.asarray(quotas, dtype=np.float64)
    d = np.asarray(values, dtype=np.float64)
    order = np.lexsort((np.arange(d.size), d))
    q, d = q[order], d[order]
    total = 0.0
    for h in range(d.size):
        total += q[h] * float(np.sum(d[h] - d[:h]))
    return total


def m_minus_one_ratio(quotas, values) -> float:
    """``ordered_gap_sum / sum q_h D_h``; at most m - 1. Zero when all values are 0."""
    denom = float(np.dot(quotas, values))
    num = ordered_gap_sum(quotas, values)
    if denom == 0:
        return 0.0
    return num / denom


@dataclass(frozen=True)
class PairCheck:
    h: int
    g: int
    lhs: float
    rhs: float
    passed: bool


@dataclass(frozen=True)
class CrossEdgeReport:
    form: str
    pairs: list = field(default_factory=list)
    stability_asserted: bool = False

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.pairs)


def _form(inst: Instance) -> str:
    _require_one_sided(inst)
    return "unit" if unit_weight_violation(inst) is None else "general"


def check_cross_edge_lemma(inst: Instance, mu: Matching, stability_asserted: bool = False) -> CrossEdgeReport:
    """Cross-edge bound for every pair of houses of a stable matching.

    ``E_hg <= max(q_h (D_h - D_g), q_g (D_g - D_h)) + 2 (E_hh + E_gg)``, plus
    ``q_max w_max`` when the unit-weight conditions do not hold. The caller
    says whether ``mu`` is known to be stable; the report carries that flag.
    """
    form = _form(inst)
    pm = partition_metrics(inst, mu)
    E = pm.cross_weights
    q = inst.quotas
    d = inst.house_values
    slack = 0.0 if form == "unit" else float(q.max()) * inst.network.max_weight
    out = []
    for h in range(inst.m):
        for g in range(h + 1, inst.m):
            rhs = max(q[h] * (d[h] - d[g]), q[g] * (d[g] - d[h])) + 2.0 * (E[h, h] + E[g, g]) + slack
            lhs = float(E[h, g])
            out.append(PairCheck(h, g, lhs, float(rhs), lhs <= rhs + TOL))
    return CrossEdgeReport(form, out, stability_asserted)


@dataclass(frozen=True)
class GammaBoundReport:
    form: str
    gamma: float
    bound: float
    passed: bool
    stability_asserted: bool = False


def gamma_lower_bound(inst: Instance) -> float:
    """Lower bound on gamma for stable matchings (clipped at 0)."""
    form = _form(inst)
    total = inst.network.total_weight
    if total == 0:
        return 0.0
    num = total - ordered_gap_sum(inst.quotas, inst.house_values)
    if form == "general":
        num -= comb(inst.m, 2) * float(inst.quotas.max()) * inst.network.max_weight
    return max(num / ((2 * inst.m - 1) * total), 0.0)


def check_gamma_lower_bound(inst: Instance, mu: Matching, stability_asserted: bool = False) -> GammaBoundReport:
    form = _form(inst)
    bound = gamma_lower_bound(inst)
    gamma = partition_metrics(inst, mu).gamma
    return GammaBoundReport(form, gamma, bound, gamma >= bound - TOL, stability_asserted)


@dataclass
class BoundReport:
    m: int
    Q: float | None
    gamma_star: float | None
    gamma_star_exact: bool
    q_max: int
    w_max: float
    D_delta: float | None
    bound_simple: float | None
    bound_general: float | None
    simple_violation: str | None = None
    general_violation: str | None = None


def bound_report(inst: Instance, gamma_star: float | None = None, exact_cap: int = 12,
                 heuristic: HeuristicConfig | None = None) -> BoundReport:
    """Collect every bound ingredient; failed hypotheses are named, not raised."""
    exact = False
    if gamma_star is None:
        try:
            gamma_star = gamma_star_exact(inst, cap=exact_cap)
            exact = True
        except TooLarge:
            gamma_star = gamma_star_heuristic(inst, heuristic)
    try:
        Q = q_ratio(inst)
    except (HypothesisViolated, EmptyNetwork):
        Q = None
    try:
        dd = d_delta(inst.house_values) if inst.has_objective_desirability else None
    except DegenerateDelta:
        dd = None
    simple = general = None
    sv = gv = None
    try:
        simple = poa_bound_simple(inst, gamma_star)
    except HypothesisViolated as e:
        sv = str(e)
    try:
        general = poa_bound_general(inst, gamma_star)
    except HypothesisViolated as e:
        gv = str(e)
    except DegenerateDelta as e:
        gv = f"degenerate-delta: {e}"
    return BoundReport(inst.m, Q, gamma_star, exact, int(inst.quotas.max()), inst.network.max_weight, dd,
                       simple, general, sv, gv)
