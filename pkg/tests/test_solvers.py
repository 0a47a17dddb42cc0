import math
from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from conftest import random_instance
from peermatch import (
    GreedyConfig,
    HouseSpec,
    InstanceConfig,
    McmcConfig,
    acceptance_probability,
    build_instance,
    is_two_sided_exchange_stable,
    polish,
    potential,
    random_matching,
    social_welfare,
    solve_greedy,
    solve_mcmc,
)
from peermatch.generators import generate_random_instance
from peermatch.market import apply_swap
from peermatch.oracle import enumerate_matchings
from peermatch.solvers import replay


def four_students():
    return build_instance(InstanceConfig(4, [HouseSpec(0, 2, 0.0), HouseSpec(1, 2, 0.0)], []))


def test_random_matching_is_deterministic_and_feasible():
    inst = random_instance(1, n_max=10)
    assert random_matching(inst, 7) == random_matching(inst, 7)
    mu = random_matching(four_students(), 3)
    assert [len(r) for r in mu.rosters] == [2, 2]


def test_random_matching_is_uniform():
    inst = four_students()
    rng = np.random.default_rng(0)
    counts = Counter(tuple(random_matching(inst, rng).assignment.tolist()) for _ in range(6000))
    assert len(counts) == 6
    assert chisquare(list(counts.values())).pvalue > 1e-3


def test_config_validation():
    with pytest.raises(ValueError):
        GreedyConfig(max_iterations=0)
    with pytest.raises(ValueError):
        GreedyConfig(pivot_rule="random")
    with pytest.raises(ValueError):
        McmcConfig(temperature=0.0)
    with pytest.raises(ValueError):
        McmcConfig(max_iterations=0)


def test_greedy_instance_a(inst_a, mu_split, mu_a):
    final, trace = solve_greedy(inst_a, mu_split)
    assert social_welfare(inst_a, final) == 16.0
    assert trace.terminated_reason == "stable"
    assert 1 <= trace.swaps_accepted <= 2
    assert polish(inst_a, mu_split) == final


def test_greedy_on_stable_input_is_a_fixed_point(inst_a, mu_a):
    final, trace = solve_greedy(inst_a, mu_a)
    assert final == mu_a
    assert trace.swaps_accepted == 0 and len(trace.records) == 1
    assert polish(inst_a, mu_a) == mu_a


@pytest.mark.parametrize("pivot", ["first-improvement", "best-improvement"])
def test_greedy_reaches_stability(pivot):
    rng = np.random.default_rng(4)
    for i in range(30):
        n = int(rng.integers(5, 31))
        m = int(rng.integers(2, 6))
        cfg = generate_random_instance(n, m, seed=i, p=float(rng.uniform(0.1, 0.5)),
                                       weight_model="weighted", w_high=3.0,
                                       scoring="additive" if i % 2 else "zero",
                                       desirability="subjective" if i % 3 == 0 else "objective")
        inst = build_instance(cfg)
        final, trace = solve_greedy(inst, random_matching(inst, i), GreedyConfig(pivot_rule=pivot, seed=i))
        assert trace.terminated_reason == "stable"
        assert is_two_sided_exchange_stable(inst, final).stable
        phi = trace.column("potential")
        assert np.all(np.diff(phi) > 0)
        assert phi[-1] == pytest.approx(potential(inst, final), abs=1e-7)


def test_greedy_welfare_rises_with_common_values():
    for i in range(40):
        inst = random_instance(50 + i, n_max=10, m_max=3, holes_max=0, general=False)
        final, trace = solve_greedy(inst, random_matching(inst, i), GreedyConfig(seed=i))
        assert np.all(np.diff(trace.column("welfare")) > 0)


def test_greedy_from_every_start_small():
    for i in range(15):
        inst = random_instance(80 + i, n_max=6, m_max=3)
        for mu in enumerate_matchings(inst):
            final, trace = solve_greedy(inst, mu, GreedyConfig(seed=i))
            assert trace.terminated_reason == "stable"
            assert is_two_sided_exchange_stable(inst, final).stable


def test_greedy_iteration_cap(inst_a, mu_split):
    final, trace = solve_greedy(inst_a, mu_split, GreedyConfig(max_iterations=1))
    assert trace.swaps_accepted == 1
    inst = build_instance(generate_random_instance(30, 3, seed=2, p=0.3))
    _, trace = solve_greedy(inst, random_matching(inst, 0), GreedyConfig(max_iterations=1))
    assert trace.terminated_reason in ("iteration_cap", "stable")


def test_acceptance_probability_closed_forms():
    assert acceptance_probability(0.0, 1.0) == 0.5
    assert acceptance_probability(math.log(3), 1.0) == pytest.approx(0.75, abs=1e-15)
    assert acceptance_probability(-1e6, 1.0) == 0.0
    assert acceptance_probability(1e6, 1.0) == 1.0


def test_mcmc_is_reproducible():
    inst = build_instance(generate_random_instance(20, 4, seed=3, p=0.3))
    init = random_matching(inst, 1)
    cfg = McmcConfig(max_iterations=2000, seed=9)
    a, ta = solve_mcmc(inst, init, cfg)
    b, tb = solve_mcmc(inst, init, cfg)
    assert a == b and ta.records == tb.records and ta.best_matching == tb.best_matching


def test_mcmc_best_tracking_by_replay():
    inst = build_instance(generate_random_instance(15, 3, seed=5, p=0.4))
    init = random_matching(inst, 2)
    final, trace = solve_mcmc(inst, init, McmcConfig(max_iterations=3000, temperature=0.5, seed=1))
    visited = replay(inst, init, trace)
    assert visited[-1] == final
    welfare = [social_welfare(inst, mu) for mu in visited]
    assert np.allclose(welfare, trace.column("welfare"), atol=1e-7)
    proposals = trace.column("proposal_welfare")[1:]
    for r, mu in zip(trace.records[1:50], visited):
        assert r.proposal_welfare == pytest.approx(social_welfare(inst, apply_swap(mu, r.s, r.t)), abs=1e-7)
    assert trace.best_welfare == pytest.approx(max(max(welfare), proposals.max()), abs=1e-9)
    assert trace.best_welfare >= max(welfare) - 1e-9
    assert social_welfare(inst, trace.best_matching) == pytest.approx(trace.best_welfare, abs=1e-7)


def test_mcmc_polish_returns_stable_matching():
    inst = build_instance(generate_random_instance(20, 4, seed=6, p=0.3))
    init = random_matching(inst, 0)
    final, trace = solve_mcmc(inst, init, McmcConfig(max_iterations=2000, seed=2, polish=True))
    assert trace.terminated_reason == "stable"
    assert is_two_sided_exchange_stable(inst, final).stable
    assert trace.polish_trace is not None
    assert social_welfare(inst, final) >= social_welfare(inst, trace.best_matching) - 1e-9


def test_mcmc_moves_only_across_houses():
    inst = build_instance(generate_random_instance(12, 3, seed=8, p=0.3))
    init = random_matching(inst, 0)
    _, trace = solve_mcmc(inst, init, McmcConfig(max_iterations=500, seed=0))
    visited = replay(inst, init, trace)
    for r, mu in zip(trace.records[1:], visited):
        assert mu.house_of(r.s) != mu.house_of(r.t) and r.s < r.t


def test_high_temperature_is_greedy_on_welfare():
    inst = build_instance(generate_random_instance(16, 2, seed=4, p=0.4, scoring="zero"))
    init = random_matching(inst, 0)
    _, trace = solve_mcmc(inst, init, McmcConfig(max_iterations=1000, temperature=1e6, seed=0))
    w = trace.column("welfare")
    assert np.all(np.diff(w) >= -1e-9)


def test_linear_schedule():
    cfg = McmcConfig(max_iterations=11, temperature=1.0, final_temperature=3.0)
    assert cfg.temperature_at(1) == 1.0 and cfg.temperature_at(11) == 3.0
    assert cfg.temperature_at(6) == pytest.approx(2.0)
    assert McmcConfig(temperature=2.0).temperature_at(50) == 2.0
