import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import instance_a_config, random_instance
from peermatch import (
    HouseScoring,
    HouseSpec,
    InstanceConfig,
    Matching,
    SocialNetwork,
    apply_swap,
    build_instance,
    house_utility,
    potential,
    social_welfare,
    student_utility,
    welfare_delta,
)
from peermatch.errors import (
    AsymmetricInput,
    InstanceError,
    InvalidMatching,
    NegativeWeight,
    QuotaDeficit,
    SameHouse,
)
from peermatch.market import house_utilities, student_utilities
from peermatch.metrics import partition_metrics
from peermatch.solvers import random_matching


def two_houses(n, edges=(), d=(0.0, 0.0), scoring="zero", desirability="objective"):
    return build_instance(InstanceConfig(n, [HouseSpec("h1", 2, d[0]), HouseSpec("h2", 2, d[1])],
                                         list(edges), desirability, scoring))


# ----------------------------------------------------------------- network

def test_network_is_symmetric_and_sparse():
    net = SocialNetwork.from_edges(4, [(0, 1, 3.0), (2, 3, 1.5)])
    assert net.weight(0, 1) == net.weight(1, 0) == 3.0
    assert net.weight(0, 2) == 0.0
    assert net.edges() == [(0, 1, 3.0), (2, 3, 1.5)]
    assert net.total_weight == 4.5 and net.max_weight == 3.0


def test_network_merge_policies():
    edges = [(0, 1, 2.0), (1, 0, 5.0)]
    assert SocialNetwork.from_edges(2, edges, "max").weight(0, 1) == 5.0
    assert SocialNetwork.from_edges(2, edges, "min").weight(0, 1) == 2.0
    assert SocialNetwork.from_edges(2, edges, "sum").weight(0, 1) == 7.0
    assert SocialNetwork.from_edges(2, edges, "mean").weight(0, 1) == 3.5
    with pytest.raises(AsymmetricInput):
        SocialNetwork.from_edges(2, edges, "strict")


def test_network_rejects_bad_edges():
    with pytest.raises(NegativeWeight):
        SocialNetwork.from_edges(2, [(0, 1, -1.0)])
    with pytest.raises(InstanceError):
        SocialNetwork.from_edges(2, [(0, 5, 1.0)])


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 15), st.lists(st.tuples(st.integers(0, 14), st.integers(0, 14),
                                              st.floats(0, 10, allow_nan=False)), max_size=40))
def test_symmetric_lookup(n, raw):
    edges = [(u % n, v % n, w) for u, v, w in raw if u % n != v % n]
    net = SocialNetwork.from_edges(n, edges, "max")
    for s in range(n):
        for t in range(n):
            assert net.weight(s, t) == net.weight(t, s)
    assert np.array_equal(net.dense(), net.dense().T)


# ---------------------------------------------------------------- instance

def test_padding_and_deficit():
    assert two_houses(4).hole_count == 0 and two_houses(4).n == 4
    inst = two_houses(3)
    assert inst.hole_count == 1 and inst.n == 4 and inst.real_student_count == 3
    assert inst.is_hole(3) and not inst.is_hole(2)
    with pytest.raises(QuotaDeficit):
        two_houses(5)


def test_hole_has_zero_utility_everywhere():
    inst = two_houses(3, [(0, 1, 2.0), (1, 2, 1.0)], d=(4.0, 1.0))
    for seed in range(10):
        mu = random_matching(inst, seed)
        assert student_utility(inst, mu, 3) == 0.0


def test_student_utility_examples():
    inst = build_instance(instance_a_config())
    mu = Matching.from_rosters([[0, 1], [2, 3]])
    assert student_utility(inst, mu, 0) == 5.0
    lone = two_houses(4, [], d=(7.0, 0.0))
    assert student_utility(lone, mu, 0) == 7.0


def test_house_utility_modes():
    mu = Matching.from_rosters([[0, 1], [2, 3]])
    zero = build_instance(instance_a_config())
    assert house_utility(zero, mu, 0) == house_utility(zero, mu, 1) == 0.0
    add = two_houses(4, scoring=[[4.0, 0.0], [1.5, 0.0], [0.0, 2.0], [0.0, 9.0]])
    assert house_utility(add, mu, 0) == 5.5
    holed = two_houses(3, scoring=[[0.0, 0.0], [0.0, 0.0], [0.0, 2.0]])
    assert house_utility(holed, mu, 1) == 2.0


def test_instance_a_welfare_and_potential(inst_a, mu_a, mu_split):
    assert social_welfare(inst_a, mu_a) == 16.0
    assert social_welfare(inst_a, mu_split) == 4.0
    assert potential(inst_a, mu_a) == 10.0
    scored = build_instance(instance_a_config(scoring=[[1.0, 1.0]] * 4))
    assert potential(scored, mu_a) == 14.0
    assert social_welfare(two_houses(4), mu_a) == 0.0
    assert potential(two_houses(4), mu_a) == 0.0


def test_apply_swap_examples(inst_a, mu_a):
    nu = apply_swap(mu_a, 0, 2)
    assert nu == Matching.from_rosters([[2, 1], [0, 3]])
    assert mu_a.house_of(0) == 0
    with pytest.raises(SameHouse):
        apply_swap(mu_a, 0, 1)
    holed = two_houses(3)
    mu = holed.check_matching(Matching.from_rosters([[0, 1], [2, 3]]))
    nu = apply_swap(mu, 0, 3)
    assert nu.house_of(0) == 1 and nu.house_of(3) == 0


def test_welfare_delta_examples(inst_a, mu_split):
    dw, dphi = welfare_delta(inst_a, mu_split, 2, 1)
    assert dw == 12.0
    assert dphi == potential(inst_a, apply_swap(mu_split, 2, 1)) - potential(inst_a, mu_split)
    holed = build_instance(InstanceConfig(2, [HouseSpec("a", 2, 1.0), HouseSpec("b", 2, 3.0)], [(0, 1, 1.0)]))
    mu = Matching.from_rosters([[0, 2], [1, 3]])
    assert welfare_delta(holed, mu, 2, 3) == (0.0, 0.0)


def test_check_matching_rejects_bad_quota():
    inst = two_houses(4)
    with pytest.raises(InvalidMatching):
        inst.check_matching(Matching([0, 0, 0, 1], 2))
    with pytest.raises(InvalidMatching):
        inst.check_matching(Matching([0, 0, 1], 2))


def test_matching_views_agree():
    mu = Matching([1, 0, 1, 0], 2)
    assert [r.tolist() for r in mu.rosters] == [[1, 3], [0, 2]]
    assert Matching.from_rosters(mu.rosters) == mu
    assert hash(Matching.from_rosters(mu.rosters)) == hash(mu)
    with pytest.raises((ValueError, TypeError)):
        mu.assignment[0] = 0


# -------------------------------------------------------------- invariants

def test_welfare_identity_one_sided():
    """W = 2 E_in + sum q_h D_h with exact quotas, common values, indifferent houses."""
    rng = np.random.default_rng(11)
    for i in range(1000):
        inst = random_instance(i, n_max=12, m_max=4, holes_max=0, general=False)
        mu = random_matching(inst, rng)
        e_in = partition_metrics(inst, mu).internal_weight
        expected = 2 * e_in + float(inst.quotas @ inst.house_values)
        assert social_welfare(inst, mu) == pytest.approx(expected, abs=1e-9)


def test_welfare_decomposition_matches_sums():
    for i in range(50):
        inst = random_instance(500 + i)
        mu = random_matching(inst, i)
        assert social_welfare(inst, mu) == pytest.approx(
            student_utilities(inst, mu).sum() + house_utilities(inst, mu).sum(), abs=1e-9)


def test_incremental_deltas_match_recompute():
    rng = np.random.default_rng(5)
    for i in range(200):
        inst = random_instance(900 + i, n_max=10, m_max=4)
        mu = random_matching(inst, rng)
        a = mu.assignment
        for s in range(inst.n):
            for t in range(s + 1, inst.n):
                if a[s] == a[t]:
                    continue
                nu = apply_swap(mu, s, t)
                dw, dphi = welfare_delta(inst, mu, s, t)
                assert dw == pytest.approx(social_welfare(inst, nu) - social_welfare(inst, mu), abs=1e-9)
                assert dphi == pytest.approx(potential(inst, nu) - potential(inst, mu), abs=1e-9)


def test_custom_scoring_delta_matches_recompute():
    class Favourite(HouseScoring):
        """House 0 likes having student 0, nothing else counts."""
        mode = "custom"

        def utility(self, house, roster):
            return 3.0 if house == 0 and 0 in set(np.asarray(roster).tolist()) else 0.0

    cfg = InstanceConfig(4, [HouseSpec(0, 2, 1.0), HouseSpec(1, 2, 0.0)], [(0, 1, 1.0)], scoring=Favourite())
    inst = build_instance(cfg)
    mu = Matching.from_rosters([[1, 2], [0, 3]])
    nu = apply_swap(mu, 0, 1)
    dw, _ = welfare_delta(inst, mu, 0, 1)
    assert dw == pytest.approx(social_welfare(inst, nu) - social_welfare(inst, mu))


def test_holes_are_inert():
    """Adding holes leaves every real student's utility unchanged."""
    rng = np.random.default_rng(3)
    for i in range(100):
        n = int(rng.integers(2, 8))
        quotas = [int(x) for x in rng.integers(1, 4, size=3)]
        while sum(quotas) < n:
            quotas[int(rng.integers(3))] += 1
        edges = [(u, v, float(rng.uniform(0, 3))) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.5]
        d = rng.uniform(0, 5, size=3)
        exact_q = list(quotas)
        base = build_instance(InstanceConfig(n, [HouseSpec(h, q, float(d[h])) for h, q in enumerate(quotas)], edges))
        bigger = list(quotas)
        bigger[int(rng.integers(3))] += 2
        padded = build_instance(InstanceConfig(n, [HouseSpec(h, q, float(d[h])) for h, q in enumerate(bigger)], edges))
        mu = random_matching(base, rng)
        extra = np.repeat(np.arange(3), np.array(bigger) - np.array(exact_q))
        ext = Matching(np.concatenate([mu.assignment, extra]), 3)
        real = np.arange(n)
        assert np.allclose(student_utilities(base, mu)[real], student_utilities(padded, ext)[real])
        assert np.all(student_utilities(padded, ext)[n:] == 0)
