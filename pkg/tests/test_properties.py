"""Property tests over hypothesis-drawn markets."""
import numpy as np
from hypothesis import given, settings, strategies as st

from peermatch import (
    GreedyConfig,
    HouseSpec,
    InstanceConfig,
    Matching,
    assess_swap,
    build_instance,
    is_two_sided_exchange_stable,
    potential,
    social_welfare,
    solve_greedy,
    welfare_delta,
)
from peermatch.market import apply_swap
from peermatch.stability import approved_swaps

weights = st.sampled_from([0.0, 0.0, 0.5, 1.0, 2.0, 3.0])
values = st.sampled_from([0.0, 1.0, 2.5, 4.0])


@st.composite
def markets(draw, max_n=8):
    m = draw(st.integers(1, 3))
    n = draw(st.integers(2, max_n))
    quotas = draw(st.lists(st.integers(1, 4), min_size=m, max_size=m).filter(lambda q: sum(q) >= n))
    edges = [(u, v, draw(weights)) for u in range(n) for v in range(u + 1, n)]
    mode = draw(st.sampled_from(["objective", "subjective"]))
    desir = "objective" if mode == "objective" else [[draw(values) for _ in range(m)] for _ in range(n)]
    scoring = draw(st.sampled_from(["zero", "additive"]))
    sc = "zero" if scoring == "zero" else [[draw(values) for _ in range(m)] for _ in range(n)]
    houses = [HouseSpec(h, q, draw(values)) for h, q in enumerate(quotas)]
    inst = build_instance(InstanceConfig(n, houses, [e for e in edges if e[2] > 0], desir, sc))
    perm = draw(st.permutations(range(inst.n)))
    a = np.empty(inst.n, dtype=np.intp)
    a[list(perm)] = np.repeat(np.arange(m), inst.quotas)
    return inst, Matching(a, m)


@settings(max_examples=150, deadline=None)
@given(markets())
def test_approved_swap_raises_potential(market):
    inst, mu = market
    for s, t in approved_swaps(inst, mu):
        assert potential(inst, apply_swap(mu, s, t)) > potential(inst, mu) + 1e-9


@settings(max_examples=150, deadline=None)
@given(markets(), st.data())
def test_delta_matches_recompute(market, data):
    inst, mu = market
    a = mu.assignment
    cross = [(s, t) for s in range(inst.n) for t in range(inst.n) if a[s] != a[t]]
    if not cross:
        return
    s, t = data.draw(st.sampled_from(cross))
    nu = apply_swap(mu, s, t)
    dw, dphi = welfare_delta(inst, mu, s, t)
    assert abs(dw - (social_welfare(inst, nu) - social_welfare(inst, mu))) <= 1e-9
    assert abs(dphi - (potential(inst, nu) - potential(inst, mu))) <= 1e-9
    x, y = assess_swap(inst, mu, s, t), assess_swap(inst, mu, t, s)
    assert x.approved == y.approved


@settings(max_examples=100, deadline=None)
@given(markets(max_n=10), st.integers(0, 2**16))
def test_greedy_ends_stable(market, seed):
    inst, mu = market
    final, trace = solve_greedy(inst, mu, GreedyConfig(seed=seed))
    assert trace.terminated_reason == "stable"
    assert is_two_sided_exchange_stable(inst, final).stable
    assert potential(inst, final) >= potential(inst, mu) - 1e-9
