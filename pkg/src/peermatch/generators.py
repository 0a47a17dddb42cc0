"""Instance generators: the unbounded-PoA and tight-bound constructions, and
seeded random markets."""
from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .errors import SelfCheckFailed
from .market import HouseSpec, InstanceConfig, Matching, build_instance, social_welfare
from .metrics import partition_metrics
from .stability import is_two_sided_exchange_stable


def generate_unbounded_poa(k: float) -> InstanceConfig:
    """Four students, two houses of quota 2, no house values.

    Students 0 and 1 are close friends (weight k/2); 0-2 and 1-3 are weak ties
    (1/2 each). Pairing the close friends gives welfare k; pairing along the
    weak ties is stable with welfare 2, so the price of anarchy is k/2.
    The construction is verified by exhaustive enumeration before returning.
    """
    from .oracle import exact_extremes

    if not k > 2:
        raise ValueError("k must exceed 2")
    cfg = InstanceConfig(
        n_students=4,
        houses=[HouseSpec("h1", 2, 0.0), HouseSpec("h2", 2, 0.0)],
        edges=[(0, 1, k / 2), (0, 2, 0.5), (1, 3, 0.5)],
    )
    inst = build_instance(cfg)
    summary = exact_extremes(inst)
    bad = Matching.from_rosters([[0, 2], [1, 3]])
    if not (np.isclose(summary.max_welfare, k) and np.isclose(summary.min_stable_welfare, 2.0)
            and is_two_sided_exchange_stable(inst, bad).stable
            and np.isclose(social_welfare(inst, bad), 2.0)):
        raise SelfCheckFailed(f"unbounded-PoA construction failed for k={k}")
    return cfg


def tight_example_matchings(m: int, k: int) -> tuple[Matching, Matching]:
    """(row matching, column matching) for :func:`generate_tight_example`."""
    idx = np.arange(m * m * k)
    row = idx // (m * k)
    col = (idx // k) % m
    return Matching(row, m), Matching(col, m)


def generate_tight_example(m: int, k: int) -> InstanceConfig:
    """An m x m grid of k-student clusters that meets the unweighted bound
    up to a factor k/(k+1).

    Student ``(r, c, i)`` has index ``(r*m + c)*k + i``. Every student of the
    hub column ``m // 2`` is joined to every student in the other clusters of
    its row; clusters have no internal edges. House ``c`` has quota ``m*k``;
    the hub column's house is worth ``k + 1`` and the rest 0. Grouping by row
    captures every edge, and grouping by column (cutting every edge) is
    stable.
    """
    if m < 2 or not k > 2:
        raise ValueError("need m >= 2 and k > 2")
    hub = m // 2
    edges = []
    for r in range(m):
        for i in range(k):
            s = (r * m + hub) * k + i
            for c in range(m):
                if c == hub:
                    continue
                for j in range(k):
                    edges.append((s, (r * m + c) * k + j, 1.0))
    houses = [HouseSpec(c, m * k, float(k + 1) if c == hub else 0.0) for c in range(m)]
    cfg = InstanceConfig(n_students=m * m * k, houses=houses, edges=edges)

    inst = build_instance(cfg)
    rows, cols = tight_example_matchings(m, k)
    ok = (inst.network.total_weight == m * (m - 1) * k * k
          and partition_metrics(inst, rows).gamma == 1.0
          and partition_metrics(inst, cols).gamma == 0.0
          and is_two_sided_exchange_stable(inst, cols).stable)
    if not ok:
        raise SelfCheckFailed(f"tight construction failed for m={m}, k={k}")
    return cfg


def equal_quotas(n: int, m: int) -> list[int]:
    """Split n students over m houses, remainder to the first houses."""
    base, extra = divmod(n, m)
    return [base + (1 if h < extra else 0) for h in range(m)]


def generate_random_instance(n: int, m: int, seed: int | None = None, weight_model: str = "unweighted",
                             p: float = 0.2, quota_rule: str | Sequence[int] = "equal",
                             desirability: str = "objective", scoring: str = "additive",
                             d_high: float = 10.0, integer_d: bool = False,
                             w_high: float = 1.0) -> InstanceConfig:
    """Erdos-Renyi friendships and uniform house values.

    ``weight_model`` is ``"unweighted"`` (weights 1), ``"weighted"``
    (Uniform(0, w_high]) or ``"integer"`` (uniform on 1..w_high).
    ``quota_rule`` is ``"equal"`` or an explicit quota list (sum >= n; the
    surplus becomes holes). House values and house scores are
    Uniform[0, d_high], or uniform integers in 0..d_high with ``integer_d``.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    rng = np.random.default_rng(seed)
    quotas = equal_quotas(n, m) if isinstance(quota_rule, str) else [int(q) for q in quota_rule]
    if isinstance(quota_rule, str) and quota_rule != "equal":
        raise ValueError(f"unknown quota rule {quota_rule!r}")
    if isinstance(quota_rule, str) and n < m:
        quotas = [max(q, 1) for q in quotas]

    iu = np.triu_indices(n, k=1)
    present = rng.random(iu[0].size) < p
    u, v = iu[0][present], iu[1][present]
    if weight_model == "unweighted":
        w = np.ones(u.size)
    elif weight_model == "weighted":
        w = w_high * (1.0 - rng.random(u.size))
    elif weight_model == "integer":
        w = rng.integers(1, int(w_high) + 1, size=u.size).astype(float)
    else:
        raise ValueError(f"unknown weight model {weight_model!r}")
    edges = [(int(a), int(b), float(c)) for a, b, c in zip(u, v, w)]

    def draw(shape):
        if integer_d:
            return rng.integers(0, int(d_high) + 1, size=shape).astype(float)
        return rng.uniform(0.0, d_high, size=shape)

    base = draw(m)
    houses = [HouseSpec(h, quotas[h], float(base[h])) for h in range(m)]
    if desirability == "objective":
        desir = "objective"
    elif desirability == "subjective":
        desir = draw((n, m)).tolist()
    else:
        raise ValueError(f"unknown desirability mode {desirability!r}")
    if scoring == "additive":
        sc = draw((n, m)).tolist()
    elif scoring == "zero":
        sc = "zero"
    else:
        raise ValueError(f"unknown scoring mode {scoring!r}")
    return InstanceConfig(n_students=n, houses=houses, edges=edges, desirability=desir, scoring=sc, seed=seed)
