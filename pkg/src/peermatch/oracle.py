"""Brute-force ground truth for small markets.

Every quota-exact matching is enumerated and judged with the stability
kernels, giving exact optimum and worst/best stable welfare, the exact price
of anarchy and of stability, and exhaustive checks of the two existence
results (local maxima of the potential, and of welfare, are stable).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import factorial, prod
from typing import Iterator

import numpy as np

from .errors import HypothesisViolated, TooLarge
from .market import EPS, Instance, Matching, social_welfare
from .metrics import internal_weights, q_ratio
from .stability import approved_swaps, batch_approved, batch_pair_tensors, score_matrix

DEFAULT_CAP = 12
DEFAULT_LIMIT = 10**7


def matching_count(quotas) -> int:
    q = [int(x) for x in quotas]
    return factorial(sum(q)) // prod(factorial(x) for x in q)


def _rows(quotas, quotient: bool) -> Iterator[tuple]:
    q = [int(x) for x in quotas]
    n = sum(q)
    order = sorted(range(len(q)), key=lambda h: (q[h], h))
    same_as_prev = [k > 0 and q[order[k]] == q[order[k - 1]] for k in range(len(order))]
    a = [0] * n

    def rec(k, remaining, prev_min):
        if k == len(order):
            yield tuple(a)
            return
        h = order[k]
        for combo in combinations(remaining, q[h]):
            if quotient and same_as_prev[k] and combo[0] < prev_min:
                continue
            for s in combo:
                a[s] = h
            chosen = set(combo)
            yield from rec(k + 1, [s for s in remaining if s not in chosen], combo[0] if combo else -1)

    yield from rec(0, list(range(n)), -1)


def enumerate_assignments(quotas, quotient: bool = False, block: int = 10_000) -> Iterator[np.ndarray]:
    """Yield ``(K, n)`` arrays covering every quota-exact assignment once.

    ``quotient=True`` treats houses with equal quota as interchangeable and
    yields one representative per unordered partition.
    """
    buf = []
    for row in _rows(quotas, quotient):
        buf.append(row)
        if len(buf) == block:
            yield np.array(buf, dtype=np.intp)
            buf = []
    if buf or sum(int(x) for x in quotas) == 0:
        yield np.array(buf, dtype=np.intp).reshape(len(buf), -1)


def _guard(inst: Instance, cap: int, limit: int) -> None:
    if inst.n > cap:
        raise TooLarge(f"{inst.n} students exceeds the enumeration cap {cap}")
    if matching_count(inst.quotas) > limit:
        raise TooLarge(f"{matching_count(inst.quotas)} matchings exceeds the limit {limit}")


def enumerate_matchings(inst: Instance, cap: int = DEFAULT_CAP, limit: int = DEFAULT_LIMIT,
                        quotient: bool = False) -> Iterator[Matching]:
    _guard(inst, cap, limit)
    for blk in enumerate_assignments(inst.quotas, quotient=quotient):
        for row in blk:
            yield Matching(row, inst.m)


def _block_size(n: int) -> int:
    return max(1, 200_000 // max(n * n, 1))


@dataclass
class _Scan:
    welfare: np.ndarray
    stable: np.ndarray
    internal: np.ndarray
    max_dw: np.ndarray
    max_dphi: np.ndarray
    assignments: np.ndarray


def scan(inst: Instance, cap: int = DEFAULT_CAP, limit: int = DEFAULT_LIMIT, eps: float = EPS) -> _Scan:
    """Welfare, stability and best swap gains for every matching."""
    _guard(inst, cap, limit)
    sc = score_matrix(inst)
    parts = []
    for X in enumerate_assignments(inst.quotas, block=_block_size(inst.n)):
        K, n = X.shape
        E_in = internal_weights(inst, X)
        ii = np.arange(n)[None, :]
        if sc is None:
            W = np.array([social_welfare(inst, Matching(r, inst.m)) for r in X])
            stable = np.array([len(approved_swaps(inst, Matching(r, inst.m), eps)) == 0 for r in X])
            nan = np.full(K, np.nan)
            parts.append((W, stable, E_in, nan, nan, X))
            continue
        W = inst.desirability[ii, X].sum(axis=1) + 2.0 * E_in + sc[ii, X].sum(axis=1)
        student, house, cross, dw, dphi = batch_pair_tensors(inst, X)
        stable = ~batch_approved(student, house, cross, eps).any(axis=(1, 2))
        neg = np.where(cross, 0.0, -np.inf)
        max_dw = (dw + neg).max(axis=(1, 2)) if n > 1 else np.full(K, -np.inf)
        max_dphi = (dphi + neg).max(axis=(1, 2)) if n > 1 else np.full(K, -np.inf)
        parts.append((W, stable, E_in, max_dw, max_dphi, X))
    cols = list(zip(*parts))
    return _Scan(*(np.concatenate(c) for c in cols))


def _ratio(top: float, bottom: float) -> float:
    if bottom == 0:
        return 1.0 if top == 0 else float("inf")
    return top / bottom


@dataclass
class ExactSummary:
    matchings_enumerated: int
    stable_count: int
    max_welfare: float
    max_stable_welfare: float
    min_stable_welfare: float
    exact_poa: float
    exact_pos: float
    gamma_star: float
    argmax_welfare: Matching
    argmax_stable: Matching
    argmin_stable: Matching
    min_stable_gamma: float
    poa_via_gamma: float | None = None


def exact_extremes(inst: Instance, cap: int = DEFAULT_CAP, limit: int = DEFAULT_LIMIT, eps: float = EPS) -> ExactSummary:
    """Exact optimum, best and worst stable welfare, PoA, PoS and gamma*.

    For one-sided markets with common house values and no holes the PoA is
    also computed from gamma and Q; ``poa_via_gamma`` holds that second value.
    """
    r = scan(inst, cap, limit, eps)
    if not r.stable.any():
        raise AssertionError("no stable matching found; existence is violated")
    total = inst.network.total_weight
    gam = r.internal / total if total > 0 else np.zeros_like(r.internal)
    st_idx = np.flatnonzero(r.stable)
    i_max = int(np.argmax(r.welfare))
    i_smax = int(st_idx[np.argmax(r.welfare[st_idx])])
    i_smin = int(st_idx[np.argmin(r.welfare[st_idx])])
    W_max = float(r.welfare[i_max])
    W_smax = float(r.welfare[i_smax])
    W_smin = float(r.welfare[i_smin])
    via = None
    if inst.scoring.mode == "zero" and inst.has_exact_quotas and inst.has_objective_desirability and total > 0:
        Q = q_ratio(inst)
        via = _ratio(Q + float(gam.max()), Q + float(gam[st_idx].min()))
    mk = lambda i: Matching(r.assignments[i], inst.m)
    return ExactSummary(
        matchings_enumerated=int(r.welfare.size),
        stable_count=int(st_idx.size),
        max_welfare=W_max,
        max_stable_welfare=W_smax,
        min_stable_welfare=W_smin,
        exact_poa=_ratio(W_max, W_smin),
        exact_pos=_ratio(W_max, W_smax),
        gamma_star=float(gam.max()),
        argmax_welfare=mk(i_max),
        argmax_stable=mk(i_smax),
        argmin_stable=mk(i_smin),
        min_stable_gamma=float(gam[st_idx].min()),
        poa_via_gamma=via,
    )


@dataclass
class LocalMaximaCheck:
    passed: bool
    local_maxima: int
    counterexample: Matching | None = None
    pos: float | None = None


def verify_potential_maxima_stable(inst: Instance, cap: int = DEFAULT_CAP, limit: int = DEFAULT_LIMIT, eps: float = EPS) -> LocalMaximaCheck:
    """Every swap-local maximum of the potential must be exchange-stable."""
    r = scan(inst, cap, limit, eps)
    local = r.max_dphi <= eps
    bad = np.flatnonzero(local & ~r.stable)
    cx = Matching(r.assignments[bad[0]], inst.m) if bad.size else None
    return LocalMaximaCheck(bad.size == 0, int(local.sum()), cx)


def verify_welfare_maxima_stable(inst: Instance, cap: int = DEFAULT_CAP, limit: int = DEFAULT_LIMIT, eps: float = EPS) -> LocalMaximaCheck:
    """Every swap-local maximum of welfare must be stable (no holes, common values)."""
    if not inst.has_exact_quotas:
        raise HypothesisViolated("exact-quotas", f"{inst.hole_count} hole(s) present")
    if not inst.has_objective_desirability:
        raise HypothesisViolated("objective-desirability", "students value houses differently")
    r = scan(inst, cap, limit, eps)
    local = r.max_dw <= eps
    bad = np.flatnonzero(local & ~r.stable)
    W_max = float(r.welfare.max())
    W_smax = float(r.welfare[r.stable].max()) if r.stable.any() else 0.0
    pos = _ratio(W_max, W_smax)
    ok = bad.size == 0 and abs(pos - 1.0) <= 1e-9
    cx = Matching(r.assignments[bad[0]], inst.m) if bad.size else None
    return LocalMaximaCheck(ok, int(local.sum()), cx, pos)


def stable_non_local_maxima(inst: Instance, of: str = "potential", cap: int = DEFAULT_CAP,
                            eps: float = EPS) -> list[Matching]:
    """Stable matchings from which some swap still raises the potential (or welfare)."""
    r = scan(inst, cap, eps=eps)
    gain = r.max_dphi if of == "potential" else r.max_dw
    idx = np.flatnonzero(r.stable & (gain > eps))
    return [Matching(r.assignments[i], inst.m) for i in idx]


# names used by the interface description
verify_theorem1 = verify_potential_maxima_stable
verify_theorem2 = verify_welfare_maxima_stable
