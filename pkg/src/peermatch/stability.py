"""Swap approval and exchange stability.

A swap of students s (in house h) and t (in house g) is *approved* when none
of the four involved agents loses utility and at least one strictly gains.
A matching is two-sided exchange-stable (2ES) when no approved swap exists.
Comparisons use an absolute tolerance ``eps``: a change in ``[-eps, eps]``
counts as indifference.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import HousesActive, OwnHouse
from .market import (
    EPS,
    Instance,
    Matching,
    apply_swap,
    house_utility,
    peer_sums,
    student_utility,
)


@dataclass(frozen=True)
class SwapAssessment:
    s: int
    t: int
    deltas: dict
    approved: bool
    strict_improver_exists: bool


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    witness: tuple[int, int] | None
    pairs_checked: int


def assess_swap(inst: Instance, mu: Matching, s: int, t: int, eps: float = EPS) -> SwapAssessment:
    """Recompute the four involved utilities before and after the swap.

    ``deltas`` is keyed ``("student", s)``, ``("student", t)``,
    ``("house", h)``, ``("house", g)``.
    """
    s, t = inst.check_student(s), inst.check_student(t)
    nu = apply_swap(mu, s, t)
    h, g = mu.house_of(s), mu.house_of(t)
    deltas = {
        ("student", s): student_utility(inst, nu, s) - student_utility(inst, mu, s),
        ("student", t): student_utility(inst, nu, t) - student_utility(inst, mu, t),
        ("house", h): house_utility(inst, nu, h) - house_utility(inst, mu, h),
        ("house", g): house_utility(inst, nu, g) - house_utility(inst, mu, g),
    }
    vals = list(deltas.values())
    strict = any(v > eps for v in vals)
    ok = all(v >= -eps for v in vals)
    return SwapAssessment(s, t, deltas, ok and strict, strict)


# ------------------------------------------------------------ pair kernels

def score_matrix(inst: Instance) -> np.ndarray | None:
    if inst.scoring.mode == "zero":
        return np.zeros((inst.n, inst.m))
    return inst.scoring.additive_scores


def pair_deltas(inst: Instance, mu: Matching, weights: np.ndarray | None = None):
    """Vectorized swap deltas for every ordered pair.

    Returns ``(student, house, cross)`` where ``student[s, t]`` is the change
    in s's utility when s swaps with t, ``house[s, t]`` the change for s's
    house when s leaves and t enters, and ``cross`` masks pairs in different
    houses. Requires additive (or zero) house scoring.
    """
    w = inst.network.dense() if weights is None else weights
    a = mu.assignment
    A = peer_sums(inst, mu)
    V = inst.desirability + A
    idx = np.arange(inst.n)
    cur = V[idx, a]
    student = V[:, a] - cur[:, None] - w
    sc = score_matrix(inst)
    if sc is None:
        raise TypeError("pair kernels need additive house scoring")
    house = sc[:, a].T - sc[idx, a][:, None]
    cross = a[:, None] != a[None, :]
    return student, house, cross


def approved_matrix(student: np.ndarray, house: np.ndarray, cross: np.ndarray, eps: float = EPS) -> np.ndarray:
    """Symmetric boolean matrix of approved swaps."""
    agents = (student, student.T, house, house.T)
    weak = cross.copy()
    strict = np.zeros_like(cross)
    for d in agents:
        weak &= d >= -eps
        strict |= d > eps
    return weak & strict


def approved_swaps(inst: Instance, mu: Matching, eps: float = EPS) -> np.ndarray:
    """All approved swaps as an array of ``(s, t)`` rows with ``s < t``, lexicographic."""
    inst.check_matching(mu)
    if inst.scoring.additive_scores is None and inst.scoring.mode != "zero":
        return _approved_swaps_scalar(inst, mu, eps)
    ok = approved_matrix(*pair_deltas(inst, mu), eps=eps)
    return np.argwhere(np.triu(ok, k=1))


def _approved_swaps_scalar(inst, mu, eps):
    a = mu.assignment
    out = [(s, t) for s in range(inst.n) for t in range(s + 1, inst.n)
           if a[s] != a[t] and assess_swap(inst, mu, s, t, eps).approved]
    return np.array(out, dtype=np.intp).reshape(-1, 2)


def _cross_pairs_before(a: np.ndarray, s: int, t: int) -> int:
    """Number of cross-house pairs ``(i, j), i < j`` up to and including ``(s, t)``."""
    n = a.size
    count = 0
    for i in range(s):
        count += int(np.count_nonzero(a[i + 1:] != a[i]))
    count += int(np.count_nonzero(a[s + 1:t + 1] != a[s]))
    return count


def is_two_sided_exchange_stable(inst: Instance, mu: Matching, eps: float = EPS) -> StabilityReport:
    """Scan every cross-house pair (holes included) for an approved swap.

    The witness is the lexicographically smallest approved ``(s, t)``.
    """
    pairs = approved_swaps(inst, mu, eps)
    a = mu.assignment
    if len(pairs) == 0:
        total = int(np.count_nonzero(a[:, None] != a[None, :])) // 2
        return StabilityReport(True, None, total)
    s, t = (int(x) for x in pairs[0])
    return StabilityReport(False, (s, t), _cross_pairs_before(a, s, t))


def alpha_matrix(inst: Instance, mu: Matching) -> np.ndarray:
    """``alpha[s, g]`` for every student and house (0 on the own house)."""
    a = mu.assignment
    idx = np.arange(inst.n)
    V = inst.desirability + peer_sums(inst, mu)
    return V - V[idx, a][:, None]


def alpha(inst: Instance, mu: Matching, s: int, g: int) -> float:
    """Benefit to s of moving into house g, before removing a swap partner.

    ``D_g - D_own + weight to g's roster - weight to own housemates``; the
    utility change for swapping with ``t`` in g is this minus ``w(s, t)``.
    """
    s = inst.check_student(s)
    h = mu.house_of(s)
    if g == h:
        raise OwnHouse(f"student {s} already lives in house {g}")
    row = inst.network.row(s)
    d = inst.desirability
    return float(d[s, g] - d[s, h] + row[mu.roster(g)].sum() - row[mu.roster(h)].sum())


def is_one_sided_exchange_stable(inst: Instance, mu: Matching, eps: float = EPS) -> StabilityReport:
    """Exchange stability for indifferent houses, phrased through ``alpha``.

    Every cross pair must satisfy one of: s refuses (alpha(s,g) < w), t
    refuses (alpha(t,h) < w), or both are exactly indifferent.
    """
    if inst.scoring.mode != "zero":
        raise HousesActive("one-sided stability needs zero house scoring")
    inst.check_matching(mu)
    a = mu.assignment
    al = alpha_matrix(inst, mu)
    w = inst.network.dense()
    s_to_t = al[:, a]  # alpha(s, house of t)
    refuses = s_to_t < w - eps
    indiff = np.abs(s_to_t - w) <= eps
    ok = refuses | refuses.T | (indiff & indiff.T)
    cross = a[:, None] != a[None, :]
    bad = np.argwhere(np.triu(cross & ~ok, k=1))
    if len(bad) == 0:
        return StabilityReport(True, None, int(np.count_nonzero(cross)) // 2)
    s, t = (int(x) for x in bad[0])
    return StabilityReport(False, (s, t), _cross_pairs_before(a, s, t))


# --------------------------------------------------- batched over matchings

def batch_pair_tensors(inst: Instance, assignments: np.ndarray):
    """Pair deltas for a stack of assignments ``(K, n)``.

    Returns ``(student, house, cross, welfare_delta, potential_delta)``, each
    ``(K, n, n)``.
    """
    X = np.asarray(assignments, dtype=np.intp)
    K, n = X.shape
    m = inst.m
    w = inst.network.dense()
    M = np.zeros((K, n, m))
    M[np.arange(K)[:, None], np.arange(n)[None, :], X] = 1.0
    A = np.einsum("st,ktg->ksg", w, M)
    D = inst.desirability
    sc = score_matrix(inst)
    if sc is None:
        raise TypeError("batched kernels need additive house scoring")
    kk = np.arange(K)[:, None]
    ii = np.arange(n)[None, :]
    A_own = A[kk, ii, X]  # (K, n)
    A_to = np.take_along_axis(A, np.broadcast_to(X[:, None, :], (K, n, n)), axis=2)  # A[k, s, a_t]
    D_own = D[ii, X]
    D_to = D[np.arange(n)[None, :, None], X[:, None, :]]
    peer = A_to - A_own[:, :, None] - w[None]
    desir = D_to - D_own[:, :, None]
    student = peer + desir
    S_own = sc[ii, X]
    S_in = sc[np.arange(n)[None, None, :], X[:, :, None]]  # score of t for s's house
    house = S_in - S_own[:, :, None]
    cross = X[:, :, None] != X[:, None, :]
    pT = peer.transpose(0, 2, 1)
    hsum = house + house.transpose(0, 2, 1)
    dsum = desir + desir.transpose(0, 2, 1)
    dphi = peer + pT + dsum + hsum
    dwel = 2.0 * (peer + pT) + dsum + hsum
    return student, house, cross, dwel, dphi


def batch_approved(student, house, cross, eps: float = EPS) -> np.ndarray:
    """Per-matching approved-swap masks for :func:`batch_pair_tensors` output."""
    sT = student.transpose(0, 2, 1)
    hT = house.transpose(0, 2, 1)
    weak = cross.copy()
    strict = np.zeros_like(cross)
    for d in (student, sT, house, hT):
        weak &= d >= -eps
        strict |= d > eps
    return weak & strict
