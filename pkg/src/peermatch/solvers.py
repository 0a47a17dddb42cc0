"""Greedy approved-swap ascent and the MCMC heat bath on social welfare."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .market import EPS, Instance, Matching, apply_swap, peer_sums, potential, social_welfare
from .stability import approved_matrix, score_matrix

STABLE = "stable"
ITERATION_CAP = "iteration_cap"


@dataclass(frozen=True)
class GreedyConfig:
    max_iterations: int = 10**6
    pivot_rule: str = "first-improvement"
    seed: int | None = 0
    eps: float = EPS

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.pivot_rule not in ("first-improvement", "best-improvement"):
            raise ValueError(f"unknown pivot rule {self.pivot_rule!r}")


@dataclass(frozen=True)
class McmcConfig:
    """Heat-bath settings.

    ``temperature`` multiplies the welfare change inside the logistic, so
    larger values make the chain greedier. ``final_temperature`` switches on a
    linear schedule from ``temperature`` to that value.
    """

    max_iterations: int = 10**5
    temperature: float = 1.0
    seed: int | None = 0
    polish: bool = False
    final_temperature: float | None = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")
        if self.final_temperature is not None and not self.final_temperature > 0:
            raise ValueError("final_temperature must be positive")

    def temperature_at(self, i: int) -> float:
        if self.final_temperature is None:
            return self.temperature
        frac = (i - 1) / max(self.max_iterations - 1, 1)
        return self.temperature + frac * (self.final_temperature - self.temperature)


class TraceRecord(NamedTuple):
    iteration: int
    welfare: float
    potential: float
    accepted: bool
    s: int = -1
    t: int = -1
    proposal_welfare: float = math.nan


@dataclass
class SolveTrace:
    records: list[TraceRecord]
    best_welfare: float
    best_matching: Matching
    terminated_reason: str
    swaps_accepted: int = 0
    pair_evaluations: int = 0
    polish_trace: "SolveTrace | None" = field(default=None, repr=False)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_matching(inst: Instance, seed=None) -> Matching:
    """Shuffle the padded students and fill houses in order."""
    perm = _rng(seed).permutation(inst.n)
    a = np.empty(inst.n, dtype=np.intp)
    a[perm] = np.repeat(np.arange(inst.m), inst.quotas)
    return Matching(a, inst.m)


def acceptance_probability(delta_welfare: float, temperature: float) -> float:
    """Logistic acceptance ``1 / (1 + exp(-T * dW))``, overflow-safe."""
    x = temperature * delta_welfare
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


class _State:
    """Incrementally maintained matching with peer sums ``A[s, g]``."""

    def __init__(self, inst: Instance, mu: Matching):
        self.inst = inst
        self.w = inst.network.dense()
        self.a = mu.assignment.copy()
        self.A = peer_sums(inst, mu)
        self.D = inst.desirability
        self.sc = score_matrix(inst)
        self.welfare = social_welfare(inst, mu)
        self.phi = potential(inst, mu)

    def matching(self) -> Matching:
        return Matching(self.a.copy(), self.inst.m)

    def deltas(self, s: int, t: int) -> tuple[float, float]:
        a, A, D, w = self.a, self.A, self.D, self.w
        h, g = a[s], a[t]
        wst = w[s, t]
        peer = (A[s, g] - A[s, h] - wst) + (A[t, h] - A[t, g] - wst)
        desir = D[s, g] - D[s, h] + D[t, h] - D[t, g]
        if self.sc is not None:
            sc = self.sc
            houses = sc[t, h] - sc[s, h] + sc[s, g] - sc[t, g]
        else:
            rh = np.flatnonzero(a == h)
            rg = np.flatnonzero(a == g)
            scoring = self.inst.scoring
            houses = scoring.swap_delta(h, rh, s, t) + scoring.swap_delta(g, rg, t, s)
        return float(2.0 * peer + desir + houses), float(peer + desir + houses)

    def swap(self, s: int, t: int, dw: float, dphi: float) -> None:
        h, g = self.a[s], self.a[t]
        diff = self.w[:, s] - self.w[:, t]
        self.A[:, h] -= diff
        self.A[:, g] += diff
        self.a[s], self.a[t] = g, h
        self.welfare += dw
        self.phi += dphi


def solve_greedy(inst: Instance, init: Matching, cfg: GreedyConfig | None = None) -> tuple[Matching, SolveTrace]:
    """Apply approved swaps until none remains or the cap is hit.

    First-improvement scans a random permutation of the pairs, continuing
    from the last applied swap and redrawing the permutation each sweep;
    best-improvement takes the approved swap with the largest potential gain.
    """
    cfg = cfg or GreedyConfig()
    inst.check_matching(init)
    if inst.scoring.additive_scores is None and inst.scoring.mode != "zero":
        raise TypeError("greedy solver needs additive house scoring")
    rng = _rng(cfg.seed)
    st = _State(inst, init)
    n = inst.n
    iu = np.triu_indices(n, k=1)
    npairs = iu[0].size
    records = [TraceRecord(0, st.welfare, st.phi, False)]
    best_w, best_a = st.welfare, st.a.copy()
    swaps = 0
    evaluations = 0
    reason = STABLE

    rank = np.empty((n, n), dtype=np.int64)
    pos = 0
    swept_with_change = False

    def new_sweep():
        r = np.full((n, n), np.iinfo(np.int64).max)
        r[iu] = rng.permutation(npairs)
        return r

    if cfg.pivot_rule == "first-improvement":
        rank = new_sweep()

    while True:
        if swaps >= cfg.max_iterations:
            reason = ITERATION_CAP
            break
        a = st.a
        idx = np.arange(n)
        V = st.D + st.A
        student = V[:, a] - V[idx, a][:, None] - st.w
        house = st.sc[:, a].T - st.sc[idx, a][:, None]
        cross = a[:, None] != a[None, :]
        ok = np.triu(approved_matrix(student, house, cross, cfg.eps), k=1)

        if cfg.pivot_rule == "best-improvement":
            evaluations += int(np.count_nonzero(np.triu(cross, k=1)))
            cand = np.argwhere(ok)
            if len(cand) == 0:
                break
            gain = student + student.T + house + house.T
            g = gain[cand[:, 0], cand[:, 1]]
            s, t = (int(x) for x in cand[int(np.argmax(g))])
        else:
            live = np.where(ok & (rank >= pos), rank, np.iinfo(np.int64).max)
            k = int(live.min())
            if k == np.iinfo(np.int64).max:
                evaluations += npairs - pos
                if not swept_with_change:
                    break
                rank = new_sweep()
                pos = 0
                swept_with_change = False
                continue
            flat = int(np.argmin(live))
            s, t = divmod(flat, n)
            evaluations += k - pos + 1
            pos = k + 1
            swept_with_change = True

        dw, dphi = st.deltas(s, t)
        st.swap(s, t, dw, dphi)
        swaps += 1
        records.append(TraceRecord(swaps, st.welfare, st.phi, True, s, t))
        if st.welfare > best_w:
            best_w, best_a = st.welfare, st.a.copy()

    final = st.matching()
    trace = SolveTrace(records, best_w, Matching(best_a, inst.m), reason, swaps, evaluations)
    return final, trace


def solve_mcmc(inst: Instance, init: Matching, cfg: McmcConfig | None = None) -> tuple[Matching, SolveTrace]:
    """Heat bath on welfare.

    Each iteration draws a uniform unordered pair of students in different
    houses and moves to the swapped matching with probability
    ``1 / (1 + exp(-T * dW))``. The best welfare seen among evaluated
    proposals is tracked. With ``cfg.polish`` the best matching is then run
    through :func:`solve_greedy` and the polished matching is returned.
    """
    cfg = cfg or McmcConfig()
    inst.check_matching(init)
    rng = _rng(cfg.seed)
    st = _State(inst, init)
    n = inst.n
    records = [TraceRecord(0, st.welfare, st.phi, False)]
    best_w, best_a = st.welfare, st.a.copy()
    accepted_count = 0
    if inst.m < 2 or n < 2:
        trace = SolveTrace(records, best_w, Matching(best_a, inst.m), ITERATION_CAP)
        return (polish(inst, init) if cfg.polish else init), trace

    chunk = 4096
    pairs = rng.integers(0, n, size=(chunk, 2))
    coins = rng.random(chunk)
    pi = ci = 0
    for i in range(1, cfg.max_iterations + 1):
        while True:
            if pi == chunk:
                pairs = rng.integers(0, n, size=(chunk, 2))
                pi = 0
            s, t = int(pairs[pi, 0]), int(pairs[pi, 1])
            pi += 1
            if st.a[s] != st.a[t]:
                break
        if s > t:
            s, t = t, s
        dw, dphi = st.deltas(s, t)
        proposal = st.welfare + dw
        if ci == chunk:
            coins = rng.random(chunk)
            ci = 0
        u = coins[ci]
        ci += 1
        take = u < acceptance_probability(dw, cfg.temperature_at(i))
        if proposal > best_w:
            best_w = proposal
            best_a = st.a.copy()
            best_a[s], best_a[t] = best_a[t], best_a[s]
        if take:
            st.swap(s, t, dw, dphi)
            accepted_count += 1
        records.append(TraceRecord(i, st.welfare, st.phi, bool(take), s, t, proposal))

    best = Matching(best_a, inst.m)
    trace = SolveTrace(records, best_w, best, ITERATION_CAP, accepted_count, cfg.max_iterations)
    if cfg.polish:
        final, ptrace = solve_greedy(inst, best, GreedyConfig(seed=cfg.seed))
        trace.polish_trace = ptrace
        trace.terminated_reason = ptrace.terminated_reason
        return final, trace
    return st.matching(), trace


def polish(inst: Instance, mu: Matching, cfg: GreedyConfig | None = None) -> Matching:
    """Greedy from ``mu`` to an exchange-stable matching."""
    return solve_greedy(inst, mu, cfg)[0]


def replay(inst: Instance, init: Matching, trace: SolveTrace) -> list[Matching]:
    """Matchings visited by a trace, reconstructed from the recorded swaps."""
    out = [init]
    mu = init
    for r in trace.records[1:]:
        if r.accepted:
            mu = apply_swap(mu, r.s, r.t)
        out.append(mu)
    return out
