"""Market data model: friendship network, houses, instances, matchings and
the utility / welfare / potential functions evaluated on them.

Students are integers ``0..n-1``. Instances are padded with *holes* (students
without friends or preferences) so that every house quota is exactly filled;
hole indices come after the real students.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    AsymmetricInput,
    InstanceError,
    InvalidMatching,
    InvalidStudent,
    NegativeWeight,
    QuotaDeficit,
    SameHouse,
)

EPS = 1e-9

_DENSE_LIMIT = 4096
_POLICIES = ("strict", "max", "min", "sum", "mean")


def _merge(weights: list[float], policy: str) -> float:
    if policy == "max":
        return max(weights)
    if policy == "min":
        return min(weights)
    if policy == "sum":
        return float(sum(weights))
    if policy == "mean":
        return float(sum(weights)) / len(weights)
    raise ValueError(f"unknown symmetrization policy {policy!r}")


class SocialNetwork:
    """Weighted undirected friendship graph stored as a symmetric CSR matrix."""

    def __init__(self, matrix: sp.spmatrix):
        m = sp.csr_matrix(matrix, dtype=np.float64)
        if m.shape[0] != m.shape[1]:
            raise InstanceError("adjacency matrix must be square")
        m.eliminate_zeros()
        if m.nnz and m.data.min() < 0:
            raise NegativeWeight("edge weights must be non-negative")
        if m.diagonal().any():
            raise InstanceError("self-loops are not allowed")
        if (abs(m - m.T) > 0).nnz:
            raise AsymmetricInput("adjacency matrix is not symmetric")
        m.sort_indices()
        self._matrix = m
        self._dense = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[float]], policy: str = "strict") -> "SocialNetwork":
        """Build from ``(u, v[, w])`` triples.

        ``strict`` rejects a pair given twice with different weights; the other
        policies merge every weight seen for an unordered pair.
        """
        if policy not in _POLICIES:
            raise ValueError(f"unknown symmetrization policy {policy!r}")
        seen: dict[tuple[int, int], list[float]] = {}
        for e in edges:
            u, v = int(e[0]), int(e[1])
            w = float(e[2]) if len(e) > 2 else 1.0
            if not (0 <= u < n and 0 <= v < n):
                raise InstanceError(f"edge ({u}, {v}) refers to a student outside 0..{n - 1}")
            if u == v:
                raise InstanceError(f"self-loop on student {u}")
            if w < 0 or math.isnan(w):
                raise NegativeWeight(f"edge ({u}, {v}) has weight {w}")
            seen.setdefault((min(u, v), max(u, v)), []).append(w)
        rows, cols, vals = [], [], []
        for (u, v), ws in seen.items():
            if policy == "strict":
                if any(x != ws[0] for x in ws):
                    raise AsymmetricInput(f"pair ({u}, {v}) given with weights {ws}")
                w = ws[0]
            else:
                w = _merge(ws, policy)
            if w == 0:
                continue
            rows += [u, v]
            cols += [v, u]
            vals += [w, w]
        mat = sp.csr_matrix((vals, (rows, cols)), shape=(n, n), dtype=np.float64)
        return cls(mat)

    @property
    def student_count(self) -> int:
        return self._matrix.shape[0]

    @property
    def matrix(self) -> sp.csr_matrix:
        return self._matrix

    def dense(self) -> np.ndarray:
        """Dense adjacency matrix (cached, read-only)."""
        if self._dense is None:
            if self.student_count > _DENSE_LIMIT:
                raise MemoryError(f"refusing dense copy of a {self.student_count}-node network")
            d = self._matrix.toarray()
            d.setflags(write=False)
            self._dense = d
        return self._dense

    def weight(self, s: int, t: int) -> float:
        return float(self._matrix[s, t])

    def row(self, s: int) -> np.ndarray:
        if self.student_count <= _DENSE_LIMIT:
            return self.dense()[s]
        return self._matrix.getrow(s).toarray().ravel()

    def edges(self) -> list[tuple[int, int, float]]:
        """Each undirected edge once, as ``(u, v, w)`` with ``u < v``, sorted."""
        upper = sp.triu(self._matrix, k=1).tocoo()
        out = sorted(zip(upper.row.tolist(), upper.col.tolist(), upper.data.tolist()))
        return [(int(u), int(v), float(w)) for u, v, w in out]

    @property
    def edge_count(self) -> int:
        return self._matrix.nnz // 2

    @property
    def total_weight(self) -> float:
        """|E|: half the sum of the adjacency matrix."""
        return float(self._matrix.sum()) / 2.0

    @property
    def max_weight(self) -> float:
        return float(self._matrix.data.max()) if self._matrix.nnz else 0.0

    def is_unit_weight(self) -> bool:
        return bool(np.all(self._matrix.data == 1.0))

    def padded(self, n: int) -> "SocialNetwork":
        """Same graph with isolated nodes appended up to ``n`` nodes."""
        if n < self.student_count:
            raise ValueError("cannot shrink a network")
        m = self._matrix.tocoo()
        return SocialNetwork(sp.csr_matrix((m.data, (m.row, m.col)), shape=(n, n)))

    def subgraph(self, nodes: Sequence[int]) -> "SocialNetwork":
        idx = np.asarray(nodes, dtype=np.intp)
        return SocialNetwork(self._matrix[idx][:, idx])


@dataclass(frozen=True)
class HouseSpec:
    id: object
    quota: int
    base_desirability: float | None = None

    def __post_init__(self):
        if int(self.quota) != self.quota or self.quota < 1:
            raise InstanceError(f"house {self.id!r}: quota must be a positive integer, got {self.quota}")
        if self.base_desirability is not None and self.base_desirability < 0:
            raise NegativeWeight(f"house {self.id!r}: negative desirability")


class HouseScoring:
    """How a house values the set of students it receives.

    Subclasses override :meth:`utility`. ``additive_scores`` is an ``n x m``
    matrix when the scoring is a per-student sum (fast paths use it) and
    ``None`` otherwise.
    """

    mode = "custom"
    additive_scores: np.ndarray | None = None

    def utility(self, house: int, roster: np.ndarray) -> float:
        raise NotImplementedError

    def swap_delta(self, house: int, roster: np.ndarray, leaving: int, entering: int) -> float:
        after = np.where(roster == leaving, entering, roster)
        return self.utility(house, after) - self.utility(house, roster)

    def padded(self, n: int) -> "HouseScoring":
        return self


class ZeroScoring(HouseScoring):
    """One-sided market: houses are indifferent to everything."""

    mode = "zero"

    def __init__(self, n: int = 0, m: int = 0):
        self.additive_scores = np.zeros((n, m))
        self.additive_scores.setflags(write=False)

    def utility(self, house, roster):
        return 0.0

    def swap_delta(self, house, roster, leaving, entering):
        return 0.0

    def padded(self, n):
        return ZeroScoring(n, self.additive_scores.shape[1])


class AdditiveScoring(HouseScoring):
    """House utility is the sum of per-student scores over its roster."""

    mode = "additive"

    def __init__(self, scores):
        s = np.array(scores, dtype=np.float64)
        if s.ndim != 2:
            raise InstanceError("score table must be 2-dimensional (students x houses)")
        if s.size and (np.isnan(s).any() or s.min() < 0):
            raise NegativeWeight("house scores must be non-negative")
        s.setflags(write=False)
        self.additive_scores = s

    def utility(self, house, roster):
        return float(self.additive_scores[np.asarray(roster, dtype=np.intp), house].sum())

    def swap_delta(self, house, roster, leaving, entering):
        return float(self.additive_scores[entering, house] - self.additive_scores[leaving, house])

    def padded(self, n):
        s = self.additive_scores
        out = np.zeros((n, s.shape[1]))
        out[: s.shape[0]] = s
        return AdditiveScoring(out)


@dataclass
class InstanceConfig:
    """Everything needed to build an :class:`Instance`.

    ``desirability`` is ``"objective"`` (use each house's base desirability for
    every student) or a students x houses table. ``scoring`` is ``"zero"`` or a
    students x houses score table. ``graph_file`` is read with
    :func:`peermatch.io.load_edge_list` and replaces ``edges``.
    """

    n_students: int
    houses: list[HouseSpec]
    edges: list = field(default_factory=list)
    desirability: object = "objective"
    scoring: object = "zero"
    seed: int | None = None
    graph_file: str | None = None
    policy: str | None = None


class Instance:
    """A validated, hole-padded market. Treat as immutable."""

    def __init__(self, network: SocialNetwork, houses: Sequence[HouseSpec], desirability: np.ndarray,
                 scoring: HouseScoring, real_student_count: int, objective: bool = False,
                 seed: int | None = None):
        self.network = network
        self.houses = tuple(houses)
        d = np.array(desirability, dtype=np.float64)
        d.setflags(write=False)
        self.desirability = d
        self.scoring = scoring
        self.real_student_count = int(real_student_count)
        self.objective = bool(objective)
        self.seed = seed
        self.quotas = np.array([h.quota for h in self.houses], dtype=np.intp)
        self.quotas.setflags(write=False)
        n = int(self.quotas.sum())
        if network.student_count != n or d.shape != (n, len(self.houses)):
            raise InstanceError("instance arrays are not padded to the quota total")

    @property
    def n(self) -> int:
        """Padded student count (sum of quotas)."""
        return int(self.quotas.sum())

    padded_student_count = n

    @property
    def m(self) -> int:
        return len(self.houses)

    @property
    def hole_count(self) -> int:
        return self.n - self.real_student_count

    @property
    def house_ids(self) -> list:
        return [h.id for h in self.houses]

    def house_index(self, house_id) -> int:
        for i, h in enumerate(self.houses):
            if h.id == house_id:
                return i
        raise KeyError(house_id)

    def is_hole(self, s: int) -> bool:
        return s >= self.real_student_count

    @property
    def has_exact_quotas(self) -> bool:
        return self.hole_count == 0

    @property
    def has_objective_desirability(self) -> bool:
        """Every real student values every house identically."""
        real = self.desirability[: self.real_student_count]
        return bool(real.shape[0] == 0 or np.all(real == real[0]))

    @property
    def house_values(self) -> np.ndarray:
        """The common house desirabilities D_h (requires objective desirability)."""
        if not self.has_objective_desirability:
            raise InstanceError("desirability is not objective")
        if self.real_student_count == 0:
            return np.zeros(self.m)
        return self.desirability[0].copy()

    @property
    def zero_houses(self) -> bool:
        return self.scoring.mode == "zero"

    def check_student(self, s) -> int:
        if not isinstance(s, (int, np.integer)) or not 0 <= s < self.n:
            raise InvalidStudent(f"student {s!r} is not in 0..{self.n - 1}")
        return int(s)

    def check_matching(self, mu: "Matching") -> "Matching":
        a = mu.assignment
        if a.shape != (self.n,):
            raise InvalidMatching(f"matching covers {a.shape[0]} students, instance has {self.n}")
        if a.size and (a.min() < 0 or a.max() >= self.m):
            raise InvalidMatching("matching refers to an unknown house")
        counts = np.bincount(a, minlength=self.m)
        if not np.array_equal(counts, self.quotas):
            raise InvalidMatching(f"roster sizes {counts.tolist()} do not match quotas {self.quotas.tolist()}")
        return mu

    def with_houses_zeroed(self) -> "Instance":
        """Copy with D = 0 everywhere and indifferent houses (same graph and quotas)."""
        houses = [HouseSpec(h.id, h.quota, 0.0) for h in self.houses]
        return Instance(self.network, houses, np.zeros_like(self.desirability), ZeroScoring(self.n, self.m),
                        self.real_student_count, objective=True, seed=self.seed)

    def __repr__(self):
        return (f"Instance(students={self.real_student_count}, holes={self.hole_count}, "
                f"quotas={self.quotas.tolist()}, edges={self.network.edge_count}, scoring={self.scoring.mode})")


def _table(value, n_real: int, m: int, what: str) -> np.ndarray:
    t = np.array(value, dtype=np.float64)
    if t.shape != (n_real, m):
        raise InstanceError(f"{what} table has shape {t.shape}, expected {(n_real, m)}")
    if t.size and (np.isnan(t).any() or t.min() < 0):
        raise NegativeWeight(f"{what} values must be non-negative")
    return t


def build_instance(config: InstanceConfig) -> Instance:
    """Validate a config and pad it with holes so quotas are exactly met."""
    houses = list(config.houses)
    if not houses:
        raise InstanceError("at least one house is required")
    n_real = int(config.n_students)
    if n_real < 0:
        raise InstanceError("student count must be non-negative")
    m = len(houses)
    n = sum(h.quota for h in houses)
    if n < n_real:
        raise QuotaDeficit(f"quotas sum to {n} but there are {n_real} students")

    if config.graph_file is not None:
        from .io import load_edge_list

        net = load_edge_list(config.graph_file, policy=config.policy or "max")
        if net.student_count > n_real:
            raise InstanceError(f"graph has {net.student_count} nodes but only {n_real} students")
        net = net.padded(n)
    else:
        net = SocialNetwork.from_edges(n, config.edges, policy=config.policy or "strict")
        if any(max(int(e[0]), int(e[1])) >= n_real for e in config.edges):
            raise InstanceError("edge endpoint is not a real student")

    d = np.zeros((n, m))
    objective = isinstance(config.desirability, str)
    if objective:
        if config.desirability != "objective":
            raise InstanceError(f"unknown desirability spec {config.desirability!r}")
        base = [h.base_desirability for h in houses]
        if any(b is None for b in base):
            raise InstanceError("objective desirability needs base_desirability on every house")
        d[:n_real] = np.array(base, dtype=np.float64)
    else:
        d[:n_real] = _table(config.desirability, n_real, m, "desirability")

    if isinstance(config.scoring, str):
        if config.scoring != "zero":
            raise InstanceError(f"unknown scoring spec {config.scoring!r}")
        scoring: HouseScoring = ZeroScoring(n, m)
    elif isinstance(config.scoring, HouseScoring):
        scoring = config.scoring.padded(n)
    else:
        s = np.zeros((n, m))
        s[:n_real] = _table(config.scoring, n_real, m, "score")
        scoring = AdditiveScoring(s)

    return Instance(net, houses, d, scoring, n_real, objective=objective, seed=config.seed)


class Matching:
    """Assignment of every (padded) student to one house.

    Holds the student -> house array and the derived rosters. Instances of this
    class are never mutated; :func:`apply_swap` returns a new one.
    """

    __slots__ = ("_assignment", "_m", "_rosters")

    def __init__(self, assignment, m: int | None = None):
        a = np.array(assignment, dtype=np.intp)
        if a.ndim != 1:
            raise InvalidMatching("assignment must be one-dimensional")
        a.setflags(write=False)
        self._assignment = a
        self._m = int(m) if m is not None else (int(a.max()) + 1 if a.size else 0)
        self._rosters = None

    @classmethod
    def from_rosters(cls, rosters: Sequence[Iterable[int]]) -> "Matching":
        rosters = [list(r) for r in rosters]
        n = sum(len(r) for r in rosters)
        a = np.full(n, -1, dtype=np.intp)
        for h, r in enumerate(rosters):
            for s in r:
                if not 0 <= s < n or a[s] != -1:
                    raise InvalidMatching(f"student {s} listed twice or out of range")
                a[s] = h
        return cls(a, len(rosters))

    @property
    def assignment(self) -> np.ndarray:
        return self._assignment

    @property
    def m(self) -> int:
        return self._m

    @property
    def rosters(self) -> tuple[np.ndarray, ...]:
        if self._rosters is None:
            order = np.argsort(self._assignment, kind="stable")
            bounds = np.searchsorted(self._assignment[order], np.arange(self._m + 1))
            self._rosters = tuple(order[bounds[h]:bounds[h + 1]] for h in range(self._m))
        return self._rosters

    def house_of(self, s: int) -> int:
        return int(self._assignment[s])

    def roster(self, h: int) -> np.ndarray:
        return self.rosters[h]

    def onehot(self) -> np.ndarray:
        out = np.zeros((self._assignment.size, self._m))
        out[np.arange(self._assignment.size), self._assignment] = 1.0
        return out

    def __len__(self):
        return int(self._assignment.size)

    def __eq__(self, other):
        if not isinstance(other, Matching):
            return NotImplemented
        return self._m == other._m and np.array_equal(self._assignment, other._assignment)

    def __hash__(self):
        return hash((self._m, self._assignment.tobytes()))

    def __repr__(self):
        return "Matching(" + " | ".join(",".join(map(str, r.tolist())) for r in self.rosters) + ")"


# ---------------------------------------------------------------- utilities

def peer_sums(inst: Instance, mu: Matching) -> np.ndarray:
    """``A[s, g]``: total weight from student s to the students of house g."""
    return np.asarray(inst.network.matrix @ mu.onehot())


def student_utilities(inst: Instance, mu: Matching) -> np.ndarray:
    a = mu.assignment
    idx = np.arange(inst.n)
    return inst.desirability[idx, a] + peer_sums(inst, mu)[idx, a]


def student_utility(inst: Instance, mu: Matching, s: int) -> float:
    """House desirability for s plus the weight of its friends in the same house."""
    s = inst.check_student(s)
    h = mu.house_of(s)
    mates = mu.roster(h)
    return float(inst.desirability[s, h] + inst.network.row(s)[mates].sum())


def house_utility(inst: Instance, mu: Matching, h: int) -> float:
    return float(inst.scoring.utility(h, mu.roster(h)))


def house_utilities(inst: Instance, mu: Matching) -> np.ndarray:
    return np.array([house_utility(inst, mu, h) for h in range(inst.m)])


def social_welfare(inst: Instance, mu: Matching) -> float:
    """Sum of all student and house utilities."""
    inst.check_matching(mu)
    return float(student_utilities(inst, mu).sum() + house_utilities(inst, mu).sum())


def potential(inst: Instance, mu: Matching) -> float:
    """House utilities + own-house desirabilities + internal edge weight.

    Strictly increases under every approved swap, so its local maxima are
    exchange-stable.
    """
    inst.check_matching(mu)
    a = mu.assignment
    idx = np.arange(inst.n)
    internal = 0.5 * peer_sums(inst, mu)[idx, a].sum()
    return float(house_utilities(inst, mu).sum() + inst.desirability[idx, a].sum() + internal)


def _swap_houses(mu: Matching, s: int, t: int) -> tuple[int, int]:
    n = len(mu)
    for x in (s, t):
        if not isinstance(x, (int, np.integer)) or not 0 <= x < n:
            raise InvalidStudent(f"student {x!r} is not in 0..{n - 1}")
    h, g = mu.house_of(s), mu.house_of(t)
    if h == g:
        raise SameHouse(f"students {s} and {t} are both in house {h}")
    return h, g


def apply_swap(mu: Matching, s: int, t: int) -> Matching:
    """Return the matching with s and t exchanged; ``mu`` is left untouched."""
    h, g = _swap_houses(mu, s, t)
    a = mu.assignment.copy()
    a[s], a[t] = g, h
    return Matching(a, mu.m)


def welfare_delta(inst: Instance, mu: Matching, s: int, t: int) -> tuple[float, float]:
    """(change in welfare, change in potential) for swapping s and t.

    Only the rows of s and t restricted to the two affected rosters are read.
    """
    h, g = _swap_houses(mu, s, t)
    rh, rg = mu.roster(h), mu.roster(g)
    ws, wt = inst.network.row(s), inst.network.row(t)
    wst = float(ws[t])
    d = inst.desirability
    # peer-weight change seen by s and by t; housemates see the same amounts
    peer_s = float(ws[rg].sum()) - wst - float(ws[rh].sum())
    peer_t = float(wt[rh].sum()) - wst - float(wt[rg].sum())
    desir = float(d[s, g] - d[s, h] + d[t, h] - d[t, g])
    houses = inst.scoring.swap_delta(h, rh, s, t) + inst.scoring.swap_delta(g, rg, t, s)
    dw = 2.0 * (peer_s + peer_t) + desir + houses
    dphi = (peer_s + peer_t) + desir + houses
    return dw, dphi
