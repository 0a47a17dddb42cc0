"""Edge-list ingestion, instance JSON, trace CSV and results JSON.

Instance JSON layout::

    {"students": 4,
     "houses": [{"id": "h1", "quota": 2, "D": 2.0}, ...],
     "edges": [[0, 1, 3.0], ...],
     "desirability": "objective" | [[...], ...],
     "scoring": "zero" | [[...], ...],
     "seed": 7}

Serialization is canonical (fixed key order, compact separators, ``repr``
floats), so dumping a loaded instance reproduces the file byte for byte.
"""
from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import logging
import math
from dataclasses import asdict, dataclass, is_dataclass
from pathlib import Path

import numpy as np

from .errors import InstanceError, InvalidMatching, NegativeWeight, ParseError
from .market import HouseSpec, Instance, InstanceConfig, Matching, SocialNetwork, build_instance

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass
class EdgeList:
    network: SocialNetwork
    node_ids: list[int]
    self_loops: int
    lines: int


def read_edge_list(path, policy: str = "max") -> EdgeList:
    """Parse ``u v [w]`` lines into an undirected network.

    Node ids are compacted to ``0..k-1`` in increasing id order. Both
    directions of a pair are merged with ``policy``. Self-loops are dropped
    and counted.
    """
    raw = []
    loops = 0
    nlines = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) not in (2, 3):
                raise ParseError(lineno, f"expected 'u v [w]', got {text!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(lineno, "node ids must be integers") from None
            if u < 0 or v < 0:
                raise ParseError(lineno, "node ids must be non-negative")
            try:
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError:
                raise ParseError(lineno, f"bad weight {parts[2]!r}") from None
            if math.isnan(w):
                raise ParseError(lineno, "weight is NaN")
            if w < 0:
                raise NegativeWeight(f"line {lineno}: negative weight {w}")
            nlines += 1
            if u == v:
                loops += 1
                continue
            raw.append((u, v, w))
    ids = sorted({x for e in raw for x in e[:2]})
    index = {x: i for i, x in enumerate(ids)}
    edges = [(index[u], index[v], w) for u, v, w in raw]
    net = SocialNetwork.from_edges(len(ids), edges, policy=policy)
    if loops:
        log.warning("dropped %d self-loop(s) from %s", loops, path)
    return EdgeList(net, ids, loops, nlines)


def load_edge_list(path, policy: str = "max") -> SocialNetwork:
    return read_edge_list(path, policy).network


# ----------------------------------------------------------- instance JSON

def _num(x: float):
    return float(x)


def instance_to_dict(inst: Instance) -> dict:
    n = inst.real_student_count
    houses = []
    for j, h in enumerate(inst.houses):
        d = None
        if inst.objective:
            d = _num(inst.desirability[0, j]) if n else h.base_desirability
        houses.append({"id": h.id, "quota": int(h.quota), "D": d})
    edges = [[u, v, _num(w)] for u, v, w in inst.network.edges() if u < n and v < n]
    desir = "objective" if inst.objective else [[_num(x) for x in row] for row in inst.desirability[:n]]
    if inst.scoring.mode == "zero":
        scoring = "zero"
    elif inst.scoring.mode == "additive":
        scoring = [[_num(x) for x in row] for row in inst.scoring.additive_scores[:n]]
    else:
        raise InstanceError("custom house scoring cannot be serialized")
    return {"students": n, "houses": houses, "edges": edges, "desirability": desir,
            "scoring": scoring, "seed": inst.seed}


def config_from_dict(d: dict) -> InstanceConfig:
    try:
        houses = [HouseSpec(h["id"], int(h["quota"]), None if h.get("D") is None else float(h["D"]))
                  for h in d["houses"]]
        return InstanceConfig(
            n_students=int(d["students"]),
            houses=houses,
            edges=[tuple(e) for e in d.get("edges", [])],
            desirability=d.get("desirability", "objective"),
            scoring=d.get("scoring", "zero"),
            seed=d.get("seed"),
        )
    except (KeyError, TypeError) as e:
        raise InstanceError(f"malformed instance JSON: {e}") from None


def config_to_dict(cfg: InstanceConfig) -> dict:
    return instance_to_dict(build_instance(cfg))


def dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n"


def dumps_instance(inst: Instance) -> str:
    return dumps(instance_to_dict(inst))


def loads_instance(text: str) -> Instance:
    return build_instance(config_from_dict(json.loads(text)))


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(dumps_instance(inst))


def load_instance(path) -> Instance:
    return loads_instance(Path(path).read_text())


def instance_hash(inst: Instance) -> str:
    return hashlib.sha256(dumps_instance(inst).encode()).hexdigest()[:16]


# --------------------------------------------------------------- matchings

def matching_to_list(inst: Instance, mu: Matching) -> list:
    """House id of every real student (holes are implied)."""
    ids = inst.house_ids
    return [ids[h] for h in mu.assignment[: inst.real_student_count].tolist()]


def matching_from_list(inst: Instance, houses: list) -> Matching:
    """Inverse of :func:`matching_to_list`; holes fill the remaining vacancies in house order."""
    if len(houses) != inst.real_student_count:
        raise InvalidMatching(f"expected {inst.real_student_count} entries, got {len(houses)}")
    ids = inst.house_ids
    try:
        a = [ids.index(h) if h in ids else int(h) for h in houses]
    except (TypeError, ValueError):
        raise InvalidMatching("unknown house in matching") from None
    left = inst.quotas - np.bincount(np.array(a, dtype=np.intp), minlength=inst.m)
    if (left < 0).any():
        raise InvalidMatching("matching overfills a house")
    a += np.repeat(np.arange(inst.m), left).tolist()
    return inst.check_matching(Matching(a, inst.m))


# ------------------------------------------------------------ traces, results

TRACE_COLUMNS = ("iter", "welfare", "potential", "accepted")


def trace_csv(trace) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for r in trace.records:
        w.writerow([r.iteration, repr(float(r.welfare)), repr(float(r.potential)), int(r.accepted)])
    return buf.getvalue()


def write_trace_csv(trace, path) -> None:
    Path(path).write_text(trace_csv(trace))


def rows_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = _io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def to_jsonable(obj, inst: Instance | None = None):
    """Plain-JSON view of results: dataclasses, arrays, matchings, inf."""
    if isinstance(obj, Matching):
        return matching_to_list(inst, obj) if inst is not None else obj.assignment.tolist()
    if is_dataclass(obj) and not isinstance(obj, type):
        return {k: to_jsonable(getattr(obj, k), inst) for k in obj.__dataclass_fields__}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v, inst) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v, inst) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist(), inst)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return None
        return x
    return obj


@dataclass
class RunArtifacts:
    command: str
    instance_hash: str
    seed: int | None
    matching: dict | None = None
    trace: dict | None = None
    metrics: dict | None = None
    bounds: dict | None = None
    exact: dict | None = None
    stability: dict | None = None

    def to_dict(self) -> dict:
        d = {"schema_version": SCHEMA_VERSION}
        d.update({k: v for k, v in asdict(self).items() if v is not None})
        return d
