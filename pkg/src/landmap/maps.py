"""Learned landmark maps and global path queries."""
from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from typing import Any, Mapping

from .graph import LabeledGraph, LandmarkPartition, bfs_distances, label_key


class MapFormatError(ValueError):
    """Malformed map document; the message names the offending location."""


class QueryError(KeyError):
    pass


def _route_key(labels: tuple):
    return (len(labels), [label_key(x) for x in labels])


@dataclass(frozen=True)
class LearnedMap:
    """Landmarks plus directed label-sequence routes between them.

    ``routes[(a, b)]`` is sorted by length with no duplicate sequences.
    """

    landmarks: tuple[str, ...]
    routes: Mapping[tuple[str, str], tuple[tuple, ...]]
    params_used: Mapping[str, Any] = field(default_factory=dict)
    provenance: Mapping[str, Any] = field(default_factory=dict)

    @classmethod
    def build(cls, landmarks, routes, params_used=None, provenance=None) -> "LearnedMap":
        landmarks = tuple(sorted(set(landmarks)))
        known = set(landmarks)
        clean = {}
        for (a, b), seqs in routes.items():
            if a not in known or b not in known:
                raise ValueError(f"route {a}->{b} has an endpoint outside the landmark set")
            uniq = sorted({tuple(s) for s in seqs}, key=_route_key)
            if uniq:
                clean[(a, b)] = tuple(uniq)
        clean = dict(sorted(clean.items()))
        return cls(landmarks, clean, dict(params_used or {}), dict(provenance or {}))

    def shortest_route(self, a: str, b: str) -> tuple | None:
        seqs = self.routes.get((a, b))
        return seqs[0] if seqs else None


@dataclass(frozen=True)
class PathAnswer:
    waypoints: tuple[str, ...]
    labels: tuple
    length: int


def global_path_query(lmap: LearnedMap, u: str, v: str) -> PathAnswer | None:
    """Shortest composition of stored routes from ``u`` to ``v``; ``None`` if not connected."""
    for x in (u, v):
        if x not in lmap.landmarks:
            raise QueryError(f"unknown landmark {x!r}")
    if u == v:
        return PathAnswer((u,), (), 0)
    out: dict[str, list[tuple[str, tuple]]] = {}
    for (a, b), seqs in lmap.routes.items():
        out.setdefault(a, []).append((b, seqs[0]))
    dist = {u: 0}
    prev: dict[str, tuple[str, tuple]] = {}
    heap = [(0, u)]
    while heap:
        d, a = heapq.heappop(heap)
        if d > dist[a]:
            continue
        if a == v:
            break
        for b, seq in out.get(a, ()):
            nd = d + len(seq)
            if nd < dist.get(b, nd + 1):
                dist[b] = nd
                prev[b] = (a, seq)
                heapq.heappush(heap, (nd, b))
    if v not in dist:
        return None
    waypoints, pieces = [v], []
    x = v
    while x != u:
        x, seq = prev[x][0], prev[x][1]
        waypoints.append(x)
        pieces.append(seq)
    labels = tuple(lab for seq in reversed(pieces) for lab in seq)
    return PathAnswer(tuple(reversed(waypoints)), labels, dist[v])


def stretch_bound(c: int) -> float:
    return c / (c - 2)


def stretch_ratio(lmap: LearnedMap, graph: LabeledGraph, partition: LandmarkPartition,
                  u: str, v: str) -> float | None:
    """Answer length over true shortest length; ``None`` when undefined or unanswerable."""
    if u == v:
        return None
    ans = global_path_query(lmap, u, v)
    if ans is None:
        return None
    a, b = partition.vertex_of(u), partition.vertex_of(v)
    return ans.length / bfs_distances(graph, a)[b]


# -- serialization -------------------------------------------------------------

def serialize_map(lmap: LearnedMap) -> dict:
    routes = []
    for (a, b), seqs in lmap.routes.items():
        for s in seqs:
            routes.append({"from": a, "to": b, "labels": list(s), "length": len(s)})
    return {
        "landmarks": list(lmap.landmarks),
        "routes": routes,
        "params_used": dict(lmap.params_used),
        "provenance": dict(lmap.provenance),
    }


def deserialize_map(doc: Any) -> LearnedMap:
    if not isinstance(doc, Mapping):
        raise MapFormatError("document: expected an object")
    for key in ("landmarks", "routes"):
        if key not in doc:
            raise MapFormatError(f"document: missing field '{key}'")
    lms = doc["landmarks"]
    if not isinstance(lms, list) or not all(isinstance(x, str) for x in lms):
        raise MapFormatError("landmarks: expected an array of strings")
    if len(set(lms)) != len(lms):
        raise MapFormatError("landmarks: duplicate entries")
    if not isinstance(doc["routes"], list):
        raise MapFormatError("routes: expected an array")
    routes: dict[tuple[str, str], list[tuple]] = {}
    for i, r in enumerate(doc["routes"]):
        where = f"routes[{i}]"
        if not isinstance(r, Mapping):
            raise MapFormatError(f"{where}: expected an object")
        for key in ("from", "to", "labels"):
            if key not in r:
                raise MapFormatError(f"{where}: missing field '{key}'")
        if r["from"] not in lms or r["to"] not in lms:
            raise MapFormatError(f"{where}: endpoint not in landmarks")
        labels = r["labels"]
        if not isinstance(labels, list) or any(isinstance(x, (list, dict)) or x is None for x in labels):
            raise MapFormatError(f"{where}.labels: expected an array of scalar labels")
        if "length" in r and r["length"] != len(labels):
            raise MapFormatError(f"{where}.length: {r['length']} does not match {len(labels)} labels")
        routes.setdefault((r["from"], r["to"]), []).append(tuple(labels))
    for key in ("params_used", "provenance"):
        if not isinstance(doc.get(key, {}), Mapping):
            raise MapFormatError(f"{key}: expected an object")
    return LearnedMap.build(lms, routes, doc.get("params_used"), doc.get("provenance"))


def dumps_map(lmap: LearnedMap) -> str:
    return json.dumps(serialize_map(lmap), indent=2, sort_keys=True) + "\n"


def save_map(path, lmap: LearnedMap) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_map(lmap))


def load_map(path) -> LearnedMap:
    with open(path) as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MapFormatError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}") from None
    return deserialize_map(doc)


def map_to_dot(lmap: LearnedMap) -> str:
    lines = ["digraph landmarks {"]
    for name in lmap.landmarks:
        lines.append(f'  "{name}";')
    for (a, b), seqs in lmap.routes.items():
        lines.append(f'  "{a}" -> "{b}" [label="{len(seqs[0])}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
