"""Reproducible test worlds: grids, building corridors, random landmark graphs."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .graph import (
    GraphError,
    LabeledGraph,
    LandmarkPartition,
    all_landmarks,
    build_graph,
    diameter,
    landmark_parameter,
    make_partition,
    partition_from_landmarks,
)

OPPOSITE = {"N": "S", "S": "N", "E": "W", "W": "E"}


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class LandmarkPlan:
    """Place ``count`` landmarks at random so that the landmark parameter equals ``target_r``."""

    count: int
    target_r: int | None = None
    max_tries: int = 5000


def gen_grid(width: int, height: int, landmarks="all", seed: int = 0) -> tuple[LabeledGraph, LandmarkPartition]:
    """Grid with globally consistent N/S/E/W labels.

    Vertex ``y * width + x`` sits at ``(x, y)``; North increases ``y``.
    ``landmarks`` is ``"all"``, an iterable of vertex ids or ``(x, y)``
    pairs, or a :class:`LandmarkPlan`.
    """
    if width < 2 or height < 2:
        raise GenerationError("grid needs width, height >= 2")
    vid = lambda x, y: y * width + x  # noqa: E731
    edges = []
    for y in range(height):
        for x in range(width):
            if x + 1 < width:
                edges.append((vid(x, y), vid(x + 1, y), "E", "W"))
            if y + 1 < height:
                edges.append((vid(x, y), vid(x, y + 1), "N", "S"))
    coords = [[v % width, v // width] for v in range(width * height)]
    meta = {"kind": "grid", "width": width, "height": height, "coords": coords}
    graph = build_graph(width * height, edges, 4, meta)

    if not isinstance(landmarks, (str, LandmarkPlan)):
        landmarks = [vid(*p) if isinstance(p, (tuple, list)) else int(p) for p in landmarks]
    return graph, _place(graph, landmarks, seed)


def _place(graph: LabeledGraph, plan, seed: int) -> LandmarkPartition:
    if plan == "all":
        return all_landmarks(graph)
    if isinstance(plan, str):
        raise GenerationError(f"unknown landmark plan {plan!r}")
    if not isinstance(plan, LandmarkPlan):
        try:
            return partition_from_landmarks(graph, plan)
        except GraphError as exc:
            raise GenerationError(str(exc)) from None
    if not 1 <= plan.count <= graph.n:
        raise GenerationError(f"landmark count {plan.count} outside 1..{graph.n}")
    if plan.target_r is not None:
        if plan.count == graph.n and plan.target_r != 0:
            raise GenerationError("every vertex is a landmark, so r must be 0")
        if plan.target_r > diameter(graph):
            raise GenerationError(f"target r={plan.target_r} exceeds graph diameter {diameter(graph)}")
    rng = np.random.default_rng(seed)
    for _ in range(plan.max_tries):
        chosen = rng.choice(graph.n, size=plan.count, replace=False)
        if plan.target_r is None or landmark_parameter(graph, chosen.tolist()) == plan.target_r:
            return partition_from_landmarks(graph, chosen.tolist())
    raise GenerationError(
        f"no placement of {plan.count} landmarks with r={plan.target_r} found in {plan.max_tries} tries")


def junction_type(directions: Iterable[str]) -> str:
    dirs = set(directions)
    n = len(dirs)
    if n == 1:
        return "dead-end"
    if n == 2:
        return "straight" if dirs in ({"N", "S"}, {"E", "W"}) else "L"
    return "T" if n == 3 else "+"


def gen_building(corridor_spec: Mapping, seed: int = 0) -> tuple[LabeledGraph, LandmarkPartition]:
    """Corridor graph whose vertices are hallway junctions.

    ``corridor_spec``::

        {"nodes": {"a": [0, 0], "b": [0, 2], ...},   # optional coordinates
         "segments": [{"from": "a", "to": "b"}, ...]}

    With coordinates, segments must be axis-aligned and edges get compass
    labels; junctions are classed as dead-end, L, straight, T or +.  Without
    coordinates, labels are shuffled local integers and the class is the
    degree-based type.  Junction types that occur once are landmarks.
    """
    segments = corridor_spec.get("segments")
    if not segments:
        raise GenerationError("corridor spec needs a non-empty 'segments' list")
    nodes = corridor_spec.get("nodes")
    names: list[str] = []
    for i, seg in enumerate(segments):
        if not isinstance(seg, Mapping) or "from" not in seg or "to" not in seg:
            raise GenerationError(f"segments[{i}] needs 'from' and 'to'")
        for key in ("from", "to"):
            if seg[key] not in names:
                names.append(seg[key])
    index = {name: i for i, name in enumerate(names)}
    rng = np.random.default_rng(seed)

    incident: list[list[tuple[int, str | None]]] = [[] for _ in names]
    pairs = []
    for i, seg in enumerate(segments):
        u, v = index[seg["from"]], index[seg["to"]]
        d = None
        if nodes is not None:
            try:
                (x0, y0), (x1, y1) = nodes[seg["from"]], nodes[seg["to"]]
            except (KeyError, TypeError, ValueError):
                raise GenerationError(f"segments[{i}]: missing or malformed node coordinates") from None
            dx, dy = x1 - x0, y1 - y0
            if (dx == 0) == (dy == 0):
                raise GenerationError(f"segments[{i}] is not axis-aligned")
            d = ("E" if dx > 0 else "W") if dy == 0 else ("N" if dy > 0 else "S")
        incident[u].append((v, d))
        incident[v].append((u, OPPOSITE[d] if d else None))
        pairs.append((u, v, d))

    if nodes is not None:
        edges = [(u, v, d, OPPOSITE[d]) for u, v, d in pairs]
        kinds = [junction_type(d for _, d in inc) for inc in incident]
    else:
        local = [list(rng.permutation(len(inc))) for inc in incident]
        cursor = [0] * len(names)
        edges = []
        for u, v, _ in pairs:
            lu, lv = int(local[u][cursor[u]]), int(local[v][cursor[v]])
            cursor[u] += 1
            cursor[v] += 1
            edges.append((u, v, lu, lv))
        kinds = [{1: "dead-end", 2: "L", 3: "T"}.get(len(inc), "+") for inc in incident]

    meta = {"kind": "building", "junctions": names}
    try:
        graph = build_graph(len(names), edges, 4, meta)
    except GraphError as exc:
        raise GenerationError(f"malformed corridor spec: {exc}") from None

    groups: dict[str, list[int]] = {}
    for v, kind in enumerate(kinds):
        groups.setdefault(kind, []).append(v)
    if all(len(g) > 1 for g in groups.values()):
        raise GenerationError("no junction type occurs exactly once, so there are no landmarks")
    order = sorted(groups)
    return graph, make_partition(graph, [groups[k] for k in order], order)


SAMPLE_BUILDING = {
    # two parallel corridors joined by three cross halls, with side rooms
    "nodes": {
        "a": [0, 0], "b": [2, 0], "c": [4, 0], "d": [6, 0],
        "e": [0, 2], "f": [2, 2], "g": [4, 2], "h": [6, 2],
        "i": [2, 3], "j": [4, -1], "k": [7, 2],
    },
    "segments": [
        {"from": "a", "to": "b"}, {"from": "b", "to": "c"}, {"from": "c", "to": "d"},
        {"from": "e", "to": "f"}, {"from": "f", "to": "g"}, {"from": "g", "to": "h"},
        {"from": "a", "to": "e"}, {"from": "b", "to": "f"}, {"from": "d", "to": "h"},
        {"from": "f", "to": "i"}, {"from": "c", "to": "j"}, {"from": "h", "to": "k"},
    ],
}


def gen_random_landmark_graph(
    vertex_count: int,
    max_degree: int,
    landmark_count: int,
    target_r: int,
    seed: int = 0,
    extra_edges: int | None = None,
    max_tries: int = 200,
) -> tuple[LabeledGraph, LandmarkPartition]:
    """Random connected graph (spanning tree plus extra edges) with planted landmarks.

    Labels at each vertex are a shuffled ``0 .. degree-1``.  Landmark sets are
    rejection-sampled until the landmark parameter is exactly ``target_r``;
    the graph itself is regenerated if a graph admits no such placement
    within the retry budget.
    """
    if vertex_count < 2 or max_degree < 2:
        raise GenerationError("need vertex_count >= 2 and max_degree >= 2")
    if not 1 <= landmark_count <= vertex_count:
        raise GenerationError(f"landmark_count {landmark_count} outside 1..{vertex_count}")
    if landmark_count == vertex_count and target_r != 0:
        raise GenerationError("landmark_count == vertex_count forces r = 0")
    if landmark_count < vertex_count and target_r < 1:
        raise GenerationError("target_r must be >= 1 when some vertices are not landmarks")
    if extra_edges is None:
        extra_edges = vertex_count // 2
    rng = np.random.default_rng(seed)
    diameters = []
    for _ in range(max_tries):
        graph = _random_graph(rng, vertex_count, max_degree, extra_edges)
        diam = diameter(graph)
        diameters.append(diam)
        if target_r > diam:
            continue
        plan = LandmarkPlan(landmark_count, target_r, max_tries=50)
        try:
            return graph, _place(graph, plan, int(rng.integers(2**63)))
        except GenerationError:
            continue
    if target_r > max(diameters):
        raise GenerationError(f"target_r={target_r} exceeds every sampled graph diameter (max {max(diameters)})")
    raise GenerationError(
        f"could not plant {landmark_count} landmarks with r={target_r} in {max_tries} graphs")


def _random_graph(rng, n, cap, extra) -> LabeledGraph:
    deg = [0] * n
    pairs = set()
    order = rng.permutation(n)
    for i in range(1, n):
        open_ = [int(u) for u in order[:i] if deg[u] < cap]
        u = open_[int(rng.integers(len(open_)))]
        v = int(order[i])
        pairs.add((min(u, v), max(u, v)))
        deg[u] += 1
        deg[v] += 1
    for _ in range(extra):
        u, v = (int(x) for x in rng.choice(n, size=2, replace=False))
        key = (min(u, v), max(u, v))
        if key in pairs or deg[u] >= cap or deg[v] >= cap:
            continue
        pairs.add(key)
        deg[u] += 1
        deg[v] += 1
    labels = [list(rng.permutation(d)) for d in deg]
    cursor = [0] * n
    edges = []
    for u, v in sorted(pairs):
        edges.append((u, v, int(labels[u][cursor[u]]), int(labels[v][cursor[v]])))
        cursor[u] += 1
        cursor[v] += 1
    return build_graph(n, edges, cap, {"kind": "random"})


def generate(spec: Mapping) -> tuple[LabeledGraph, LandmarkPartition]:
    """Build a world from a generator description.

    ``{"kind": "grid", "width", "height", "landmarks", "seed"}``,
    ``{"kind": "building", "corridors": {...}, "seed"}`` or
    ``{"kind": "random", "vertex_count", "max_degree", "landmark_count", "target_r", "seed"}``.
    For grids, ``landmarks`` is ``"all"``, a list of vertex ids, or
    ``{"count": k, "target_r": r}``.
    """
    kind = spec.get("kind")
    seed = int(spec.get("seed", 0))
    try:
        if kind == "grid":
            plan = spec.get("landmarks", "all")
            if isinstance(plan, Mapping):
                plan = LandmarkPlan(int(plan["count"]), plan.get("target_r"))
            return gen_grid(int(spec["width"]), int(spec["height"]), plan, seed)
        if kind == "building":
            return gen_building(spec.get("corridors", SAMPLE_BUILDING), seed)
        if kind == "random":
            return gen_random_landmark_graph(
                int(spec["vertex_count"]), int(spec["max_degree"]),
                int(spec["landmark_count"]), int(spec["target_r"]), seed)
    except KeyError as exc:
        raise GenerationError(f"generator spec missing field {exc.args[0]!r}") from None
    if kind is None:
        raise GenerationError("generator spec missing field 'kind'")
    raise GenerationError(f"unknown generator kind {kind!r}")
