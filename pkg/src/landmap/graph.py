"""Labeled landmark graphs.

A world is an undirected, connected, bounded-degree graph whose edges carry a
label at each endpoint.  Labels are opaque per-vertex tokens (strings or
ints); the only structural requirement is that the labels at one vertex are
pairwise distinct, so that ``(vertex, label)`` names at most one edge.

Vertex identifiers are dense integers ``0 .. n-1``.  The recognition
partition lives in :class:`LandmarkPartition`.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Mapping, Sequence

Label = Hashable


class GraphError(ValueError):
    """Raised when a graph or partition violates a structural invariant."""


def label_key(label: Label):
    # ints before strings; stable across processes
    return (isinstance(label, str), label)


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    """Undirected edge-labeled graph.

    ``edges[i] = (u, v, label_u, label_v)``.  Use :func:`build_graph` rather
    than the constructor; it validates every invariant.
    """

    n: int
    edges: tuple[tuple[int, int, Label, Label], ...]
    max_degree: int
    meta: Mapping[str, Any] = field(default_factory=dict)
    _adj: tuple[dict, ...] = field(default=(), repr=False)

    @property
    def vertices(self) -> range:
        return range(self.n)

    @property
    def alphabet(self) -> frozenset:
        out = set()
        for u, v, lu, lv in self.edges:
            out.add(lu)
            out.add(lv)
        return frozenset(out)

    def phi(self, v: int, edge: int) -> Label | None:
        """Label of edge index ``edge`` at vertex ``v``; ``None`` (null label) if not incident."""
        u, w, lu, lw = self.edges[edge]
        if v == u:
            return lu
        if v == w:
            return lw
        return None

    def slots(self, v: int) -> list[Label]:
        """Labels at ``v`` in canonical order (the order used by the simulator)."""
        return sorted(self._adj[v], key=label_key)

    def __eq__(self, other):
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return (self.n, self.edges, self.max_degree) == (other.n, other.edges, other.max_degree)

    def __hash__(self):
        return hash((self.n, self.edges, self.max_degree))


def build_graph(
    vertex_count: int,
    labeled_edges: Iterable[Sequence],
    max_degree: int | None = None,
    meta: Mapping[str, Any] | None = None,
) -> LabeledGraph:
    """Validate and build a :class:`LabeledGraph`.

    Rejects self-loops, parallel edges, out-of-range vertices, duplicate or
    null labels at a vertex, degree over ``max_degree`` and disconnected
    graphs.  ``max_degree`` defaults to the largest observed degree.
    """
    if vertex_count < 1:
        raise GraphError("graph needs at least one vertex")
    adj: list[dict] = [dict() for _ in range(vertex_count)]
    edges = []
    seen = set()
    for i, e in enumerate(labeled_edges):
        if len(e) != 4:
            raise GraphError(f"edge {i}: expected (u, v, label_u, label_v), got {e!r}")
        u, v, lu, lv = e
        u, v = int(u), int(v)
        for w in (u, v):
            if not 0 <= w < vertex_count:
                raise GraphError(f"edge {i}: vertex {w} out of range 0..{vertex_count - 1}")
        if u == v:
            raise GraphError(f"edge {i}: self-loop at vertex {u}")
        if lu is None or lv is None:
            raise GraphError(f"edge {i}: null label")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphError(f"edge {i}: duplicate edge {key}")
        seen.add(key)
        for w, lab, other in ((u, lu, v), (v, lv, u)):
            if lab in adj[w]:
                raise GraphError(f"edge {i}: duplicate label {lab!r} at vertex {w}")
            adj[w][lab] = (other, i)
        edges.append((u, v, lu, lv))

    observed = max((len(a) for a in adj), default=0)
    if max_degree is None:
        max_degree = max(observed, 1)
    elif observed > max_degree:
        bad = next(w for w, a in enumerate(adj) if len(a) > max_degree)
        raise GraphError(f"vertex {bad} has degree {len(adj[bad])} > max_degree {max_degree}")

    # connectivity
    reached = {0}
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for y, _ in adj[x].values():
            if y not in reached:
                reached.add(y)
                queue.append(y)
    if len(reached) != vertex_count:
        missing = min(set(range(vertex_count)) - reached)
        raise GraphError(f"graph is disconnected (vertex {missing} unreachable from 0)")

    return LabeledGraph(vertex_count, tuple(edges), int(max_degree), dict(meta or {}), tuple(adj))


def neighbor(graph: LabeledGraph, v: int, label: Label) -> int | None:
    """Vertex across the edge labeled ``label`` at ``v``, or ``None`` if there is none."""
    hit = graph._adj[v].get(label)
    return None if hit is None else hit[0]


def degree(graph: LabeledGraph, v: int) -> int:
    return len(graph._adj[v])


def labels_at(graph: LabeledGraph, v: int) -> frozenset:
    return frozenset(graph._adj[v])


def entry_label(graph: LabeledGraph, v: int, label: Label) -> Label | None:
    """Label at the far end of the edge leaving ``v`` by ``label``."""
    hit = graph._adj[v].get(label)
    if hit is None:
        return None
    return graph.phi(hit[0], hit[1])


def replay(graph: LabeledGraph, start: int, labels: Iterable[Label]) -> int | None:
    """Follow ``labels`` deterministically from ``start``; ``None`` if a label is missing."""
    v = start
    for lab in labels:
        v = neighbor(graph, v, lab)
        if v is None:
            return None
    return v


def bfs_distances(graph: LabeledGraph, sources: int | Iterable[int]) -> list[int]:
    """Hop distances from the nearest source (``-1`` for unreachable)."""
    if isinstance(sources, int):
        sources = [sources]
    dist = [-1] * graph.n
    queue = deque()
    for s in sources:
        dist[s] = 0
        queue.append(s)
    while queue:
        x = queue.popleft()
        for y, _ in graph._adj[x].values():
            if dist[y] < 0:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def oracle_shortest_path(graph: LabeledGraph, u: int, v: int) -> list[Label]:
    """A shortest label sequence from ``u`` to ``v`` under deterministic moves."""
    if u == v:
        return []
    parent: dict[int, tuple[int, Label]] = {u: (-1, None)}
    queue = deque([u])
    while queue:
        x = queue.popleft()
        for lab in graph.slots(x):
            y = graph._adj[x][lab][0]
            if y in parent:
                continue
            parent[y] = (x, lab)
            if y == v:
                path = []
                while y != u:
                    y, lab = parent[y]
                    path.append(lab)
                return path[::-1]
            queue.append(y)
    raise GraphError(f"no path from {u} to {v}")  # unreachable for validated graphs


def diameter(graph: LabeledGraph) -> int:
    return max(max(bfs_distances(graph, s)) for s in graph.vertices)


@dataclass(frozen=True)
class LandmarkPartition:
    """Recognition partition of the vertices.

    Singleton classes are landmarks.  ``names[i]`` is the identifier the
    robot's recognition sensor reports for ``classes[i]``.
    """

    classes: tuple[tuple[int, ...], ...]
    names: tuple[str, ...]
    class_of: tuple[int, ...]
    r: int

    @property
    def landmarks(self) -> frozenset[int]:
        return frozenset(c[0] for c in self.classes if len(c) == 1)

    @property
    def indistinguishable(self) -> frozenset[int]:
        return frozenset(v for c in self.classes if len(c) > 1 for v in c)

    def name_of(self, v: int) -> str:
        return self.names[self.class_of[v]]

    def is_landmark(self, v: int) -> bool:
        return len(self.classes[self.class_of[v]]) == 1

    def landmark_names(self) -> list[str]:
        return [self.names[i] for i, c in enumerate(self.classes) if len(c) == 1]

    def vertex_of(self, name: str) -> int:
        """Vertex of the landmark called ``name``."""
        try:
            members = self.classes[self.names.index(name)]
        except ValueError:
            raise KeyError(f"unknown class {name!r}") from None
        if len(members) != 1:
            raise KeyError(f"class {name!r} is not a landmark")
        return members[0]


def landmark_parameter(graph: LabeledGraph, partition: LandmarkPartition | Iterable[int]) -> int:
    """Largest distance from an indistinguishable vertex to its nearest landmark (0 if none)."""
    if isinstance(partition, LandmarkPartition):
        landmarks = partition.landmarks
    else:
        landmarks = frozenset(partition)
    if not landmarks:
        raise GraphError("partition has no landmarks")
    if len(landmarks) == graph.n:
        return 0
    return max(bfs_distances(graph, sorted(landmarks)))


def make_partition(
    graph: LabeledGraph,
    classes: Iterable[Iterable[int]],
    names: Sequence[str] | None = None,
) -> LandmarkPartition:
    classes = [tuple(sorted(int(v) for v in c)) for c in classes]
    classes = [c for c in classes if c]
    class_of = [-1] * graph.n
    for i, c in enumerate(classes):
        for v in c:
            if not 0 <= v < graph.n:
                raise GraphError(f"class {i}: vertex {v} out of range")
            if class_of[v] >= 0:
                raise GraphError(f"vertex {v} appears in more than one class")
            class_of[v] = i
    if -1 in class_of:
        raise GraphError(f"vertex {class_of.index(-1)} is in no class")
    if names is None:
        names = _default_names(classes)
    names = tuple(str(x) for x in names)
    if len(names) != len(classes):
        raise GraphError(f"{len(names)} class names for {len(classes)} classes")
    if len(set(names)) != len(names):
        raise GraphError("class names must be unique")
    landmarks = [c[0] for c in classes if len(c) == 1]
    r = landmark_parameter(graph, landmarks)
    return LandmarkPartition(tuple(classes), names, tuple(class_of), r)


def _default_names(classes):
    names = []
    singles = sorted(c[0] for c in classes if len(c) == 1)
    lm_index = {v: i for i, v in enumerate(singles)}
    groups = [c for c in classes if len(c) > 1]
    for c in classes:
        if len(c) == 1:
            names.append(f"L{lm_index[c[0]]}")
        elif len(groups) == 1:
            names.append("X")
        else:
            names.append(f"X{groups.index(c)}")
    return names


def partition_from_landmarks(graph: LabeledGraph, landmarks: Iterable[int]) -> LandmarkPartition:
    """Landmarks as singletons, everything else in one indistinguishable class."""
    landmarks = sorted(set(int(v) for v in landmarks))
    rest = sorted(set(graph.vertices) - set(landmarks))
    classes = [(v,) for v in landmarks]
    if rest:
        classes.append(tuple(rest))
    return make_partition(graph, classes)


def all_landmarks(graph: LabeledGraph) -> LandmarkPartition:
    return partition_from_landmarks(graph, graph.vertices)


# -- file formats ------------------------------------------------------------

def world_to_dict(graph: LabeledGraph, partition: LandmarkPartition, meta: Mapping | None = None) -> dict:
    return {
        "vertices": graph.n,
        "max_degree": graph.max_degree,
        "edges": [{"u": u, "v": v, "label_u": lu, "label_v": lv} for u, v, lu, lv in graph.edges],
        "classes": [list(c) for c in partition.classes],
        "class_names": list(partition.names),
        "meta": dict(graph.meta if meta is None else meta),
    }


def world_from_dict(doc: Mapping) -> tuple[LabeledGraph, LandmarkPartition]:
    """Parse a world document; :class:`GraphError` names the offending field."""
    if not isinstance(doc, Mapping):
        raise GraphError("world document must be a JSON object")
    for key in ("vertices", "edges", "classes"):
        if key not in doc:
            raise GraphError(f"missing field '{key}'")
    if not isinstance(doc["vertices"], int):
        raise GraphError("field 'vertices' must be an integer")
    edges = []
    for i, e in enumerate(doc["edges"]):
        try:
            edges.append((e["u"], e["v"], _label(e["label_u"]), _label(e["label_v"])))
        except (KeyError, TypeError) as exc:
            raise GraphError(f"field 'edges[{i}]' malformed: {exc}") from None
    graph = build_graph(doc["vertices"], edges, doc.get("max_degree"), doc.get("meta") or {})
    if not isinstance(doc["classes"], list):
        raise GraphError("field 'classes' must be an array of arrays")
    partition = make_partition(graph, doc["classes"], doc.get("class_names"))
    return graph, partition


def _label(x):
    if isinstance(x, list):
        raise TypeError("labels must be scalars")
    return x


def save_world(path, graph: LabeledGraph, partition: LandmarkPartition) -> None:
    with open(path, "w") as fh:
        json.dump(world_to_dict(graph, partition), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_world(path) -> tuple[LabeledGraph, LandmarkPartition]:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GraphError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}") from None
    return world_from_dict(doc)


def world_to_dot(graph: LabeledGraph, partition: LandmarkPartition) -> str:
    lines = ["graph world {"]
    for v in graph.vertices:
        name = partition.name_of(v)
        shape = "doublecircle" if partition.is_landmark(v) else "circle"
        lines.append(f'  {v} [label="{v}:{name}", shape={shape}];')
    for u, v, lu, lv in graph.edges:
        lines.append(f'  {u} -- {v} [label="{lu}/{lv}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
