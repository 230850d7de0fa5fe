"""PAC map learning on landmark graphs.

Per landmark the learner runs three phases:

1. identify landmarks with a long random walk,
2. select candidate routes by random-direction exploration from the landmark,
3. filter the candidates by repeated re-traversal and majority vote over
   gamma-accurate guesses (or, with reverse movement certainty, by counting
   retrace hits).

The per-landmark budget is ``delta_g / m``, split evenly over the three
phases, and the filtering budget is split evenly over candidates.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Mapping

import numpy as np

from .graph import LabeledGraph, LandmarkPartition
from .maps import LearnedMap
from .rng import substream
from .world import Robot, World


@dataclass(frozen=True)
class CandidatePath:
    """A recorded route ``start --out_0--> X_1 --out_1--> ... --> end``."""

    start: str
    end: str
    out_labels: tuple
    observed_classes: tuple = ()
    in_labels: tuple | None = None

    def __post_init__(self):
        if len(self.observed_classes) != max(len(self.out_labels) - 1, 0):
            raise ValueError("need exactly one observed class per intermediate vertex")
        if self.in_labels is not None and len(self.in_labels) != len(self.out_labels):
            raise ValueError("in_labels and out_labels differ in length")

    @property
    def length(self) -> int:
        return len(self.out_labels)


@dataclass(frozen=True)
class LearnParams:
    delta_g: float
    alpha: float
    gamma: float
    r: int
    d: int
    c: int = 4
    m: int | None = None
    graph_size_bound: tuple[int, int] | None = None
    exploration_length: int | None = None
    reverse_certainty: bool = False

    def __post_init__(self):
        if not 0 < self.delta_g < 1:
            raise ValueError(f"delta_g must be in (0, 1), got {self.delta_g}")
        if not 0.5 < self.alpha <= 1:
            raise ValueError(f"alpha must be in (0.5, 1], got {self.alpha}")
        if not 0.5 < self.gamma <= 1:
            raise ValueError(f"gamma must be in (0.5, 1], got {self.gamma}")
        if not isinstance(self.c, int) or self.c <= 2:
            raise ValueError(f"c must be an integer > 2, got {self.c}")
        if self.r < 0 or self.d < 1:
            raise ValueError("need r >= 0 and d >= 1")
        if self.m is None and self.graph_size_bound is None:
            raise ValueError("set m or graph_size_bound")
        if self.m is not None and self.m < 1:
            raise ValueError("m must be >= 1")
        if self.exploration_length is not None and self.exploration_length < 1:
            raise ValueError("exploration_length must be >= 1")

    @classmethod
    def for_world(cls, graph: LabeledGraph, partition: LandmarkPartition, **kw) -> "LearnParams":
        """Params with ``r``, ``d`` and the size bound taken from a known world."""
        unknown = set(kw) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown learner field(s): {', '.join(sorted(unknown))}")
        for key in ("delta_g", "alpha", "gamma"):
            if key not in kw:
                raise ValueError(f"missing learner field '{key}'")
        kw.setdefault("r", partition.r)
        kw.setdefault("d", graph.max_degree)
        kw.setdefault("graph_size_bound", (graph.n, len(graph.edges)))
        return cls(**kw)

    @property
    def answer_length(self) -> int:
        return self.m if self.m is not None else self.graph_size_bound[0]

    @property
    def delta_l(self) -> float:
        return self.delta_g / self.answer_length

    @property
    def delta_i(self) -> float:
        return self.delta_l / 3

    delta_s = delta_i
    delta_f = delta_i

    @property
    def explore_length(self) -> int:
        return self.exploration_length or max(self.r, 1)

    @property
    def stretch_bound(self) -> float:
        return self.c / (self.c - 2)

    def to_dict(self) -> dict:
        out = asdict(self)
        if out["graph_size_bound"] is not None:
            out["graph_size_bound"] = list(out["graph_size_bound"])
        return out

    @classmethod
    def from_dict(cls, doc: Mapping) -> "LearnParams":
        doc = dict(doc)
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown learner field(s): {', '.join(sorted(unknown))}")
        if doc.get("graph_size_bound") is not None:
            doc["graph_size_bound"] = tuple(doc["graph_size_bound"])
        return cls(**doc)


# -- bounds --------------------------------------------------------------------

def identification_walk_length(n_vertices: int, n_edges: int, delta_i: float) -> int:
    """Segments of the ``2|E|(|V|-1)`` cover-time bound, repeated ``ceil(log2(1/delta_i))`` times."""
    if not 0 < delta_i < 1:
        raise ValueError("delta_i must be in (0, 1)")
    segments = max(1, math.ceil(math.log2(1 / delta_i) - 1e-12))
    return 2 * n_edges * (n_vertices - 1) * segments


def selection_success_probability(alpha: float, d: int, r: int, n: int) -> float:
    """``[1 - (1 - (alpha/d)^r)^n]^(d^r)``: chance all ``d^r`` paths get recorded in ``n`` attempts."""
    p = (alpha / d) ** r
    return (1.0 - (1.0 - p) ** n) ** (d ** r)


def num_selection_attempts(alpha: float, d: int, r: int, delta_s: float) -> int:
    """Least ``n`` with ``selection_success_probability(alpha, d, r, n) >= 1 - delta_s``."""
    if r == 0:
        return 0
    if not 0 < delta_s < 1:
        raise ValueError("delta_s must be in (0, 1)")
    p = (alpha / d) ** r
    if p >= 1.0:
        return 1
    # 1 - (1 - delta_s)^(d^-r), computed without cancellation
    miss = -math.expm1(math.log1p(-delta_s) / d ** r)
    n = math.ceil(math.log(miss) / math.log1p(-p) - 1e-9)
    while selection_success_probability(alpha, d, r, n) < 1 - delta_s:
        n += 1
    while n > 1 and selection_success_probability(alpha, d, r, n - 1) >= 1 - delta_s:
        n -= 1
    return n


def num_filter_traversals(gamma: float, delta_f_local: float) -> int:
    """``ceil(1 / (delta_f_local * (2 gamma - 1)^2))``."""
    if gamma <= 0.5:
        raise ValueError("gamma must exceed 1/2")
    if not 0 < delta_f_local < 1:
        raise ValueError("delta_f_local must be in (0, 1)")
    return math.ceil(1.0 / (delta_f_local * (2 * gamma - 1) ** 2) - 1e-9)


def reverse_threshold(alpha: float, k: int) -> float:
    """Midpoint between the real-path hit rate ``alpha^k`` and the false-path rate ``alpha^(k-1)(1-alpha)``."""
    return (alpha ** k + alpha ** (k - 1) * (1 - alpha)) / 2


def num_reverse_experiments(alpha: float, k: int, delta: float) -> int:
    """Hoeffding count so each side of the midpoint threshold errs with probability <= ``delta``."""
    gap = alpha ** (k - 1) * (2 * alpha - 1)
    return math.ceil(2 * math.log(1 / delta) / gap ** 2)


# -- phases ----------------------------------------------------------------------

def identify_landmarks(robot: Robot, params: LearnParams) -> set[str]:
    """Landmark classes seen on a random walk of :func:`identification_walk_length` steps."""
    if params.graph_size_bound is None:
        raise ValueError("landmark identification needs graph_size_bound")
    nv, ne = params.graph_size_bound
    steps = identification_walk_length(nv, ne, params.delta_i)
    found = {robot.sense_class()} if robot.is_landmark() else set()
    for obs in robot.random_walk(steps):
        if obs.is_landmark:
            found.add(obs.arrived_class)
    return found


def select_candidates(robot: Robot, start: str, params: LearnParams,
                      n_attempts: int | None = None) -> list[CandidatePath]:
    """Random-direction exploration from landmark ``start``.

    Every landmark other than ``start`` met at step ``j`` of a walk yields the
    candidate made of the first ``j`` attempted directions.  Duplicates
    (same directions, same end) are merged, keeping the first observation.
    """
    length = params.explore_length
    if n_attempts is None:
        n_attempts = num_selection_attempts(params.alpha, params.d, length, params.delta_s)
    if robot.sense_class() != start:
        robot.walk_home(start)
    ex = robot.explore(n_attempts, length)
    found: dict[tuple, CandidatePath] = {}
    for i, out in enumerate(ex.intended):
        classes, flags = ex.classes[i], ex.landmark[i]
        for j in range(length):
            if not flags[j] or classes[j] == start:
                continue
            key = (out[: j + 1], classes[j])
            if key in found:
                continue
            found[key] = CandidatePath(
                start, classes[j], out[: j + 1], classes[:j],
                ex.entry[i][: j + 1] if ex.entry is not None else None)
    return list(found.values())


def count_positive_guesses(robot: Robot, candidate: CandidatePath, n: int) -> int:
    """Traverse ``candidate`` ``n`` times; count positive guesses.

    A traversal that aborts or ends anywhere but the candidate's end landmark
    counts as negative without consulting the oracle.
    """
    if robot.sense_class() != candidate.start:
        robot.walk_home(candidate.start)
    rep = robot.repeat_sequence(candidate.out_labels, n)
    arrived = ~rep.aborted & (rep.final_class == candidate.end)
    return int(robot.guess_many(rep.truth[arrived]).sum())


def filter_candidates(robot: Robot, candidates: list[CandidatePath], params: LearnParams,
                      n: int | None = None) -> list[CandidatePath]:
    """Keep candidates with strictly more than ``n/2`` positive guesses."""
    if not candidates:
        return []
    if n is None:
        n = num_filter_traversals(params.gamma, params.delta_f / len(candidates))
    return [c for c in candidates if 2 * count_positive_guesses(robot, c, n) > n]


def count_hits(robot: Robot, candidate: CandidatePath, n: int) -> int:
    """Retrace ``candidate`` backwards from its end ``n`` times; count exact entry-label matches."""
    if candidate.in_labels is None:
        raise ValueError("candidate carries no entry labels")
    if not robot.world.sensors.reverse_certainty:
        raise ValueError("robot lacks reverse movement certainty")
    if robot.sense_class() != candidate.end:
        robot.walk_home(candidate.end)
    rep = robot.repeat_sequence(candidate.in_labels[::-1], n)
    expected = np.empty(candidate.length, dtype=object)
    expected[:] = candidate.out_labels[::-1]
    return int((~rep.aborted & (rep.entry == expected).all(axis=1)).sum())


def filter_with_reverse_certainty(robot: Robot, candidate: CandidatePath, n_experiments: int,
                                  alpha: float | None = None) -> bool:
    alpha = robot.world.movement.alpha if alpha is None else alpha
    hits = count_hits(robot, candidate, n_experiments)
    return hits > n_experiments * reverse_threshold(alpha, candidate.length)


@dataclass
class LocalMap:
    landmark: str
    candidates: list[CandidatePath]
    accepted: list[CandidatePath]
    steps_select: int = 0
    steps_filter: int = 0

    @property
    def routes(self) -> dict[str, list[tuple]]:
        out: dict[str, list[tuple]] = {}
        for c in self.accepted:
            out.setdefault(c.end, []).append(c.out_labels)
        return out


def learn_local(robot: Robot, landmark: str, params: LearnParams) -> LocalMap:
    s0 = robot.step_count
    candidates = select_candidates(robot, landmark, params)
    s1 = robot.step_count
    if params.reverse_certainty:
        accepted = []
        delta = params.delta_f / max(len(candidates), 1)
        for c in candidates:
            n = num_reverse_experiments(params.alpha, c.length, delta)
            if filter_with_reverse_certainty(robot, c, n, params.alpha):
                accepted.append(c)
        if candidates:
            robot.walk_home(landmark)
    else:
        accepted = filter_candidates(robot, candidates, params)
    return LocalMap(landmark, candidates, accepted, s1 - s0, robot.step_count - s1)


def learn_global(world: World, params: LearnParams, seed: int, start: int | None = None,
                 traces: dict | None = None) -> LearnedMap:
    """Identify landmarks, learn every local neighbourhood, assemble the map.

    The result depends only on ``(world, params, seed)``: every landmark's
    robot draws from its own named substream.  Pass a dict as ``traces`` to
    collect each robot's move log, keyed ``"identify"`` or the landmark name.
    """
    record = traces is not None
    if start is None:
        start = int(substream(seed, "start").integers(world.graph.n))
    scout = Robot(world, start, substream(seed, "identify"), record)
    landmarks = sorted(identify_landmarks(scout, params))
    routes: dict[tuple[str, str], list[tuple]] = {}
    steps_select = steps_filter = 0
    for name in landmarks:
        robot = Robot(world, scout.position, substream(seed, "local", name), record)
        homing = robot.walk_home(name)
        local = learn_local(robot, name, params)
        steps_select += homing + local.steps_select
        steps_filter += local.steps_filter
        if record:
            traces[name] = robot.trace
        for end, labels in local.routes.items():
            routes.setdefault((name, end), []).extend(labels)
    if record:
        traces["identify"] = scout.trace
    provenance = {
        "seed": int(seed),
        "steps_identify": scout.step_count,
        "steps_select": steps_select,
        "steps_filter": steps_filter,
    }
    return LearnedMap.build(landmarks, routes, params.to_dict(), provenance)


__all__ = [
    "CandidatePath", "LearnParams", "LocalMap", "identification_walk_length",
    "selection_success_probability", "num_selection_attempts", "num_filter_traversals",
    "reverse_threshold", "num_reverse_experiments", "identify_landmarks", "select_candidates",
    "count_positive_guesses", "filter_candidates", "count_hits", "filter_with_reverse_certainty",
    "learn_local", "learn_global",
]
