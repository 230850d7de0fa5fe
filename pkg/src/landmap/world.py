"""The robot's interface to a simulated world.

The robot never sees vertex ids.  It can sense the labels at its location,
the recognition class of its location (and whether that class is a
landmark), optionally the label of the edge it just entered by, and it can
ask a gamma-accurate oracle whether a traversal went as instructed.
Everything random is drawn from the robot's own ``np.random.Generator``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import _kernels as K
from .graph import Label, LabeledGraph, LandmarkPartition


@dataclass(frozen=True)
class MovementModel:
    """Probabilistic movement: intended edge with probability ``alpha``.

    The remaining mass is spread uniformly over the other edges at the
    vertex, unless ``table`` supplies ``{(vertex, intended): {label: p}}``
    for that pair.  At degree-1 vertices the move always succeeds.
    """

    alpha: float
    table: Mapping | None = None

    def __post_init__(self):
        if not 0.5 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0.5, 1], got {self.alpha}")

    def distribution(self, graph: LabeledGraph, v: int, intended: Label) -> dict:
        labels = graph.slots(v)
        if intended not in labels:
            raise ValueError(f"label {intended!r} not present at vertex {v}")
        if self.table is not None and (v, intended) in self.table:
            dist = dict(self.table[(v, intended)])
            if set(dist) - set(labels):
                raise ValueError(f"table entry for {(v, intended)} names labels not at vertex {v}")
            total = sum(dist.values())
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"table entry for {(v, intended)} sums to {total}")
            if dist.get(intended, 0.0) < self.alpha:
                raise ValueError(f"table entry for {(v, intended)} gives intended edge less than alpha")
            return {lab: float(dist.get(lab, 0.0)) for lab in labels}
        if len(labels) == 1:
            return {intended: 1.0}
        spread = (1.0 - self.alpha) / (len(labels) - 1)
        return {lab: (self.alpha if lab == intended else spread) for lab in labels}


@dataclass(frozen=True)
class SensorSuite:
    partition: LandmarkPartition
    gamma: float = 1.0
    reverse_certainty: bool = False

    def __post_init__(self):
        if not 0.5 < self.gamma <= 1.0:
            raise ValueError(f"gamma must be in (0.5, 1], got {self.gamma}")


@dataclass(frozen=True)
class Observation:
    arrived_class: str
    is_landmark: bool
    entry_label: Label | None = None


@dataclass(frozen=True)
class TraversalRecord:
    attempted: tuple
    traversed: tuple
    observations: tuple[Observation, ...]
    aborted: bool


@dataclass(frozen=True)
class Exploration:
    """Observations from repeated random-direction walks (one row per walk)."""

    intended: list[tuple]
    classes: list[tuple[str, ...]]
    landmark: list[tuple[bool, ...]]
    entry: list[tuple] | None
    steps: int


@dataclass(frozen=True)
class Repetition:
    """Outcome of attempting one label sequence ``n`` times.

    ``truth[i]`` is ground truth (every step went as intended) and is only
    meant for the guess oracle and for evaluation.
    """

    aborted: np.ndarray
    final_class: np.ndarray
    truth: np.ndarray
    entry: np.ndarray | None
    steps: int


class World:
    """Ground-truth graph plus movement and sensor models, compiled to arrays."""

    def __init__(self, graph: LabeledGraph, partition: LandmarkPartition,
                 movement: MovementModel, sensors: SensorSuite):
        if len(partition.class_of) != graph.n:
            raise ValueError("partition does not match graph")
        self.graph = graph
        self.partition = partition
        self.movement = movement
        self.sensors = sensors

        self.labels: list = sorted(graph.alphabet, key=lambda x: (isinstance(x, str), x))
        self.label_id = {lab: i for i, lab in enumerate(self.labels)}
        d = max(graph.max_degree, 1)
        n = graph.n
        self.nbr = np.zeros((n, d), np.int64)
        self.back = np.zeros((n, d), np.int64)
        self.deg = np.zeros(n, np.int64)
        self.slot_label = np.full((n, d), -1, np.int64)
        self.cum = np.ones((n, d, d), np.float64)
        slots = [graph.slots(v) for v in graph.vertices]
        self._slots = slots
        for v in graph.vertices:
            self.deg[v] = len(slots[v])
            for s, lab in enumerate(slots[v]):
                w, e = graph._adj[v][lab]
                self.nbr[v, s] = w
                self.back[v, s] = slots[w].index(graph.phi(w, e))
                self.slot_label[v, s] = self.label_id[lab]
            for s, lab in enumerate(slots[v]):
                dist = movement.distribution(graph, v, lab)
                self.cum[v, s, : len(slots[v])] = np.cumsum([dist[x] for x in slots[v]])
        self._class_of = np.asarray(partition.class_of, np.int64)
        self._names = np.asarray(partition.names, dtype=object)
        self._is_lm = np.array([partition.is_landmark(v) for v in graph.vertices])
        self._label_arr = np.asarray(self.labels + [None], dtype=object)  # id -1 -> None

    @classmethod
    def create(cls, graph, partition, alpha=1.0, gamma=1.0, reverse_certainty=False, table=None):
        return cls(graph, partition, MovementModel(alpha, table),
                   SensorSuite(partition, gamma, reverse_certainty))

    def class_names(self, vertices: np.ndarray) -> np.ndarray:
        return self._names[self._class_of[vertices]]

    def landmark_flags(self, vertices: np.ndarray) -> np.ndarray:
        return self._is_lm[vertices]

    def label_array(self, ids: np.ndarray) -> np.ndarray:
        return self._label_arr[ids]

    def encode(self, labels: Sequence[Label]) -> np.ndarray:
        # unknown labels map to an id no slot carries, so the step aborts
        return np.array([self.label_id.get(lab, len(self.labels)) for lab in labels], np.int64)


class Robot:
    """A robot in a :class:`World` with its own random stream.

    ``position`` is ground truth, readable by the simulator and by
    evaluation code but never by the learner.  With ``record=True`` every
    attempted move is appended to ``trace``; ``step_count`` counts moves
    either way.
    """

    def __init__(self, world: World, position: int, rng: np.random.Generator, record: bool = False):
        self.world = world
        self.position = int(position)
        self.rng = rng
        self.step_count = 0
        self.trace: list[dict] | None = [] if record else None
        self.last_traversed: Label | None = None

    # -- sensing ---------------------------------------------------------------

    def labels_here(self) -> frozenset:
        return frozenset(self.world._slots[self.position])

    def sense_class(self) -> str:
        return self.world.partition.name_of(self.position)

    def is_landmark(self) -> bool:
        return self.world.partition.is_landmark(self.position)

    def guess_traversal(self, attempted: Sequence, actually_traversed: Sequence) -> bool:
        truth = tuple(attempted) == tuple(actually_traversed)
        return truth if self.rng.random() < self.world.sensors.gamma else not truth

    def guess_many(self, truth: np.ndarray) -> np.ndarray:
        """Independent gamma-accurate guesses for each entry of ``truth``."""
        correct = self.rng.random(len(truth)) < self.world.sensors.gamma
        return np.where(correct, truth, ~truth)

    # -- moving ------------------------------------------------------------------

    def _log(self, events) -> None:
        if self.trace is None:
            return
        w = self.world
        for v, s, a in events:
            to = int(w.nbr[v, a])
            self.trace.append({
                "step": len(self.trace),
                "intended": w._slots[v][s],
                "traversed_label": w._slots[v][a],
                "arrived_class": w.partition.name_of(to),
                "landmark": w.partition.is_landmark(to),
                "entry_label": w._slots[to][w.back[v, a]],
            })

    def _observe(self, entry) -> Observation:
        rc = self.world.sensors.reverse_certainty
        return Observation(self.sense_class(), self.is_landmark(), entry if rc else None)

    def attempt_move(self, intended: Label) -> Observation:
        w = self.world
        v = self.position
        slots = w._slots[v]
        if intended not in slots:
            raise ValueError(f"label {intended!r} is not available here")
        s = slots.index(intended)
        a = int(K.move(self.rng, w.deg, w.cum, v, s))
        self._log([(v, s, a)])
        self.position = int(w.nbr[v, a])
        self.step_count += 1
        self.last_traversed = slots[a]
        return self._observe(w._slots[self.position][w.back[v, a]])

    def run_instruction_sequence(self, labels: Sequence[Label]) -> TraversalRecord:
        traversed, obs = [], []
        for lab in labels:
            if lab not in self.world._slots[self.position]:
                return TraversalRecord(tuple(labels), tuple(traversed), tuple(obs), True)
            obs.append(self.attempt_move(lab))
            traversed.append(self.last_traversed)
        return TraversalRecord(tuple(labels), tuple(traversed), tuple(obs), False)

    def random_walk(self, steps: int) -> list[Observation]:
        w = self.world
        visited, ev = K.random_walk(self.rng, w.nbr, w.deg, w.cum, self.position, int(steps),
                                    self.trace is not None)
        self._log(ev)
        self.step_count += int(steps)
        if steps:
            self.position = int(visited[-1])
        names = w.class_names(visited)
        flags = w.landmark_flags(visited)
        return [Observation(c, bool(f)) for c, f in zip(names, flags)]

    def walk_home(self, landmark: str) -> int:
        """Random-walk until the recognition sensor reports ``landmark``; returns steps taken."""
        w = self.world
        target = w.partition.vertex_of(landmark)
        v, steps, ev = K.walk_home(self.rng, w.nbr, w.deg, w.cum, self.position, target,
                                   self.trace is not None)
        self._log(ev)
        self.position = int(v)
        self.step_count += int(steps)
        return int(steps)

    def explore(self, n: int, length: int) -> Exploration:
        """``n`` walks of ``length`` random directions from here, returning home after each.

        Must start at a landmark (homing is by recognition).
        """
        if not self.is_landmark():
            raise ValueError("exploration must start at a landmark")
        w = self.world
        intended, _, entry, arrived, steps, ev = K.explore(
            self.rng, w.nbr, w.back, w.deg, w.slot_label, w.cum, self.position,
            int(n), int(length), self.trace is not None)
        self._log(ev)
        self.step_count += int(steps)
        classes = w.class_names(arrived)
        flags = w.landmark_flags(arrived)
        lab_in = w.label_array(intended)
        rows_entry = None
        if w.sensors.reverse_certainty:
            lab_entry = w.label_array(entry)
            rows_entry = [tuple(r) for r in lab_entry]
        return Exploration(
            [tuple(r) for r in lab_in],
            [tuple(r) for r in classes],
            [tuple(bool(x) for x in r) for r in flags],
            rows_entry,
            int(steps),
        )

    def repeat_sequence(self, labels: Sequence[Label], n: int) -> Repetition:
        """Attempt ``labels`` ``n`` times from the current landmark, returning home after each."""
        if not self.is_landmark():
            raise ValueError("repeated traversals must start at a landmark")
        w = self.world
        seq = w.encode(labels)
        taken, entry, _, aborted, final, steps, ev = K.follow(
            self.rng, w.nbr, w.back, w.deg, w.slot_label, w.cum, self.position,
            seq, int(n), self.trace is not None)
        self._log(ev)
        self.step_count += int(steps)
        truth = ~aborted & (taken == seq).all(axis=1)
        rows_entry = w.label_array(entry) if w.sensors.reverse_certainty else None
        return Repetition(aborted, w.class_names(final), truth, rows_entry, int(steps))

    def write_trace(self, path) -> None:
        if self.trace is None:
            raise ValueError("robot was created with record=False")
        with open(path, "w") as fh:
            for event in self.trace:
                fh.write(json.dumps(event, sort_keys=True) + "\n")


def arrival_distribution(world: World, v: int, intended: Label) -> dict:
    """Configured arrival distribution ``{vertex: probability}`` for one move."""
    dist = world.movement.distribution(world.graph, v, intended)
    out: dict[int, float] = {}
    for lab, p in dist.items():
        u = world.graph._adj[v][lab][0]
        out[u] = out.get(u, 0.0) + p
    return out


__all__ = [
    "MovementModel", "SensorSuite", "Observation", "TraversalRecord", "Exploration",
    "Repetition", "World", "Robot", "arrival_distribution",
]
