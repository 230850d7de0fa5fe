"""Experiment campaigns: PAC trials, bound checks and retrace-hit separation."""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np
from scipy import stats

from .generators import gen_grid, generate
from .graph import (
    LabeledGraph,
    LandmarkPartition,
    all_landmarks,
    bfs_distances,
    build_graph,
    entry_label,
    labels_at,
    neighbor,
    replay,
)
from .learner import (
    CandidatePath,
    LearnParams,
    count_hits,
    count_positive_guesses,
    learn_global,
    num_filter_traversals,
    num_selection_attempts,
    reverse_threshold,
    select_candidates,
)
from .maps import LearnedMap, dumps_map, global_path_query, map_to_dot
from .rng import substream
from .world import Robot, World

OUTPUT_KINDS = {"stats", "maps", "dot"}
CSV_COLUMNS = ["trial", "queries", "answered", "valid", "max_stretch",
               "steps_identify", "steps_select", "steps_filter", "pass"]


# -- statistics ----------------------------------------------------------------

def clopper_pearson(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    """Exact binomial confidence interval."""
    if trials == 0:
        return (0.0, 1.0)
    ci = stats.binomtest(successes, trials).proportion_ci(level, method="exact")
    return (float(ci.low), float(ci.high))


def acceptance_count(trials: int, target: float, level: float = 0.95) -> int:
    """Fewest successes out of ``trials`` consistent with success probability >= ``target``.

    Uses the exact binomial lower ``1 - level`` quantile; a process whose true
    rate is ``target`` falls below it with probability < ``1 - level``.
    """
    if trials == 0:
        return 0
    return int(stats.binom.ppf(1 - level, trials, target))


def three_sigma(p: float, n: int) -> float:
    return 3 * math.sqrt(p * (1 - p) / n) if n else math.inf


# -- PAC campaign ----------------------------------------------------------------

@dataclass(frozen=True)
class QueryResult:
    u: str
    v: str
    answered: bool
    valid: bool
    stretch: float | None


@dataclass
class TrialReport:
    index: int
    queries: list[QueryResult]
    steps: dict[str, int]
    passed: bool
    edge_set_exact: bool
    landmarks_found: int = 0

    @property
    def max_stretch(self) -> float | None:
        vals = [q.stretch for q in self.queries if q.stretch is not None]
        return max(vals) if vals else None

    def row(self) -> list:
        ms = self.max_stretch
        return [
            self.index, len(self.queries), sum(q.answered for q in self.queries),
            sum(q.valid for q in self.queries), "" if ms is None else f"{ms:.6f}",
            self.steps["identify"], self.steps["select"], self.steps["filter"], int(self.passed),
        ]


def true_edge_triples(graph: LabeledGraph, partition: LandmarkPartition) -> set:
    return {(partition.name_of(v), lab, partition.name_of(neighbor(graph, v, lab)))
            for v in graph.vertices if partition.is_landmark(v)
            for lab in labels_at(graph, v)
            if partition.is_landmark(neighbor(graph, v, lab))}


def learned_edge_triples(lmap: LearnedMap) -> set:
    return {(a, seq[0], b) for (a, b), seqs in lmap.routes.items() for seq in seqs if len(seq) == 1}


def evaluate_map(lmap: LearnedMap, graph: LabeledGraph, partition: LandmarkPartition,
                 c: int) -> tuple[list[QueryResult], bool]:
    """Check every ordered landmark pair by deterministic replay on the true graph."""
    bound = c / (c - 2) + 1e-9
    names = partition.landmark_names()
    results = []
    ok = True
    for u in names:
        a = partition.vertex_of(u)
        dist = bfs_distances(graph, a)
        for v in names:
            if u == v:
                continue
            b = partition.vertex_of(v)
            ans = None
            if u in lmap.landmarks and v in lmap.landmarks:
                ans = global_path_query(lmap, u, v)
            if ans is None:
                results.append(QueryResult(u, v, False, False, None))
                ok = False
                continue
            valid = replay(graph, a, ans.labels) == b
            stretch = ans.length / dist[b] if valid else None
            results.append(QueryResult(u, v, True, valid, stretch))
            ok = ok and valid and stretch <= bound
    return results, ok


@dataclass
class ExperimentConfig:
    generator: Mapping[str, Any]
    learn: Mapping[str, Any]
    trials: int
    seed: int = 0
    regenerate: bool = False
    workers: int = 1
    outputs: Mapping[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ExperimentConfig":
        for key in ("generator", "learn", "trials"):
            if key not in doc:
                raise ValueError(f"experiment config missing field '{key}'")
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown experiment field(s): {', '.join(sorted(unknown))}")
        if not isinstance(doc["trials"], int) or doc["trials"] < 0:
            raise ValueError("field 'trials' must be a non-negative integer")
        for key in ("generator", "learn", "outputs"):
            if key in doc and not isinstance(doc[key], Mapping):
                raise ValueError(f"field '{key}' must be an object")
        bad = set(doc.get("outputs", {})) - OUTPUT_KINDS
        if bad:
            raise ValueError(f"unknown output(s) in 'outputs': {', '.join(sorted(bad))}")
        if "delta_g" not in doc["learn"]:
            raise ValueError("field 'learn.delta_g' is required")
        return cls(**doc)

    def world(self, trial: int | None = None) -> tuple[LabeledGraph, LandmarkPartition]:
        spec = dict(self.generator)
        if self.regenerate and trial is not None:
            spec["seed"] = int(substream(self.seed, "world", trial).integers(2**31))
        return generate(spec)

    def params(self, graph: LabeledGraph, partition: LandmarkPartition) -> LearnParams:
        kw = {k: v for k, v in self.learn.items() if k != "seed"}
        if kw.get("graph_size_bound") is not None:
            kw["graph_size_bound"] = tuple(kw["graph_size_bound"])
        return LearnParams.for_world(graph, partition, **kw)


def trial_seed(root: int, index: int) -> int:
    return int(substream(root, "trial", index).integers(2**62))


def run_trial(config: ExperimentConfig, index: int) -> tuple[TrialReport, LearnedMap]:
    graph, partition = config.world(index)
    params = config.params(graph, partition)
    world = World.create(graph, partition, params.alpha, params.gamma, params.reverse_certainty)
    lmap = learn_global(world, params, trial_seed(config.seed, index))
    queries, ok = evaluate_map(lmap, graph, partition, params.c)
    prov = lmap.provenance
    steps = {"identify": prov["steps_identify"], "select": prov["steps_select"],
             "filter": prov["steps_filter"]}
    exact = learned_edge_triples(lmap) == true_edge_triples(graph, partition)
    return TrialReport(index, queries, steps, ok, exact, len(lmap.landmarks)), lmap


def _trial_job(args):
    return run_trial(*args)


@dataclass
class CampaignReport:
    trials: list[TrialReport]
    delta: float
    maps: list[LearnedMap] = field(default_factory=list, repr=False)

    @property
    def successes(self) -> int:
        return sum(t.passed for t in self.trials)

    @property
    def success_fraction(self) -> float | None:
        return self.successes / len(self.trials) if self.trials else None

    @property
    def confidence_interval(self) -> tuple[float, float]:
        return clopper_pearson(self.successes, len(self.trials))

    @property
    def required_successes(self) -> int:
        return acceptance_count(len(self.trials), 1 - self.delta)

    @property
    def passed(self) -> bool:
        return self.successes >= self.required_successes

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for t in sorted(self.trials, key=lambda t: t.index):
            w.writerow(t.row())
        return buf.getvalue()

    def summary(self) -> str:
        k = len(self.trials)
        if k == 0:
            return "0 trials run\n"
        lo, hi = self.confidence_interval
        stretches = [t.max_stretch for t in self.trials if t.passed and t.max_stretch is not None]
        lines = [
            f"trials: {k}",
            f"successes: {self.successes} ({self.success_fraction:.3f}), 95% CI [{lo:.3f}, {hi:.3f}]",
            f"target 1-delta: {1 - self.delta:.3f}; required successes: {self.required_successes}",
            f"max stretch over successful trials: {max(stretches) if stretches else 'n/a'}",
            f"edge set exact in {sum(t.edge_set_exact for t in self.trials)} trials",
            f"result: {'PASS' if self.passed else 'FAIL'}",
        ]
        return "\n".join(lines) + "\n"


def run_pac_campaign(config: ExperimentConfig) -> CampaignReport:
    """``config.trials`` independent learn-and-evaluate trials.

    A trial succeeds when every ordered landmark pair is answered, the answer
    replays correctly on the true graph, and its stretch is within ``c/(c-2)``.
    """
    jobs = [(config, i) for i in range(config.trials)]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            results = list(pool.map(_trial_job, jobs))
    else:
        results = [_trial_job(j) for j in jobs]
    delta = float(config.learn["delta_g"])
    return CampaignReport([r[0] for r in results], delta, [r[1] for r in results])


def write_campaign(report: CampaignReport, stats=None, maps=None, dot=None) -> None:
    """Write the CSV to ``stats`` and one map JSON (and optionally DOT) per trial to ``maps``/``dot``."""
    if stats is not None:
        os.makedirs(os.path.dirname(os.path.abspath(stats)), exist_ok=True)
        with open(stats, "w", newline="") as fh:
            fh.write(report.csv_text())
    for directory, ext, render in ((maps, "json", dumps_map), (dot, "dot", map_to_dot)):
        if directory is None:
            continue
        os.makedirs(directory, exist_ok=True)
        for t, m in zip(report.trials, report.maps):
            with open(os.path.join(directory, f"map_{t.index:04d}.{ext}"), "w") as fh:
                fh.write(render(m))


def ideal_route_stretch(graph: LabeledGraph, partition: LandmarkPartition, length: int) -> float:
    """Worst stretch of the map that stores every true route of at most ``length`` steps.

    ``inf`` when that map leaves some landmark pair disconnected.  This is
    the best any learner exploring ``length`` steps can achieve.
    """
    lms = sorted(partition.landmarks)
    dist = {a: bfs_distances(graph, a) for a in lms}
    route = np.full((len(lms), len(lms)), np.inf)
    for i, a in enumerate(lms):
        for j, b in enumerate(lms):
            if i == j:
                route[i, j] = 0
            elif dist[a][b] <= length:
                route[i, j] = dist[a][b]
    for k in range(len(lms)):
        route = np.minimum(route, route[:, [k]] + route[[k], :])
    worst = 1.0
    for i, a in enumerate(lms):
        for j, b in enumerate(lms):
            if i != j:
                worst = max(worst, route[i, j] / dist[a][b])
    return float(worst)


# -- planted candidates ----------------------------------------------------------

def _walk_labels(graph, start, labels):
    """Vertices and entry labels along a deterministic walk."""
    vs, entries = [start], []
    for lab in labels:
        entries.append(entry_label(graph, vs[-1], lab))
        vs.append(neighbor(graph, vs[-1], lab))
    return vs, entries


def plant_true_candidate(graph, partition, rng, start: int, k: int) -> CandidatePath:
    """A random simple path of ``k`` steps from landmark ``start`` to a landmark."""
    for _ in range(1000):
        labels, seen, v = [], {start}, start
        for _ in range(k):
            opts = [lab for lab in graph.slots(v) if neighbor(graph, v, lab) not in seen]
            if not opts:
                break
            lab = opts[int(rng.integers(len(opts)))]
            labels.append(lab)
            v = neighbor(graph, v, lab)
            seen.add(v)
        if len(labels) == k and partition.is_landmark(v):
            vs, entries = _walk_labels(graph, start, labels)
            return CandidatePath(partition.name_of(start), partition.name_of(v), tuple(labels),
                                 tuple(partition.name_of(x) for x in vs[1:-1]), tuple(entries))
    raise ValueError(f"no simple landmark path of length {k} from vertex {start}")


def plant_false_candidate(graph, partition, rng, start: int, k: int) -> CandidatePath:
    """A candidate as recorded after exactly one movement error.

    The out-labels are what was attempted, the in-labels and end landmark
    come from the path actually taken.  Verified against the true graph: the
    out-labels do not lead from ``start`` to the recorded end.
    """
    for _ in range(1000):
        true = plant_true_candidate(graph, partition, rng, start, k)
        j = int(rng.integers(k))
        vs, _ = _walk_labels(graph, start, true.out_labels)
        alts = [lab for lab in graph.slots(vs[j]) if lab != true.out_labels[j]]
        if not alts:
            continue
        attempted = list(true.out_labels)
        attempted[j] = alts[int(rng.integers(len(alts)))]
        # actual path: the true labels; the robot believes it followed `attempted`
        end = vs[-1]
        if replay(graph, start, attempted) == end:
            continue
        _, entries = _walk_labels(graph, start, true.out_labels)
        return CandidatePath(true.start, true.end, tuple(attempted), true.observed_classes,
                             tuple(entries))
    raise ValueError("could not plant a false candidate")


def plant_unreal_candidate(graph, partition, rng, start: int, k: int) -> CandidatePath:
    """Direction sequence paired with a landmark it does not lead to (oracle-checked)."""
    for _ in range(1000):
        target = plant_true_candidate(graph, partition, rng, start, k)
        labels = [graph.slots(start)[int(rng.integers(len(graph.slots(start))))]]
        v = neighbor(graph, start, labels[0])
        for _ in range(k - 1):
            opts = graph.slots(v)
            labels.append(opts[int(rng.integers(len(opts)))])
            v = neighbor(graph, v, labels[-1])
        if replay(graph, start, labels) != partition.vertex_of(target.end):
            return CandidatePath(target.start, target.end, tuple(labels), target.observed_classes)
    raise ValueError("could not plant an unreal candidate")


def is_real(graph, partition, cand: CandidatePath) -> bool:
    return replay(graph, partition.vertex_of(cand.start), cand.out_labels) == partition.vertex_of(cand.end)


# -- filtering experiment ----------------------------------------------------------

@dataclass
class FilterExperiment:
    n: int
    reps: int
    delta_f_local: float
    true_rejected: np.ndarray    # per true candidate, count over reps
    false_accepted: np.ndarray   # per false candidate, count over reps

    @property
    def misclassification_rate(self) -> float:
        total = (len(self.true_rejected) + len(self.false_accepted)) * self.reps
        return float((self.true_rejected.sum() + self.false_accepted.sum()) / total)

    @property
    def worst_candidate_rate(self) -> float:
        counts = np.concatenate([self.true_rejected, self.false_accepted])
        return float(counts.max() / self.reps)


def filtering_experiment(alpha: float, gamma: float, delta_f_local: float, n_true: int, n_false: int,
                         reps: int, seed: int, lengths=(1, 2), size: int = 6) -> FilterExperiment:
    """Plant ``n_true`` real and ``n_false`` unreal candidates on an all-landmark grid,
    filter each ``reps`` times with ``num_filter_traversals(gamma, delta_f_local)`` traversals."""
    graph, partition = gen_grid(size, size, "all")
    world = World.create(graph, partition, alpha, gamma)
    rng = substream(seed, "plant")
    starts = [int(rng.integers(graph.n)) for _ in range(n_true + n_false)]
    ks = [lengths[i % len(lengths)] for i in range(n_true + n_false)]
    trues = [plant_true_candidate(graph, partition, rng, s, k) for s, k in zip(starts[:n_true], ks)]
    falses = [plant_unreal_candidate(graph, partition, rng, s, k)
              for s, k in zip(starts[n_true:], ks[n_true:])]
    assert all(is_real(graph, partition, c) for c in trues)
    assert not any(is_real(graph, partition, c) for c in falses)
    n = num_filter_traversals(gamma, delta_f_local)
    true_rej = np.zeros(len(trues), int)
    false_acc = np.zeros(len(falses), int)
    for rep in range(reps):
        robot = Robot(world, partition.vertex_of(trues[0].start), substream(seed, "rep", rep))
        for i, c in enumerate(trues):
            true_rej[i] += 2 * count_positive_guesses(robot, c, n) <= n
        for i, c in enumerate(falses):
            false_acc[i] += 2 * count_positive_guesses(robot, c, n) > n
    return FilterExperiment(n, reps, delta_f_local, true_rej, false_acc)


# -- selection experiment ----------------------------------------------------------

def regular_world(d: int, radius: int) -> tuple[LabeledGraph, LandmarkPartition, int]:
    """All-landmark world whose vertices within ``radius`` of the returned start have degree ``d``."""
    if d == 4:
        size = 2 * radius + 3
        graph, partition = gen_grid(size, size, "all")
        return graph, partition, (size // 2) * size + size // 2
    # complete graph on d + 1 vertices, local labels 0..d-1
    edges = []
    nxt = [0] * (d + 1)
    for u in range(d + 1):
        for v in range(u + 1, d + 1):
            edges.append((u, v, nxt[u], nxt[v]))
            nxt[u] += 1
            nxt[v] += 1
    graph = build_graph(d + 1, edges, d)
    return graph, all_landmarks(graph), 0


def target_paths(graph, partition, start: int, r: int) -> list[tuple[tuple, str]]:
    """Every label sequence of length ``r`` from ``start`` ending at a landmark other than ``start``."""
    out = []
    seqs = [((), start)]
    for _ in range(r):
        seqs = [(s + (lab,), neighbor(graph, v, lab)) for s, v in seqs for lab in graph.slots(v)]
    for s, v in seqs:
        if v != start and partition.is_landmark(v):
            out.append((s, partition.name_of(v)))
    return out


def recording_probability(graph, world: World, start: int, labels: Sequence) -> float:
    """Exact chance one random-direction walk attempts and follows ``labels``."""
    p, v = 1.0, start
    for lab in labels:
        p *= world.movement.distribution(graph, v, lab)[lab] / len(graph.slots(v))
        v = neighbor(graph, v, lab)
    return p


@dataclass
class SelectionExperiment:
    alpha: float
    d: int
    r: int
    delta_s: float
    n: int
    reps: int
    all_recorded: int
    per_attempt_hits: int = 0
    per_attempt_trials: int = 0
    per_attempt_exact: float = 0.0

    @property
    def rate(self) -> float:
        return self.all_recorded / self.reps

    @property
    def passed(self) -> bool:
        return self.rate >= (1 - self.delta_s) - three_sigma(1 - self.delta_s, self.reps)


def selection_experiment(alpha: float, d: int, r: int, delta_s: float, reps: int, seed: int,
                         n: int | None = None, attempts_for_rate: int = 10000) -> SelectionExperiment:
    graph, partition, start = regular_world(d, r)
    world = World.create(graph, partition, alpha)
    params = LearnParams.for_world(graph, partition, delta_g=0.5, alpha=alpha, gamma=1.0,
                                   r=r, d=d, exploration_length=r)
    if n is None:
        n = num_selection_attempts(alpha, d, r, delta_s)
    targets = target_paths(graph, partition, start, r)
    home = partition.name_of(start)
    hits = 0
    for rep in range(reps):
        robot = Robot(world, start, substream(seed, "select", rep))
        found = {(c.out_labels, c.end) for c in select_candidates(robot, home, params, n)}
        hits += all(t in found for t in targets)
    exp = SelectionExperiment(alpha, d, r, delta_s, n, reps, hits)
    if attempts_for_rate:
        seq, _ = targets[0]
        vs, _ = _walk_labels(graph, start, seq)
        expected = tuple(partition.name_of(x) for x in vs[1:])
        robot = Robot(world, start, substream(seed, "rate"))
        ex = robot.explore(attempts_for_rate, r)
        # all-landmark world: the class sequence pins down the vertices visited
        exp.per_attempt_hits = sum(ex.intended[i] == seq and ex.classes[i] == expected
                                   for i in range(attempts_for_rate))
        exp.per_attempt_trials = attempts_for_rate
        exp.per_attempt_exact = recording_probability(graph, world, start, seq)
    return exp


# -- suites -------------------------------------------------------------------------

def exact_recording_check(d: int, r: int) -> tuple[float, float]:
    """With ``alpha = 1`` the per-attempt recording probability of one path is ``(1/d)^r`` exactly.

    Returns ``(computed, (1/d)^r)`` for the regular test world.
    """
    graph, partition, start = regular_world(d, r)
    world = World.create(graph, partition, 1.0)
    seq, _ = target_paths(graph, partition, start, r)[0]
    return recording_probability(graph, world, start, seq), (1 / d) ** r


@dataclass
class BoundReport:
    selection: list[SelectionExperiment]
    filtering: list[tuple[float, float, float, FilterExperiment, bool]]
    exact: list[tuple[int, int, float, float]]

    @property
    def passed(self) -> bool:
        return (all(s.passed for s in self.selection) and all(f[-1] for f in self.filtering)
                and all(math.isclose(got, want, rel_tol=1e-12) for _, _, got, want in self.exact))

    def summary(self) -> str:
        lines = ["selection: alpha d r delta_s n  all-recorded  floor  per-attempt  exact"]
        for s in self.selection:
            floor = (1 - s.delta_s) - three_sigma(1 - s.delta_s, s.reps)
            per = s.per_attempt_hits / s.per_attempt_trials if s.per_attempt_trials else float("nan")
            lines.append(f"  {s.alpha} {s.d} {s.r} {s.delta_s} {s.n}  {s.rate:.3f}  {floor:.3f}  "
                         f"{per:.4f}  {s.per_attempt_exact:.4f}  {'ok' if s.passed else 'FAIL'}")
        lines.append("filtering: alpha gamma delta_fl n  true-accept  worst-candidate-error  ceiling")
        for alpha, gamma, dfl, f, ok in self.filtering:
            accept = 1 - f.true_rejected.sum() / (len(f.true_rejected) * f.reps)
            lines.append(f"  {alpha} {gamma} {dfl} {f.n}  {accept:.4f}  {f.worst_candidate_rate:.4f}  "
                         f"{dfl + three_sigma(dfl, f.reps):.4f}  {'ok' if ok else 'FAIL'}")
        lines.append("alpha=1 recording probability: d r  computed  (1/d)^r")
        for d, r, got, want in self.exact:
            ok = math.isclose(got, want, rel_tol=1e-12)
            lines.append(f"  {d} {r}  {got!r}  {want!r}  {'ok' if ok else 'FAIL'}")
        return "\n".join(lines) + "\n"


def run_bound_suite(config: Mapping | None = None) -> BoundReport:
    """Monte Carlo checks of the selection and filtering counts on a small parameter grid.

    Selection points are ``(alpha, d, r, delta_s)``; filtering points are
    ``(alpha, gamma, delta_fl)`` with 10 real and 10 unreal planted candidates.
    A filtering point passes when no candidate is misclassified more often
    than ``delta_fl`` plus three standard errors.
    """
    config = dict(config or {})
    seed = int(config.get("seed", 0))
    reps = int(config.get("reps", 200))
    sel_grid = config.get("selection", [(0.9, 4, 1, 0.1), (0.95, 4, 2, 0.2), (0.8, 3, 2, 0.1)])
    filt_grid = config.get("filtering", [(0.95, 0.75, 0.1), (0.9, 0.9, 0.05)])
    selection = [selection_experiment(a, d, r, ds, reps, int(substream(seed, "sel", i).integers(2**31)),
                                      attempts_for_rate=int(config.get("attempts", 4000)))
                 for i, (a, d, r, ds) in enumerate(sel_grid)]
    filtering = []
    for i, (a, g, dfl) in enumerate(filt_grid):
        f = filtering_experiment(a, g, dfl, 10, 10, reps, int(substream(seed, "filt", i).integers(2**31)))
        filtering.append((a, g, dfl, f, f.worst_candidate_rate <= dfl + three_sigma(dfl, reps)))
    exact = [(d, r, *exact_recording_check(d, r)) for _, d, r, _ in sel_grid]
    return BoundReport(selection, filtering, exact)


@dataclass
class SeparationRow:
    k: int
    n: int
    real_hits: list[int]
    false_hits: list[int]
    expected_real: float
    expected_false: float
    threshold: float

    @property
    def accuracy(self) -> float:
        right = sum(h > self.threshold for h in self.real_hits)
        right += sum(h <= self.threshold for h in self.false_hits)
        return right / (len(self.real_hits) + len(self.false_hits))

    @property
    def real_mean(self) -> float:
        return float(np.mean(self.real_hits))

    @property
    def false_mean(self) -> float:
        return float(np.mean(self.false_hits))

    def real_within(self) -> bool:
        p = self.expected_real / self.n
        sigma = math.sqrt(self.n * p * (1 - p) / len(self.real_hits))
        return abs(self.real_mean - self.expected_real) <= 3 * sigma + 1e-12

    def false_below(self) -> bool:
        p = self.expected_false / self.n
        sigma = math.sqrt(self.n * p * (1 - p) / len(self.false_hits))
        return self.false_mean <= self.expected_false + 3 * sigma + 1e-12


@dataclass
class SeparationReport:
    alpha: float
    rows: list[SeparationRow]

    @property
    def passed(self) -> bool:
        return all(r.real_within() and r.false_below() for r in self.rows)

    def summary(self) -> str:
        lines = [f"alpha={self.alpha}", "k  n  real_mean expected  false_mean bound  accuracy"]
        for r in self.rows:
            lines.append(f"{r.k}  {r.n}  {r.real_mean:.1f} {r.expected_real:.1f}  "
                         f"{r.false_mean:.1f} {r.expected_false:.1f}  {r.accuracy:.3f}")
        return "\n".join(lines) + "\n"


def run_separation_suite(config: Mapping | None = None) -> SeparationReport:
    """Retrace-hit counts for planted real and single-error candidates of each length."""
    config = dict(config or {})
    alpha = float(config.get("alpha", 0.9))
    n = int(config.get("n", 1000))
    ks = config.get("lengths") or list(range(1, int(config.get("r", 3)) + 1))
    per_kind = int(config.get("candidates", 50))
    seed = int(config.get("seed", 0))
    size = 2 * max(ks) + 5
    graph, partition = gen_grid(size, size, "all")
    world = World.create(graph, partition, alpha, reverse_certainty=True)
    centre = (size // 2) * size + size // 2
    rows = []
    for k in ks:
        rng = substream(seed, "plant", k)
        real = [plant_true_candidate(graph, partition, rng, centre, k) for _ in range(per_kind)]
        false = [plant_false_candidate(graph, partition, rng, centre, k) for _ in range(per_kind)]
        robot = Robot(world, centre, substream(seed, "hits", k))
        rows.append(SeparationRow(
            k, n,
            [count_hits(robot, c, n) for c in real],
            [count_hits(robot, c, n) for c in false],
            alpha ** k * n, alpha ** (k - 1) * (1 - alpha) * n,
            n * reverse_threshold(alpha, k)))
    return SeparationReport(alpha, rows)
