import itertools
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from landmap.generators import gen_grid
from landmap.graph import oracle_shortest_path, replay
from landmap.learner import LearnParams, learn_global
from landmap.maps import (
    LearnedMap,
    MapFormatError,
    QueryError,
    deserialize_map,
    dumps_map,
    global_path_query,
    load_map,
    map_to_dot,
    save_map,
    serialize_map,
    stretch_bound,
    stretch_ratio,
)
from landmap.world import World


@pytest.fixture(scope="module")
def learned_grid():
    g, p = gen_grid(3, 3, "all")
    params = LearnParams.for_world(g, p, delta_g=0.1, alpha=0.9, gamma=0.9)
    return g, p, learn_global(World.create(g, p, 0.9, 0.9), params, seed=4)


def figure_map():
    routes = {("A", "B"): [("N", "E")], ("B", "C"): [("E",)], ("C", "D"): [("S", "S")],
              ("A", "E"): [("W",)]}
    return LearnedMap.build("ABCDE", routes)


def test_identity_query_is_empty():
    ans = global_path_query(figure_map(), "B", "B")
    assert ans.labels == () and ans.length == 0 and ans.waypoints == ("B",)


def test_query_concatenates_local_routes():
    ans = global_path_query(figure_map(), "A", "D")
    assert ans.waypoints == ("A", "B", "C", "D")
    assert ans.labels == ("N", "E", "E", "S", "S") and ans.length == 5


def test_not_connected_and_unknown_landmark():
    m = figure_map()
    assert global_path_query(m, "D", "A") is None
    with pytest.raises(QueryError):
        global_path_query(m, "A", "Z")


def test_query_on_learned_r0_grid_matches_oracle(learned_grid):
    g, p, m = learned_grid
    ans = global_path_query(m, p.name_of(0), p.name_of(6))
    assert ans.length == len(oracle_shortest_path(g, 0, 6)) == 2
    assert replay(g, 0, ans.labels) == 6


def test_r0_stretch_is_one_everywhere(learned_grid):
    g, p, m = learned_grid
    for u, v in itertools.permutations(p.landmark_names(), 2):
        assert stretch_ratio(m, g, p, u, v) == 1.0
    assert stretch_ratio(m, g, p, "L0", "L0") is None


def test_stretch_bounds():
    assert stretch_bound(4) == 2.0
    assert stretch_bound(3) == 3.0


def test_routes_sorted_and_deduplicated():
    m = LearnedMap.build(["A", "B"], {("A", "B"): [("x", "y"), ("z",), ("x", "y")]})
    assert m.routes[("A", "B")] == (("z",), ("x", "y"))
    assert m.shortest_route("A", "B") == ("z",)
    with pytest.raises(ValueError):
        LearnedMap.build(["A"], {("A", "B"): [("x",)]})


def test_empty_map_document():
    doc = serialize_map(LearnedMap.build([], {}))
    assert doc == {"landmarks": [], "routes": [], "params_used": {}, "provenance": {}}
    assert deserialize_map(doc) == LearnedMap.build([], {})


def test_file_round_trip(learned_grid, tmp_path):
    _, _, m = learned_grid
    save_map(tmp_path / "m.json", m)
    assert load_map(tmp_path / "m.json") == m
    assert (tmp_path / "m.json").read_text() == dumps_map(m)


@pytest.mark.parametrize("mutate, where", [
    (lambda d: d.pop("routes"), "routes"),
    (lambda d: d["routes"][0].pop("labels"), r"routes\[0\]"),
    (lambda d: d["routes"][1].update(length=99), r"routes\[1\].length"),
    (lambda d: d["routes"][0].update({"to": "nowhere"}), r"routes\[0\]"),
    (lambda d: d.update(landmarks="A"), "landmarks"),
    (lambda d: d["routes"][2].update(labels=[["N"]]), r"routes\[2\].labels"),
    (lambda d: d.update(provenance=[]), "provenance"),
])
def test_corrupted_documents_are_rejected(learned_grid, mutate, where):
    _, _, m = learned_grid
    doc = json.loads(dumps_map(m))
    mutate(doc)
    with pytest.raises(MapFormatError, match=where):
        deserialize_map(doc)


def test_invalid_json_file(tmp_path):
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(MapFormatError, match="line 1"):
        load_map(tmp_path / "bad.json")


def test_map_dot_edges_are_route_lengths():
    dot = map_to_dot(figure_map())
    assert '"A" -> "B" [label="2"]' in dot and dot.startswith("digraph")


# -- properties ----------------------------------------------------------------------

labels = st.sampled_from(["N", "S", "E", "W", 0, 1, 2])


@st.composite
def random_maps(draw, max_landmarks=8):
    k = draw(st.integers(1, max_landmarks))
    names = [f"L{i}" for i in range(k)]
    pairs = draw(st.lists(st.tuples(st.sampled_from(names), st.sampled_from(names)), max_size=20))
    routes = {}
    for a, b in pairs:
        if a != b:
            seqs = draw(st.lists(st.lists(labels, min_size=1, max_size=4).map(tuple), min_size=1, max_size=3))
            routes.setdefault((a, b), []).extend(seqs)
    return LearnedMap.build(names, routes, {"c": 4}, {"seed": draw(st.integers(0, 9))})


def brute_force_length(m, u, v):
    """Shortest composition by enumerating every simple landmark sequence."""
    if u == v:
        return 0
    others = [x for x in m.landmarks if x not in (u, v)]
    best = None
    for k in range(len(others) + 1):
        for mid in itertools.permutations(others, k):
            chain = (u, *mid, v)
            legs = [m.shortest_route(a, b) for a, b in zip(chain, chain[1:])]
            if all(leg is not None for leg in legs):
                total = sum(len(leg) for leg in legs)
                best = total if best is None else min(best, total)
    return best


@given(random_maps(), st.data())
def test_query_is_optimal_among_compositions(m, data):
    u = data.draw(st.sampled_from(m.landmarks))
    v = data.draw(st.sampled_from(m.landmarks))
    ans = global_path_query(m, u, v)
    expected = brute_force_length(m, u, v)
    if expected is None:
        assert ans is None
    else:
        assert ans.length == expected == len(ans.labels)
        legs = list(zip(ans.waypoints, ans.waypoints[1:]))
        assert ans.labels == tuple(x for a, b in legs for x in m.shortest_route(a, b))


@given(random_maps())
def test_serialization_round_trip(m):
    assert deserialize_map(json.loads(dumps_map(m))) == m


@given(st.integers(0, 10**6))
def test_answers_from_true_routes_replay_correctly(seed):
    import numpy as np
    g, p = gen_grid(4, 4, np.random.default_rng(seed).choice(16, 5, replace=False).tolist())
    names = p.landmark_names()
    routes = {(a, b): [tuple(oracle_shortest_path(g, p.vertex_of(a), p.vertex_of(b)))]
              for a, b in itertools.permutations(names, 2)
              if len(oracle_shortest_path(g, p.vertex_of(a), p.vertex_of(b))) <= 2}
    m = LearnedMap.build(names, routes)
    for a, b in itertools.permutations(names, 2):
        ans = global_path_query(m, a, b)
        if ans is not None:
            assert replay(g, p.vertex_of(a), ans.labels) == p.vertex_of(b)
