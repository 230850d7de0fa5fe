import csv
import io

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from landmap.generators import gen_grid
from landmap.graph import replay
from landmap.harness import (
    CSV_COLUMNS,
    ExperimentConfig,
    acceptance_count,
    clopper_pearson,
    evaluate_map,
    exact_recording_check,
    ideal_route_stretch,
    is_real,
    learned_edge_triples,
    plant_false_candidate,
    plant_true_candidate,
    plant_unreal_candidate,
    run_bound_suite,
    run_pac_campaign,
    run_separation_suite,
    true_edge_triples,
    write_campaign,
)
from landmap.maps import LearnedMap
from landmap.rng import substream


def grid_config(**kw):
    doc = {"generator": {"kind": "grid", "width": 3, "height": 3, "landmarks": "all"},
           "learn": {"delta_g": 0.2, "alpha": 0.9, "gamma": 0.9}, "trials": 3, "seed": 1}
    doc.update(kw)
    return ExperimentConfig.from_dict(doc)


@given(st.integers(0, 60), st.integers(1, 60))
def test_clopper_pearson_matches_beta_quantiles(k, n):
    k = min(k, n)
    lo, hi = clopper_pearson(k, n)
    exp_lo = 0.0 if k == 0 else stats.beta.ppf(0.025, k, n - k + 1)
    exp_hi = 1.0 if k == n else stats.beta.ppf(0.975, k + 1, n - k)
    assert lo == pytest.approx(exp_lo, abs=1e-9) and hi == pytest.approx(exp_hi, abs=1e-9)


@given(st.integers(1, 200), st.floats(0.5, 0.99))
def test_acceptance_count_is_exact_lower_quantile(n, p):
    t = acceptance_count(n, p)
    # falling below t happens with probability at most 5% when the true rate is p
    assert stats.binom.cdf(t - 1, n, p) <= 0.05 + 1e-12
    assert stats.binom.cdf(t, n, p) > 0.05


def test_zero_trials_report_is_empty():
    report = run_pac_campaign(grid_config(trials=0))
    assert report.trials == [] and report.success_fraction is None
    assert report.confidence_interval == (0.0, 1.0)
    assert report.csv_text().strip() == ",".join(CSV_COLUMNS)
    assert "0 trials" in report.summary()


def test_certain_world_always_succeeds():
    cfg = grid_config(learn={"delta_g": 0.2, "alpha": 1.0, "gamma": 1.0})
    report = run_pac_campaign(cfg)
    assert report.success_fraction == 1.0 and report.passed
    for t in report.trials:
        assert t.edge_set_exact and t.max_stretch == 1.0


def test_trial_report_invariants_and_csv(tmp_path):
    report = run_pac_campaign(grid_config())
    for t in report.trials:
        for q in t.queries:
            assert q.answered or not q.valid
            assert (q.stretch is not None) == q.valid
    rows = list(csv.reader(io.StringIO(report.csv_text())))
    assert rows[0] == CSV_COLUMNS and len(rows) == 4
    write_campaign(report, stats=tmp_path / "s.csv", maps=tmp_path / "maps", dot=tmp_path / "dot")
    assert (tmp_path / "s.csv").read_text() == report.csv_text()
    assert sorted(p.name for p in (tmp_path / "maps").iterdir()) == [f"map_000{i}.json" for i in range(3)]
    assert len(list((tmp_path / "dot").iterdir())) == 3
    write_campaign(report, stats=tmp_path / "new" / "s.csv")
    assert (tmp_path / "new" / "s.csv").exists()


def test_parallel_campaign_matches_serial():
    serial = run_pac_campaign(grid_config())
    parallel = run_pac_campaign(grid_config(workers=2))
    assert serial.csv_text() == parallel.csv_text()
    assert serial.maps == parallel.maps


def test_regenerated_worlds_differ_per_trial():
    cfg = grid_config(generator={"kind": "grid", "width": 4, "height": 4,
                                 "landmarks": {"count": 5, "target_r": 2}},
                      regenerate=True)
    worlds = {tuple(sorted(cfg.world(i)[1].landmarks)) for i in range(5)}
    assert len(worlds) > 1


def test_evaluate_map_uses_replay_not_belief():
    g, p = gen_grid(2, 2, "all")
    # L0 -> L1 stored as "N" but "N" from vertex 0 reaches vertex 2
    routes = {("L0", "L1"): [("N",)], ("L1", "L0"): [("W",)]}
    lmap = LearnedMap.build(["L0", "L1", "L2", "L3"], routes)
    queries, ok = evaluate_map(lmap, g, p, 4)
    by_pair = {(q.u, q.v): q for q in queries}
    assert by_pair[("L0", "L1")].answered and not by_pair[("L0", "L1")].valid
    assert by_pair[("L1", "L0")].valid and by_pair[("L1", "L0")].stretch == 1.0
    assert not by_pair[("L0", "L3")].answered
    assert not ok


def test_edge_triples():
    g, p = gen_grid(2, 2, "all")
    truth = true_edge_triples(g, p)
    assert len(truth) == 8 and ("L0", "E", "L1") in truth
    lmap = LearnedMap.build(p.names, {("L0", "L1"): [("E",), ("N", "E", "S")]})
    assert learned_edge_triples(lmap) == {("L0", "E", "L1")}


def test_config_errors_name_the_field():
    base = {"generator": {"kind": "grid"}, "learn": {"delta_g": 0.1}, "trials": 1}
    for missing in ("generator", "learn", "trials"):
        doc = {k: v for k, v in base.items() if k != missing}
        with pytest.raises(ValueError, match=missing):
            ExperimentConfig.from_dict(doc)
    with pytest.raises(ValueError, match="bogus"):
        ExperimentConfig.from_dict({**base, "bogus": 1})
    with pytest.raises(ValueError, match="trials"):
        ExperimentConfig.from_dict({**base, "trials": -1})
    with pytest.raises(ValueError, match="learn.delta_g"):
        ExperimentConfig.from_dict({**base, "learn": {}})
    with pytest.raises(ValueError, match="outputs"):
        ExperimentConfig.from_dict({**base, "outputs": {"movie": "x"}})


@given(st.integers(0, 10**6), st.integers(1, 4))
def test_planted_candidates_are_oracle_verified(seed, k):
    g, p = gen_grid(9, 9, "all")
    rng = substream(seed, "plant")
    true = plant_true_candidate(g, p, rng, 40, k)
    false = plant_false_candidate(g, p, rng, 40, k)
    unreal = plant_unreal_candidate(g, p, rng, 40, k)
    assert is_real(g, p, true) and not is_real(g, p, false) and not is_real(g, p, unreal)
    # a single-error candidate keeps the entry labels of the path actually taken
    assert replay(g, p.vertex_of(false.end), false.in_labels[::-1]) == 40
    assert false.length == unreal.length == k


def test_ideal_route_stretch():
    g, p = gen_grid(5, 2, "all")
    assert ideal_route_stretch(g, p, 1) == 1.0
    g, p = gen_grid(4, 4, [0, 15])
    assert ideal_route_stretch(g, p, 2) == float("inf")
    g, p = gen_grid(4, 4, [0, 3, 4, 6, 7, 9])
    assert ideal_route_stretch(g, p, 2) == pytest.approx(5 / 3)


def test_exact_recording_probability_at_alpha_one():
    for d, r in ((4, 1), (4, 2), (3, 2), (2, 3)):
        got, want = exact_recording_check(d, r)
        assert got == pytest.approx(want, rel=1e-12)
        assert want == (1 / d) ** r


def test_bound_suite_small_grid():
    report = run_bound_suite({"reps": 60, "attempts": 1000, "selection": [(0.9, 4, 1, 0.1)],
                              "filtering": [(0.95, 0.75, 0.1)]})
    assert report.passed
    assert report.selection[0].n == 15 and report.filtering[0][3].n == 40
    assert "selection" in report.summary()


def test_separation_is_perfect_at_alpha_one():
    report = run_separation_suite({"alpha": 1.0, "n": 20, "lengths": [1, 2], "candidates": 10})
    for row in report.rows:
        assert row.accuracy == 1.0
        assert row.real_hits == [20] * 10 and row.false_hits == [0] * 10


def test_separation_at_length_one():
    report = run_separation_suite({"alpha": 0.8, "n": 400, "lengths": [1], "candidates": 20, "seed": 2})
    row = report.rows[0]
    assert row.expected_real == pytest.approx(0.8 * 400)
    assert row.expected_false == pytest.approx(0.2 * 400)
    assert row.real_within() and row.false_below()
