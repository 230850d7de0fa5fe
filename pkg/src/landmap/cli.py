"""Command-line interface: ``landmap <subcommand> ...``.

Exit status: 0 on success, 1 when ``evaluate`` fails its statistical
acceptance test, 2 on usage, configuration or file errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .generators import SAMPLE_BUILDING, GenerationError, generate
from .graph import GraphError, bfs_distances, load_world, replay, save_world, world_to_dot
from .harness import ExperimentConfig, run_bound_suite, run_pac_campaign, run_separation_suite, write_campaign
from .learner import LearnParams, learn_global
from .maps import MapFormatError, QueryError, global_path_query, load_map, map_to_dot, save_map
from .rng import SEED_ENV, default_seed
from .world import World


class UsageError(Exception):
    pass


def _read_json(path: str, what: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} {path}: invalid JSON at line {exc.lineno} column {exc.colno}") from None


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    try:
        return default_seed()
    except ValueError:
        raise UsageError(f"environment variable {SEED_ENV} must be an integer") from None


# -- generator flags -----------------------------------------------------------

def _add_generator_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("world generator")
    g.add_argument("--kind", choices=["grid", "building", "random"])
    g.add_argument("--width", type=int)
    g.add_argument("--height", type=int)
    g.add_argument("--landmarks", default="all",
                   help="grid: 'all' or comma-separated vertex ids")
    g.add_argument("--landmark-count", type=int, help="grid/random: number of landmarks")
    g.add_argument("--target-r", type=int, help="grid/random: required landmark parameter")
    g.add_argument("--corridors", help="building: corridor spec JSON file (default: built-in sample)")
    g.add_argument("--vertices", type=int, help="random: vertex count")
    g.add_argument("--max-degree", type=int, help="random: degree bound")
    g.add_argument("--world-seed", type=int, help="generator seed (default: --seed)")


def _generator_spec(args, seed: int) -> dict:
    if args.kind is None:
        raise UsageError("missing --kind")
    spec: dict = {"kind": args.kind, "seed": args.world_seed if args.world_seed is not None else seed}
    if args.kind == "grid":
        for flag in ("width", "height"):
            if getattr(args, flag) is None:
                raise UsageError(f"grid needs --{flag}")
        spec.update(width=args.width, height=args.height)
        if args.landmark_count is not None:
            spec["landmarks"] = {"count": args.landmark_count, "target_r": args.target_r}
        elif args.landmarks == "all":
            spec["landmarks"] = "all"
        else:
            try:
                spec["landmarks"] = [int(x) for x in args.landmarks.split(",")]
            except ValueError:
                raise UsageError("--landmarks must be 'all' or comma-separated integers") from None
    elif args.kind == "building":
        spec["corridors"] = _read_json(args.corridors, "corridor spec") if args.corridors else SAMPLE_BUILDING
    else:
        for flag in ("vertices", "max_degree", "landmark_count", "target_r"):
            if getattr(args, flag) is None:
                raise UsageError(f"random needs --{flag.replace('_', '-')}")
        spec.update(vertex_count=args.vertices, max_degree=args.max_degree,
                    landmark_count=args.landmark_count, target_r=args.target_r)
    return spec


# -- learner flags ---------------------------------------------------------------

LEARN_FLAGS = {
    "delta": "delta_g", "alpha": "alpha", "gamma": "gamma", "c": "c", "m": "m",
    "exploration_length": "exploration_length", "r": "r", "d": "d",
}


def _add_learn_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("learner")
    g.add_argument("--delta", type=float, help="global failure probability delta_g")
    g.add_argument("--alpha", type=float, help="movement reliability (0.5, 1]")
    g.add_argument("--gamma", type=float, help="traversal-guess accuracy (0.5, 1]")
    g.add_argument("--c", type=int, help="stretch parameter c > 2 (default 4)")
    g.add_argument("--m", type=int, help="number of global queries to cover (default |V|)")
    g.add_argument("--exploration-length", type=int, help="walk length during selection (default max(r, 1))")
    g.add_argument("--r", type=int, help="landmark parameter (default: from the world)")
    g.add_argument("--d", type=int, help="degree bound (default: from the world)")
    g.add_argument("--reverse-certainty", action="store_true", default=None,
                   help="filter by retracing entry labels instead of guesses")


def _learn_dict(args, base: dict | None = None) -> dict:
    out = dict(base or {})
    for flag, field in LEARN_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            out[field] = value
    if args.reverse_certainty:
        out["reverse_certainty"] = True
    return out


# -- subcommands -------------------------------------------------------------------

def cmd_generate(args) -> int:
    graph, partition = generate(_generator_spec(args, _seed(args)))
    save_world(args.output, graph, partition)
    print(f"wrote {args.output}: {graph.n} vertices, {len(graph.edges)} edges, "
          f"{len(partition.landmarks)} landmarks, r={partition.r}")
    return 0


def cmd_learn(args) -> int:
    graph, partition = load_world(args.world)
    learn = _learn_dict(args, _read_json(args.config, "learner config") if args.config else None)
    learn.pop("seed", None)
    for field in ("delta_g", "alpha", "gamma"):
        if field not in learn:
            flag = {"delta_g": "--delta"}.get(field, f"--{field}")
            raise UsageError(f"missing learner field '{field}' (flag {flag})")
    params = LearnParams.for_world(graph, partition, **learn)
    world = World.create(graph, partition, params.alpha, params.gamma, params.reverse_certainty)
    traces = {} if args.trace else None
    lmap = learn_global(world, params, _seed(args), traces=traces)
    save_map(args.output, lmap)
    if traces is not None:
        with open(args.trace, "w") as fh:
            for robot in sorted(traces):
                for event in traces[robot]:
                    fh.write(json.dumps({"robot": robot, **event}, sort_keys=True) + "\n")
    n_routes = sum(len(v) for v in lmap.routes.values())
    print(f"wrote {args.output}: {len(lmap.landmarks)} landmarks, {n_routes} routes")
    return 0


def cmd_query(args) -> int:
    lmap = load_map(args.map)
    try:
        ans = global_path_query(lmap, args.src, args.dst)
    except QueryError as exc:
        raise UsageError(f"--from/--to: {exc.args[0]}") from None
    if ans is None:
        print(f"no route from {args.src} to {args.dst}")
        return 0
    print("waypoints: " + " -> ".join(ans.waypoints))
    print("labels: " + " ".join(str(x) for x in ans.labels))
    print(f"length: {ans.length}")
    if args.world:
        graph, partition = load_world(args.world)
        a, b = partition.vertex_of(args.src), partition.vertex_of(args.dst)
        ok = replay(graph, a, ans.labels) == b
        print(f"valid: {str(ok).lower()}")
        if ok and a != b:
            print(f"stretch: {ans.length / bfs_distances(graph, a)[b]:.6f}")
    return 0


def cmd_evaluate(args) -> int:
    seed = _seed(args)
    if args.config:
        doc = _read_json(args.config, "experiment config")
        if not isinstance(doc, dict):
            raise UsageError("experiment config must be a JSON object")
        doc.setdefault("seed", seed)
        if args.seed is not None:
            doc["seed"] = args.seed
        if args.trials is not None:
            doc["trials"] = args.trials
        if args.kind is not None:
            doc["generator"] = _generator_spec(args, doc["seed"])
        doc["learn"] = _learn_dict(args, doc.get("learn"))
    else:
        if args.trials is None:
            raise UsageError("evaluate needs --config or --trials with generator and learner flags")
        doc = {"generator": _generator_spec(args, seed), "learn": _learn_dict(args),
               "trials": args.trials, "seed": seed}
    if args.workers is not None:
        doc["workers"] = args.workers
    outputs = dict(doc.get("outputs") or {})
    for key, flag in (("stats", args.csv), ("maps", args.maps_dir), ("dot", args.dot_dir)):
        if flag is not None:
            outputs[key] = flag
    doc["outputs"] = outputs
    config = ExperimentConfig.from_dict(doc)
    # fail fast on a bad learner section before any trial runs
    config.params(*config.world(0))
    report = run_pac_campaign(config)
    write_campaign(report, **{k: outputs.get(k) for k in ("stats", "maps", "dot")})
    sys.stdout.write(report.summary())
    return 0 if report.passed else 1


def cmd_bounds(args) -> int:
    config = _read_json(args.config, "bounds config") if args.config else {}
    if not isinstance(config, dict):
        raise UsageError("bounds config must be a JSON object")
    if args.seed is not None or "seed" not in config:
        config["seed"] = _seed(args)
    if args.reps is not None:
        config["reps"] = args.reps
    report = run_bound_suite(config)
    sys.stdout.write(report.summary())
    print(f"result: {'PASS' if report.passed else 'FAIL'}")
    return 0


def cmd_separation(args) -> int:
    config = {"alpha": args.alpha, "n": args.n, "candidates": args.candidates, "seed": _seed(args),
              "lengths": [int(x) for x in args.lengths.split(",")]}
    report = run_separation_suite(config)
    sys.stdout.write(report.summary())
    print(f"result: {'PASS' if report.passed else 'FAIL'}")
    return 0


def cmd_export(args) -> int:
    if (args.world is None) == (args.map is None):
        raise UsageError("export needs exactly one of -w/--world or -m/--map")
    text = world_to_dot(*load_world(args.world)) if args.world else map_to_dot(load_map(args.map))
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="landmap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    seed_help = f"root seed (default: ${SEED_ENV} or 0)"

    p = sub.add_parser("generate", help="write a world file")
    _add_generator_flags(p)
    p.add_argument("--seed", type=int, help=seed_help)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("learn", help="learn a map for a world")
    p.add_argument("-w", "--world", required=True)
    _add_learn_flags(p)
    p.add_argument("--config", help="JSON object of learner fields; flags override it")
    p.add_argument("--seed", type=int, help=seed_help)
    p.add_argument("--trace", help="write every move as NDJSON (small worlds only)")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("query", help="answer a landmark-to-landmark query from a map")
    p.add_argument("-m", "--map", required=True)
    p.add_argument("--from", dest="src", required=True)
    p.add_argument("--to", dest="dst", required=True)
    p.add_argument("-w", "--world", help="also check the answer against this world")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("evaluate", help="run a PAC trial campaign")
    p.add_argument("--config", help="experiment config JSON")
    _add_generator_flags(p)
    _add_learn_flags(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int, help=seed_help)
    p.add_argument("--csv", help="per-trial statistics CSV")
    p.add_argument("--maps-dir", help="directory for one learned map per trial")
    p.add_argument("--dot-dir", help="directory for one DOT rendering per trial")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bounds", help="Monte Carlo check of the selection and filtering counts")
    p.add_argument("--config", help="JSON with seed, reps, selection, filtering grids")
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int, help=seed_help)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("separation", help="retrace-hit counts for real and false candidates")
    p.add_argument("--alpha", type=float, default=0.9)
    p.add_argument("--n", type=int, default=1000, help="retraces per candidate")
    p.add_argument("--lengths", default="1,2,3", help="comma-separated candidate lengths")
    p.add_argument("--candidates", type=int, default=50, help="candidates of each kind per length")
    p.add_argument("--seed", type=int, help=seed_help)
    p.set_defaults(func=cmd_separation)

    p = sub.add_parser("export", help="emit Graphviz DOT for a world or a map")
    p.add_argument("-w", "--world")
    p.add_argument("-m", "--map")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: --help exits 0, bad usage exits 2
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        msg = f"file not found: {exc.filename}"
    except (UsageError, GraphError, MapFormatError, GenerationError, ValueError, KeyError) as exc:
        msg = str(exc.args[0]) if isinstance(exc, KeyError) and exc.args else str(exc)
    print(f"landmap {args.command}: error: {msg}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
