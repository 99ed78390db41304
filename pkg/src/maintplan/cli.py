"""Command-line front end: one subcommand per planning stage plus the chained
pipeline and the benchmark protocols."""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .assembly import load_assembly
from .errors import InputError, NoPlan, PlannerError
from .fusion import BeliefVector, beliefs_to_dict, load_observations, update_all, visible_set
from .hmp import default_rulebase, load_rulebase, load_tool_catalog, plan_disassembly, removal_chain
from .mpdsl import parse, serialize
from .pathplan import PlannerConfig, load_model, plan, smooth_path
from .pathplan.collision import CollisionChecker
from .pathplan.io import (
    QUANTILE_COLUMNS,
    TIMING_COLUMNS,
    load_query,
    quantile_rows,
    result_row,
    write_results,
    write_rows,
    write_waypoints,
)
from .scenarios import SCENARIOS, load_scenario
from .sda import SdaConfig, SdofLabel, build_relation_graph, dump_spaces_csv
from .sequencing import (
    METHODS,
    AccessibilityConfig,
    brute_force_sequence,
    chain_cost_matrix,
    filter_accessible,
    random_matrix,
    solve_sequence,
)
from .worldmap import ASDConfig, build_asd, load_pvm, save_tree

EXIT_OK, EXIT_INPUT, EXIT_NOPLAN, EXIT_FAILED = 0, 2, 3, 4
SEARCH_RUNS, SAMPLING_RUNS = 5, 30


def data_file(name: str) -> Path:
    """Path to a file shipped with the package."""
    return Path(str(resources.files("maintplan") / "data" / name))


def resolve(path: str | None) -> Path | None:
    """A given path, or the bundled data file of that name if it does not exist."""
    if path is None:
        return None
    p = Path(path)
    if p.exists():
        return p
    bundled = data_file(p.name)
    if bundled.exists():
        return bundled
    raise InputError(f"file not found: {path}")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _sda_config(args) -> SdaConfig:
    return SdaConfig(n=args.samples, seed=args.seed, theta_tol=args.theta_tol)


def _asd_config(args) -> ASDConfig:
    return ASDConfig(rho_limit=args.rho_limit, d_max=args.depth, s_max=args.smax)


def _rules(args):
    return load_rulebase(resolve(args.rules)) if args.rules else default_rulebase()


def _tools(args) -> dict[str, float]:
    return load_tool_catalog(resolve(args.tools or "tools.json"))


def _visible(args, model) -> set[str]:
    """Trusted-present components; everything counts as present without a log."""
    if not args.obs:
        return set(model.components)
    beliefs = BeliefVector.uniform(model.components, trust=args.trust)
    return visible_set(update_all(beliefs, load_observations(resolve(args.obs))))


# -- subcommands -----------------------------------------------------------------


def cmd_analyze(args) -> int:
    model = load_assembly(resolve(args.assembly))
    graph = build_relation_graph(model, _sda_config(args))
    out = _out_dir(args)
    doc = {
        "components": [
            {
                "id": c,
                "label": graph.labels[c].value,
                "w_size": len(graph.spaces[c]),
                "w_fraction": graph.spaces[c].fraction,
                "direction": None if graph.directions[c] is None else [float(v) for v in graph.directions[c]],
            }
            for c in sorted(graph.labels)
        ],
        "relations": [
            {"id": rid, "a": model.relations[rid].a, "b": model.relations[rid].b, "label": lab.value}
            for rid, lab in sorted(graph.edges.items())
        ],
    }
    _write_json(out / "graph.json", doc)
    dump_spaces_csv(graph, out / "spaces.csv")
    for c in doc["components"]:
        print(f"{c['id']}: {c['label']} |W|={c['w_size']}")
    return EXIT_OK


def cmd_plan(args) -> int:
    model = load_assembly(resolve(args.assembly))
    result = plan_disassembly(model, _sda_config(args), _rules(args), args.target)
    out = _out_dir(args)
    text = serialize(result.primitives)
    (out / "plan.mpp").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def cmd_fuse(args) -> int:
    model = load_assembly(resolve(args.assembly))
    if not args.obs:
        raise InputError("fuse needs --obs")
    beliefs = BeliefVector.uniform(model.components, trust=args.trust)
    beliefs = update_all(beliefs, load_observations(resolve(args.obs)))
    _write_json(_out_dir(args) / "beliefs.json", beliefs_to_dict(beliefs))
    for c in sorted(beliefs.log_odds):
        print(f"{c}: {beliefs[c]:.6f}{' visible' if c in visible_set(beliefs) else ''}")
    return EXIT_OK


def _sequence_chains(chains, model, tools, method):
    positions = {c: model.components[c].position for c in model.components}
    matrix = chain_cost_matrix(chains, positions, tools)
    res = solve_sequence(matrix, method)
    return [chains[j - 1] for j in res.order], res


def removal_waves(model, target, sda_cfg, rules, tools, heuristic, visible=None, vmap=None):
    """Removals in waves of currently removable components, each wave ordered
    by the sequencer.

    Only components of the monotone plan take part, the target goes last, and
    with ``visible`` or ``vmap`` given a component also has to be trusted
    present and approachable along its removal direction.
    """
    full = plan_disassembly(model, sda_cfg, rules, target)
    pending = full.components()
    probe = AccessibilityConfig()
    residual = model
    program, waves, results = [], [], []
    while pending:
        graph = build_relation_graph(residual, sda_cfg)
        ready = [
            c
            for c in pending
            if graph.labels[c] is not SdofLabel.FIX
            and (c != target or len(pending) == 1)
            and (visible is None or c in visible)
        ]
        chains = [removal_chain(c, residual.components[c].cls, graph.labels[c], rules) for c in ready]
        if vmap is not None:
            heads = filter_accessible([ch[0] for ch in chains], vmap, probe, residual, graph.directions)
            keep = {mp.component for mp in heads}
            chains = [ch for ch in chains if ch[0].component in keep]
        if not chains:
            raise NoPlan(
                "no visible and accessible component can be removed next "
                f"(pending: {', '.join(pending)})"
            )
        ordered, res = _sequence_chains(chains, residual, tools, heuristic)
        waves.append([ch[0].component for ch in ordered])
        results.append(res)
        for ch in ordered:
            program.extend(ch)
        done = set(waves[-1])
        pending = [c for c in pending if c not in done]
        residual = residual.without(done)
    return program, waves, results


def cmd_sequence(args) -> int:
    model = load_assembly(resolve(args.assembly))
    visible = _visible(args, model) if args.obs else None
    program, waves, results = removal_waves(
        model, args.target, _sda_config(args), _rules(args), _tools(args), args.heuristic, visible
    )
    out = _out_dir(args)
    text = serialize(program)
    (out / "sequence.mpp").write_text(text, encoding="utf-8")
    rows = [
        {"wave": w, "position": i, "component": c} for w, wave in enumerate(waves) for i, c in enumerate(wave)
    ]
    write_rows(out / "sequence.csv", rows, ("wave", "position", "component"))
    write_rows(
        out / "sequence.timings.csv",
        [
            {"wave": w, "method": r.method, "cost_s": r.total_cost, "expanded": r.expanded, "wall_s": r.wall_time}
            for w, r in enumerate(results)
        ],
        ("wave", "method", "cost_s", "expanded", "wall_s"),
    )
    sys.stdout.write(text)
    return EXIT_OK


def cmd_asd(args) -> int:
    tree = build_asd(load_pvm(resolve(args.map)), _asd_config(args))
    save_tree(tree, _out_dir(args) / "tree.json")
    leaves = tree.leaves()
    print(f"{len(leaves)} leaves, max depth {max(n.region.depth for n in leaves)}")
    return EXIT_OK


def _planning_problem(args):
    """(name, model, map, tree, q_start, q_goal, config) from a scenario or files."""
    if args.scenario:
        sc = load_scenario(args.scenario)
        name, model, vmap, q0, q1 = sc.name, sc.model, sc.vmap, sc.q_start, sc.q_goal
        query = None
    else:
        if not (args.robot and args.map and args.query):
            raise InputError("pathplan needs --scenario or all of --robot, --map and --query")
        model = load_model(resolve(args.robot))
        vmap = load_pvm(resolve(args.map))
        query = load_query(resolve(args.query))
        name, q0, q1 = Path(args.query).name.split(".")[0], np.array(query.q_start), np.array(query.q_goal)
    tree = build_asd(vmap, _asd_config(args))
    base = query.config if query else PlannerConfig(stepsize="adaptive", s=tree.s_min)
    cfg = PlannerConfig(
        algorithm=args.planner or base.algorithm,
        stepsize=args.stepsize or base.stepsize,
        s=args.s if args.s is not None else base.s,
        budget=args.budget if args.budget is not None else base.budget,
        seed=args.seed if args.seed_given else base.seed,
        goal_tol=base.goal_tol,
    )
    return name, model, vmap, tree, q0, q1, cfg


def cmd_pathplan(args) -> int:
    name, model, vmap, tree, q0, q1, cfg = _planning_problem(args)
    checker = CollisionChecker(model, vmap)
    result = plan(model, vmap, tree, q0, q1, cfg, checker)
    out = _out_dir(args)
    if result.metrics.success:
        result = smooth_path(result, model, vmap, tree.s_min, checker)
        write_waypoints(out / "waypoints.csv", result)
    write_results(out / "path.csv", [result_row(name, cfg.algorithm, cfg.stepsize, 0, result)])
    m = result.metrics
    print(f"{name} {cfg.algorithm} {cfg.stepsize}: success={m.success} vertices={m.vertices} t_p={m.t_p:.3f}s")
    return EXIT_OK if m.success else EXIT_FAILED


def cmd_pipeline(args) -> int:
    model = load_assembly(resolve(args.assembly))
    vmap = load_pvm(resolve(args.map)) if args.map else None
    program, waves, results = removal_waves(
        model, args.target, _sda_config(args), _rules(args), _tools(args), args.heuristic,
        _visible(args, model), vmap,
    )
    text = serialize(program)
    parse(text)  # the emitted program must always re-parse
    out = _out_dir(args)
    (out / "pipeline.mpp").write_text(text, encoding="utf-8")
    _write_json(
        out / "pipeline.json",
        {"target": args.target, "waves": waves, "statements": len(program),
         "cost_s": sum(r.total_cost for r in results)},
    )
    sys.stdout.write(text)
    return EXIT_OK


# -- benchmarks ------------------------------------------------------------------

SEQ_COLUMNS = ("method", "N", "trial", "t_star", "expanded")
SEQ_TIMING_COLUMNS = ("method", "N", "trial", "wall_s")


def bench_sequencing(trials: int, sizes, seed: int):
    rows = []
    rng = np.random.default_rng(seed)
    for n in sizes:
        for trial in range(trials):
            matrix = random_matrix(n, rng)
            for method in METHODS:
                res = solve_sequence(matrix, method)
                rows.append(
                    {"method": method, "N": n, "trial": trial, "t_star": res.total_cost,
                     "expanded": res.expanded, "wall_s": res.wall_time}
                )
            oracle = brute_force_sequence(matrix)
            rows.append(
                {"method": "brute_force", "N": n, "trial": trial, "t_star": oracle.total_cost,
                 "expanded": oracle.expanded, "wall_s": oracle.wall_time}
            )
    return rows


def improvement(rows) -> float:
    """Mean relative saving of the optimal tour over the greedy tour."""
    opt = {(r["N"], r["trial"]): r["t_star"] for r in rows if r["method"] == "astar_mst"}
    gains = [
        (r["t_star"] - opt[(r["N"], r["trial"])]) / r["t_star"] for r in rows if r["method"] == "greedy_nn"
    ]
    return float(np.mean(gains))


PATH_MODES = ("adaptive", "fixed_smin", "fixed_smax")


def bench_paths(scenario: str, planners, modes, runs: int | None, budget: float, seed: int):
    sc = load_scenario(scenario)
    tree = sc.tree()
    rows = []
    for algorithm in planners:
        n_runs = runs or (SAMPLING_RUNS if algorithm in ("rrt", "birrt") else SEARCH_RUNS)
        for mode in modes:
            stepsize = "adaptive" if mode == "adaptive" else "fixed"
            s = tree.s_max if mode == "fixed_smax" else tree.s_min
            for run in range(n_runs):
                cfg = PlannerConfig(algorithm, stepsize, s, budget, seed + run)
                checker = CollisionChecker(sc.model, sc.vmap)
                res = plan(sc.model, sc.vmap, tree, sc.q_start, sc.q_goal, cfg, checker)
                rows.append(result_row(scenario, algorithm, mode, run, res))
    return rows


def cmd_bench(args) -> int:
    out = _out_dir(args)
    if not (args.sequencing or args.paths):
        raise InputError("bench needs --sequencing and/or --paths")
    if args.sequencing:
        sizes = [int(s) for s in args.sizes.split(",")]
        rows = bench_sequencing(args.trials, sizes, args.seed)
        rows = [r for r in rows if r["method"] in METHODS]
        write_rows(out / "sequencing.csv", rows, SEQ_COLUMNS)
        write_rows(out / "sequencing.timings.csv", rows, SEQ_TIMING_COLUMNS)
        print(f"sequencing: {len(rows)} rows, mean improvement over greedy {100 * improvement(rows):.1f}%")
    if args.paths:
        scenarios = [args.scenario] if args.scenario else sorted(SCENARIOS)
        planners = [args.planner] if args.planner else ["greedy", "astar", "rrt", "birrt"]
        modes = PATH_MODES if args.stepsize is None else (
            ("adaptive",) if args.stepsize == "adaptive" else ("fixed_smin", "fixed_smax")
        )
        rows = []
        for name in scenarios:
            rows += bench_paths(name, planners, modes, args.runs, args.budget or 60.0, args.seed)
        write_results(out / "paths.csv", rows)
        quant = quantile_rows(rows)
        write_rows(out / "paths.quantiles.csv", [q for q in quant if q["metric"] not in TIMING_COLUMNS], QUANTILE_COLUMNS)
        write_rows(
            out / "paths.quantiles.timings.csv", [q for q in quant if q["metric"] in TIMING_COLUMNS], QUANTILE_COLUMNS
        )
        _summarize_paths(rows)
    return EXIT_OK


def _summarize_paths(rows) -> None:
    groups: dict[tuple, list] = {}
    for r in rows:
        groups.setdefault((r["scenario"], r["planner"], r["mode"]), []).append(r)
    for (scenario, planner, mode), rs in sorted(groups.items()):
        ok = [r for r in rs if r["success"]]
        mean = lambda key: float(np.mean([r[key] for r in ok])) if ok else math.nan  # noqa: E731
        print(
            f"{scenario:10s} {planner:6s} {mode:10s} S={len(ok) / len(rs):.2f} "
            f"t_p={float(np.mean([r['t_p_s'] for r in rs])):.3f}s vertices={mean('vertices'):.0f} "
            f"dp*={mean('dev_opt'):.3f} kappa={mean('kappa_rad'):.3f}"
        )


# -- argument parsing ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="maintplan", description=__doc__)
    p.add_argument("--version", action="version", version=f"maintplan {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_default):
        sp.add_argument("--out", default=out_default, help="output directory")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--samples", type=int, default=10000, help="sphere samples for the DoF analysis")
        sp.add_argument("--theta-tol", type=float, default=0.087, help="cone half-angle in radians")
        sp.add_argument("--rho-limit", type=float, default=0.05)
        sp.add_argument("--depth", type=int, default=3)
        sp.add_argument("--smax", type=float, default=0.2)
        sp.add_argument("--trust", type=float, default=0.95)

    def assembly(sp, target=True):
        sp.add_argument("--assembly", required=True)
        sp.add_argument("--rules")
        sp.add_argument("--tools")
        sp.add_argument("--obs")
        if target:
            sp.add_argument("--target", required=True)

    def heuristic(sp):
        sp.add_argument("--heuristic", default="mst", choices=["dijkstra", "nn", "mst", "greedy"])

    def planner_flags(sp):
        sp.add_argument("--planner", choices=["greedy", "astar", "rrt", "birrt"])
        sp.add_argument("--stepsize", choices=["fixed", "adaptive"])
        sp.add_argument("--s", type=float, help="fixed stepsize in meters")
        sp.add_argument("--budget", type=float, help="planning budget in seconds (default 60)")
        sp.add_argument("--scenario", choices=sorted(SCENARIOS))

    sp = sub.add_parser("analyze", help="DoF analysis: relation graph and disassembly spaces")
    common(sp, "out/analyze")
    assembly(sp, target=False)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("plan", help="disassembly plan for one target as a .mpp program")
    common(sp, "out/plan")
    assembly(sp)
    sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("fuse", help="component beliefs from an observation log")
    common(sp, "out/fuse")
    assembly(sp, target=False)
    sp.set_defaults(func=cmd_fuse)

    sp = sub.add_parser("sequence", help="execution-time optimal order of the plan")
    common(sp, "out/sequence")
    assembly(sp)
    heuristic(sp)
    sp.set_defaults(func=cmd_sequence)

    sp = sub.add_parser("asd", help="adaptive space division of a voxel map")
    common(sp, "out/asd")
    sp.add_argument("--map", required=True)
    sp.set_defaults(func=cmd_asd)

    sp = sub.add_parser("pathplan", help="plan a manipulator path")
    common(sp, "out/pathplan")
    planner_flags(sp)
    sp.add_argument("--robot")
    sp.add_argument("--map")
    sp.add_argument("--query")
    sp.set_defaults(func=cmd_pathplan)

    sp = sub.add_parser("pipeline", help="all task planning stages chained")
    common(sp, "out/pipeline")
    assembly(sp)
    heuristic(sp)
    sp.add_argument("--map")
    sp.set_defaults(func=cmd_pipeline)

    sp = sub.add_parser("bench", help="sequencing and path planning experiments")
    common(sp, "out/bench")
    planner_flags(sp)
    sp.add_argument("--sequencing", action="store_true")
    sp.add_argument("--paths", action="store_true")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--sizes", default="4,5,6")
    sp.add_argument("--runs", type=int, help="repetitions per configuration (default 5 search, 30 sampling)")
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.seed_given = "--seed" in argv or any(a.startswith("--seed=") for a in argv)
    try:
        return args.func(args)
    except NoPlan as exc:
        print(f"error: no plan: {exc}", file=sys.stderr)
        return EXIT_NOPLAN
    except (InputError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PlannerError as exc:
        print(f"error: planning failed: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
