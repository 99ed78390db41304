"""Query files, results tables and box-plot quantiles for planning runs."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import SchemaError
from .planners import ALGORITHMS, PathResult, PlannerConfig

RESULT_COLUMNS = (
    "scenario",
    "planner",
    "mode",
    "run",
    "t_p_s",
    "t_c_s",
    "path_len_m",
    "dev_opt",
    "kappa_rad",
    "vertices",
    "success",
)
# columns that depend on the machine rather than the inputs
TIMING_COLUMNS = ("t_p_s", "t_c_s")
QUANTILE_METRICS = ("t_p_s", "t_c_s", "path_len_m", "dev_opt", "kappa_rad", "vertices", "success")


@dataclass(frozen=True)
class Query:
    q_start: tuple
    q_goal: tuple
    config: PlannerConfig


def parse_query(doc) -> Query:
    try:
        planner = doc.get("planner", "astar")
        if planner not in ALGORITHMS:
            raise ValueError(f"unknown planner {planner!r}")
        cfg = PlannerConfig(
            algorithm=planner,
            stepsize=doc.get("stepsize", "fixed"),
            s=float(doc.get("s", 0.025)),
            budget=float(doc.get("budget", 60.0)),
            seed=int(doc.get("seed", 0)),
            goal_tol=float(doc.get("goal_tol", 0.01)),
        )
        return Query(tuple(map(float, doc["q_start"])), tuple(map(float, doc["q_goal"])), cfg)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"invalid planning query: {exc}") from None


def load_query(path) -> Query:
    return parse_query(json.loads(Path(path).read_text(encoding="utf-8")))


def _fmt(value) -> str:
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(round(value, 9))
    return str(value)


def result_row(scenario: str, planner: str, mode: str, run: int, result: PathResult) -> dict:
    m = result.metrics
    return {
        "scenario": scenario,
        "planner": planner,
        "mode": mode,
        "run": run,
        "t_p_s": m.t_p,
        "t_c_s": m.t_c,
        "path_len_m": m.path_len,
        "dev_opt": m.dev_opt,
        "kappa_rad": m.kappa,
        "vertices": m.vertices,
        "success": m.success,
    }


def write_rows(path, rows, columns) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])


def write_results(path, rows, split_timings: bool = True) -> None:
    """Results table; timings go to a sibling ``*.timings.csv`` when split."""
    path = Path(path)
    if not split_timings:
        write_rows(path, rows, RESULT_COLUMNS)
        return
    keys = ("scenario", "planner", "mode", "run")
    write_rows(path, rows, tuple(c for c in RESULT_COLUMNS if c not in TIMING_COLUMNS))
    write_rows(timings_path(path), rows, keys + TIMING_COLUMNS)


def timings_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".timings.csv")


def quantile_rows(rows) -> list[dict]:
    """min, q1, median, q3, max per metric and (scenario, planner, mode) group."""
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["scenario"], r["planner"], r["mode"]), []).append(r)
    out = []
    for (scenario, planner, mode), rs in sorted(groups.items()):
        for metric in QUANTILE_METRICS:
            vals = np.array([float(r[metric]) for r in rs])
            vals = vals[~np.isnan(vals)]
            if len(vals):
                q = np.quantile(vals, [0.0, 0.25, 0.5, 0.75, 1.0])
            else:
                q = [math.nan] * 5
            out.append(
                {
                    "scenario": scenario,
                    "planner": planner,
                    "mode": mode,
                    "metric": metric,
                    "min": float(q[0]),
                    "q1": float(q[1]),
                    "median": float(q[2]),
                    "q3": float(q[3]),
                    "max": float(q[4]),
                }
            )
    return out


QUANTILE_COLUMNS = ("scenario", "planner", "mode", "metric", "min", "q1", "median", "q3", "max")


def write_waypoints(path, result: PathResult) -> None:
    """Joint waypoints, raw then smoothed, one configuration per row."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        n = result.joint_path.shape[1] if result.joint_path.ndim == 2 else 0
        w.writerow(["kind", "index"] + [f"q{i + 1}" for i in range(n)] + ["x", "y", "z"])
        for kind, qs, ee in (
            ("raw", result.joint_path, result.ee_polyline),
            ("smoothed", result.smoothed, result.smoothed_ee),
        ):
            if qs is None:
                continue
            for i, (q, p) in enumerate(zip(qs, ee)):
                w.writerow([kind, i] + [_fmt(float(v)) for v in q] + [_fmt(float(v)) for v in p])
