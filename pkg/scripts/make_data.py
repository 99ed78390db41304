"""Regenerate the bundled data files under src/maintplan/data."""

from __future__ import annotations

import json
import math
from pathlib import Path

from maintplan.hmp import DEFAULT_RULES_DOC
from maintplan.scenarios import SCENARIOS
from maintplan.worldmap import ProbabilisticVoxelMap, save_pvm

DATA = Path(__file__).resolve().parents[1] / "src" / "maintplan" / "data"

X, Y, Z = (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)
NY = (0.0, -1.0, 0.0)


def comp(cid, cls, xyz, aabb):
    return {"id": cid, "class": cls, "pose": [*xyz, 0.0, 0.0, 0.0], "aabb": list(aabb)}


def rel(rid, kind, a, b, geo, origin, direction, through=False):
    return {
        "id": rid,
        "kind": kind,
        "a": a,
        "b": b,
        "geometry": {"kind": geo, "origin": list(origin), "direction": list(direction)},
        "through": through,
    }


def block2():
    return {
        "version": 1,
        "components": [
            comp("base", "base", (0.5, 0.0, 0.02), (0.2, 0.2, 0.04)),
            comp("block", "block", (0.5, 0.0, 0.065), (0.1, 0.1, 0.05)),
        ],
        "relations": [rel("r1", "congruent", "block", "base", "plane", (0.5, 0.0, 0.04), X)],
    }


def block4():
    comps = [
        comp("base", "base", (0.5, 0.0, 0.02), (0.2, 0.2, 0.04)),
        comp("block", "block", (0.5, 0.0, 0.065), (0.1, 0.1, 0.05)),
    ]
    rels = [rel("r1", "congruent", "block", "base", "plane", (0.5, 0.0, 0.04), Z)]
    for i, y in ((1, -0.03), (2, 0.03)):
        sid = f"screw_{i}"
        comps.append(comp(sid, "cap_screw", (0.5, y, 0.095), (0.008, 0.008, 0.03)))
        axis = (0.5, y, 0.04)
        rels.append(rel(f"r{2 * i}", "screwed", sid, "base", "line", axis, Z))
        rels.append(rel(f"r{2 * i + 1}", "concentric", sid, "block", "line", axis, Z))
    return {"version": 1, "components": comps, "relations": rels}


def valve9():
    comps = [
        comp("base", "base", (0.5, 0.0, 0.02), (0.3, 0.3, 0.04)),
        comp("valve", "valve", (0.5, 0.0, 0.08), (0.08, 0.08, 0.08)),
        comp("connector", "connector", (0.56, 0.0, 0.08), (0.04, 0.04, 0.04)),
        comp("screw_1", "screw", (0.59, 0.0, 0.08), (0.02, 0.006, 0.006)),
        comp("screw_2", "screw", (0.47, -0.03, 0.125), (0.006, 0.006, 0.02)),
        comp("screw_3", "screw", (0.53, 0.03, 0.125), (0.006, 0.006, 0.02)),
        comp("airhose_1", "airhose", (0.5, 0.06, 0.08), (0.02, 0.04, 0.02)),
        comp("airhose_2", "airhose", (0.38, 0.0, 0.05), (0.02, 0.02, 0.02)),
        comp("airhose_3", "airhose", (0.5, -0.06, 0.08), (0.02, 0.04, 0.02)),
    ]
    rels = [
        rel("v1", "congruent", "valve", "base", "plane", (0.5, 0.0, 0.04), Z),
        rel("v2", "screwed", "screw_2", "base", "line", (0.47, -0.03, 0.04), Z),
        rel("v3", "concentric", "screw_2", "valve", "line", (0.47, -0.03, 0.04), Z),
        rel("v4", "screwed", "screw_3", "base", "line", (0.53, 0.03, 0.04), Z),
        rel("v5", "concentric", "screw_3", "valve", "line", (0.53, 0.03, 0.04), Z),
        rel("v6", "congruent", "connector", "valve", "plane", (0.54, 0.0, 0.08), X),
        rel("v7", "screwed", "screw_1", "valve", "line", (0.54, 0.0, 0.08), X),
        rel("v8", "concentric", "screw_1", "connector", "line", (0.54, 0.0, 0.08), X),
        rel("v9", "concentric", "airhose_1", "valve", "line", (0.5, 0.04, 0.08), Y),
        rel("v10", "concentric", "airhose_3", "valve", "line", (0.5, -0.04, 0.08), NY),
        rel("v11", "concentric", "airhose_2", "base", "line", (0.38, 0.0, 0.04), Z),
    ]
    return {"version": 1, "components": comps, "relations": rels}


def empty_assembly():
    return {"version": 1, "components": [], "relations": []}


TOOLS = {
    "tools": [
        {"id": "sd", "change_time_s": 8.0},
        {"id": "gr.2f", "change_time_s": 5.0},
        {"id": "gr.3f", "change_time_s": 6.0},
        {"id": "gr.ah", "change_time_s": 7.0},
    ]
}

ROBOTS = {
    "arm_3r": {
        "dh": [
            {"a": 0.0, "alpha": math.pi / 2, "d": 0.3},
            {"a": 0.4, "alpha": 0.0, "d": 0.0},
            {"a": 0.35, "alpha": 0.0, "d": 0.0},
        ],
        "link_radius": 0.02,
    },
    "arm_2r": {
        "dh": [{"a": 0.35, "alpha": 0.0, "d": 0.0}, {"a": 0.35, "alpha": 0.0, "d": 0.0}],
        "link_radius": 0.01,
    },
}

SCENARIO_ROBOT = {"cluttered": "arm_3r", "narrow_gap": "arm_2r", "corridor": "arm_2r"}


def observations():
    # four confident sightings per component push every belief past 0.95
    lines = []
    t = 0
    for _ in range(4):
        for c in ("base", "block", "screw_1", "screw_2"):
            lines.append(json.dumps({"t": t, "component": c, "p": 0.8}))
            t += 1
    return "\n".join(lines) + "\n"


def dump(name, doc):
    (DATA / name).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    dump("block2.json", block2())
    dump("block4.json", block4())
    dump("valve9.json", valve9())
    dump("empty_assembly.json", empty_assembly())
    dump("rules.json", DEFAULT_RULES_DOC)
    dump("tools.json", TOOLS)
    for name, doc in ROBOTS.items():
        dump(f"{name}.robot.json", doc)
    (DATA / "block4.obs.jsonl").write_text(observations(), encoding="utf-8")
    save_pvm(ProbabilisticVoxelMap.empty((20, 20, 20), 0.05, origin=(0.0, -0.5, 0.0)), DATA / "empty.pvm")
    for name, make in SCENARIOS.items():
        sc = make()
        save_pvm(sc.vmap, DATA / f"{name}.pvm")
        dump(
            f"{name}.query.json",
            {
                "q_start": [float(v) for v in sc.q_start],
                "q_goal": [float(v) for v in sc.q_goal],
                "planner": "astar",
                "stepsize": "adaptive",
                "s": sc.asd.s_max,
                "budget": 60.0,
                "seed": 0,
            },
        )


if __name__ == "__main__":
    main()
