#!/usr/bin/env python3
"""Regenerate the viewer's test fixtures from the engine and the real CLI.

Writes three volume fixtures (CSV; the single-hinge arc also as PLY), a
one-triangle OBJ, and queries.json: a table of (fixture, center, radius)
probes with the answers the installed `gravkit query` command actually
printed. The viewer test suite replays those probes through its own
reachability scan and must agree within 1e-3 degrees.

Usage: python3 scripts/make_viewer_fixtures.py
"""

import json
import math
import subprocess
import sys
from pathlib import Path

import gravkit as gk
from gravkit import io as gio
from gravkit.meshgen import plane_mesh

REPO = Path(__file__).resolve().parents[1]
FIXTURES = REPO / "frontend" / "tests" / "fixtures"

BREADTH_MM = 90.0
THICKNESS_MM = 20.0
BARRIER_MM = 25.0 * math.sin(math.radians(47.5)) + 10.0 - 0.5


def hand(rom):
    return gk.build_from_measurements(dict(gk.DEFAULT_SEGMENT_LENGTHS_MM),
                                      BREADTH_MM, THICKNESS_MM, rom, "right")


def arc_scene(mesh=None):
    rom = gk.RomSpec((gk.RomEntry(gk.JointId.INDEX_DIP, "x", 0.0, 90.0),))
    return gk.GraspScene(hand=hand(rom), object_mesh=mesh, object_name="arc",
                         settings=gk.SimulationSettings(
                             fingers=(gk.FingerId.INDEX,)))


def multi_finger_scene():
    rom = gk.RomSpec((
        gk.RomEntry(gk.JointId.INDEX_MCP, "x", -15.0, 30.0),
        gk.RomEntry(gk.JointId.INDEX_PIP, "x", 0.0, 40.0),
        gk.RomEntry(gk.JointId.MIDDLE_MCP, "x", -15.0, 30.0),
        gk.RomEntry(gk.JointId.MIDDLE_PIP, "x", 0.0, 40.0),
        gk.RomEntry(gk.JointId.THUMB_CMC, "x", -10.0, 35.0),
        gk.RomEntry(gk.JointId.THUMB_MCP, "x", 0.0, 30.0),
    ))
    return gk.GraspScene(hand=hand(rom), object_mesh=None, object_name="multi",
                         settings=gk.SimulationSettings(fingers=(
                             gk.FingerId.THUMB, gk.FingerId.INDEX,
                             gk.FingerId.MIDDLE)))


# (fixture csv, probe center, probe radius); mix of hits, misses, and a probe
# sitting exactly on a point so the inclusive boundary is covered
PROBES = [
    ("arc.csv", (33.75, 0.0, 195.0), 0.0),
    ("arc.csv", (33.75, 0.0, 195.0), 1.0),
    ("arc.csv", (33.75, -12.5, 180.0), 8.0),
    ("arc.csv", (0.0, 0.0, 0.0), 5.0),
    ("arc.csv", (33.75, -25.0, 170.0), 3.0),
    ("clipped.csv", (33.75, -25.0, 170.0), 3.0),
    ("clipped.csv", (33.75, -8.0, 192.0), 6.0),
    ("multi.csv", (20.0, -20.0, 185.0), 25.0),
    ("multi.csv", (40.0, -30.0, 120.0), 60.0),
    ("multi.csv", (-60.0, 40.0, 10.0), 12.0),
]


def run_cli_query(csv_path: Path, center, radius) -> dict:
    out = subprocess.run(
        ["gravkit", "query", str(csv_path),
         "--center=" + ",".join(repr(c) for c in center),
         "--radius=" + repr(radius)],
        capture_output=True, text=True, check=True).stdout
    fields = dict(line.split(": ", 1) for line in out.strip().splitlines())
    return {
        "reachable": fields["reachable"] == "true",
        "min_cost_deg": float(fields["min_cost_deg"])
        if "min_cost_deg" in fields else None,
        "fingers": [] if fields["fingers"] == "-"
        else fields["fingers"].split(","),
        "points_in_range": int(fields["points_in_range"]),
    }


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)

    arc = gk.simulate(arc_scene())
    (FIXTURES / "arc.csv").write_bytes(gio.export_csv(arc))
    (FIXTURES / "arc.ply").write_bytes(gio.export_ply(arc))

    barrier = plane_mesh(-BARRIER_MM, (-100.0, 100.0), (-50.0, 250.0))
    clipped = gk.simulate(arc_scene(mesh=barrier))
    (FIXTURES / "clipped.csv").write_bytes(gio.export_csv(clipped))

    multi = gk.simulate(multi_finger_scene())
    (FIXTURES / "multi.csv").write_bytes(gio.export_csv(multi))

    (FIXTURES / "tri.obj").write_text(
        "v 0.000000 0.000000 0.000000\n"
        "v 50.000000 0.000000 0.000000\n"
        "v 0.000000 50.000000 0.000000\n"
        "f 1 2 3\n")

    probes = []
    for fixture, center, radius in PROBES:
        expected = run_cli_query(FIXTURES / fixture, center, radius)
        probes.append({"fixture": fixture, "center": list(center),
                       "radius_mm": radius, "expected": expected})
    (FIXTURES / "queries.json").write_text(
        json.dumps(probes, indent=2, sort_keys=True) + "\n")

    print(f"arc: {len(arc.points)} points, clipped: {len(clipped.points)}, "
          f"multi: {len(multi.points)}")
    print(f"wrote {len(probes)} CLI-checked probes to {FIXTURES}")


if __name__ == "__main__":
    main()
