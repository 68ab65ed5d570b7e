#!/usr/bin/env python3
"""Regenerate the bundled sample scenes, their meshes, and the batch manifest.

Writes five grasp scenes under scenes/ (meshes in scenes/meshes/) plus a
scenes/manifest.json that batches all of them into scenes/out/. Every scene is
seed-checked after writing: a bundled scene whose rest pose already collides
would be useless, so that is a hard error here.

Usage: python3 scripts/make_sample_scenes.py [out_dir]
"""

import json
import sys
from pathlib import Path

import gravkit as gk
from gravkit.meshgen import box_mesh, cylinder_mesh, plane_mesh, sphere_mesh

BREADTH_MM = 90.0
THICKNESS_MM = 20.0  # slim palm: the default 22 mm rim self-collides at rest


def rom_entries(*items):
    return [{"joint": j, "axis": a, "min_deg": lo, "max_deg": hi}
            for j, a, lo, hi in items]


def hand_section():
    return {"measurements": {"breadth_mm": BREADTH_MM},
            "thickness_mm": THICKNESS_MM}


def cylinder_scene():
    """Three fingers wrapping a horizontal cylinder in front of the palm."""
    mesh = cylinder_mesh([0.0, -45.0, 165.0], radius=18.0, length=140.0,
                         axis="x", n_seg=32, name="cylinder")
    rom = []
    for f in ("index", "middle", "ring"):
        rom += rom_entries((f"{f}_mcp", "x", -15.0, 60.0),
                           (f"{f}_mcp", "y", -10.0, 10.0),
                           (f"{f}_pip", "x", 0.0, 75.0),
                           (f"{f}_dip", "x", 0.0, 45.0))
    return {
        "schema_version": 1,
        "labels": {"object_name": "cylinder", "grasp_id": 17},
        "hand": hand_section(),
        "rom": rom,
        "fingers": ["index", "middle", "ring"],
        "object": {"mesh_path": "meshes/cylinder.obj"},
    }, mesh


def box_scene():
    """Four-finger press onto a flat box."""
    mesh = box_mesh([-55.0, -75.0, 130.0], [55.0, -25.0, 210.0], name="box")
    rom = []
    for f in ("index", "middle", "ring", "little"):
        rom += rom_entries((f"{f}_mcp", "x", -10.0, 55.0),
                           (f"{f}_mcp", "y", -10.0, 10.0),
                           (f"{f}_pip", "x", 0.0, 60.0))
    return {
        "schema_version": 1,
        "labels": {"object_name": "box", "grasp_id": 7},
        "hand": hand_section(),
        "rom": rom,
        "fingers": ["index", "middle", "ring", "little"],
        "object": {"mesh_path": "meshes/box.obj"},
    }, mesh


def sphere_scene():
    """All five digits closing around a ball."""
    mesh = sphere_mesh([0.0, -55.0, 170.0], radius=30.0, n_lat=12, n_lon=18,
                       name="sphere")
    rom = []
    for f in ("index", "middle", "ring", "little"):
        rom += rom_entries((f"{f}_mcp", "x", -15.0, 50.0),
                           (f"{f}_mcp", "y", -10.0, 10.0),
                           (f"{f}_pip", "x", 0.0, 50.0))
    rom += rom_entries(("thumb_cmc", "x", -15.0, 50.0),
                       ("thumb_cmc", "y", -10.0, 20.0),
                       ("thumb_mcp", "x", 0.0, 45.0))
    return {
        "schema_version": 1,
        "labels": {"object_name": "sphere", "grasp_id": 11},
        "hand": hand_section(),
        "rom": rom,
        "fingers": ["thumb", "index", "middle", "ring", "little"],
        "object": {"mesh_path": "meshes/sphere.obj"},
    }, mesh


def plane_scene():
    """Fingers curling toward a tabletop, with a no-go shelf above its far
    half (block-motion: configurations entering the shelf are impassable)."""
    mesh = plane_mesh(-60.0, (-120.0, 120.0), (-60.0, 260.0), nx=6, nz=8,
                      name="plane")
    rom = []
    for f in ("index", "middle", "ring", "little"):
        rom += rom_entries((f"{f}_mcp", "x", -10.0, 70.0),
                           (f"{f}_mcp", "y", -10.0, 10.0),
                           (f"{f}_pip", "x", 0.0, 70.0))
    return {
        "schema_version": 1,
        "labels": {"object_name": "plane", "grasp_id": 16},
        "hand": hand_section(),
        "rom": rom,
        "fingers": ["index", "middle", "ring", "little"],
        "object": {"mesh_path": "meshes/plane.obj"},
        "blockers": [{"mode": "block-motion",
                      "shape": {"type": "box", "min_mm": [-120.0, -60.0, 185.0],
                                "max_mm": [120.0, -30.0, 260.0]}}],
    }, mesh


def freehand_scene():
    """Left hand, no object: index and thumb sweep freely, with an
    exclude-points sphere carving a keep-out bubble from the result. The hand
    is given as posed joints (mirrored flat template), so the RoM below is in
    left-hand convention: finger flexion is negative about X."""
    rom_right = gk.RomSpec(tuple(
        gk.RomEntry(gk.JointId(j), a, lo, hi) for j, a, lo, hi in [
            ("index_mcp", "x", -20.0, 60.0),
            ("index_mcp", "y", -10.0, 10.0),
            ("index_pip", "x", 0.0, 80.0),
            ("index_dip", "x", 0.0, 70.0),
            ("thumb_cmc", "x", -15.0, 55.0),
            ("thumb_mcp", "x", 0.0, 60.0),
        ]))
    hand = gk.mirror(gk.build_from_measurements(
        dict(gk.DEFAULT_SEGMENT_LENGTHS_MM), BREADTH_MM, THICKNESS_MM,
        rom_right, "right"))
    joints = {j.value: [round(float(c), 6) for c in p]
              for j, p in sorted(hand.positions.items(), key=lambda kv: kv[0].value)}
    return {
        "schema_version": 1,
        "labels": {"object_name": "freehand", "grasp_id": 33},
        "hand": {"handedness": "left", "joints": joints,
                 "thickness_mm": THICKNESS_MM},
        "rom": [{"joint": e.joint.value, "axis": e.axis,
                 "min_deg": e.min_deg, "max_deg": e.max_deg}
                for e in hand.rom.entries],
        "fingers": ["thumb", "index"],
        "blockers": [{"mode": "exclude-points",
                      "shape": {"type": "sphere",
                                "center_mm": [-33.75, -35.0, 150.0],
                                "radius_mm": 25.0}}],
    }, None


SCENES = [cylinder_scene, box_scene, sphere_scene, plane_scene, freehand_scene]


def seed_check(scene_path: Path) -> None:
    scene = gk.load_scene(scene_path)
    for finger in scene.settings.fingers:
        n_axes = len(scene.hand.rom.axes_for_finger(finger))
        verdict = gk.validate_configuration(scene, finger, (0,) * n_axes)
        if not verdict.ok:
            sys.exit(f"{scene_path.name}: seed for {finger.value} is invalid "
                     f"({verdict}) -- fix the scene layout")


def main(argv):
    out_dir = Path(argv[1]) if len(argv) > 1 else \
        Path(__file__).resolve().parents[1] / "scenes"
    (out_dir / "meshes").mkdir(parents=True, exist_ok=True)

    jobs = []
    for build in SCENES:
        doc, mesh = build()
        if mesh is not None:
            gk.save_obj(mesh, out_dir / "meshes" / f"{mesh.name}.obj")
        name = doc["labels"]["object_name"]
        gid = doc["labels"]["grasp_id"]
        scene_path = out_dir / f"{name}_grasp{gid:02d}.json"
        scene_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        seed_check(scene_path)
        jobs.append({"object": name, "grasp_id": gid})
        print(f"wrote {scene_path}")

    manifest = {"scene_dir": ".", "out_dir": "out",
                "formats": ["csv", "ply"], "jobs": jobs}
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {manifest_path}")


if __name__ == "__main__":
    main(sys.argv)
