#!/usr/bin/env python3
"""Throughput benchmark: full-hand default-RoM sweep against a dense sphere.

Reports wall time, emitted points, explored configurations per second, and the
BVH visit rate (triangles actually visited per distance query, as a fraction
of the mesh). Run after kernel changes to catch silent slowdowns; the numbers
land in stdout, nothing is written.

Usage: python3 scripts/run_benchmark.py [--triangles N] [--fingers index,...]
"""

import argparse
import time

from gravkit import FingerId, GraspScene, SimulationSettings, build_from_measurements
from gravkit import default_rom, simulate
from gravkit.hand import DEFAULT_SEGMENT_LENGTHS_MM
from gravkit.meshgen import sphere_mesh

BREADTH_MM = 90.0
THICKNESS_MM = 20.0


def dense_sphere(n_triangles: int):
    # 2 * n_lon * (n_lat - 1) triangles; keep the aspect roughly square
    n_lat = max(4, round((n_triangles / 4) ** 0.5) + 1)
    n_lon = max(3, round(n_triangles / (2 * (n_lat - 1))))
    return sphere_mesh([0.0, -55.0, 165.0], radius=35.0,
                       n_lat=n_lat, n_lon=n_lon)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--triangles", type=int, default=10_000)
    ap.add_argument("--fingers", default=None,
                    help="comma list (default: all five)")
    args = ap.parse_args()

    fingers = tuple(FingerId(f) for f in args.fingers.split(",")) \
        if args.fingers else tuple(FingerId)
    mesh = dense_sphere(args.triangles)
    hand = build_from_measurements(dict(DEFAULT_SEGMENT_LENGTHS_MM), BREADTH_MM,
                                   THICKNESS_MM, default_rom(), "right")
    scene = GraspScene(hand=hand, object_mesh=mesh, object_name="bench",
                       settings=SimulationSettings(fingers=fingers))

    simulate(scene)  # warm the JIT cache so the timed run is pure work
    t0 = time.perf_counter()
    volume = simulate(scene)
    dt = time.perf_counter() - t0

    stats = volume.metadata["bvh_stats"]
    explored = sum(volume.metadata["raw_per_finger_points"].values())
    rate = (stats["triangles_visited"]
            / (stats["queries"] * stats["mesh_triangles"])) if stats["queries"] else 0.0
    print(f"mesh: {len(mesh.triangles)} triangles")
    print(f"fingers: {','.join(f.value for f in fingers)}")
    print(f"wall_time_s: {dt:.2f}")
    print(f"points: {len(volume.points)} ({explored / dt:,.0f} valid configs/s)")
    print(f"bvh queries: {stats['queries']:,}")
    print(f"bvh visit rate: {100 * rate:.4f}% of triangles per query")


if __name__ == "__main__":
    main()
