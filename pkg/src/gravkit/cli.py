"""Command-line interface.

Subcommands: simulate, batch, info, query, export. Exit codes: 0 success,
1 schema/parse/IO errors, 2 when every enabled finger has an invalid seed.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import batch as batch_mod
from ._version import __version__
from .errors import GravError
from .hand import FingerId
from .io import EXPORT_FORMATS, load_scene, load_volume, write_exports
from .scene import GraspScene
from .simulator import simulate, validate_configuration
from .volume import query_reachable

_FINGER_BY_NAME = {f.value: f for f in FingerId}


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; 2 is reserved for
    # "all seeds invalid", so route usage problems to exit 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _parse_fingers(raw: Optional[str]):
    if raw is None:
        return None
    fingers = []
    for name in raw.split(","):
        name = name.strip().lower()
        if not name:
            continue
        if name not in _FINGER_BY_NAME:
            raise GravError(f"unknown finger {name!r} "
                            f"(choose from {', '.join(_FINGER_BY_NAME)})")
        fingers.append(_FINGER_BY_NAME[name])
    if not fingers:
        raise GravError("finger list is empty")
    return tuple(fingers)


def _parse_formats(raw: str) -> List[str]:
    formats = [f.strip().lower() for f in raw.split(",") if f.strip()]
    if not formats:
        raise GravError("format list is empty")
    for f in formats:
        if f not in EXPORT_FORMATS:
            raise GravError(f"unknown format {f!r} (choose from {', '.join(EXPORT_FORMATS)})")
    return formats


def _apply_overrides(scene: GraspScene, args) -> GraspScene:
    from dataclasses import replace
    settings = scene.settings
    if args.step_deg is not None:
        settings = replace(settings, step_deg=args.step_deg)
    if args.epsilon_mm is not None:
        settings = replace(settings, epsilon_mm=args.epsilon_mm)
    if args.dedupe_mm is not None:
        settings = replace(settings, dedupe_mm=args.dedupe_mm)
    fingers = _parse_fingers(args.fingers)
    if fingers is not None:
        settings = replace(settings, fingers=fingers)
    if settings is not scene.settings:
        scene = replace(scene, settings=settings, object_bvh=scene.object_bvh,
                        _contexts={})
    return scene


def _cmd_simulate(args) -> int:
    scene = _apply_overrides(load_scene(args.scene), args)
    enabled = [f.value for f in scene.settings.fingers]

    if args.seed_check_only:
        n_valid = 0
        for finger in scene.settings.fingers:
            verdict = validate_configuration(scene, finger, (0,) * len(
                scene.hand.rom.axes_for_finger(finger)))
            print(f"{finger.value}: {verdict}")
            n_valid += verdict.ok
        return 0 if n_valid else 2

    t0 = time.perf_counter()
    volume = simulate(scene)
    elapsed = time.perf_counter() - t0
    for w in volume.metadata.get("warnings", []):
        print(f"warning: {w}", file=sys.stderr)
    if volume.metadata.get("seed_failures") == enabled:
        print("error: every enabled finger has an invalid seed", file=sys.stderr)
        return 2

    written = write_exports(volume, args.out, scene.output_stem,
                            _parse_formats(args.formats), left_handed=args.left_handed)
    counts = volume.metadata.get("per_finger_points", {})
    print(f"scene: {scene.output_stem}")
    print(f"points: {len(volume.points)}")
    for name in enabled:
        print(f"  {name}: {counts.get(name, 0)}")
    print(f"max_cost_deg: {volume.max_cost():.6f}")
    print(f"wall_time_s: {elapsed:.3f}")
    for p in written:
        print(f"wrote {p}")
    return 0


def _cmd_batch(args) -> int:
    return batch_mod.run_batch(args.manifest, jobs=args.jobs)


def _cmd_info(args) -> int:
    volume = load_volume(args.volume)
    print(f"points: {len(volume.points)}")
    if volume.points:
        costs = volume.costs()
        pos = volume.positions()
        lo = pos.min(axis=0)
        hi = pos.max(axis=0)
        print(f"cost_deg: min {costs.min():.6f} mean {costs.mean():.6f} "
              f"max {costs.max():.6f}")
        print(f"bbox_mm: [{lo[0]:.6f}, {lo[1]:.6f}, {lo[2]:.6f}] .. "
              f"[{hi[0]:.6f}, {hi[1]:.6f}, {hi[2]:.6f}]")
        for name, count in sorted(volume.finger_counts().items()):
            mask = [p.cost_deg for p in volume.points if p.finger.value == name]
            print(f"  {name}: {count} points, max cost {max(mask):.6f}")
    meta = volume.metadata
    if meta.get("warnings"):
        for w in meta["warnings"]:
            print(f"warning: {w}")
    return 0


def _cmd_query(args) -> int:
    volume = load_volume(args.volume)
    try:
        center = [float(c) for c in args.center.split(",")]
        if len(center) != 3:
            raise ValueError
    except ValueError:
        raise GravError(f"--center must be 'x,y,z', got {args.center!r}") from None
    if args.radius < 0:
        raise GravError(f"--radius must be >= 0, got {args.radius}")
    res = query_reachable(volume, np.array(center), args.radius)
    print(f"reachable: {'true' if res.reachable else 'false'}")
    if res.min_cost_deg is not None:
        print(f"min_cost_deg: {res.min_cost_deg:.6f}")
    print(f"fingers: {','.join(res.fingers) if res.fingers else '-'}")
    print(f"points_in_range: {res.points_in_range}")
    return 0


def _cmd_export(args) -> int:
    volume = load_volume(args.volume)
    stem = Path(args.volume).stem
    written = write_exports(volume, args.out, stem, _parse_formats(args.formats),
                            left_handed=args.left_handed)
    for p in written:
        print(f"wrote {p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gravkit",
                     description="Grasp interaction volume simulator and toolkit")
    parser.add_argument("--version", action="version", version=f"gravkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate a scene and export the volume")
    sim.add_argument("--scene", required=True, help="scene JSON file")
    sim.add_argument("--out", default=".", help="output directory")
    sim.add_argument("--formats", default="csv,ply",
                     help=f"comma list from: {', '.join(EXPORT_FORMATS)}")
    sim.add_argument("--step-deg", type=float, default=None, help="angular step override")
    sim.add_argument("--epsilon-mm", type=float, default=None,
                     help="collision tolerance override")
    sim.add_argument("--fingers", default=None,
                     help="comma list of fingers to simulate (default: scene setting)")
    sim.add_argument("--dedupe-mm", type=float, default=None,
                     help="voxel size for min-cost dedupe (0 disables)")
    sim.add_argument("--left-handed", action="store_true",
                     help="negate X in exports for left-handed engines")
    sim.add_argument("--seed-check-only", action="store_true",
                     help="validate seed poses and exit without simulating")
    sim.set_defaults(func=_cmd_simulate)

    bat = sub.add_parser("batch", help="run a batch manifest")
    bat.add_argument("--manifest", required=True, help="manifest JSON file")
    bat.add_argument("--jobs", type=int, default=None,
                     help="parallel jobs (default: $GRAVKIT_JOBS or 1)")
    bat.set_defaults(func=_cmd_batch)

    info = sub.add_parser("info", help="summarize a volume file (.csv or .json)")
    info.add_argument("volume", help="volume file")
    info.set_defaults(func=_cmd_info)

    query = sub.add_parser("query", help="reachability of a sphere against a volume")
    query.add_argument("volume", help="volume file (.csv or .json)")
    query.add_argument("--center", required=True, help="sphere center as 'x,y,z' (mm)")
    query.add_argument("--radius", type=float, required=True, help="sphere radius (mm)")
    query.set_defaults(func=_cmd_query)

    exp = sub.add_parser("export", help="re-export a volume file to other formats")
    exp.add_argument("volume", help="volume file (.csv or .json)")
    exp.add_argument("--out", default=".", help="output directory")
    exp.add_argument("--formats", default="ply",
                     help=f"comma list from: {', '.join(EXPORT_FORMATS)}")
    exp.add_argument("--left-handed", action="store_true",
                     help="negate X in exports for left-handed engines")
    exp.set_defaults(func=_cmd_export)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GravError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
