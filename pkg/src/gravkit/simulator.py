"""Reachability simulation: flood fill of each finger's configuration grid.

Starting at the seed pose (all offsets zero), the explorer repeatedly steps
one joint axis by one angular increment and keeps every configuration that is
inside the RoM and collision-free. The result per finger is exactly the
seed's connected component of the configuration grid; each surviving
configuration contributes one volume point at the posed fingertip with cost
step_deg times the summed absolute offsets.

Validity of a configuration is decided by checks in a fixed order:
RoM bounds, object collision, palm/self collision, block-motion blockers.
A collision means penetration deeper than the scene's epsilon. Fingers are
simulated independently: the others stay frozen at seed and are never tested
against the moving finger.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels as _k
from ._version import __version__
from .errors import InvalidSeed, OutOfRom, SchemaError, SimulationLimitExceeded
from .geometry import BLOCK_MOTION, Box, Bvh, Sphere, TriangleMesh
from .hand import (AXIS_X, FINGER_CHAINS, FINGER_ORDER, FingerId, HandModel,
                   JointId)
from .scene import GraspScene
from .volume import GravPoint, GravVolume, apply_blockers, dedupe_points

VALID = "valid"
OUT_OF_ROM = "out_of_rom"
OBJECT_COLLISION = "object_collision"
HAND_COLLISION = "hand_collision"
BLOCKER_COLLISION = "blocker_collision"


@dataclass(frozen=True)
class Verdict:
    status: str
    depth_mm: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == VALID

    def __str__(self) -> str:
        if self.status in (OBJECT_COLLISION, HAND_COLLISION):
            return f"{self.status} (depth {self.depth_mm:.3f} mm)"
        return self.status


_VALID_VERDICT = Verdict(VALID)

#: Static palm collision body: spokes from the wrist to every finger base,
#: plus the rim joining adjacent finger MCPs. Radius = thickness/2.
_PALM_CAPSULE_JOINTS: Tuple[Tuple[JointId, JointId], ...] = (
    (JointId.WRIST, JointId.INDEX_MCP),
    (JointId.WRIST, JointId.MIDDLE_MCP),
    (JointId.WRIST, JointId.RING_MCP),
    (JointId.WRIST, JointId.LITTLE_MCP),
    (JointId.WRIST, JointId.THUMB_CMC),
    (JointId.INDEX_MCP, JointId.MIDDLE_MCP),
    (JointId.MIDDLE_MCP, JointId.RING_MCP),
    (JointId.RING_MCP, JointId.LITTLE_MCP),
)


@dataclass
class _FingerContext:
    """Everything needed to validate one finger's configurations, prepacked."""

    finger: FingerId
    bounds: Tuple[Tuple[int, int], ...]
    rest: np.ndarray
    x_axes: np.ndarray
    y_axes: np.ndarray
    axis_is_x: np.ndarray  # per explored axis
    axis_slot: np.ndarray  # chain index per explored axis
    radius: float
    eps: float
    step_deg: float
    object_bvh: Optional[Bvh]
    palm_caps: np.ndarray  # (n, 7) rows [ax ay az bx by bz r]
    palm_skip: np.ndarray  # (n_segments, n) adjacency skip mask
    self_pairs: Tuple[Tuple[int, int], ...]
    blocker_boxes: List[Tuple[np.ndarray, np.ndarray]]
    blocker_spheres: List[Tuple[np.ndarray, float]]
    blocker_bvhs: List[Bvh]
    max_configs: int


def _build_context(scene: GraspScene, finger: FingerId) -> _FingerContext:
    hand = scene.hand
    rom = hand.rom
    entries = rom.axes_for_finger(finger)
    bounds = rom.grid_bounds(finger, scene.settings.step_deg)
    chain = FINGER_CHAINS[finger][:-1]
    slot = {j: i for i, j in enumerate(chain)}
    axis_is_x = np.array([e.axis == AXIS_X for e in entries], dtype=np.bool_)
    axis_slot = np.array([slot[e.joint] for e in entries], dtype=np.int64)
    rest, x_axes, y_axes = hand.chain_arrays(finger)

    r = hand.thickness_mm / 2.0
    palm_rows = []
    for a, b in _PALM_CAPSULE_JOINTS:
        pa, pb = hand.positions[a], hand.positions[b]
        palm_rows.append([pa[0], pa[1], pa[2], pb[0], pb[1], pb[2], r])
    palm_caps = np.ascontiguousarray(palm_rows, dtype=np.float64)

    seg_joints = list(zip(FINGER_CHAINS[finger][:-1], FINGER_CHAINS[finger][1:]))
    palm_skip = np.zeros((len(seg_joints), len(_PALM_CAPSULE_JOINTS)), dtype=np.bool_)
    for i, (sa, sb) in enumerate(seg_joints):
        for j, (pa, pb) in enumerate(_PALM_CAPSULE_JOINTS):
            # capsules sharing a joint always overlap there; skip those pairs
            palm_skip[i, j] = len({sa, sb} & {pa, pb}) > 0

    n_seg = len(seg_joints)
    self_pairs = tuple((i, j) for i in range(n_seg) for j in range(i + 2, n_seg))

    boxes = []
    spheres = []
    bvhs = []
    for blk in scene.blockers:
        if blk.mode != BLOCK_MOTION:
            continue
        shape = blk.shape
        if isinstance(shape, Box):
            boxes.append((shape.lo, shape.hi))
        elif isinstance(shape, Sphere):
            spheres.append((shape.center, shape.radius))
        else:
            assert blk.bvh is not None
            bvhs.append(blk.bvh)

    return _FingerContext(
        finger=finger, bounds=bounds, rest=rest, x_axes=x_axes, y_axes=y_axes,
        axis_is_x=axis_is_x, axis_slot=axis_slot, radius=r,
        eps=scene.settings.epsilon_mm, step_deg=scene.settings.step_deg,
        object_bvh=scene.object_bvh, palm_caps=palm_caps, palm_skip=palm_skip,
        self_pairs=self_pairs, blocker_boxes=boxes, blocker_spheres=spheres,
        blocker_bvhs=bvhs, max_configs=scene.settings.max_configs)


def _context_for(scene: GraspScene, finger: FingerId) -> _FingerContext:
    ctx = scene._contexts.get(finger)
    if ctx is None:
        ctx = _build_context(scene, finger)
        scene._contexts[finger] = ctx
    return ctx


def _check(ctx: _FingerContext, config: Sequence[int],
           stats: Optional[Dict] = None) -> Tuple[Verdict, Optional[np.ndarray]]:
    """Validate one configuration; returns (verdict, posed chain when valid)."""
    n_axes = len(ctx.bounds)
    if len(config) != n_axes:
        raise OutOfRom(f"{ctx.finger.value}: configuration has {len(config)} offsets, "
                       f"expected {n_axes}")
    for k, (lo, hi) in zip(config, ctx.bounds):
        if k < lo or k > hi:
            return Verdict(OUT_OF_ROM), None

    m = ctx.rest.shape[0] - 1  # rotating joints in the chain
    ang_x = np.zeros(m)
    ang_y = np.zeros(m)
    for i in range(n_axes):
        angle = np.radians(config[i] * ctx.step_deg)
        if ctx.axis_is_x[i]:
            ang_x[ctx.axis_slot[i]] = angle
        else:
            ang_y[ctx.axis_slot[i]] = angle
    posed = _k.chain_fk(ctx.rest, ctx.x_axes, ctx.y_axes, ang_x, ang_y)
    r = ctx.radius

    if ctx.object_bvh is not None:
        bvh = ctx.object_bvh
        depth = 0.0
        for i in range(m):
            d, _, visited = _k.bvh_segment_min_dist(
                posed[i], posed[i + 1], bvh.node_lo, bvh.node_hi, bvh.node_left,
                bvh.node_right, bvh.node_start, bvh.node_count, bvh.tri_order,
                bvh.tri_verts, r)
            if stats is not None:
                stats["bvh_queries"] += 1
                stats["bvh_triangles_visited"] += int(visited)
            depth = max(depth, r - float(d))
        if depth > ctx.eps:
            return Verdict(OBJECT_COLLISION, depth), None

    depth = 0.0
    for i in range(m):
        depth = max(depth, float(_k.max_penetration_vs_capsules(
            posed[i], posed[i + 1], r, ctx.palm_caps, ctx.palm_skip[i], np.inf)))
    for i, j in ctx.self_pairs:
        d = float(np.sqrt(_k.segment_segment_dist_sq(
            posed[i], posed[i + 1], posed[j], posed[j + 1])))
        depth = max(depth, 2.0 * r - d)
    if depth > ctx.eps:
        return Verdict(HAND_COLLISION, depth), None

    hit = False
    for lo, hi in ctx.blocker_boxes:
        for i in range(m):
            sdf = float(_k.segment_box_min_sdf(posed[i], posed[i + 1], lo, hi))
            if r - sdf > ctx.eps:
                hit = True
                break
        if hit:
            break
    if not hit:
        for center, rad in ctx.blocker_spheres:
            for i in range(m):
                d = float(np.sqrt(_k.point_segment_dist_sq(center, posed[i], posed[i + 1])))
                if r + rad - d > ctx.eps:
                    hit = True
                    break
            if hit:
                break
    if not hit:
        for bvh in ctx.blocker_bvhs:
            for i in range(m):
                d, _, _ = _k.bvh_segment_min_dist(
                    posed[i], posed[i + 1], bvh.node_lo, bvh.node_hi, bvh.node_left,
                    bvh.node_right, bvh.node_start, bvh.node_count, bvh.tri_order,
                    bvh.tri_verts, r)
                if r - float(d) > ctx.eps:
                    hit = True
                    break
            if hit:
                break
    if hit:
        return Verdict(BLOCKER_COLLISION), None

    return _VALID_VERDICT, posed


def validate_configuration(scene: GraspScene, finger: FingerId,
                           config: Sequence[int]) -> Verdict:
    """Pure check of one configuration, in the same fixed order the
    simulation uses: RoM, object, palm/self, block-motion blockers."""
    verdict, _ = _check(_context_for(scene, finger), tuple(int(c) for c in config))
    return verdict


def simulate_finger(scene: GraspScene, finger: FingerId,
                    _stats: Optional[Dict] = None) -> List[GravPoint]:
    """Flood-fill one finger's grid; returns its points in canonical order.

    Canonical order is breadth-first from the seed with lexicographic
    ordering inside each BFS level, which makes the output deterministic and
    independent of neighbor iteration details.
    """
    ctx = _context_for(scene, finger)
    n = len(ctx.bounds)
    seed = (0,) * n

    verdict, posed = _check(ctx, seed, _stats)
    if not verdict.ok:
        raise InvalidSeed(finger.value, verdict)

    step = ctx.step_deg
    points: List[GravPoint] = []
    tips: Dict[Tuple[int, ...], np.ndarray] = {seed: posed[-1].copy()}
    seen = {seed}
    rejected: set = set()
    level: List[Tuple[int, ...]] = [seed]
    while level:
        level.sort()
        next_level: List[Tuple[int, ...]] = []
        for cfg in level:
            if len(points) >= ctx.max_configs:
                raise SimulationLimitExceeded(
                    f"{finger.value}: visited-configuration cap "
                    f"{ctx.max_configs} exceeded")
            cost = step * sum(abs(k) for k in cfg)
            points.append(GravPoint(position=tips.pop(cfg), cost_deg=cost,
                                    finger=finger, config=cfg))
            for i in range(n):
                lo, hi = ctx.bounds[i]
                for delta in (-1, 1):
                    k = cfg[i] + delta
                    if k < lo or k > hi:
                        continue
                    ncfg = cfg[:i] + (k,) + cfg[i + 1:]
                    if ncfg in seen or ncfg in rejected:
                        continue
                    v, p = _check(ctx, ncfg, _stats)
                    if v.ok:
                        seen.add(ncfg)
                        tips[ncfg] = p[-1].copy()
                        next_level.append(ncfg)
                    else:
                        rejected.add(ncfg)
        level = next_level
    return points


def simulate(scene: GraspScene) -> GravVolume:
    """Simulate every enabled finger and assemble the labeled volume.

    A finger whose seed pose is invalid (or that trips the configuration cap)
    is skipped and reported in metadata warnings; the others still run.
    """
    enabled = scene.settings.fingers
    if not enabled:
        raise SchemaError("no fingers enabled")

    stats = {"bvh_queries": 0, "bvh_triangles_visited": 0}
    warnings: List[str] = []
    seed_failures: List[str] = []
    points: List[GravPoint] = []
    raw_counts: Dict[str, int] = {}
    for finger in FINGER_ORDER:
        if finger not in enabled:
            continue
        try:
            finger_points = simulate_finger(scene, finger, _stats=stats)
        except InvalidSeed as exc:
            warnings.append(str(exc))
            seed_failures.append(finger.value)
            continue
        except SimulationLimitExceeded as exc:
            warnings.append(str(exc))
            continue
        raw_counts[finger.value] = len(finger_points)
        points.extend(finger_points)

    volume = apply_blockers(GravVolume(points=points, metadata={}), scene.blockers)
    excluded = volume.metadata.get("excluded_points", 0)
    survivors, dedupe_removed = dedupe_points(volume.points, scene.settings.dedupe_mm)

    mesh = scene.object_mesh
    metadata = {
        "tool": {"name": "gravkit", "version": __version__},
        "scene": {
            "object_name": scene.object_name,
            "grasp_id": scene.grasp_id,
            "digest": scene.content_digest(),
            "handedness": scene.hand.handedness,
            "thickness_mm": scene.hand.thickness_mm,
            "object_triangles": mesh.n_triangles if mesh is not None else 0,
        },
        "settings": {
            "step_deg": scene.settings.step_deg,
            "epsilon_mm": scene.settings.epsilon_mm,
            "fingers": [f.value for f in enabled],
            "dedupe_mm": scene.settings.dedupe_mm,
            "max_configs": scene.settings.max_configs,
        },
        "warnings": warnings,
        "seed_failures": seed_failures,
        "per_finger_points": {},
        "raw_per_finger_points": raw_counts,
        "excluded_points": excluded,
        "dedupe_removed": dedupe_removed,
        "bvh_stats": {
            "queries": stats["bvh_queries"],
            "triangles_visited": stats["bvh_triangles_visited"],
            "mesh_triangles": mesh.n_triangles if mesh is not None else 0,
        },
    }
    out = GravVolume(points=survivors, metadata=metadata)
    metadata["per_finger_points"] = out.finger_counts()
    return out
