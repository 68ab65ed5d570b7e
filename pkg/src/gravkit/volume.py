"""Grasp interaction volumes and their post-processing operations.

A volume is a labeled 4D point cloud: fingertip position (mm), displacement
cost (deg), finger id, and the integer joint-step configuration that produced
the point. Post-processing covers boundary extraction, the object-surface
contact subset, blocker filtering, scaling, and reachability queries.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .errors import EmptyVolume, NonPositiveScale
from .geometry import Blocker, Bvh, EXCLUDE_POINTS, point_in_blocker, point_mesh_distance, \
    triangles_within
from .hand import FINGER_ORDER, FingerId

_FINGER_RANK = {f: i for i, f in enumerate(FINGER_ORDER)}


@dataclass(frozen=True)
class GravPoint:
    position: np.ndarray  # (3,) mm
    cost_deg: float
    finger: FingerId
    config: Tuple[int, ...]


@dataclass
class GravVolume:
    points: List[GravPoint]
    metadata: Dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)

    def positions(self) -> np.ndarray:
        if not self.points:
            return np.empty((0, 3))
        return np.array([p.position for p in self.points])

    def costs(self) -> np.ndarray:
        return np.array([p.cost_deg for p in self.points])

    def max_cost(self) -> float:
        return max((p.cost_deg for p in self.points), default=0.0)

    def finger_counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for p in self.points:
            counts[p.finger.value] = counts.get(p.finger.value, 0) + 1
        return counts


def _voxel_key(position: np.ndarray, voxel: float) -> Tuple[int, int, int]:
    k = np.floor(position / voxel)
    return (int(k[0]), int(k[1]), int(k[2]))


def dedupe_points(points: Sequence[GravPoint], voxel_mm: float) -> Tuple[List[GravPoint], int]:
    """Keep one point per voxel: minimum cost, ties broken by lexicographic
    configuration, then canonical finger order. Survivors keep their order."""
    if voxel_mm <= 0.0:
        return list(points), 0
    best: Dict[Tuple[int, int, int], int] = {}
    for i, p in enumerate(points):
        key = _voxel_key(p.position, voxel_mm)
        j = best.get(key)
        if j is None:
            best[key] = i
        else:
            q = points[j]
            if (p.cost_deg, p.config, _FINGER_RANK[p.finger]) < \
                    (q.cost_deg, q.config, _FINGER_RANK[q.finger]):
                best[key] = i
    keep = set(best.values())
    survivors = [p for i, p in enumerate(points) if i in keep]
    return survivors, len(points) - len(survivors)


def motion_boundary(v: GravVolume, voxel_mm: float = 3.0) -> List[GravPoint]:
    """Points on the outer shell of the volume.

    Voxelize at voxel_mm and keep the points of every occupied voxel that has
    at least one empty 6-neighbor. Interior voxels (all six neighbors
    occupied) are dropped; a curve-like volume therefore survives whole.
    """
    if voxel_mm <= 0.0:
        raise ValueError(f"voxel size must be > 0 mm, got {voxel_mm}")
    if not v.points:
        raise EmptyVolume("cannot extract a boundary from an empty volume")
    occupied: Set[Tuple[int, int, int]] = {_voxel_key(p.position, voxel_mm)
                                           for p in v.points}
    offsets = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1))
    shell = {key for key in occupied
             if any((key[0] + dx, key[1] + dy, key[2] + dz) not in occupied
                    for dx, dy, dz in offsets)}
    return [p for p in v.points if _voxel_key(p.position, voxel_mm) in shell]


def haptic_surface(v: GravVolume, bvh: Bvh,
                   contact_mm: float) -> Tuple[List[GravPoint], List[int]]:
    """Volume points lying within contact_mm of the object surface, plus the
    ids of all triangles within contact_mm of any such point (the reachable
    patch of the object)."""
    if contact_mm < 0.0:
        raise ValueError(f"contact distance must be >= 0 mm, got {contact_mm}")
    touching: List[GravPoint] = []
    tri_ids: Set[int] = set()
    for p in v.points:
        d, _ = point_mesh_distance(p.position, bvh, bound=contact_mm * (1.0 + 1e-12) + 1e-9)
        if d <= contact_mm:
            touching.append(p)
            tri_ids.update(int(t) for t in triangles_within(p.position, contact_mm, bvh))
    return touching, sorted(tri_ids)


def apply_blockers(v: GravVolume, blockers: Iterable[Blocker]) -> GravVolume:
    """Drop points inside exclude-points blockers; block-motion blockers act
    during simulation and are a no-op here. Removal counts go to metadata."""
    excluders = [b for b in blockers if b.mode == EXCLUDE_POINTS]
    if not excluders:
        removed = 0
        kept = list(v.points)
    else:
        kept = []
        removed = 0
        for p in v.points:
            if any(point_in_blocker(p.position, b) for b in excluders):
                removed += 1
            else:
                kept.append(p)
    metadata = dict(v.metadata)
    metadata["excluded_points"] = metadata.get("excluded_points", 0) + removed
    return GravVolume(points=kept, metadata=metadata)


def scale_volume(v: GravVolume, s: float) -> GravVolume:
    """Scale positions by s; costs are angles and stay untouched."""
    s = float(s)
    if not s > 0.0:
        raise NonPositiveScale(f"scale must be > 0, got {s}")
    points = [replace(p, position=p.position * s) for p in v.points]
    metadata = dict(v.metadata)
    metadata["scale_applied"] = metadata.get("scale_applied", 1.0) * s
    return GravVolume(points=points, metadata=metadata)


def mirror_volume_x(v: GravVolume) -> GravVolume:
    """Negate the X coordinate of every point (right- <-> left-handed frames)."""
    points = []
    for p in v.points:
        q = p.position.copy()
        q[0] = -q[0]
        points.append(replace(p, position=q))
    return GravVolume(points=points, metadata=dict(v.metadata))


@dataclass(frozen=True)
class ReachQuery:
    reachable: bool
    min_cost_deg: Optional[float]
    fingers: Tuple[str, ...]
    points_in_range: int


def query_reachable(v: GravVolume, center, radius_mm: float) -> ReachQuery:
    """Which fingers can reach a sphere, and how cheaply?

    Scans every point; a point counts when its distance to center is
    <= radius_mm. min_cost_deg is None when nothing is in range.
    """
    if radius_mm < 0.0:
        raise ValueError(f"radius must be >= 0 mm, got {radius_mm}")
    center = np.asarray(center, dtype=np.float64).reshape(3)
    r_sq = float(radius_mm) * float(radius_mm)
    min_cost: Optional[float] = None
    fingers: Set[str] = set()
    n = 0
    for p in v.points:
        d = p.position - center
        if float(d @ d) <= r_sq:
            n += 1
            fingers.add(p.finger.value)
            if min_cost is None or p.cost_deg < min_cost:
                min_cost = p.cost_deg
    ordered = tuple(f.value for f in FINGER_ORDER if f.value in fingers)
    return ReachQuery(reachable=n > 0, min_cost_deg=min_cost, fingers=ordered,
                      points_in_range=n)
