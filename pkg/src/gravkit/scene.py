"""Grasp scene: hand + seed pose + object + blockers + simulation settings."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import SchemaError
from .geometry import (Blocker, Box, Bvh, Sphere, TriangleMesh, build_bvh)
from .hand import FINGER_ORDER, FingerId, HandModel, RomEntry, RomSpec, mirror

#: Per-finger visited-configuration cap; a guard against runaway grids.
DEFAULT_MAX_CONFIGS = 5_000_000


@dataclass(frozen=True)
class SimulationSettings:
    step_deg: float = 5.0
    epsilon_mm: float = 0.5
    fingers: Tuple[FingerId, ...] = FINGER_ORDER
    dedupe_mm: float = 0.0  # 0 = keep every point
    max_configs: int = DEFAULT_MAX_CONFIGS

    def __post_init__(self) -> None:
        if not self.step_deg > 0.0:
            raise SchemaError(f"step_deg must be > 0, got {self.step_deg}")
        if self.epsilon_mm < 0.0:
            raise SchemaError(f"epsilon_mm must be >= 0, got {self.epsilon_mm}")
        if self.dedupe_mm < 0.0:
            raise SchemaError(f"dedupe_mm must be >= 0, got {self.dedupe_mm}")
        if self.max_configs < 1:
            raise SchemaError(f"max_configs must be >= 1, got {self.max_configs}")
        if len(set(self.fingers)) != len(self.fingers):
            raise SchemaError("duplicate entries in the finger mask")


@dataclass
class GraspScene:
    hand: HandModel
    settings: SimulationSettings = field(default_factory=SimulationSettings)
    object_mesh: Optional[TriangleMesh] = None
    blockers: List[Blocker] = field(default_factory=list)
    object_name: str = "object"
    grasp_id: int = 0  # 1..33 when labeled; 0 = unlabeled
    object_bvh: Optional[Bvh] = field(default=None, repr=False)
    source_digest: Optional[str] = None  # sha256 of the on-disk inputs, when file-loaded
    # per-finger collision contexts, built lazily by the simulator
    _contexts: Dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.grasp_id and not 1 <= self.grasp_id <= 33:
            raise SchemaError(f"grasp_id must be in [1, 33], got {self.grasp_id}")
        if self.object_mesh is not None and self.object_bvh is None:
            self.object_bvh = build_bvh(self.object_mesh)

    @property
    def output_stem(self) -> str:
        return f"{self.object_name}_grasp{self.grasp_id:02d}"

    def scaled(self, s: float) -> "GraspScene":
        """Uniformly scale every length in the scene by s.

        That includes the collision tolerance and the dedupe voxel — they are
        lengths too, and keeping them fixed would change which configurations
        collide and which points merge.
        """
        s = float(s)
        if not s > 0.0:
            raise SchemaError(f"scale must be > 0, got {s}")
        mesh = self.object_mesh.transformed(scale=s) if self.object_mesh is not None else None
        settings = replace(self.settings, epsilon_mm=self.settings.epsilon_mm * s,
                           dedupe_mm=self.settings.dedupe_mm * s)
        return GraspScene(hand=self.hand.scaled(s), settings=settings, object_mesh=mesh,
                          blockers=[_scale_blocker(b, s) for b in self.blockers],
                          object_name=self.object_name, grasp_id=self.grasp_id)

    def mirrored(self) -> "GraspScene":
        """Reflect the whole scene across the YZ plane (hand, object, blockers)."""
        mesh = self.object_mesh.mirrored_x() if self.object_mesh is not None else None
        return GraspScene(hand=mirror(self.hand), settings=self.settings, object_mesh=mesh,
                          blockers=[_mirror_blocker(b) for b in self.blockers],
                          object_name=self.object_name, grasp_id=self.grasp_id)

    def content_digest(self) -> str:
        """Deterministic sha256 over everything that influences simulation output."""
        if self.source_digest is not None:
            return self.source_digest
        h = hashlib.sha256()
        hand = self.hand
        for joint in sorted(hand.positions, key=lambda j: j.value):
            h.update(joint.value.encode())
            h.update(hand.positions[joint].tobytes())
        h.update(np.float64(hand.thickness_mm).tobytes())
        h.update(hand.handedness.encode())
        for e in sorted(hand.rom.entries, key=lambda e: (e.joint.value, e.axis)):
            h.update(f"{e.joint.value}.{e.axis}".encode())
            h.update(np.array([e.min_deg, e.max_deg]).tobytes())
        meta = {
            "step_deg": self.settings.step_deg,
            "epsilon_mm": self.settings.epsilon_mm,
            "fingers": [f.value for f in self.settings.fingers],
            "dedupe_mm": self.settings.dedupe_mm,
            "max_configs": self.settings.max_configs,
            "object_name": self.object_name,
            "grasp_id": self.grasp_id,
        }
        h.update(json.dumps(meta, sort_keys=True).encode())
        if self.object_mesh is not None:
            h.update(self.object_mesh.vertices.tobytes())
            h.update(self.object_mesh.triangles.tobytes())
        for b in self.blockers:
            h.update(b.mode.encode())
            s = b.shape
            if isinstance(s, Box):
                h.update(b"box" + s.lo.tobytes() + s.hi.tobytes())
            elif isinstance(s, Sphere):
                h.update(b"sphere" + s.center.tobytes() + np.float64(s.radius).tobytes())
            else:
                h.update(b"mesh" + s.vertices.tobytes() + s.triangles.tobytes())
        return h.hexdigest()


def _scale_blocker(b: Blocker, s: float) -> Blocker:
    shape = b.shape
    if isinstance(shape, Box):
        return Blocker(Box(shape.lo * s, shape.hi * s), b.mode)
    if isinstance(shape, Sphere):
        return Blocker(Sphere(shape.center * s, shape.radius * s), b.mode)
    return Blocker(shape.transformed(scale=s), b.mode)


def _mirror_blocker(b: Blocker) -> Blocker:
    shape = b.shape
    if isinstance(shape, Box):
        lo = shape.lo.copy()
        hi = shape.hi.copy()
        lo[0], hi[0] = -shape.hi[0], -shape.lo[0]
        return Blocker(Box(lo, hi), b.mode)
    if isinstance(shape, Sphere):
        c = shape.center.copy()
        c[0] = -c[0]
        return Blocker(Sphere(c, shape.radius), b.mode)
    return Blocker(shape.mirrored_x(), b.mode)
