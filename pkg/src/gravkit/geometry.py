"""Collision geometry: meshes, capsules, blockers, BVH, and distance queries.

All lengths are millimeters. Meshes are treated purely as triangle soups:
winding and normals are ignored and every query is distance-based, which keeps
the module robust to non-watertight scans. Penetration depths are >= 0 with 0
meaning "no contact".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from . import _kernels as _k
from .errors import NonFiniteInput, ParseError

BLOCK_MOTION = "block-motion"
EXCLUDE_POINTS = "exclude-points"

# Fixed containment-ray direction; components are deliberately unequal so the
# ray does not ride along edges of axis-aligned meshes.
_RAY_DIR = np.array([1.0, 2.0, 3.0]) / np.sqrt(14.0)


def _as_vec3(v, what: str) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64).reshape(3)
    if not np.isfinite(arr).all():
        raise NonFiniteInput(f"{what} contains non-finite values")
    return np.ascontiguousarray(arr)


@dataclass
class TriangleMesh:
    vertices: np.ndarray  # (n, 3) mm
    triangles: np.ndarray  # (m, 3) vertex indices
    name: str = ""

    def __post_init__(self) -> None:
        self.vertices = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        self.triangles = np.ascontiguousarray(np.asarray(self.triangles, dtype=np.int64))
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise ValueError("vertices must have shape (n, 3)")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise ValueError("triangles must have shape (m, 3)")
        if self.triangles.shape[0] < 1:
            raise ValueError("mesh must contain at least one triangle")
        if not np.isfinite(self.vertices).all():
            raise NonFiniteInput("mesh vertices contain non-finite values")
        if self.triangles.size and (self.triangles.min() < 0
                                    or self.triangles.max() >= self.vertices.shape[0]):
            raise ValueError("triangle indices out of range")

    @property
    def n_triangles(self) -> int:
        return int(self.triangles.shape[0])

    def triangle_vertices(self) -> np.ndarray:
        """(m, 3, 3) array: corner coordinates of every triangle."""
        return np.ascontiguousarray(self.vertices[self.triangles])

    def transformed(self, scale: float = 1.0, rotation: Optional[np.ndarray] = None,
                    translation: Optional[np.ndarray] = None) -> "TriangleMesh":
        v = self.vertices * float(scale)
        if rotation is not None:
            v = v @ np.asarray(rotation, dtype=np.float64).T
        if translation is not None:
            v = v + np.asarray(translation, dtype=np.float64).reshape(3)
        return TriangleMesh(v, self.triangles.copy(), self.name)

    def mirrored_x(self) -> "TriangleMesh":
        v = self.vertices.copy()
        v[:, 0] = -v[:, 0]
        return TriangleMesh(v, self.triangles.copy(), self.name)


@dataclass
class Capsule:
    a: np.ndarray
    b: np.ndarray
    radius: float

    def __post_init__(self) -> None:
        self.a = _as_vec3(self.a, "capsule endpoint a")
        self.b = _as_vec3(self.b, "capsule endpoint b")
        self.radius = float(self.radius)
        if not self.radius > 0.0:
            raise ValueError(f"capsule radius must be > 0, got {self.radius}")


@dataclass
class Box:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self) -> None:
        self.lo = _as_vec3(self.lo, "box min corner")
        self.hi = _as_vec3(self.hi, "box max corner")
        if not (self.lo < self.hi).all():
            raise ValueError("box min corner must be strictly below max corner on every axis")


@dataclass
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self) -> None:
        self.center = _as_vec3(self.center, "sphere center")
        self.radius = float(self.radius)
        if not self.radius > 0.0:
            raise ValueError(f"sphere radius must be > 0, got {self.radius}")


BlockerShape = Union[Box, Sphere, TriangleMesh]


@dataclass
class Blocker:
    """A designer-declared region that either blocks finger motion during the
    simulation (mode "block-motion") or filters emitted points afterwards
    (mode "exclude-points")."""

    shape: BlockerShape
    mode: str
    bvh: Optional["Bvh"] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.mode not in (BLOCK_MOTION, EXCLUDE_POINTS):
            raise ValueError(f"blocker mode must be '{BLOCK_MOTION}' or '{EXCLUDE_POINTS}',"
                             f" got {self.mode!r}")
        if isinstance(self.shape, TriangleMesh) and self.bvh is None:
            self.bvh = build_bvh(self.shape)


@dataclass
class Bvh:
    """Median-split bounding volume hierarchy in flat-array form.

    tri_order holds a permutation of triangle ids; leaves own the contiguous
    slice [start, start+count). All arrays are what the traversal kernels eat.
    """

    node_lo: np.ndarray
    node_hi: np.ndarray
    node_left: np.ndarray
    node_right: np.ndarray
    node_start: np.ndarray
    node_count: np.ndarray
    tri_order: np.ndarray
    tri_verts: np.ndarray  # (m, 3, 3)

    @property
    def n_triangles(self) -> int:
        return int(self.tri_verts.shape[0])


def build_bvh(mesh: TriangleMesh, leaf_size: int = 4) -> Bvh:
    tri_verts = mesh.triangle_vertices()
    m = tri_verts.shape[0]
    tri_lo = tri_verts.min(axis=1)
    tri_hi = tri_verts.max(axis=1)
    centroids = tri_verts.mean(axis=1)

    order = np.arange(m, dtype=np.int64)
    nodes: List[Tuple[np.ndarray, np.ndarray, int, int, int, int]] = []

    def split(start: int, count: int) -> int:
        idx = len(nodes)
        nodes.append(None)  # type: ignore[arg-type]
        sel = order[start:start + count]
        lo = tri_lo[sel].min(axis=0)
        hi = tri_hi[sel].max(axis=0)
        if count <= leaf_size:
            nodes[idx] = (lo, hi, -1, -1, start, count)
            return idx
        cen = centroids[sel]
        axis = int(np.argmax(cen.max(axis=0) - cen.min(axis=0)))
        # stable sort keeps the build deterministic when centroids tie
        perm = np.argsort(cen[:, axis], kind="stable")
        order[start:start + count] = sel[perm]
        half = count // 2
        left = split(start, half)
        right = split(start + half, count - half)
        nodes[idx] = (lo, hi, left, right, -1, 0)
        return idx

    split(0, m)
    n = len(nodes)
    node_lo = np.empty((n, 3))
    node_hi = np.empty((n, 3))
    node_left = np.empty(n, dtype=np.int64)
    node_right = np.empty(n, dtype=np.int64)
    node_start = np.empty(n, dtype=np.int64)
    node_count = np.empty(n, dtype=np.int64)
    for i, (lo, hi, left, right, start, count) in enumerate(nodes):
        node_lo[i] = lo
        node_hi[i] = hi
        node_left[i] = left
        node_right[i] = right
        node_start[i] = start
        node_count[i] = count
    return Bvh(np.ascontiguousarray(node_lo), np.ascontiguousarray(node_hi),
               node_left, node_right, node_start, node_count,
               np.ascontiguousarray(order), np.ascontiguousarray(tri_verts))


def segment_mesh_distance(a: np.ndarray, b: np.ndarray, bvh: Bvh,
                          bound: float = np.inf) -> Tuple[float, int, int]:
    """(distance, nearest triangle id, triangles visited).

    With a finite bound the search only resolves distances below it: when the
    true minimum is >= bound the returned distance equals bound and the
    triangle id is -1.
    """
    d, tri, visited = _k.bvh_segment_min_dist(
        np.ascontiguousarray(a, dtype=np.float64), np.ascontiguousarray(b, dtype=np.float64),
        bvh.node_lo, bvh.node_hi, bvh.node_left, bvh.node_right,
        bvh.node_start, bvh.node_count, bvh.tri_order, bvh.tri_verts, float(bound))
    return float(d), int(tri), int(visited)


def point_mesh_distance(p: np.ndarray, bvh: Bvh, bound: float = np.inf) -> Tuple[float, int]:
    d, tri = _k.bvh_point_min_dist(
        np.ascontiguousarray(p, dtype=np.float64),
        bvh.node_lo, bvh.node_hi, bvh.node_left, bvh.node_right,
        bvh.node_start, bvh.node_count, bvh.tri_order, bvh.tri_verts, float(bound))
    return float(d), int(tri)


def triangles_within(p: np.ndarray, radius: float, bvh: Bvh) -> np.ndarray:
    """Ids of all triangles with distance <= radius from p, ascending."""
    p = np.ascontiguousarray(p, dtype=np.float64)
    buf = np.empty(256, dtype=np.int64)
    n = _k.bvh_triangles_within(p, float(radius), bvh.node_lo, bvh.node_hi,
                                bvh.node_left, bvh.node_right, bvh.node_start,
                                bvh.node_count, bvh.tri_order, bvh.tri_verts, buf)
    if n > buf.shape[0]:
        buf = np.empty(n, dtype=np.int64)
        n = _k.bvh_triangles_within(p, float(radius), bvh.node_lo, bvh.node_hi,
                                    bvh.node_left, bvh.node_right, bvh.node_start,
                                    bvh.node_count, bvh.tri_order, bvh.tri_verts, buf)
    out = buf[:n].copy()
    out.sort()
    return out


def capsule_mesh_penetration(c: Capsule, bvh: Bvh) -> float:
    """Deepest overlap of the capsule with the mesh surface, in mm."""
    d, _, _ = segment_mesh_distance(c.a, c.b, bvh, bound=c.radius)
    return max(0.0, c.radius - d)


def capsule_capsule_penetration(a: Capsule, b: Capsule) -> float:
    d = float(np.sqrt(_k.segment_segment_dist_sq(a.a, a.b, b.a, b.b)))
    return max(0.0, a.radius + b.radius - d)


def point_in_mesh(p: np.ndarray, bvh: Bvh) -> bool:
    """Even-odd containment test against a (nominally closed) mesh."""
    crossings = _k.bvh_ray_crossings(
        np.ascontiguousarray(p, dtype=np.float64), _RAY_DIR,
        bvh.node_lo, bvh.node_hi, bvh.node_left, bvh.node_right,
        bvh.node_start, bvh.node_count, bvh.tri_order, bvh.tri_verts)
    return crossings % 2 == 1


def point_in_blocker(p: np.ndarray, blk: Blocker) -> bool:
    """Strict-interior containment (boundary points are outside)."""
    p = np.asarray(p, dtype=np.float64).reshape(3)
    s = blk.shape
    if isinstance(s, Box):
        return bool((s.lo < p).all() and (p < s.hi).all())
    if isinstance(s, Sphere):
        return bool(np.dot(p - s.center, p - s.center) < s.radius * s.radius)
    assert blk.bvh is not None
    return point_in_mesh(p, blk.bvh)


def capsule_blocker_penetration(c: Capsule, blk: Blocker) -> float:
    s = blk.shape
    if isinstance(s, Box):
        # solid box: signed distance goes negative when the centerline dips inside
        sdf = float(_k.segment_box_min_sdf(c.a, c.b, s.lo, s.hi))
        return max(0.0, c.radius - sdf)
    if isinstance(s, Sphere):
        d = float(np.sqrt(_k.point_segment_dist_sq(s.center, c.a, c.b)))
        return max(0.0, c.radius + s.radius - d)
    assert blk.bvh is not None
    return capsule_mesh_penetration(c, blk.bvh)


# ---------------------------------------------------------------------------
# OBJ import/export (meshes only; volumes have their own exporters)

def load_obj(path) -> TriangleMesh:
    """Load a Wavefront OBJ as a triangle soup.

    Supports v/f records; faces with more than three corners are
    fan-triangulated; texture/normal references and materials are ignored;
    negative (relative) indices are resolved per the OBJ rules.
    """
    path = Path(path)
    vertices: List[Tuple[float, float, float]] = []
    triangles: List[Tuple[int, int, int]] = []
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            tag = parts[0]
            if tag == "v":
                if len(parts) < 4:
                    raise ParseError(f"{path.name} line {lineno}: vertex needs 3 coordinates")
                try:
                    vertices.append((float(parts[1]), float(parts[2]), float(parts[3])))
                except ValueError as exc:
                    raise ParseError(f"{path.name} line {lineno}: bad vertex: {exc}") from None
            elif tag == "f":
                if len(parts) < 4:
                    raise ParseError(f"{path.name} line {lineno}: face needs >= 3 vertices")
                idx = []
                for token in parts[1:]:
                    head = token.split("/")[0]
                    try:
                        i = int(head)
                    except ValueError:
                        raise ParseError(
                            f"{path.name} line {lineno}: bad face index {token!r}") from None
                    if i > 0:
                        i -= 1
                    elif i < 0:
                        i += len(vertices)
                    else:
                        raise ParseError(f"{path.name} line {lineno}: face index 0 is invalid")
                    if not 0 <= i < len(vertices):
                        raise ParseError(
                            f"{path.name} line {lineno}: face index {token!r} out of range")
                    idx.append(i)
                for k in range(1, len(idx) - 1):
                    triangles.append((idx[0], idx[k], idx[k + 1]))
            # all other record types (vn, vt, usemtl, o, g, s, mtllib...) ignored
    if not triangles:
        raise ParseError(f"{path.name}: no faces found")
    return TriangleMesh(np.array(vertices), np.array(triangles), name=path.stem)


def save_obj(mesh: TriangleMesh, path) -> None:
    path = Path(path)
    lines = [f"# {mesh.name or 'mesh'}: {mesh.vertices.shape[0]} vertices,"
             f" {mesh.n_triangles} triangles"]
    for v in mesh.vertices:
        lines.append(f"v {v[0]:.6f} {v[1]:.6f} {v[2]:.6f}")
    for t in mesh.triangles:
        lines.append(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
