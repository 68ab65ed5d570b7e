"""Synthetic primitive meshes for bundled scenes, tests, and benchmarks."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .geometry import TriangleMesh

_AXIS_PERMS = {"x": (2, 0, 1), "y": (1, 2, 0), "z": (0, 1, 2)}


def box_mesh(lo: Sequence[float], hi: Sequence[float], name: str = "box") -> TriangleMesh:
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    x0, y0, z0 = lo
    x1, y1, z1 = hi
    verts = np.array([
        [x0, y0, z0], [x1, y0, z0], [x1, y1, z0], [x0, y1, z0],
        [x0, y0, z1], [x1, y0, z1], [x1, y1, z1], [x0, y1, z1],
    ])
    quads = [(0, 1, 2, 3), (4, 5, 6, 7), (0, 1, 5, 4),
             (2, 3, 7, 6), (1, 2, 6, 5), (3, 0, 4, 7)]
    tris = []
    for a, b, c, d in quads:
        tris.append((a, b, c))
        tris.append((a, c, d))
    return TriangleMesh(verts, np.array(tris), name=name)


def plane_mesh(y: float, x_range: Sequence[float], z_range: Sequence[float],
               nx: int = 4, nz: int = 4, name: str = "plane") -> TriangleMesh:
    """Horizontal rectangle at height y, subdivided nx-by-nz."""
    xs = np.linspace(x_range[0], x_range[1], nx + 1)
    zs = np.linspace(z_range[0], z_range[1], nz + 1)
    verts = []
    for zi in zs:
        for xi in xs:
            verts.append((xi, y, zi))
    tris = []
    stride = nx + 1
    for j in range(nz):
        for i in range(nx):
            a = j * stride + i
            b = a + 1
            c = a + stride
            d = c + 1
            tris.append((a, b, d))
            tris.append((a, d, c))
    return TriangleMesh(np.array(verts), np.array(tris), name=name)


def sphere_mesh(center: Sequence[float], radius: float, n_lat: int = 16,
                n_lon: int = 24, name: str = "sphere") -> TriangleMesh:
    """UV sphere with 2 * n_lon * (n_lat - 1) triangles."""
    center = np.asarray(center, dtype=np.float64)
    verts = [center + (0.0, radius, 0.0)]
    for i in range(1, n_lat):
        phi = math.pi * i / n_lat  # polar angle from +Y
        for j in range(n_lon):
            theta = 2.0 * math.pi * j / n_lon
            verts.append(center + radius * np.array([
                math.sin(phi) * math.cos(theta),
                math.cos(phi),
                math.sin(phi) * math.sin(theta)]))
    verts.append(center + (0.0, -radius, 0.0))
    south = len(verts) - 1

    def ring(i: int, j: int) -> int:
        return 1 + (i - 1) * n_lon + (j % n_lon)

    tris = []
    for j in range(n_lon):
        tris.append((0, ring(1, j), ring(1, j + 1)))
    for i in range(1, n_lat - 1):
        for j in range(n_lon):
            a, b = ring(i, j), ring(i, j + 1)
            c, d = ring(i + 1, j), ring(i + 1, j + 1)
            tris.append((a, b, d))
            tris.append((a, d, c))
    for j in range(n_lon):
        tris.append((south, ring(n_lat - 1, j + 1), ring(n_lat - 1, j)))
    return TriangleMesh(np.array(verts), np.array(tris), name=name)


def cylinder_mesh(center: Sequence[float], radius: float, length: float,
                  axis: str = "x", n_seg: int = 32, name: str = "cylinder") -> TriangleMesh:
    """Closed cylinder whose symmetry axis runs along x, y, or z."""
    if axis not in _AXIS_PERMS:
        raise ValueError(f"axis must be one of x/y/z, got {axis!r}")
    perm = _AXIS_PERMS[axis]
    center = np.asarray(center, dtype=np.float64)
    half = length / 2.0
    local = []
    for end in (-half, half):
        for j in range(n_seg):
            theta = 2.0 * math.pi * j / n_seg
            local.append((radius * math.cos(theta), radius * math.sin(theta), end))
    local.append((0.0, 0.0, -half))
    local.append((0.0, 0.0, half))
    verts = np.array(local)[:, perm] + center
    tris = []
    for j in range(n_seg):
        a, b = j, (j + 1) % n_seg
        c, d = n_seg + j, n_seg + (j + 1) % n_seg
        tris.append((a, b, d))
        tris.append((a, d, c))
    lo_center, hi_center = 2 * n_seg, 2 * n_seg + 1
    for j in range(n_seg):
        tris.append((lo_center, (j + 1) % n_seg, j))
        tris.append((hi_center, n_seg + j, n_seg + (j + 1) % n_seg))
    return TriangleMesh(verts, np.array(tris), name=name)
