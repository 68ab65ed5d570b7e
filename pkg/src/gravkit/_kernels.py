"""Numba kernels for kinematics and collision queries.

Everything here operates on plain float64 ndarrays so the flood fill can
validate one finger configuration with a handful of jitted calls. Distance
routines follow the classic formulations from Ericson's "Real-Time Collision
Detection"; all are exact up to floating point, no sampling anywhere.
"""

import numpy as np
from numba import njit

_PAR_EPS = 1e-18  # squared-length threshold below which a segment degenerates to a point


@njit(cache=True)
def rotation_about_axis(axis, angle):
    # Rodrigues formula; axis must be unit length.
    c = np.cos(angle)
    s = np.sin(angle)
    x, y, z = axis[0], axis[1], axis[2]
    rot = np.empty((3, 3))
    rot[0, 0] = c + x * x * (1.0 - c)
    rot[0, 1] = x * y * (1.0 - c) - z * s
    rot[0, 2] = x * z * (1.0 - c) + y * s
    rot[1, 0] = y * x * (1.0 - c) + z * s
    rot[1, 1] = c + y * y * (1.0 - c)
    rot[1, 2] = y * z * (1.0 - c) - x * s
    rot[2, 0] = z * x * (1.0 - c) - y * s
    rot[2, 1] = z * y * (1.0 - c) + x * s
    rot[2, 2] = c + z * z * (1.0 - c)
    return rot


@njit(cache=True)
def chain_fk(rest_points, x_axes, y_axes, angles_x, angles_y):
    """Pose a single kinematic chain.

    rest_points: (m+1, 3) rest positions of the m rotating joints plus the tip.
    x_axes, y_axes: (m, 3) unit frame axes of each rotating joint.
    angles_x, angles_y: (m,) rotation angles in radians.

    Joint k rotates everything distal to it about axes anchored at its posed
    position; the X rotation is applied before the Y rotation, both about the
    joint's rest-frame axes as carried along by the proximal transform.
    Returns the (m+1, 3) posed positions.
    """
    m = x_axes.shape[0]
    out = np.empty_like(rest_points)
    rot = np.eye(3)
    trans = np.zeros(3)
    for k in range(m):
        pivot = rot @ rest_points[k] + trans
        out[k] = pivot
        ax = rot @ x_axes[k]
        ay = rot @ y_axes[k]
        step = rotation_about_axis(ay, angles_y[k]) @ rotation_about_axis(ax, angles_x[k])
        rot = step @ rot
        trans = step @ (trans - pivot) + pivot
    out[m] = rot @ rest_points[m] + trans
    return out


@njit(cache=True)
def point_segment_dist_sq(p, a, b):
    ab = b - a
    denom = ab @ ab
    if denom <= _PAR_EPS:
        d = p - a
        return d @ d
    t = (p - a) @ ab / denom
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    d = a + t * ab - p
    return d @ d


@njit(cache=True)
def segment_segment_dist_sq(p1, q1, p2, q2):
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = d1 @ d1
    e = d2 @ d2
    f = d2 @ r
    if a <= _PAR_EPS and e <= _PAR_EPS:
        return r @ r
    if a <= _PAR_EPS:
        s = 0.0
        t = min(max(f / e, 0.0), 1.0)
    else:
        c = d1 @ r
        if e <= _PAR_EPS:
            t = 0.0
            s = min(max(-c / a, 0.0), 1.0)
        else:
            b = d1 @ d2
            denom = a * e - b * b
            if denom > _PAR_EPS:
                s = min(max((b * f - c * e) / denom, 0.0), 1.0)
            else:
                s = 0.0
            t = (b * s + f) / e
            if t < 0.0:
                t = 0.0
                s = min(max(-c / a, 0.0), 1.0)
            elif t > 1.0:
                t = 1.0
                s = min(max((b - c) / a, 0.0), 1.0)
    c1 = p1 + s * d1
    c2 = p2 + t * d2
    diff = c1 - c2
    return diff @ diff


@njit(cache=True)
def closest_point_on_triangle(p, a, b, c):
    # Ericson, ClosestPtPointTriangle.
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = ab @ ap
    d2 = ac @ ap
    if d1 <= 0.0 and d2 <= 0.0:
        return a.copy()
    bp = p - b
    d3 = ab @ bp
    d4 = ac @ bp
    if d3 >= 0.0 and d4 <= d3:
        return b.copy()
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        v = d1 / (d1 - d3)
        return a + v * ab
    cp = p - c
    d5 = ab @ cp
    d6 = ac @ cp
    if d6 >= 0.0 and d5 <= d6:
        return c.copy()
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        w = d2 / (d2 - d6)
        return a + w * ac
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return b + w * (c - b)
    denom = 1.0 / (va + vb + vc)
    v = vb * denom
    w = vc * denom
    return a + ab * v + ac * w


@njit(cache=True)
def point_triangle_dist_sq(p, a, b, c):
    q = closest_point_on_triangle(p, a, b, c)
    d = q - p
    return d @ d


@njit(cache=True)
def segment_intersects_triangle(p, q, a, b, c):
    # Moller-Trumbore restricted to the segment parameter range.
    d = q - p
    e1 = b - a
    e2 = c - a
    h = np.cross(d, e2)
    det = e1 @ h
    if -1e-12 < det < 1e-12:
        return False
    inv = 1.0 / det
    s = p - a
    u = (s @ h) * inv
    if u < 0.0 or u > 1.0:
        return False
    qv = np.cross(s, e1)
    v = (d @ qv) * inv
    if v < 0.0 or u + v > 1.0:
        return False
    t = (e2 @ qv) * inv
    return 0.0 <= t <= 1.0


@njit(cache=True)
def segment_triangle_dist_sq(p, q, a, b, c):
    if segment_intersects_triangle(p, q, a, b, c):
        return 0.0
    best = point_triangle_dist_sq(p, a, b, c)
    d = point_triangle_dist_sq(q, a, b, c)
    if d < best:
        best = d
    d = segment_segment_dist_sq(p, q, a, b)
    if d < best:
        best = d
    d = segment_segment_dist_sq(p, q, b, c)
    if d < best:
        best = d
    d = segment_segment_dist_sq(p, q, c, a)
    if d < best:
        best = d
    return best


@njit(cache=True)
def point_aabb_dist_sq(p, lo, hi):
    d = 0.0
    for i in range(3):
        if p[i] < lo[i]:
            t = lo[i] - p[i]
            d += t * t
        elif p[i] > hi[i]:
            t = p[i] - hi[i]
            d += t * t
    return d


@njit(cache=True)
def segment_aabb_dist_sq(p, q, lo, hi):
    """Exact squared distance between a segment and an axis-aligned box.

    The outside distance along the segment is piecewise quadratic with
    breakpoints where a coordinate crosses a slab plane, so the minimum is
    found per piece in closed form. Returns 0 when the segment touches or
    enters the box.
    """
    d = q - p
    # Collect parameter breakpoints at slab-plane crossings.
    ts = np.empty(14)
    ts[0] = 0.0
    ts[1] = 1.0
    n = 2
    for i in range(3):
        if d[i] != 0.0:
            t = (lo[i] - p[i]) / d[i]
            if 0.0 < t < 1.0:
                ts[n] = t
                n += 1
            t = (hi[i] - p[i]) / d[i]
            if 0.0 < t < 1.0:
                ts[n] = t
                n += 1
    tsub = np.sort(ts[:n])
    best = np.inf
    for k in range(n - 1):
        t0 = tsub[k]
        t1 = tsub[k + 1]
        if t1 - t0 <= 0.0:
            continue
        tm = 0.5 * (t0 + t1)
        # Active set is constant on (t0, t1); build the quadratic
        # d2(t) = qa*t^2 + qb*t + qc from the violated axes at the midpoint.
        qa = 0.0
        qb = 0.0
        qc = 0.0
        for i in range(3):
            pm = p[i] + tm * d[i]
            if pm < lo[i]:
                # deficit = lo - (p + t d)
                qa += d[i] * d[i]
                qb += 2.0 * d[i] * (p[i] - lo[i])
                qc += (lo[i] - p[i]) * (lo[i] - p[i])
            elif pm > hi[i]:
                qa += d[i] * d[i]
                qb += 2.0 * d[i] * (p[i] - hi[i])
                qc += (p[i] - hi[i]) * (p[i] - hi[i])
        if qa == 0.0 and qb == 0.0 and qc == 0.0:
            return 0.0  # midpoint inside the box
        cands0 = qa * t0 * t0 + qb * t0 + qc
        if cands0 < best:
            best = cands0
        cands1 = qa * t1 * t1 + qb * t1 + qc
        if cands1 < best:
            best = cands1
        if qa > 0.0:
            tv = -qb / (2.0 * qa)
            if t0 < tv < t1:
                v = qa * tv * tv + qb * tv + qc
                if v < best:
                    best = v
    if best < 0.0:
        best = 0.0
    return best


@njit(cache=True)
def segment_box_min_sdf(p, q, lo, hi):
    """Minimum over the segment of the signed distance to a solid box.

    Positive when the segment stays outside, negative when it dips inside
    (magnitude = deepest interior penetration of the centerline).
    """
    d = q - p
    # Clip the segment against the box slabs to find the inside interval.
    t0 = 0.0
    t1 = 1.0
    inside = True
    for i in range(3):
        if d[i] == 0.0:
            if p[i] < lo[i] or p[i] > hi[i]:
                inside = False
                break
        else:
            ta = (lo[i] - p[i]) / d[i]
            tb = (hi[i] - p[i]) / d[i]
            if ta > tb:
                ta, tb = tb, ta
            if ta > t0:
                t0 = ta
            if tb < t1:
                t1 = tb
            if t0 > t1:
                inside = False
                break
    if not inside or t0 > t1:
        return np.sqrt(segment_aabb_dist_sq(p, q, lo, hi))
    # Maximize min-axis slack over [t0, t1]: concave piecewise linear in t,
    # so the maximum sits at an interval end or where two slack lines cross.
    slopes = np.empty(6)
    offs = np.empty(6)
    for i in range(3):
        slopes[2 * i] = d[i]
        offs[2 * i] = p[i] - lo[i]
        slopes[2 * i + 1] = -d[i]
        offs[2 * i + 1] = hi[i] - p[i]
    best = -np.inf
    for j in range(-1, 6):
        for k in range(j + 1, 6):
            if j < 0:
                # the two interval ends ride on k = 0 and k = 1
                if k > 1:
                    break
                t = t0 if k == 0 else t1
            else:
                denom = slopes[j] - slopes[k]
                if denom == 0.0:
                    continue
                t = (offs[k] - offs[j]) / denom
                if t < t0 or t > t1:
                    continue
            g = np.inf
            for m in range(6):
                v = slopes[m] * t + offs[m]
                if v < g:
                    g = v
            if g > best:
                best = g
    return -best


@njit(cache=True)
def max_penetration_vs_capsules(seg_a, seg_b, radius, caps, skip, eps):
    """Deepest overlap of one capsule against a capsule set.

    caps: (n, 7) rows [ax ay az bx by bz radius]; skip: (n,) mask of rows to
    ignore. Early-exits once a depth beyond eps is found.
    """
    deepest = 0.0
    for i in range(caps.shape[0]):
        if skip[i]:
            continue
        d = np.sqrt(segment_segment_dist_sq(seg_a, seg_b, caps[i, 0:3], caps[i, 3:6]))
        depth = radius + caps[i, 6] - d
        if depth > deepest:
            deepest = depth
            if deepest > eps:
                return deepest
    return deepest


# ---------------------------------------------------------------------------
# BVH traversal

@njit(cache=True)
def bvh_segment_min_dist(p, q, node_lo, node_hi, node_left, node_right,
                         node_start, node_count, tri_order, tri_verts, init_bound):
    """Minimum distance from a segment to the mesh triangles under a BVH.

    init_bound prunes the search: subtrees that cannot beat it are skipped, so
    with init_bound=r the caller still learns exactly whether the true minimum
    is below r. Returns (distance, triangle_id, triangles_visited);
    triangle_id is -1 when nothing beat init_bound.
    """
    best = init_bound
    best_sq = best * best
    best_tri = -1
    visited = 0
    stack = np.empty(256, dtype=np.int64)
    sp = 0
    stack[sp] = 0
    sp += 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if segment_aabb_dist_sq(p, q, node_lo[node], node_hi[node]) >= best_sq:
            continue
        left = node_left[node]
        if left < 0:
            start = node_start[node]
            for k in range(node_count[node]):
                tri = tri_order[start + k]
                visited += 1
                d_sq = segment_triangle_dist_sq(
                    p, q, tri_verts[tri, 0], tri_verts[tri, 1], tri_verts[tri, 2])
                if d_sq < best_sq:
                    best_sq = d_sq
                    best = np.sqrt(d_sq)
                    best_tri = tri
        else:
            right = node_right[node]
            dl = segment_aabb_dist_sq(p, q, node_lo[left], node_hi[left])
            dr = segment_aabb_dist_sq(p, q, node_lo[right], node_hi[right])
            if dl <= dr:
                # push farther child first so the nearer pops first
                stack[sp] = right
                sp += 1
                stack[sp] = left
                sp += 1
            else:
                stack[sp] = left
                sp += 1
                stack[sp] = right
                sp += 1
    return best, best_tri, visited


@njit(cache=True)
def bvh_point_min_dist(p, node_lo, node_hi, node_left, node_right,
                       node_start, node_count, tri_order, tri_verts, init_bound):
    best = init_bound
    best_sq = best * best
    best_tri = -1
    stack = np.empty(256, dtype=np.int64)
    sp = 0
    stack[sp] = 0
    sp += 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if point_aabb_dist_sq(p, node_lo[node], node_hi[node]) >= best_sq:
            continue
        left = node_left[node]
        if left < 0:
            start = node_start[node]
            for k in range(node_count[node]):
                tri = tri_order[start + k]
                d_sq = point_triangle_dist_sq(
                    p, tri_verts[tri, 0], tri_verts[tri, 1], tri_verts[tri, 2])
                if d_sq < best_sq:
                    best_sq = d_sq
                    best = np.sqrt(d_sq)
                    best_tri = tri
        else:
            right = node_right[node]
            dl = point_aabb_dist_sq(p, node_lo[left], node_hi[left])
            dr = point_aabb_dist_sq(p, node_lo[right], node_hi[right])
            if dl <= dr:
                stack[sp] = right
                sp += 1
                stack[sp] = left
                sp += 1
            else:
                stack[sp] = left
                sp += 1
                stack[sp] = right
                sp += 1
    return best, best_tri


@njit(cache=True)
def bvh_triangles_within(p, radius, node_lo, node_hi, node_left, node_right,
                         node_start, node_count, tri_order, tri_verts, out):
    """Collect ids of triangles within radius of point p into out.

    Returns the hit count; counts past len(out) are tallied but not stored so
    the caller can retry with a larger buffer.
    """
    r_sq = radius * radius
    n_hit = 0
    stack = np.empty(256, dtype=np.int64)
    sp = 0
    stack[sp] = 0
    sp += 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if point_aabb_dist_sq(p, node_lo[node], node_hi[node]) > r_sq:
            continue
        left = node_left[node]
        if left < 0:
            start = node_start[node]
            for k in range(node_count[node]):
                tri = tri_order[start + k]
                d_sq = point_triangle_dist_sq(
                    p, tri_verts[tri, 0], tri_verts[tri, 1], tri_verts[tri, 2])
                if d_sq <= r_sq:
                    if n_hit < out.shape[0]:
                        out[n_hit] = tri
                    n_hit += 1
        else:
            stack[sp] = node_right[node]
            sp += 1
            stack[sp] = left
            sp += 1
    return n_hit


@njit(cache=True)
def _ray_aabb_hits(o, inv_d, lo, hi):
    tmin = -np.inf
    tmax = np.inf
    for i in range(3):
        if np.isinf(inv_d[i]):
            if o[i] < lo[i] or o[i] > hi[i]:
                return False
        else:
            ta = (lo[i] - o[i]) * inv_d[i]
            tb = (hi[i] - o[i]) * inv_d[i]
            if ta > tb:
                ta, tb = tb, ta
            if ta > tmin:
                tmin = ta
            if tb < tmax:
                tmax = tb
    return tmax >= tmin and tmax >= 0.0


@njit(cache=True)
def bvh_ray_crossings(o, direction, node_lo, node_hi, node_left, node_right,
                      node_start, node_count, tri_order, tri_verts):
    """Count ray/triangle crossings with t > 0 (for even-odd containment)."""
    inv_d = np.empty(3)
    for i in range(3):
        inv_d[i] = 1.0 / direction[i] if direction[i] != 0.0 else np.inf
    crossings = 0
    stack = np.empty(256, dtype=np.int64)
    sp = 0
    stack[sp] = 0
    sp += 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if not _ray_aabb_hits(o, inv_d, node_lo[node], node_hi[node]):
            continue
        left = node_left[node]
        if left < 0:
            start = node_start[node]
            for k in range(node_count[node]):
                tri = tri_order[start + k]
                a = tri_verts[tri, 0]
                b = tri_verts[tri, 1]
                c = tri_verts[tri, 2]
                e1 = b - a
                e2 = c - a
                h = np.cross(direction, e2)
                det = e1 @ h
                if -1e-12 < det < 1e-12:
                    continue
                inv = 1.0 / det
                s = o - a
                u = (s @ h) * inv
                if u < 0.0 or u > 1.0:
                    continue
                qv = np.cross(s, e1)
                v = (direction @ qv) * inv
                if v < 0.0 or u + v > 1.0:
                    continue
                t = (e2 @ qv) * inv
                if t > 1e-9:
                    crossings += 1
        else:
            stack[sp] = node_right[node]
            sp += 1
            stack[sp] = left
            sp += 1
    return crossings
