"""Distance kernels, BVH queries, blockers, and OBJ I/O."""

import numpy as np
import pytest
from hypothesis import given, assume, settings, strategies as st
from scipy.optimize import minimize

import gravkit as gk
from gravkit import geometry
from gravkit._kernels import (
    point_triangle_dist_sq,
    segment_aabb_dist_sq,
    segment_box_min_sdf,
    segment_segment_dist_sq,
    segment_triangle_dist_sq,
)
from gravkit.meshgen import box_mesh, plane_mesh, sphere_mesh

RNG = np.random.default_rng(20260822)

coord = st.floats(-100.0, 100.0)
point3 = st.tuples(coord, coord, coord).map(np.array)


def qp_segment_triangle_distance(p, q, a, b, c):
    """Convex-QP reference for segment/triangle distance (SLSQP, multistart)."""
    d, e1, e2 = q - p, b - a, c - a

    def objective(x):
        t, u, v = x
        diff = (p + t * d) - (a + u * e1 + v * e2)
        return float(diff @ diff)

    def project(x):
        # SLSQP tolerates tiny constraint violations; evaluate at a strictly
        # feasible point so the oracle upper-bounds the true distance.
        t = min(max(x[0], 0.0), 1.0)
        u, v = max(x[1], 0.0), max(x[2], 0.0)
        s = u + v
        if s > 1.0:
            u, v = u / s, v / s
        return [t, u, v]

    cons = [{"type": "ineq", "fun": lambda x: 1.0 - x[1] - x[2]}]
    bounds = [(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)]
    best = np.inf
    for start in ([0.5, 0.3, 0.3], [0.0, 0.0, 0.0], [1.0, 1.0, 0.0],
                  [0.5, 0.0, 1.0]):
        res = minimize(objective, start, method="SLSQP", bounds=bounds,
                       constraints=cons, options={"ftol": 1e-12, "maxiter": 200})
        best = min(best, objective(project(res.x)))
    return np.sqrt(best)


@settings(max_examples=40, deadline=None)
@given(point3, point3, point3, point3, point3)
def test_segment_triangle_distance_matches_qp(p, q, a, b, c):
    area2 = np.linalg.norm(np.cross(b - a, c - a))
    assume(area2 > 1e-3)
    got = np.sqrt(segment_triangle_dist_sq(p, q, a, b, c))
    want = qp_segment_triangle_distance(p, q, a, b, c)
    assert got == pytest.approx(want, abs=1e-5)


@settings(max_examples=40, deadline=None)
@given(point3, point3, point3)
def test_point_triangle_distance_matches_qp(p, a, b):
    c = np.array([0.0, 0.0, 0.0])
    assume(np.linalg.norm(np.cross(b - a, c - a)) > 1e-3)
    got = np.sqrt(point_triangle_dist_sq(p, a, b, c))
    want = qp_segment_triangle_distance(p, p, a, b, c)
    assert got == pytest.approx(want, abs=1e-5)


@settings(max_examples=40, deadline=None)
@given(point3, point3, point3, point3)
def test_segment_segment_symmetry(p, q, r, s):
    d1 = segment_segment_dist_sq(p, q, r, s)
    d2 = segment_segment_dist_sq(r, s, p, q)
    assert d1 == pytest.approx(d2, rel=1e-12, abs=1e-12)


def test_segment_segment_known_cases():
    z = np.zeros(3)
    # Parallel unit-offset segments.
    d = segment_segment_dist_sq(z, np.array([10.0, 0, 0]),
                                np.array([0.0, 1, 0]), np.array([10.0, 1, 0]))
    assert d == pytest.approx(1.0, abs=1e-12)
    # Crossing at right angles, 2 apart.
    d = segment_segment_dist_sq(np.array([-5.0, 0, 0]), np.array([5.0, 0, 0]),
                                np.array([0.0, -5, 2]), np.array([0.0, 5, 2]))
    assert d == pytest.approx(4.0, abs=1e-12)
    # Collinear, disjoint by 3.
    d = segment_segment_dist_sq(z, np.array([1.0, 0, 0]),
                                np.array([4.0, 0, 0]), np.array([9.0, 0, 0]))
    assert d == pytest.approx(9.0, abs=1e-12)


def test_segment_aabb_distance_matches_bounded_qp():
    lo = np.array([-3.0, -2.0, -1.0])
    hi = np.array([4.0, 1.0, 5.0])
    for _ in range(60):
        p = RNG.uniform(-15, 15, 3)
        q = RNG.uniform(-15, 15, 3)
        d = q - p

        def objective(x):
            diff = p + x[0] * d - x[1:]
            return float(diff @ diff)

        bounds = [(0.0, 1.0)] + [(lo[i], hi[i]) for i in range(3)]
        best = np.inf
        for t0 in (0.0, 0.5, 1.0):
            res = minimize(objective, [t0, *np.clip(p + t0 * d, lo, hi)],
                           method="L-BFGS-B", bounds=bounds)
            best = min(best, objective(res.x))
        got = segment_aabb_dist_sq(p, q, lo, hi)
        assert got == pytest.approx(best, abs=1e-8)


def test_segment_box_sdf_interior_cases():
    lo = np.array([-10.0, -20.0, -30.0])
    hi = np.array([10.0, 20.0, 30.0])
    # Segment pinned at the center: depth is the smallest half-extent.
    z = np.zeros(3)
    assert segment_box_min_sdf(z, z, lo, hi) == pytest.approx(-10.0, abs=1e-12)
    # Segment along +X through the center exits the slab: min SDF still at
    # the deepest interior point.
    d = segment_box_min_sdf(np.array([-40.0, 0, 0]), np.array([40.0, 0, 0]),
                            lo, hi)
    assert d == pytest.approx(-10.0, abs=1e-12)
    # Fully outside: SDF equals the Euclidean distance.
    a = np.array([15.0, 0.0, 0.0])
    b = np.array([25.0, 5.0, 0.0])
    want = np.sqrt(segment_aabb_dist_sq(a, b, lo, hi))
    assert segment_box_min_sdf(a, b, lo, hi) == pytest.approx(want, abs=1e-12)


def test_segment_box_sdf_against_dense_sampling():
    lo = np.array([-5.0, -8.0, -11.0])
    hi = np.array([7.0, 3.0, 2.0])

    def point_sdf(x):
        d = np.maximum(lo - x, x - hi)
        if np.all(d <= 0):
            return float(np.max(d))
        return float(np.linalg.norm(np.maximum(d, 0.0)))

    for _ in range(25):
        a = RNG.uniform(-20, 20, 3)
        b = RNG.uniform(-20, 20, 3)
        ts = np.linspace(0.0, 1.0, 4001)
        sampled = min(point_sdf(a + t * (b - a)) for t in ts)
        got = segment_box_min_sdf(a, b, lo, hi)
        assert got <= sampled + 1e-9
        assert got == pytest.approx(sampled, abs=2e-2)


def random_mesh(n_tris, spread=50.0, rng=RNG):
    centers = rng.uniform(-spread, spread, (n_tris, 3))
    verts = centers[:, None, :] + rng.uniform(-8, 8, (n_tris, 3, 3))
    vertices = verts.reshape(-1, 3)
    triangles = np.arange(3 * n_tris).reshape(-1, 3)
    return gk.TriangleMesh(vertices, triangles)


class TestBvh:
    def test_matches_brute_force(self):
        mesh = random_mesh(200)
        bvh = geometry.build_bvh(mesh)
        tris = mesh.triangle_vertices()
        for _ in range(1000):
            a = RNG.uniform(-70, 70, 3)
            b = a + RNG.uniform(-30, 30, 3)
            brute = min(
                np.sqrt(segment_triangle_dist_sq(a, b, t[0], t[1], t[2]))
                for t in tris)
            got, tri, _ = geometry.segment_mesh_distance(a, b, bvh)
            assert got == pytest.approx(brute, abs=1e-6)
            assert 0 <= tri < 200

    def test_bound_prunes_but_stays_exact_below(self):
        mesh = random_mesh(200)
        bvh = geometry.build_bvh(mesh)
        for _ in range(200):
            a = RNG.uniform(-70, 70, 3)
            b = a + RNG.uniform(-30, 30, 3)
            exact, _, full_visits = geometry.segment_mesh_distance(a, b, bvh)
            bound = 12.0
            capped, tri, capped_visits = geometry.segment_mesh_distance(
                a, b, bvh, bound=bound)
            assert capped_visits <= full_visits
            if exact < bound:
                assert capped == pytest.approx(exact, abs=1e-9)
            else:
                assert capped == bound and tri == -1

    def test_point_query_matches_degenerate_segment(self):
        mesh = random_mesh(80)
        bvh = geometry.build_bvh(mesh)
        for _ in range(200):
            p = RNG.uniform(-70, 70, 3)
            dp, _ = geometry.point_mesh_distance(p, bvh)
            ds, _, _ = geometry.segment_mesh_distance(p, p, bvh)
            assert dp == pytest.approx(ds, abs=1e-9)

    def test_triangles_within(self):
        mesh = random_mesh(120)
        bvh = geometry.build_bvh(mesh)
        tris = mesh.triangle_vertices()
        for _ in range(50):
            p = RNG.uniform(-60, 60, 3)
            r = RNG.uniform(1.0, 25.0)
            want = [i for i, t in enumerate(tris)
                    if point_triangle_dist_sq(p, t[0], t[1], t[2]) <= r * r]
            got = geometry.triangles_within(p, r, bvh)
            assert got.tolist() == want

    def test_single_triangle_mesh(self):
        mesh = gk.TriangleMesh(
            np.array([[0.0, 0, 0], [10.0, 0, 0], [0.0, 10, 0]]),
            np.array([[0, 1, 2]]))
        bvh = geometry.build_bvh(mesh)
        d, tri = geometry.point_mesh_distance(np.array([2.0, 2.0, 7.0]), bvh)
        assert d == pytest.approx(7.0, abs=1e-12)
        assert tri == 0


class TestCapsulePenetration:
    def setup_method(self):
        self.plane = plane_mesh(0.0, (-100, 100), (-100, 100))
        self.bvh = geometry.build_bvh(self.plane)

    def test_clearance_is_zero(self):
        cap = gk.Capsule([0.0, 6.0, 0.0], [10.0, 6.0, 0.0], 5.0)
        assert geometry.capsule_mesh_penetration(cap, self.bvh) == 0.0

    def test_overlap_depth(self):
        cap = gk.Capsule([0.0, 3.0, 0.0], [10.0, 3.0, 0.0], 5.0)
        depth = geometry.capsule_mesh_penetration(cap, self.bvh)
        assert depth == pytest.approx(2.0, abs=1e-9)

    def test_centerline_touching_surface(self):
        cap = gk.Capsule([0.0, 0.0, 0.0], [10.0, 0.0, 0.0], 5.0)
        depth = geometry.capsule_mesh_penetration(cap, self.bvh)
        assert depth == pytest.approx(5.0, abs=1e-9)

    def test_capsule_capsule(self):
        z = np.zeros(3)
        x10 = np.array([10.0, 0, 0])
        off = np.array([0.0, 3.0, 0.0])
        depth = geometry.capsule_capsule_penetration(
            gk.Capsule(z, x10, 2.0), gk.Capsule(off, x10 + off, 2.0))
        assert depth == pytest.approx(1.0, abs=1e-12)
        far = np.array([0.0, 50.0, 0.0])
        assert geometry.capsule_capsule_penetration(
            gk.Capsule(z, x10, 2.0), gk.Capsule(far, x10 + far, 2.0)) == 0.0


@settings(max_examples=30, deadline=None)
@given(point3, point3, st.floats(0.5, 8.0), point3)
def test_capsule_mesh_translation_invariance(a, b, r, shift):
    mesh = box_mesh([-10.0, -10, -10], [10.0, 10, 10])
    moved = gk.TriangleMesh(mesh.vertices + shift, mesh.triangles)
    d0 = geometry.capsule_mesh_penetration(gk.Capsule(a, b, r),
                                           geometry.build_bvh(mesh))
    d1 = geometry.capsule_mesh_penetration(gk.Capsule(a + shift, b + shift, r),
                                           geometry.build_bvh(moved))
    assert d0 == pytest.approx(d1, abs=1e-9)


class TestBlockers:
    def test_point_in_box_strict(self):
        blk = gk.Blocker(gk.Box([0.0, 0, 0], [10.0, 10, 10]), gk.BLOCK_MOTION)
        assert geometry.point_in_blocker(np.array([5.0, 5, 5]), blk)
        assert not geometry.point_in_blocker(np.array([0.0, 5, 5]), blk)
        assert not geometry.point_in_blocker(np.array([-1.0, 5, 5]), blk)

    def test_point_in_sphere(self):
        blk = gk.Blocker(gk.Sphere([0.0, 0, 0], 5.0), gk.EXCLUDE_POINTS)
        assert geometry.point_in_blocker(np.array([0.0, 0, 4.99]), blk)
        assert not geometry.point_in_blocker(np.array([0.0, 0, 5.0]), blk)

    def test_point_in_mesh_blocker(self):
        blk = gk.Blocker(sphere_mesh([0.0, 0, 0], 10.0, 16, 24),
                         gk.EXCLUDE_POINTS)
        assert geometry.point_in_blocker(np.zeros(3), blk)
        assert geometry.point_in_blocker(np.array([0.0, 0, 9.0]), blk)
        assert not geometry.point_in_blocker(np.array([0.0, 0, 30.0]), blk)

    def test_capsule_box_penetration(self):
        blk = gk.Blocker(gk.Box([0.0, 0, 0], [20.0, 20, 20]), gk.BLOCK_MOTION)
        # 1 mm of the 3 mm radius overlaps the x=0 face.
        cap = gk.Capsule([-2.0, 10.0, 10.0], [-2.0, 15.0, 10.0], 3.0)
        assert geometry.capsule_blocker_penetration(cap, blk) == pytest.approx(
            1.0, abs=1e-9)
        # Centerline inside: radius plus interior depth.
        inside = gk.Capsule([4.0, 10.0, 10.0], [4.0, 10.0, 10.0], 3.0)
        assert geometry.capsule_blocker_penetration(inside, blk) == pytest.approx(
            7.0, abs=1e-9)

    def test_capsule_sphere_penetration(self):
        blk = gk.Blocker(gk.Sphere([0.0, 0, 0], 10.0), gk.BLOCK_MOTION)
        cap = gk.Capsule([0.0, 0.0, 12.0], [0.0, 0.0, 12.0], 5.0)
        assert geometry.capsule_blocker_penetration(cap, blk) == pytest.approx(
            3.0, abs=1e-12)
        # Capsule centerline inside the sphere.
        deep = gk.Capsule([0.0, 0.0, 4.0], [0.0, 0.0, 4.0], 5.0)
        assert geometry.capsule_blocker_penetration(deep, blk) == pytest.approx(
            11.0, abs=1e-12)

    def test_capsule_mesh_blocker_uses_surface(self):
        mesh = sphere_mesh([0.0, 0, 0], 10.0, 16, 24)
        blk = gk.Blocker(mesh, gk.BLOCK_MOTION)
        center = gk.Capsule(np.zeros(3), np.zeros(3), 2.0)
        # Deep inside the closed mesh but > radius from every triangle: the
        # surface-distance semantics report no penetration.
        assert geometry.capsule_blocker_penetration(center, blk) == 0.0
        near = gk.Capsule([0.0, 0.0, 9.5], [0.0, 0.0, 9.5], 2.0)
        assert geometry.capsule_blocker_penetration(near, blk) > 0.0


class TestMeshValidation:
    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            gk.TriangleMesh(np.zeros((3, 2)), np.array([[0, 1, 2]]))
        with pytest.raises(ValueError):
            gk.TriangleMesh(np.zeros((3, 3)), np.zeros((0, 3), dtype=int))
        with pytest.raises(ValueError):
            gk.TriangleMesh(np.zeros((3, 3)), np.array([[0, 1, 3]]))

    def test_rejects_nonfinite(self):
        verts = np.array([[0.0, 0, 0], [1.0, 0, 0], [0.0, np.nan, 0]])
        with pytest.raises(gk.NonFiniteInput):
            gk.TriangleMesh(verts, np.array([[0, 1, 2]]))

    def test_transform_and_mirror(self):
        mesh = box_mesh([0.0, 0, 0], [1.0, 2, 3])
        scaled = mesh.transformed(scale=2.0)
        assert scaled.vertices.max(axis=0) == pytest.approx([2, 4, 6])
        mirrored = mesh.mirrored_x()
        assert mirrored.vertices[:, 0].min() == pytest.approx(-1.0)
        assert mirrored.vertices[:, 1:] == pytest.approx(mesh.vertices[:, 1:])


class TestObjIo:
    def test_round_trip(self, tmp_path):
        mesh = sphere_mesh([1.0, 2, 3], 7.0, 6, 8)
        path = tmp_path / "ball.obj"
        geometry.save_obj(mesh, path)
        back = geometry.load_obj(path)
        assert np.allclose(back.vertices, mesh.vertices, atol=1e-5)
        assert np.array_equal(back.triangles, mesh.triangles)

    def test_quad_fan_and_negative_indices(self, tmp_path):
        path = tmp_path / "quad.obj"
        path.write_text("# quad\n"
                        "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
                        "f 1 2 3 4\n"
                        "f -4 -3 -2\n")
        mesh = geometry.load_obj(path)
        assert mesh.triangles.tolist() == [[0, 1, 2], [0, 2, 3], [0, 1, 2]]

    def test_face_tokens_with_slashes(self, tmp_path):
        path = tmp_path / "slash.obj"
        path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1 2/2 3/3\n")
        mesh = geometry.load_obj(path)
        assert mesh.triangles.tolist() == [[0, 1, 2]]

    def test_errors_carry_line_numbers(self, tmp_path):
        path = tmp_path / "bad.obj"
        path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n")
        with pytest.raises(gk.ParseError, match="line 4"):
            geometry.load_obj(path)
        path2 = tmp_path / "empty.obj"
        path2.write_text("v 0 0 0\n")
        with pytest.raises(gk.ParseError):
            geometry.load_obj(path2)
