"""Hand construction, joint frames, forward kinematics, mirroring."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial.transform import Rotation

import gravkit as gk
from gravkit import hand as hm
from gravkit._kernels import chain_fk

from conftest import template_hand

RNG = np.random.default_rng(7)

MIRROR = np.diag([-1.0, 1.0, 1.0])


def default_hand(**kw):
    return template_hand(gk.default_rom(), **kw)


def reference_fk(rest, x_axes, y_axes, angles_x, angles_y):
    """Independent FK: affine rotations about the REST pivots and axes,
    composed proximal-outermost (equivalent to carrying frames along, but a
    different computation)."""

    def affine(axis, angle, pivot):
        m = np.eye(4)
        r = Rotation.from_rotvec(axis * angle).as_matrix()
        m[:3, :3] = r
        m[:3, 3] = pivot - r @ pivot
        return m

    out = [rest[0].copy()]
    M = np.eye(4)
    for k in range(x_axes.shape[0]):
        step = affine(y_axes[k], angles_y[k], rest[k]) @ affine(
            x_axes[k], angles_x[k], rest[k])
        M = M @ step
        out.append(M[:3, :3] @ rest[k + 1] + M[:3, 3])
    return np.array(out)


class TestTemplateLayout:
    def setup_method(self):
        self.hand = default_hand()

    def test_finger_bases_span_breadth(self):
        p = self.hand.positions
        assert p[gk.JointId.INDEX_MCP] == pytest.approx([33.75, 0.0, 95.0])
        assert p[gk.JointId.MIDDLE_MCP] == pytest.approx([11.25, 0.0, 95.0])
        assert p[gk.JointId.RING_MCP] == pytest.approx([-11.25, 0.0, 95.0])
        assert p[gk.JointId.LITTLE_MCP] == pytest.approx([-33.75, 0.0, 95.0])

    def test_finger_chains_run_along_z(self):
        p = self.hand.positions
        assert p[gk.JointId.INDEX_PIP] == pytest.approx([33.75, 0.0, 140.0])
        assert p[gk.JointId.INDEX_DIP] == pytest.approx([33.75, 0.0, 170.0])
        assert p[gk.JointId.INDEX_TIP] == pytest.approx([33.75, 0.0, 195.0])
        assert p[gk.JointId.LITTLE_TIP] == pytest.approx([-33.75, 0.0, 177.0])

    def test_thumb_column(self):
        p = self.hand.positions
        a1, a2 = math.radians(50.0), math.radians(35.0)
        d1 = np.array([math.sin(a1), 0.0, math.cos(a1)])
        d2 = np.array([math.sin(a2), 0.0, math.cos(a2)])
        cmc = np.array([45.0, 0.0, 23.75])
        assert p[gk.JointId.THUMB_CMC] == pytest.approx(cmc)
        assert p[gk.JointId.THUMB_MCP] == pytest.approx(cmc + 45.0 * d1)
        assert p[gk.JointId.THUMB_IP] == pytest.approx(cmc + 45.0 * d1 + 35.0 * d2)
        assert p[gk.JointId.THUMB_TIP] == pytest.approx(
            cmc + 45.0 * d1 + 65.0 * d2)

    def test_finger_frames_are_axis_aligned(self):
        for joint in (gk.JointId.INDEX_MCP, gk.JointId.MIDDLE_PIP,
                      gk.JointId.LITTLE_DIP):
            f = self.hand.frames[joint]
            assert f.x == pytest.approx([1.0, 0.0, 0.0], abs=1e-12)
            assert f.y == pytest.approx([0.0, 1.0, 0.0], abs=1e-12)
            assert f.z == pytest.approx([0.0, 0.0, 1.0], abs=1e-12)

    def test_thumb_right_axis_points_minus_y(self):
        # cross(CMC->MCP, MCP->IP) lies along -Y for the flat template, and
        # re-orthogonalization leaves it untouched.
        for joint in hm.THUMB_JOINTS:
            assert self.hand.frames[joint].x == pytest.approx(
                [0.0, -1.0, 0.0], abs=1e-12)

    def test_frames_orthonormal_under_jitter(self):
        base = default_hand()
        for _ in range(25):
            positions = {j: p + RNG.uniform(-3, 3, 3)
                         for j, p in base.positions.items()}
            try:
                h = gk.build_from_joint_positions(positions, 20.0, gk.default_rom())
            except gk.DegenerateSegment:
                continue
            for frame in h.frames.values():
                r = frame.rotation
                assert r @ r.T == pytest.approx(np.eye(3), abs=1e-9)
                assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-9)


class TestRomSpec:
    def test_axes_order_is_chain_position_then_x_before_y(self):
        rom = gk.default_rom()
        axes = [(e.joint, e.axis) for e in rom.axes_for_finger(gk.FingerId.INDEX)]
        assert axes == [(gk.JointId.INDEX_MCP, "x"), (gk.JointId.INDEX_MCP, "y"),
                        (gk.JointId.INDEX_PIP, "x"), (gk.JointId.INDEX_DIP, "x")]

    def test_grid_bounds_default_rom(self):
        rom = gk.default_rom()
        assert rom.grid_bounds(gk.FingerId.INDEX, 5.0) == (
            (-4, 18), (-3, 3), (-1, 20), (-1, 16))
        assert rom.grid_bounds(gk.FingerId.THUMB, 5.0) == (
            (-3, 10), (-4, 8), (-2, 11), (-3, 16))

    def test_grid_bounds_float_slack(self):
        rom = gk.RomSpec((gk.RomEntry(gk.JointId.INDEX_MCP, "x", -0.0, 90.0),))
        assert rom.grid_bounds(gk.FingerId.INDEX, 5.0) == ((0, 18),)
        # limits that don't land on the grid truncate inward
        rom2 = gk.RomSpec((gk.RomEntry(gk.JointId.INDEX_MCP, "x", -7.0, 88.0),))
        assert rom2.grid_bounds(gk.FingerId.INDEX, 5.0) == ((-1, 17),)

    def test_rejects_bad_entries(self):
        E = gk.RomEntry
        with pytest.raises(gk.InvalidRom):
            gk.RomSpec((E(gk.JointId.WRIST, "x", -10.0, 10.0),))
        with pytest.raises(gk.InvalidRom):
            gk.RomSpec((E(gk.JointId.INDEX_TIP, "x", -10.0, 10.0),))
        with pytest.raises(gk.InvalidRom):
            gk.RomSpec((E(gk.JointId.INDEX_MCP, "z", -10.0, 10.0),))
        with pytest.raises(gk.InvalidRom):
            gk.RomSpec((E(gk.JointId.INDEX_MCP, "x", 5.0, 10.0),))
        with pytest.raises(gk.InvalidRom):
            gk.RomSpec((E(gk.JointId.INDEX_MCP, "x", -10.0, -5.0),))
        with pytest.raises(gk.InvalidRom):
            gk.RomSpec((E(gk.JointId.INDEX_MCP, "x", -10.0, np.nan),))
        with pytest.raises(gk.InvalidRom):
            gk.RomSpec((E(gk.JointId.INDEX_MCP, "x", -10.0, 10.0),
                        E(gk.JointId.INDEX_MCP, "x", -5.0, 5.0),))

    def test_mirrored_negates_finger_x_and_thumb_y(self):
        rom = gk.default_rom()
        m = {(e.joint, e.axis): e for e in rom.mirrored().entries}
        e = m[(gk.JointId.INDEX_MCP, "x")]
        assert (e.min_deg, e.max_deg) == (-90.0, 20.0)
        e = m[(gk.JointId.INDEX_MCP, "y")]
        assert (e.min_deg, e.max_deg) == (-15.0, 15.0)
        e = m[(gk.JointId.THUMB_CMC, "x")]
        assert (e.min_deg, e.max_deg) == (-15.0, 50.0)
        e = m[(gk.JointId.THUMB_CMC, "y")]
        assert (e.min_deg, e.max_deg) == (-40.0, 20.0)

    def test_mirrored_is_involutive(self):
        rom = gk.default_rom()
        assert rom.mirrored().mirrored() == rom


class TestConstructionErrors:
    def test_missing_joint(self):
        positions = dict(default_hand().positions)
        del positions[gk.JointId.RING_PIP]
        with pytest.raises(gk.MissingJoint, match="ring_pip"):
            gk.build_from_joint_positions(positions, 20.0, gk.default_rom())

    def test_non_finite_position(self):
        positions = dict(default_hand().positions)
        positions[gk.JointId.INDEX_TIP] = np.array([np.inf, 0.0, 0.0])
        with pytest.raises(gk.NonFiniteInput):
            gk.build_from_joint_positions(positions, 20.0, gk.default_rom())

    def test_coincident_joints(self):
        positions = dict(default_hand().positions)
        positions[gk.JointId.MIDDLE_DIP] = positions[gk.JointId.MIDDLE_PIP].copy()
        with pytest.raises(gk.DegenerateSegment):
            gk.build_from_joint_positions(positions, 20.0, gk.default_rom())

    def test_collinear_thumb(self):
        positions = dict(default_hand().positions)
        cmc = positions[gk.JointId.THUMB_CMC]
        d = positions[gk.JointId.THUMB_MCP] - cmc
        positions[gk.JointId.THUMB_IP] = cmc + 2.0 * d
        positions[gk.JointId.THUMB_TIP] = cmc + 3.0 * d
        with pytest.raises(gk.DegenerateSegment, match="thumb"):
            gk.build_from_joint_positions(positions, 20.0, gk.default_rom())

    def test_chain_parallel_to_right_reference(self):
        positions = dict(default_hand().positions)
        mcp = positions[gk.JointId.INDEX_MCP]
        # run the index chain along +X = the little->index MCP direction
        positions[gk.JointId.INDEX_PIP] = mcp + [45.0, 0, 0]
        positions[gk.JointId.INDEX_DIP] = mcp + [75.0, 0, 0]
        positions[gk.JointId.INDEX_TIP] = mcp + [100.0, 0, 0]
        with pytest.raises(gk.DegenerateSegment):
            gk.build_from_joint_positions(positions, 20.0, gk.default_rom())

    def test_measurement_validation(self):
        rom = gk.default_rom()
        lengths = dict(gk.DEFAULT_SEGMENT_LENGTHS_MM)
        with pytest.raises(gk.NonPositiveLength):
            gk.build_from_measurements(lengths, -1.0, 20.0, rom)
        with pytest.raises(gk.NonPositiveLength):
            gk.build_from_measurements(lengths, 90.0, 0.0, rom)
        bad = dict(lengths)
        bad["ring"] = (46.0, 0.0, 25.0)
        with pytest.raises(gk.NonPositiveLength):
            gk.build_from_measurements(bad, 90.0, 20.0, rom)
        short = dict(lengths)
        del short["little"]
        with pytest.raises(gk.NonPositiveLength):
            gk.build_from_measurements(short, 90.0, 20.0, rom)
        wrong = dict(lengths)
        wrong["index"] = (45.0, 30.0)
        with pytest.raises(gk.NonPositiveLength):
            gk.build_from_measurements(wrong, 90.0, 20.0, rom)


class TestForwardKinematics:
    def setup_method(self):
        self.hand = default_hand()

    def test_zero_config_is_rest_pose_bitwise(self):
        for finger in gk.FINGER_ORDER:
            n = len(self.hand.rom.axes_for_finger(finger))
            posed = hm.fk_points(self.hand, finger, (0,) * n, 5.0)
            rest, _, _ = self.hand.chain_arrays(finger)
            assert np.array_equal(posed, rest)

    def test_flexion_curls_toward_minus_y(self):
        posed = hm.fk_points(self.hand, gk.FingerId.INDEX, (18, 0, 0, 0), 5.0)
        assert posed[1] == pytest.approx([33.75, -45.0, 95.0], abs=1e-9)

    def test_two_stacked_hinges_closed_form(self):
        rom = gk.RomSpec((gk.RomEntry(gk.JointId.INDEX_PIP, "x", 0.0, 30.0),
                          gk.RomEntry(gk.JointId.INDEX_DIP, "x", 0.0, 30.0)))
        h = template_hand(rom)
        posed = hm.fk_points(h, gk.FingerId.INDEX, (6, 6), 5.0)
        t30, t60 = math.radians(30.0), math.radians(60.0)
        want = (np.array([33.75, 0.0, 140.0])
                + 30.0 * np.array([0.0, -math.sin(t30), math.cos(t30)])
                + 25.0 * np.array([0.0, -math.sin(t60), math.cos(t60)]))
        assert posed[3] == pytest.approx(want, abs=1e-9)

    def test_chain_fk_matches_affine_reference(self):
        for finger in gk.FINGER_ORDER:
            rest, x_axes, y_axes = self.hand.chain_arrays(finger)
            for _ in range(40):
                ax = RNG.uniform(-1.2, 1.2, 3)
                ay = RNG.uniform(-0.6, 0.6, 3)
                got = chain_fk(rest, x_axes, y_axes, ax, ay)
                want = reference_fk(rest, x_axes, y_axes, ax, ay)
                assert got == pytest.approx(want, abs=1e-9)

    def test_distal_joints_do_not_move_proximal_sites(self):
        a = hm.fk_points(self.hand, gk.FingerId.INDEX, (3, -1, 2, 0), 5.0)
        b = hm.fk_points(self.hand, gk.FingerId.INDEX, (3, -1, 2, 9), 5.0)
        assert np.array_equal(a[:3], b[:3])
        assert not np.array_equal(a[3], b[3])

    def test_capsule_radius_is_half_thickness(self):
        capsules, tip = gk.forward_kinematics(self.hand, gk.FingerId.MIDDLE,
                                              (0, 0, 0, 0), 5.0)
        assert len(capsules) == 3
        assert all(c.radius == 10.0 for c in capsules)
        assert tip == pytest.approx([11.25, 0.0, 203.0])

    def test_out_of_rom(self):
        with pytest.raises(gk.OutOfRom):
            hm.fk_points(self.hand, gk.FingerId.INDEX, (0, 0, 0), 5.0)
        with pytest.raises(gk.OutOfRom):
            hm.fk_points(self.hand, gk.FingerId.INDEX, (19, 0, 0, 0), 5.0)
        with pytest.raises(gk.OutOfRom):
            hm.fk_points(self.hand, gk.FingerId.INDEX, (0, 0, 0, -2), 5.0)

    def test_rigid_motion_equivariance(self):
        rot = Rotation.from_rotvec([0.3, -1.1, 0.7]).as_matrix()
        t = np.array([12.0, -40.0, 5.0])
        moved = gk.build_from_joint_positions(
            {j: rot @ p + t for j, p in self.hand.positions.items()},
            self.hand.thickness_mm, self.hand.rom)
        for finger in gk.FINGER_ORDER:
            bounds = self.hand.rom.grid_bounds(finger, 5.0)
            for _ in range(10):
                cfg = tuple(int(RNG.integers(lo, hi + 1)) for lo, hi in bounds)
                base = hm.fk_points(self.hand, finger, cfg, 5.0)
                posed = hm.fk_points(moved, finger, cfg, 5.0)
                assert posed == pytest.approx(base @ rot.T + t, abs=1e-6)

    def test_uniform_scale_equivariance(self):
        big = self.hand.scaled(2.0)
        assert big.thickness_mm == 40.0
        for finger in (gk.FingerId.INDEX, gk.FingerId.THUMB):
            bounds = self.hand.rom.grid_bounds(finger, 5.0)
            cfg = tuple(int(RNG.integers(lo, hi + 1)) for lo, hi in bounds)
            assert hm.fk_points(big, finger, cfg, 5.0) == pytest.approx(
                2.0 * hm.fk_points(self.hand, finger, cfg, 5.0), abs=1e-9)


class TestMirror:
    def test_involution_is_bit_exact(self):
        h = default_hand()
        back = gk.mirror(gk.mirror(h))
        for j in gk.JointId:
            assert np.array_equal(back.positions[j], h.positions[j])
        assert back.rom == h.rom
        assert back.handedness == h.handedness

    def test_handedness_flips_and_geometry_reflects(self):
        h = default_hand()
        m = gk.mirror(h)
        assert h.handedness == "right" and m.handedness == "left"
        for j in gk.JointId:
            assert np.array_equal(m.positions[j], MIRROR @ h.positions[j])

    def test_left_build_equals_mirrored_right(self):
        right = default_hand()
        left = default_hand(handedness="left")
        mirrored = gk.mirror(right)
        for j in gk.JointId:
            assert np.array_equal(left.positions[j], mirrored.positions[j])

    def test_mirror_configuration_negates_finger_x_and_thumb_y(self):
        h = default_hand()
        assert gk.mirror_configuration(h, gk.FingerId.INDEX, (3, 2, -1, 4)) == \
            (-3, 2, 1, -4)
        # thumb axes: cmc.x, cmc.y, mcp.x, ip.x -> y negated, x kept
        assert gk.mirror_configuration(h, gk.FingerId.THUMB, (3, 2, -1, 4)) == \
            (3, -2, -1, 4)

    def test_fk_commutes_with_mirroring(self):
        h = default_hand()
        m = gk.mirror(h)
        for finger in gk.FINGER_ORDER:
            bounds = h.rom.grid_bounds(finger, 5.0)
            for _ in range(25):
                cfg = tuple(int(RNG.integers(lo, hi + 1)) for lo, hi in bounds)
                mcfg = gk.mirror_configuration(h, finger, cfg)
                base = hm.fk_points(h, finger, cfg, 5.0)
                posed = hm.fk_points(m, finger, mcfg, 5.0)
                assert posed == pytest.approx(base @ MIRROR, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.floats(40.0, 140.0), st.floats(8.0, 35.0),
       st.integers(0, 10 ** 9))
def test_fk_is_deterministic_across_rebuilds(breadth, thickness, salt):
    h1 = default_hand(breadth=breadth, thickness=thickness)
    h2 = default_hand(breadth=breadth, thickness=thickness)
    rng = np.random.default_rng(salt)
    for finger in (gk.FingerId.RING, gk.FingerId.THUMB):
        bounds = h1.rom.grid_bounds(finger, 5.0)
        cfg = tuple(int(rng.integers(lo, hi + 1)) for lo, hi in bounds)
        assert np.array_equal(hm.fk_points(h1, finger, cfg, 5.0),
                              hm.fk_points(h2, finger, cfg, 5.0))
