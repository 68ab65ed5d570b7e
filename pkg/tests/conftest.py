"""Shared builders and brute-force oracles for the test suite."""

import numpy as np

import gravkit as gk
from gravkit.simulator import validate_configuration


def template_hand(rom, breadth=90.0, thickness=20.0, handedness="right"):
    return gk.build_from_measurements(gk.DEFAULT_SEGMENT_LENGTHS_MM, breadth,
                                      thickness, rom, handedness)


def arc_scene(step_deg=5.0, mesh=None, blockers=(), max_deg=90.0, epsilon=0.5):
    """1-DoF test finger: only the index DIP flexes, RoM [0, max_deg]."""
    rom = gk.RomSpec((gk.RomEntry(gk.JointId.INDEX_DIP, "x", 0.0, max_deg),))
    hand = template_hand(rom)
    settings = gk.SimulationSettings(step_deg=step_deg, epsilon_mm=epsilon,
                                     fingers=(gk.FingerId.INDEX,))
    return gk.GraspScene(hand=hand, settings=settings, object_mesh=mesh,
                         blockers=list(blockers))


# Template geometry the arc fixtures depend on (breadth 90, default lengths):
ARC_DIP = np.array([33.75, 0.0, 170.0])  # index DIP rest position
ARC_TIP_LEN = 25.0  # distal segment length
ARC_RADIUS = 10.0  # capsule radius at thickness 20


def arc_tip_closed_form(k, step_deg=5.0):
    """Independent trig oracle for the 1-DoF arc: flexion curls toward -Y."""
    th = np.radians(k * step_deg)
    return ARC_DIP + ARC_TIP_LEN * np.array([0.0, -np.sin(th), np.cos(th)])


def brute_component(scene, finger):
    """Seed-connected component of the valid-configuration grid, computed by
    exhaustive enumeration + scipy connected-component labeling (independent
    of the flood-fill traversal)."""
    from scipy import ndimage

    bounds = scene.hand.rom.grid_bounds(finger, scene.settings.step_deg)
    assert bounds, "oracle needs at least one explored axis"
    shape = tuple(hi - lo + 1 for lo, hi in bounds)
    los = [lo for lo, _ in bounds]
    valid = np.zeros(shape, dtype=bool)
    for idx in np.ndindex(shape):
        cfg = tuple(int(i) + lo for i, lo in zip(idx, los))
        valid[idx] = validate_configuration(scene, finger, cfg).ok
    structure = ndimage.generate_binary_structure(len(shape), 1)
    labels, _ = ndimage.label(valid, structure=structure)
    seed_idx = tuple(-lo for lo in los)
    if not valid[seed_idx]:
        return set()
    component = labels == labels[seed_idx]
    return {tuple(int(i) + lo for i, lo in zip(idx, los))
            for idx in zip(*np.nonzero(component))}
