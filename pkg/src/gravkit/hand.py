"""Parameterized hand skeleton: joint hierarchy, frames, RoM, forward kinematics.

Coordinate conventions (hand-local, right-handed, millimeters):
  +Z forward (out of the palm toward the fingertips in the flat template),
  +X right, +Y up. Engines using a left-handed frame convert by negating X.

Joint frames follow the vector rules of the source skeleton:
  * forward (+Z) of a joint is the unit vector from the joint to its child;
    the wrist's forward points at the centroid of the five finger bases,
  * the approximate right (+X) of the wrist and every non-thumb finger joint
    is the unit vector from the little MCP to the index MCP,
  * the thumb's approximate right is cross(CMC->MCP, MCP->IP), normalized,
  * up completes the frame: y = normalize(z cross x_approx), x = y cross z.

Rotations are applied about a joint's X axis (flexion/extension) first, then
Y (abduction/adduction), proximal to distal. All angles are degrees; RoM
entries are expressed relative to the seed pose, so min <= 0 <= max always.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import _kernels as _k
from .errors import (DegenerateSegment, InvalidRom, MissingJoint, NonFiniteInput,
                     NonPositiveLength, OutOfRom)
from .geometry import Capsule


class FingerId(Enum):
    INDEX = "index"
    MIDDLE = "middle"
    RING = "ring"
    LITTLE = "little"
    THUMB = "thumb"


#: Canonical finger order used for output and iteration everywhere.
FINGER_ORDER: Tuple[FingerId, ...] = tuple(FingerId)


class JointId(Enum):
    WRIST = "wrist"
    INDEX_MCP = "index_mcp"
    INDEX_PIP = "index_pip"
    INDEX_DIP = "index_dip"
    INDEX_TIP = "index_tip"
    MIDDLE_MCP = "middle_mcp"
    MIDDLE_PIP = "middle_pip"
    MIDDLE_DIP = "middle_dip"
    MIDDLE_TIP = "middle_tip"
    RING_MCP = "ring_mcp"
    RING_PIP = "ring_pip"
    RING_DIP = "ring_dip"
    RING_TIP = "ring_tip"
    LITTLE_MCP = "little_mcp"
    LITTLE_PIP = "little_pip"
    LITTLE_DIP = "little_dip"
    LITTLE_TIP = "little_tip"
    THUMB_CMC = "thumb_cmc"
    THUMB_MCP = "thumb_mcp"
    THUMB_IP = "thumb_ip"
    THUMB_TIP = "thumb_tip"


#: Proximal-to-distal chain per finger; the last entry is the non-rotating tip site.
FINGER_CHAINS: Dict[FingerId, Tuple[JointId, ...]] = {
    FingerId.INDEX: (JointId.INDEX_MCP, JointId.INDEX_PIP, JointId.INDEX_DIP,
                     JointId.INDEX_TIP),
    FingerId.MIDDLE: (JointId.MIDDLE_MCP, JointId.MIDDLE_PIP, JointId.MIDDLE_DIP,
                      JointId.MIDDLE_TIP),
    FingerId.RING: (JointId.RING_MCP, JointId.RING_PIP, JointId.RING_DIP,
                    JointId.RING_TIP),
    FingerId.LITTLE: (JointId.LITTLE_MCP, JointId.LITTLE_PIP, JointId.LITTLE_DIP,
                      JointId.LITTLE_TIP),
    FingerId.THUMB: (JointId.THUMB_CMC, JointId.THUMB_MCP, JointId.THUMB_IP,
                     JointId.THUMB_TIP),
}

#: The five finger-base joints whose centroid defines the wrist's forward axis.
PROXIMAL_JOINTS: Tuple[JointId, ...] = tuple(FINGER_CHAINS[f][0] for f in FINGER_ORDER)

THUMB_JOINTS = frozenset({JointId.THUMB_CMC, JointId.THUMB_MCP, JointId.THUMB_IP})
TIP_JOINTS = frozenset({chain[-1] for chain in FINGER_CHAINS.values()})
ROTATING_JOINTS: Tuple[JointId, ...] = tuple(
    j for f in FINGER_ORDER for j in FINGER_CHAINS[f][:-1])

JOINT_FINGER: Dict[JointId, FingerId] = {
    j: f for f, chain in FINGER_CHAINS.items() for j in chain}

#: Fallback thickness (mm) when a scene omits it; a tool default, always overridable.
DEFAULT_THICKNESS_MM = 22.0

AXIS_X = "x"  # flexion / extension
AXIS_Y = "y"  # abduction / adduction


@dataclass(frozen=True)
class RomEntry:
    joint: JointId
    axis: str
    min_deg: float
    max_deg: float


@dataclass(frozen=True)
class RomSpec:
    """Per-axis angular limits relative to the seed pose.

    Axes absent from the list are locked. Entry order as given is irrelevant:
    per finger, the canonical axis order is chain position proximal-to-distal
    with X before Y at each joint, and that order defines the layout of
    configuration vectors.
    """

    entries: Tuple[RomEntry, ...]

    def __post_init__(self) -> None:
        seen = set()
        for e in self.entries:
            if not isinstance(e.joint, JointId):
                raise InvalidRom(f"unknown joint {e.joint!r}")
            if e.joint in TIP_JOINTS or e.joint is JointId.WRIST:
                raise InvalidRom(f"{e.joint.value} cannot rotate")
            if e.axis not in (AXIS_X, AXIS_Y):
                raise InvalidRom(f"axis must be 'x' or 'y', got {e.axis!r}")
            if not (math.isfinite(e.min_deg) and math.isfinite(e.max_deg)):
                raise InvalidRom(f"{e.joint.value}.{e.axis}: non-finite limits")
            if e.min_deg > 0.0 or e.max_deg < 0.0:
                raise InvalidRom(
                    f"{e.joint.value}.{e.axis}: limits [{e.min_deg}, {e.max_deg}] must "
                    f"bracket 0 (RoM is relative to the seed pose)")
            key = (e.joint, e.axis)
            if key in seen:
                raise InvalidRom(f"duplicate RoM entry for {e.joint.value}.{e.axis}")
            seen.add(key)

    def axes_for_finger(self, finger: FingerId) -> Tuple[RomEntry, ...]:
        """Explored axes of one finger in canonical order."""
        chain = FINGER_CHAINS[finger][:-1]
        by_key = {(e.joint, e.axis): e for e in self.entries}
        out = []
        for joint in chain:
            for axis in (AXIS_X, AXIS_Y):
                e = by_key.get((joint, axis))
                if e is not None:
                    out.append(e)
        return tuple(out)

    def grid_bounds(self, finger: FingerId, step_deg: float) -> Tuple[Tuple[int, int], ...]:
        """Integer step bounds (lo, hi) per explored axis, lo <= 0 <= hi."""
        bounds = []
        for e in self.axes_for_finger(finger):
            # the slack absorbs float noise so e.g. 90/5 lands on 18 exactly
            lo = math.ceil(e.min_deg / step_deg - 1e-9)
            hi = math.floor(e.max_deg / step_deg + 1e-9)
            bounds.append((lo, hi))
        return tuple(bounds)

    def mirrored(self) -> "RomSpec":
        """RoM of the mirrored hand.

        Mirroring maps a finger joint's X rotation (flexion) to its negation
        (the finger frames' right axes mirror as plain vectors while up flips),
        but the thumb's cross-product right axis flips instead, negating the
        thumb's Y rotations. Limits negate-and-swap accordingly.
        """
        out = []
        for e in self.entries:
            is_thumb = e.joint in THUMB_JOINTS
            negate = (e.axis == AXIS_X) != is_thumb  # finger X or thumb Y
            if negate:
                out.append(RomEntry(e.joint, e.axis, -e.max_deg, -e.min_deg))
            else:
                out.append(e)
        return RomSpec(tuple(out))


def default_rom() -> RomSpec:
    """Tool-default RoM table (degrees, relative to a neutral flat seed).

    Finger MCPs and the thumb CMC get two axes, the interphalangeal joints one
    flexion axis. The numbers are defaults of this tool, not measured values;
    scenes override them freely.
    """
    entries: List[RomEntry] = []
    for f in (FingerId.INDEX, FingerId.MIDDLE, FingerId.RING, FingerId.LITTLE):
        mcp, pip, dip, _ = FINGER_CHAINS[f]
        entries.append(RomEntry(mcp, AXIS_X, -20.0, 90.0))
        entries.append(RomEntry(mcp, AXIS_Y, -15.0, 15.0))
        entries.append(RomEntry(pip, AXIS_X, -5.0, 100.0))
        entries.append(RomEntry(dip, AXIS_X, -5.0, 80.0))
    entries.append(RomEntry(JointId.THUMB_CMC, AXIS_X, -15.0, 50.0))
    entries.append(RomEntry(JointId.THUMB_CMC, AXIS_Y, -20.0, 40.0))
    entries.append(RomEntry(JointId.THUMB_MCP, AXIS_X, -10.0, 55.0))
    entries.append(RomEntry(JointId.THUMB_IP, AXIS_X, -15.0, 80.0))
    return RomSpec(tuple(entries))


@dataclass(frozen=True)
class JointFrame:
    origin: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    @property
    def rotation(self) -> np.ndarray:
        """3x3 rotation with the frame axes as columns."""
        return np.column_stack((self.x, self.y, self.z))


@dataclass(frozen=True)
class AnthropometricProfile:
    thickness_mm: float
    handedness: str  # "left" | "right"
    segment_lengths_mm: Optional[Dict[str, Tuple[float, ...]]] = None

    def __post_init__(self) -> None:
        if not self.thickness_mm > 0.0:
            raise NonPositiveLength(f"thickness must be > 0 mm, got {self.thickness_mm}")
        if self.handedness not in ("left", "right"):
            raise ValueError(f"handedness must be 'left' or 'right', got {self.handedness!r}")


def _unit(v: np.ndarray, what: str) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n <= 1e-9:
        raise DegenerateSegment(f"{what} has (near-)zero length")
    return v / n


def _compute_frames(positions: Mapping[JointId, np.ndarray]) -> Dict[JointId, JointFrame]:
    centroid = np.mean([positions[j] for j in PROXIMAL_JOINTS], axis=0)
    little_to_index = positions[JointId.INDEX_MCP] - positions[JointId.LITTLE_MCP]
    finger_right = _unit(little_to_index, "little MCP to index MCP")

    cmc_to_mcp = positions[JointId.THUMB_MCP] - positions[JointId.THUMB_CMC]
    mcp_to_ip = positions[JointId.THUMB_IP] - positions[JointId.THUMB_MCP]
    thumb_cross = np.cross(cmc_to_mcp, mcp_to_ip)
    if np.linalg.norm(thumb_cross) <= 1e-9 * np.linalg.norm(cmc_to_mcp) * np.linalg.norm(mcp_to_ip):
        raise DegenerateSegment("thumb CMC->MCP and MCP->IP are collinear; "
                                "thumb right axis is undefined")
    thumb_right = _unit(thumb_cross, "thumb right axis")

    child_of: Dict[JointId, np.ndarray] = {JointId.WRIST: centroid}
    for chain in FINGER_CHAINS.values():
        for a, b in zip(chain[:-1], chain[1:]):
            child_of[a] = positions[b]

    frames: Dict[JointId, JointFrame] = {}
    for joint in (JointId.WRIST,) + ROTATING_JOINTS:
        origin = positions[joint]
        z = _unit(child_of[joint] - origin, f"{joint.value} forward axis")
        x_approx = thumb_right if joint in THUMB_JOINTS else finger_right
        y_raw = np.cross(z, x_approx)
        if np.linalg.norm(y_raw) <= 1e-9:
            raise DegenerateSegment(
                f"{joint.value}: forward axis parallel to the right reference; "
                f"frame is undefined")
        y = _unit(y_raw, f"{joint.value} up axis")
        x = np.cross(y, z)
        frames[joint] = JointFrame(origin=origin.copy(), x=x, y=y, z=z)
    return frames


@dataclass
class HandModel:
    """Immutable posed hand: rest positions ARE the seed pose.

    Construction happens through build_from_joint_positions or
    build_from_measurements; both validate and precompute per-finger chain
    arrays so forward kinematics is a single kernel call.
    """

    profile: AnthropometricProfile
    positions: Dict[JointId, np.ndarray]
    frames: Dict[JointId, JointFrame]
    rom: RomSpec
    _chains: Dict[FingerId, Tuple[np.ndarray, np.ndarray, np.ndarray]] = field(
        default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        for finger, chain in FINGER_CHAINS.items():
            rest = np.ascontiguousarray([self.positions[j] for j in chain])
            x_axes = np.ascontiguousarray([self.frames[j].x for j in chain[:-1]])
            y_axes = np.ascontiguousarray([self.frames[j].y for j in chain[:-1]])
            self._chains[finger] = (rest, x_axes, y_axes)

    @property
    def thickness_mm(self) -> float:
        return self.profile.thickness_mm

    @property
    def handedness(self) -> str:
        return self.profile.handedness

    def chain_arrays(self, finger: FingerId):
        """(rest_points (4,3), x_axes (3,3), y_axes (3,3)) for one finger."""
        return self._chains[finger]

    def scaled(self, s: float) -> "HandModel":
        positions = {j: p * s for j, p in self.positions.items()}
        profile = replace(self.profile, thickness_mm=self.profile.thickness_mm * s)
        hand = build_from_joint_positions(positions, profile.thickness_mm, self.rom,
                                          self.profile.handedness)
        return replace(hand, profile=profile)


def _check_positions(positions: Mapping) -> Dict[JointId, np.ndarray]:
    clean: Dict[JointId, np.ndarray] = {}
    missing = [j.value for j in JointId if j not in positions]
    if missing:
        raise MissingJoint(f"missing joints: {', '.join(missing)}")
    for j in JointId:
        p = np.asarray(positions[j], dtype=np.float64).reshape(3)
        if not np.isfinite(p).all():
            raise NonFiniteInput(f"{j.value} position is not finite")
        clean[j] = np.ascontiguousarray(p)
    for chain in FINGER_CHAINS.values():
        pairs = [(JointId.WRIST, chain[0])] + list(zip(chain[:-1], chain[1:]))
        for a, b in pairs:
            if np.linalg.norm(clean[b] - clean[a]) <= 1e-6:
                raise DegenerateSegment(f"{a.value} and {b.value} coincide")
    if np.linalg.norm(clean[JointId.INDEX_MCP] - clean[JointId.LITTLE_MCP]) <= 1e-6:
        raise DegenerateSegment("index MCP and little MCP coincide")
    return clean


def build_from_joint_positions(positions: Mapping, thickness_mm: float,
                               rom: RomSpec, handedness: str = "right") -> HandModel:
    """Build a hand from 21 posed joint positions (e.g. extracted skeleton joints)."""
    clean = _check_positions(positions)
    profile = AnthropometricProfile(thickness_mm=float(thickness_mm), handedness=handedness)
    frames = _compute_frames(clean)
    return HandModel(profile=profile, positions=clean, frames=frames, rom=rom)


# Flat-hand template constants. MCPs sit on the z = palm_length line spaced by
# breadth/4 with the index at +3b/8; the thumb base sits at (breadth/2, 0,
# palm_length/4) and the thumb column leaves it tilted forward-outward.
_TEMPLATE_X_FACTORS = {
    FingerId.INDEX: 3.0 / 8.0,
    FingerId.MIDDLE: 1.0 / 8.0,
    FingerId.RING: -1.0 / 8.0,
    FingerId.LITTLE: -3.0 / 8.0,
}
_THUMB_CMC_ANGLE_DEG = 50.0  # CMC->MCP direction, tilt from +Z toward +X
_THUMB_SEG_ANGLE_DEG = 35.0  # MCP->IP->tip direction

DEFAULT_SEGMENT_LENGTHS_MM: Dict[str, Tuple[float, ...]] = {
    "palm": (95.0,),
    "index": (45.0, 30.0, 25.0),
    "middle": (50.0, 32.0, 26.0),
    "ring": (46.0, 30.0, 25.0),
    "little": (36.0, 24.0, 22.0),
    "thumb": (45.0, 35.0, 30.0),
}


def build_from_measurements(segment_lengths_mm: Mapping[str, Sequence[float]],
                            breadth_mm: float, thickness_mm: float, rom: RomSpec,
                            handedness: str = "right") -> HandModel:
    """Lay out a flat hand from anthropometric measurements.

    segment_lengths_mm needs "palm" (wrist to MCP line, one value) and a
    3-tuple per finger name; see DEFAULT_SEGMENT_LENGTHS_MM for the expected
    shape. The resulting pose is the template itself: fingers straight along
    +Z, palm in the XZ plane, palm side facing -Y.
    """
    lengths: Dict[str, Tuple[float, ...]] = {}
    for key in DEFAULT_SEGMENT_LENGTHS_MM:
        if key not in segment_lengths_mm:
            raise NonPositiveLength(f"missing segment lengths for {key!r}")
        vals = tuple(float(v) for v in np.atleast_1d(np.asarray(segment_lengths_mm[key],
                                                                dtype=np.float64)))
        want = 1 if key == "palm" else 3
        if len(vals) != want:
            raise NonPositiveLength(f"{key!r} needs {want} length(s), got {len(vals)}")
        if any(not v > 0.0 for v in vals):
            raise NonPositiveLength(f"{key!r} lengths must all be > 0 mm: {vals}")
        lengths[key] = vals
    if not breadth_mm > 0.0:
        raise NonPositiveLength(f"breadth must be > 0 mm, got {breadth_mm}")

    palm = lengths["palm"][0]
    positions: Dict[JointId, np.ndarray] = {JointId.WRIST: np.zeros(3)}
    for finger, factor in _TEMPLATE_X_FACTORS.items():
        mcp, pip, dip, tip = FINGER_CHAINS[finger]
        l1, l2, l3 = lengths[finger.value]
        x = factor * breadth_mm
        positions[mcp] = np.array([x, 0.0, palm])
        positions[pip] = np.array([x, 0.0, palm + l1])
        positions[dip] = np.array([x, 0.0, palm + l1 + l2])
        positions[tip] = np.array([x, 0.0, palm + l1 + l2 + l3])

    t1, t2, t3 = lengths["thumb"]
    a1 = math.radians(_THUMB_CMC_ANGLE_DEG)
    a2 = math.radians(_THUMB_SEG_ANGLE_DEG)
    d1 = np.array([math.sin(a1), 0.0, math.cos(a1)])
    d2 = np.array([math.sin(a2), 0.0, math.cos(a2)])
    cmc = np.array([breadth_mm / 2.0, 0.0, palm / 4.0])
    positions[JointId.THUMB_CMC] = cmc
    positions[JointId.THUMB_MCP] = cmc + t1 * d1
    positions[JointId.THUMB_IP] = cmc + t1 * d1 + t2 * d2
    positions[JointId.THUMB_TIP] = cmc + t1 * d1 + (t2 + t3) * d2

    hand = build_from_joint_positions(positions, thickness_mm, rom, "right")
    hand = replace(hand, profile=replace(hand.profile, segment_lengths_mm=lengths))
    if handedness == "left":
        hand = mirror(hand)
    return hand


def mirror(hand: HandModel) -> HandModel:
    """Reflect a hand across the YZ plane (negate X); involutive bit-for-bit."""
    positions = {}
    for j, p in hand.positions.items():
        q = p.copy()
        q[0] = -q[0]
        positions[j] = q
    handedness = "left" if hand.handedness == "right" else "right"
    mirrored = build_from_joint_positions(positions, hand.thickness_mm,
                                          hand.rom.mirrored(), handedness)
    return replace(mirrored, profile=replace(mirrored.profile,
                                             segment_lengths_mm=hand.profile.segment_lengths_mm))


def mirror_configuration(hand_or_rom, finger: FingerId,
                         config: Sequence[int]) -> Tuple[int, ...]:
    """Map a configuration onto the mirrored hand's grid (see RomSpec.mirrored)."""
    rom = hand_or_rom.rom if isinstance(hand_or_rom, HandModel) else hand_or_rom
    out = []
    for e, step in zip(rom.axes_for_finger(finger), config):
        is_thumb = e.joint in THUMB_JOINTS
        negate = (e.axis == AXIS_X) != is_thumb
        out.append(-step if negate else step)
    return tuple(out)


def forward_kinematics(hand: HandModel, finger: FingerId, config: Sequence[int],
                       step_deg: float) -> Tuple[List[Capsule], np.ndarray]:
    """Pose one finger; returns its three segment capsules and the tip position.

    config holds integer step offsets for the finger's explored axes in
    canonical order; angle = offset * step_deg about the joint's rest-frame
    axes, X before Y, applied proximal to distal. Bit-deterministic.
    """
    points = fk_points(hand, finger, config, step_deg)
    r = hand.thickness_mm / 2.0
    capsules = [Capsule(points[i], points[i + 1], r) for i in range(points.shape[0] - 1)]
    return capsules, points[-1]


def fk_points(hand: HandModel, finger: FingerId, config: Sequence[int],
              step_deg: float) -> np.ndarray:
    """Posed chain positions (4, 3): the three rotating joints plus the tip."""
    entries = hand.rom.axes_for_finger(finger)
    bounds = hand.rom.grid_bounds(finger, step_deg)
    if len(config) != len(entries):
        raise OutOfRom(f"{finger.value}: configuration has {len(config)} offsets, "
                       f"expected {len(entries)}")
    chain = FINGER_CHAINS[finger][:-1]
    ang_x = np.zeros(len(chain))
    ang_y = np.zeros(len(chain))
    slot = {j: i for i, j in enumerate(chain)}
    for e, (lo, hi), steps in zip(entries, bounds, config):
        steps = int(steps)
        if steps < lo or steps > hi:
            raise OutOfRom(f"{finger.value} {e.joint.value}.{e.axis}: offset {steps} "
                           f"outside [{lo}, {hi}]")
        angle = math.radians(steps * step_deg)
        if e.axis == AXIS_X:
            ang_x[slot[e.joint]] = angle
        else:
            ang_y[slot[e.joint]] = angle
    rest, x_axes, y_axes = hand.chain_arrays(finger)
    return _k.chain_fk(rest, x_axes, y_axes, ang_x, ang_y)
