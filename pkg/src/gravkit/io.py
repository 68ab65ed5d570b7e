"""Serialization: scene JSON input and CSV/PLY/OBJ/JSON volume formats.

Every exporter is deterministic byte-for-byte for a given volume: fixed
6-decimal formatting, '.' decimal separator, LF line endings, no timestamps.
Coordinates are emitted in the internal right-handed frame (+Z forward,
+X right, +Y up); pass left_handed=True to negate X for engines with the
opposite convention.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (InvalidRom, MeshNotFound, ParseError, SchemaError)
from .geometry import (Blocker, Box, Sphere, TriangleMesh, load_obj)
from .hand import (DEFAULT_SEGMENT_LENGTHS_MM, DEFAULT_THICKNESS_MM, FingerId,
                   JointId, RomEntry, RomSpec, build_from_joint_positions,
                   build_from_measurements, default_rom)
from .scene import GraspScene, SimulationSettings
from .volume import GravPoint, GravVolume

SCENE_SCHEMA_VERSION = 1
VOLUME_FORMAT_VERSION = 1

_FINGER_BY_NAME = {f.value: f for f in FingerId}
_JOINT_BY_NAME = {j.value: j for j in JointId}

_RIGHT_HANDED_NOTE = "right-handed frame: +Z forward, +X right, +Y up, millimeters"
_LEFT_HANDED_NOTE = "left-handed frame (X negated from the right-handed source), millimeters"


# ---------------------------------------------------------------------------
# scene loading

def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise SchemaError(msg)


def _get_vec3(obj, key: str, where: str) -> np.ndarray:
    v = obj.get(key)
    _require(isinstance(v, (list, tuple)) and len(v) == 3,
             f"{where}: {key} must be a 3-element array")
    try:
        return np.array([float(c) for c in v])
    except (TypeError, ValueError):
        raise SchemaError(f"{where}: {key} must contain numbers") from None


def _load_hand(hand_obj: Dict, rom: RomSpec, where: str):
    _require(isinstance(hand_obj, dict), f"{where} must be an object")
    handedness = hand_obj.get("handedness", "right")
    _require(handedness in ("left", "right"),
             f"{where}.handedness must be 'left' or 'right'")
    thickness = float(hand_obj.get("thickness_mm", DEFAULT_THICKNESS_MM))

    has_joints = "joints" in hand_obj
    has_measurements = "measurements" in hand_obj
    _require(has_joints != has_measurements,
             f"{where} must provide exactly one of 'joints' or 'measurements'")

    if has_joints:
        joints_obj = hand_obj["joints"]
        _require(isinstance(joints_obj, dict), f"{where}.joints must be an object")
        positions = {}
        for name, coords in joints_obj.items():
            joint = _JOINT_BY_NAME.get(name)
            _require(joint is not None, f"{where}.joints: unknown joint {name!r}")
            positions[joint] = _get_vec3({"p": coords}, "p", f"{where}.joints.{name}")
        return build_from_joint_positions(positions, thickness, rom, handedness)

    meas = hand_obj["measurements"]
    _require(isinstance(meas, dict), f"{where}.measurements must be an object")
    breadth = meas.get("breadth_mm")
    _require(isinstance(breadth, (int, float)),
             f"{where}.measurements.breadth_mm is required")
    lengths: Dict[str, Sequence[float]] = dict(DEFAULT_SEGMENT_LENGTHS_MM)
    given = meas.get("segment_lengths_mm", {})
    _require(isinstance(given, dict),
             f"{where}.measurements.segment_lengths_mm must be an object")
    for key, val in given.items():
        _require(key in DEFAULT_SEGMENT_LENGTHS_MM,
                 f"{where}.measurements.segment_lengths_mm: unknown key {key!r}")
        lengths[key] = val if isinstance(val, (list, tuple)) else [val]
    return build_from_measurements(lengths, float(breadth), thickness, rom, handedness)


def _load_rom(rom_list, where: str) -> RomSpec:
    if rom_list is None:
        return default_rom()
    _require(isinstance(rom_list, list), f"{where} must be an array")
    entries: List[RomEntry] = []
    for i, item in enumerate(rom_list):
        here = f"{where}[{i}]"
        _require(isinstance(item, dict), f"{here} must be an object")
        joint = _JOINT_BY_NAME.get(item.get("joint"))
        if joint is None:
            raise InvalidRom(f"{here}: unknown joint {item.get('joint')!r}")
        axis = item.get("axis")
        for key in ("min_deg", "max_deg"):
            _require(isinstance(item.get(key), (int, float)), f"{here}: {key} is required")
        entries.append(RomEntry(joint, axis, float(item["min_deg"]), float(item["max_deg"])))
    return RomSpec(tuple(entries))


def _load_blocker(obj, where: str) -> Blocker:
    _require(isinstance(obj, dict), f"{where} must be an object")
    mode = obj.get("mode")
    _require(mode in ("block-motion", "exclude-points"),
             f"{where}.mode must be 'block-motion' or 'exclude-points'")
    shape_obj = obj.get("shape")
    _require(isinstance(shape_obj, dict), f"{where}.shape must be an object")
    kind = shape_obj.get("type")
    if kind == "box":
        lo = _get_vec3(shape_obj, "min_mm", f"{where}.shape")
        hi = _get_vec3(shape_obj, "max_mm", f"{where}.shape")
        try:
            return Blocker(Box(lo, hi), mode)
        except ValueError as exc:
            raise SchemaError(f"{where}.shape: {exc}") from None
    if kind == "sphere":
        center = _get_vec3(shape_obj, "center_mm", f"{where}.shape")
        radius = shape_obj.get("radius_mm")
        _require(isinstance(radius, (int, float)) and radius > 0,
                 f"{where}.shape.radius_mm must be a positive number")
        return Blocker(Sphere(center, float(radius)), mode)
    raise SchemaError(f"{where}.shape.type must be 'box' or 'sphere', got {kind!r}")


def _object_transform(mesh: TriangleMesh, obj: Dict, where: str) -> TriangleMesh:
    t = obj.get("transform")
    if t is None:
        return mesh
    _require(isinstance(t, dict), f"{where}.transform must be an object")
    scale = float(t.get("scale", 1.0))
    _require(scale > 0, f"{where}.transform.scale must be > 0")
    rotation = None
    if "rotate_deg" in t:
        rx, ry, rz = (float(a) for a in _get_vec3(t, "rotate_deg", f"{where}.transform"))
        cx, sx = math.cos(math.radians(rx)), math.sin(math.radians(rx))
        cy, sy = math.cos(math.radians(ry)), math.sin(math.radians(ry))
        cz, sz = math.cos(math.radians(rz)), math.sin(math.radians(rz))
        mx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
        my = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
        mz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
        rotation = mz @ my @ mx  # X, then Y, then Z
    translation = _get_vec3(t, "translate_mm", f"{where}.transform") \
        if "translate_mm" in t else None
    return mesh.transformed(scale=scale, rotation=rotation, translation=translation)


def load_scene(path) -> GraspScene:
    """Load and validate a grasp scene JSON file.

    The joint positions in the file ARE the seed pose; RoM limits are
    relative to it. Defaults: step 5 deg, epsilon 0.5 mm, all fingers
    enabled, tool-default RoM table when 'rom' is omitted.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path.name}: invalid JSON: {exc}") from None
    _require(isinstance(doc, dict), f"{path.name}: top level must be an object")
    version = doc.get("schema_version")
    _require(version == SCENE_SCHEMA_VERSION,
             f"{path.name}: schema_version must be {SCENE_SCHEMA_VERSION}, got {version!r}")

    labels = doc.get("labels", {})
    _require(isinstance(labels, dict), f"{path.name}: labels must be an object")
    object_name = labels.get("object_name", path.stem)
    _require(isinstance(object_name, str) and object_name,
             f"{path.name}: labels.object_name must be a non-empty string")
    grasp_id = labels.get("grasp_id", 0)
    _require(isinstance(grasp_id, int) and not isinstance(grasp_id, bool),
             f"{path.name}: labels.grasp_id must be an integer")
    if grasp_id and not 1 <= grasp_id <= 33:
        raise SchemaError(f"{path.name}: labels.grasp_id must be in [1, 33], got {grasp_id}")

    rom = _load_rom(doc.get("rom"), f"{path.name}: rom")
    _require("hand" in doc, f"{path.name}: 'hand' section is required")
    hand = _load_hand(doc["hand"], rom, f"{path.name}: hand")

    mesh = None
    mesh_bytes = b""
    obj_section = doc.get("object")
    if obj_section is not None:
        _require(isinstance(obj_section, dict), f"{path.name}: object must be an object")
        mesh_path_str = obj_section.get("mesh_path")
        _require(isinstance(mesh_path_str, str) and mesh_path_str,
                 f"{path.name}: object.mesh_path is required")
        mesh_path = (path.parent / mesh_path_str).resolve()
        if not mesh_path.is_file():
            raise MeshNotFound(f"{path.name}: object mesh not found: {mesh_path}")
        mesh_bytes = mesh_path.read_bytes()
        mesh = _object_transform(load_obj(mesh_path), obj_section, f"{path.name}: object")

    fingers_field = doc.get("fingers")
    if fingers_field is None:
        fingers = tuple(FingerId)
    else:
        _require(isinstance(fingers_field, list), f"{path.name}: fingers must be an array")
        fingers = []
        for name in fingers_field:
            _require(name in _FINGER_BY_NAME, f"{path.name}: unknown finger {name!r}")
            fingers.append(_FINGER_BY_NAME[name])
        fingers = tuple(fingers)

    blockers = [_load_blocker(b, f"{path.name}: blockers[{i}]")
                for i, b in enumerate(doc.get("blockers", []))]

    settings_obj = doc.get("settings", {})
    _require(isinstance(settings_obj, dict), f"{path.name}: settings must be an object")
    known = {"step_deg", "epsilon_mm", "dedupe_mm", "max_configs"}
    unknown = set(settings_obj) - known
    _require(not unknown, f"{path.name}: unknown settings: {sorted(unknown)}")
    settings = SimulationSettings(
        step_deg=float(settings_obj.get("step_deg", 5.0)),
        epsilon_mm=float(settings_obj.get("epsilon_mm", 0.5)),
        fingers=fingers,
        dedupe_mm=float(settings_obj.get("dedupe_mm", 0.0)),
        max_configs=int(settings_obj.get("max_configs", 5_000_000)))

    digest = hashlib.sha256(raw + b"\x00" + mesh_bytes).hexdigest()
    return GraspScene(hand=hand, settings=settings, object_mesh=mesh,
                      blockers=blockers, object_name=object_name, grasp_id=grasp_id,
                      source_digest=digest)


# ---------------------------------------------------------------------------
# volume exports

def _export_positions(v: GravVolume, left_handed: bool) -> np.ndarray:
    pos = v.positions()
    if left_handed and pos.size:
        pos = pos.copy()
        pos[:, 0] = -pos[:, 0]
    return pos


def export_csv(v: GravVolume, left_handed: bool = False) -> bytes:
    """Rows `finger,x_mm,y_mm,z_mm,cost_deg,config` in canonical order;
    config is the semicolon-joined step offsets."""
    pos = _export_positions(v, left_handed)
    lines = ["finger,x_mm,y_mm,z_mm,cost_deg,config"]
    for p, xyz in zip(v.points, pos):
        cfg = ";".join(str(int(k)) for k in p.config)
        lines.append(f"{p.finger.value},{xyz[0]:.6f},{xyz[1]:.6f},{xyz[2]:.6f},"
                     f"{p.cost_deg:.6f},{cfg}")
    return ("\n".join(lines) + "\n").encode("ascii")


def import_csv(data: bytes, source: str = "<csv>") -> GravVolume:
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{source}: not ASCII: {exc}") from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != "finger,x_mm,y_mm,z_mm,cost_deg,config":
        raise ParseError(f"{source} line 1: bad or missing header")
    points: List[GravPoint] = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 6:
            raise ParseError(f"{source} line {lineno}: expected 6 columns, got {len(parts)}")
        finger = _FINGER_BY_NAME.get(parts[0])
        if finger is None:
            raise ParseError(f"{source} line {lineno}: unknown finger {parts[0]!r}")
        try:
            x, y, z, cost = (float(s) for s in parts[1:5])
        except ValueError:
            raise ParseError(f"{source} line {lineno}: bad number") from None
        try:
            config = tuple(int(s) for s in parts[5].split(";")) if parts[5] else ()
        except ValueError:
            raise ParseError(f"{source} line {lineno}: bad config {parts[5]!r}") from None
        points.append(GravPoint(position=np.array([x, y, z]), cost_deg=cost,
                                finger=finger, config=config))
    return GravVolume(points=points, metadata={"source": "csv-import"})


def cost_color(cost: float, max_cost: float) -> Tuple[int, int, int]:
    """Linear green-to-red ramp; rounding is half-up on the red channel and
    green mirrors it so the two always sum to 255."""
    if max_cost <= 0.0:
        return (0, 255, 0)
    t = cost / max_cost
    red = int(math.floor(255.0 * t + 0.5))
    red = min(255, max(0, red))
    return (red, 255 - red, 0)


def export_ply(v: GravVolume, left_handed: bool = False) -> bytes:
    """ASCII point cloud with a cost color ramp: green at cost 0 through red
    at the volume's maximum cost."""
    pos = _export_positions(v, left_handed)
    note = _LEFT_HANDED_NOTE if left_handed else _RIGHT_HANDED_NOTE
    max_cost = v.max_cost()
    lines = [
        "ply",
        "format ascii 1.0",
        f"comment {note}",
        "comment cost color ramp: green (0,255,0) at cost 0 to red (255,0,0) at max cost",
        f"element vertex {len(v.points)}",
        "property float x",
        "property float y",
        "property float z",
        "property uchar red",
        "property uchar green",
        "property uchar blue",
        "property float cost",
        "end_header",
    ]
    for p, xyz in zip(v.points, pos):
        r, g, b = cost_color(p.cost_deg, max_cost)
        lines.append(f"{xyz[0]:.6f} {xyz[1]:.6f} {xyz[2]:.6f} {r} {g} {b} {p.cost_deg:.6f}")
    return ("\n".join(lines) + "\n").encode("ascii")


def export_obj(v: GravVolume, left_handed: bool = False) -> bytes:
    """Bare `v` lines in canonical order; cost is not representable in OBJ."""
    pos = _export_positions(v, left_handed)
    lines = [f"v {xyz[0]:.6f} {xyz[1]:.6f} {xyz[2]:.6f}" for xyz in pos]
    return ("\n".join(lines) + "\n").encode("ascii") if lines else b""


def export_volume_json(v: GravVolume, left_handed: bool = False) -> bytes:
    """Lossless volume serialization (full float precision, metadata kept)."""
    pos = _export_positions(v, left_handed)
    doc = {
        "format": "grav-volume",
        "version": VOLUME_FORMAT_VERSION,
        "metadata": v.metadata,
        "points": [
            {
                "finger": p.finger.value,
                "position_mm": [float(c) for c in xyz],
                "cost_deg": float(p.cost_deg),
                "config": [int(k) for k in p.config],
            }
            for p, xyz in zip(v.points, pos)
        ],
    }
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode("ascii")


def import_volume_json(data: bytes, source: str = "<json>") -> GravVolume:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{source}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != "grav-volume":
        raise ParseError(f"{source}: not a grav-volume file")
    if doc.get("version") != VOLUME_FORMAT_VERSION:
        raise ParseError(f"{source}: unsupported volume version {doc.get('version')!r}")
    points: List[GravPoint] = []
    for i, item in enumerate(doc.get("points", [])):
        try:
            finger = _FINGER_BY_NAME[item["finger"]]
            position = np.array([float(c) for c in item["position_mm"]]).reshape(3)
            cost = float(item["cost_deg"])
            config = tuple(int(k) for k in item["config"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{source}: points[{i}]: {exc}") from None
        points.append(GravPoint(position=position, cost_deg=cost, finger=finger,
                                config=config))
    metadata = doc.get("metadata") if isinstance(doc.get("metadata"), dict) else {}
    return GravVolume(points=points, metadata=metadata)


def load_volume(path) -> GravVolume:
    """Read a volume from .csv or .json (the lossless formats)."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    if path.suffix.lower() == ".csv":
        return import_csv(data, source=path.name)
    if path.suffix.lower() == ".json":
        return import_volume_json(data, source=path.name)
    raise ParseError(f"{path.name}: unsupported volume format {path.suffix!r} "
                     f"(expected .csv or .json)")


_EXPORTERS = {
    "csv": export_csv,
    "ply": export_ply,
    "obj": export_obj,
    "json": export_volume_json,
}

EXPORT_FORMATS = tuple(_EXPORTERS)


def write_exports(v: GravVolume, out_dir, stem: str, formats: Sequence[str],
                  left_handed: bool = False) -> List[Path]:
    """Write one file per requested format; returns the paths written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in formats:
        fmt = fmt.strip().lower()
        if fmt not in _EXPORTERS:
            raise SchemaError(f"unknown export format {fmt!r} "
                              f"(choose from {', '.join(_EXPORTERS)})")
        payload = _EXPORTERS[fmt](v, left_handed=left_handed)
        target = out_dir / f"{stem}.{fmt}"
        target.write_bytes(payload)
        written.append(target)
    return written
