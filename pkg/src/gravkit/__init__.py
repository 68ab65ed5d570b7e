"""gravkit: grasp interaction volumes for parameterized hands.

Given a posed hand skeleton, an object mesh, and per-joint ranges of motion,
the simulator flood-fills each finger's configuration grid and records every
collision-free fingertip position together with its angular displacement
cost. The resulting labeled point cloud (the interaction volume) supports
boundary extraction, surface-contact analysis, reachability queries, and
CSV/PLY/OBJ export.
"""

from ._version import __version__
from .errors import (DegenerateSegment, EmptyVolume, GravError, InvalidRom,
                     InvalidSeed, MeshNotFound, MissingJoint, NonFiniteInput,
                     NonPositiveLength, NonPositiveScale, OutOfRom, ParseError,
                     SchemaError, SimulationLimitExceeded)
from .geometry import (BLOCK_MOTION, EXCLUDE_POINTS, Blocker, Box, Bvh,
                       Capsule, Sphere, TriangleMesh, build_bvh,
                       capsule_blocker_penetration, capsule_capsule_penetration,
                       capsule_mesh_penetration, load_obj, point_in_blocker,
                       save_obj)
from .hand import (DEFAULT_SEGMENT_LENGTHS_MM, DEFAULT_THICKNESS_MM,
                   FINGER_CHAINS, FINGER_ORDER, AnthropometricProfile, FingerId,
                   HandModel, JointFrame, JointId, RomEntry, RomSpec,
                   build_from_joint_positions, build_from_measurements,
                   default_rom, forward_kinematics, mirror, mirror_configuration)
from .io import (export_csv, export_obj, export_ply, export_volume_json,
                 import_csv, import_volume_json, load_scene, load_volume,
                 write_exports)
from .scene import GraspScene, SimulationSettings
from .simulator import (BLOCKER_COLLISION, HAND_COLLISION, OBJECT_COLLISION,
                        OUT_OF_ROM, VALID, Verdict, simulate, simulate_finger,
                        validate_configuration)
from .volume import (GravPoint, GravVolume, ReachQuery, apply_blockers,
                     dedupe_points, haptic_surface, mirror_volume_x,
                     motion_boundary, query_reachable, scale_volume)
