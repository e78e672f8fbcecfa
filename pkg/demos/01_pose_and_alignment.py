"""Pose algebra and the attachability predicate, step by step.

Every frame in the simulator is a position plus a unit quaternion
(w, x, y, z with w >= 0). A connector's world frame provides the three
quantities the attachability predicate checks: its origin, its up axis,
and its forward axis.
"""

import math

from flatpack import (
    AlignmentThresholds,
    Pose,
    Vec3,
    check_alignment,
    cosine_similarity,
    euclidean_distance,
    pose_compose,
    pose_inverse,
    quat_rotate,
)
from flatpack.assembly import WorldConnectorFrame
from flatpack.geom import IDENTITY_QUAT, UNIT_X, UNIT_Z, quat_from_axis_angle

# --- basic algebra ---------------------------------------------------------

a = Vec3(1.0, 2.0, 2.0)
print("distance to origin:", euclidean_distance(a, Vec3(0, 0, 0)))  # 3.0
print("cos(45 deg):", cosine_similarity(Vec3(1, 1, 0), Vec3(1, 0, 0)))

quarter_turn = quat_from_axis_angle(UNIT_Z, math.pi / 2)
print("+x rotated 90 deg about z:", quat_rotate(quarter_turn, UNIT_X))

# Poses compose like transforms and invert exactly.
lift = Pose(Vec3(0, 0, 0.1), IDENTITY_QUAT)
spin = Pose(Vec3(0, 0, 0), quarter_turn)
both = pose_compose(spin, lift)
print("spin then lift:", both.pos, both.rot)
roundtrip = pose_compose(both, pose_inverse(both))
print("compose with inverse:", roundtrip.pos, roundtrip.rot)

# --- the attachability predicate -------------------------------------------


def frame(pos, yaw=0.0):
    rot = quat_from_axis_angle(UNIT_Z, yaw)
    return WorldConnectorFrame(
        pos=Vec3(*pos),
        up=quat_rotate(rot, UNIT_Z),
        forward=quat_rotate(rot, UNIT_X),
        owner="demo.c",
        rot=rot,
    )


thresholds = AlignmentThresholds()  # 0.05 m, 0.95, 0.90
print("\nthresholds:", thresholds)

for label, target in [
    ("coincident", frame((0, 0, 0))),
    ("3 cm away", frame((0.03, 0, 0))),
    ("8 cm away", frame((0.08, 0, 0))),
    ("3 cm away, yawed 20 deg", frame((0.03, 0, 0), yaw=math.radians(20))),
    ("3 cm away, yawed 5 deg", frame((0.03, 0, 0), yaw=math.radians(5))),
]:
    result = check_alignment(frame((0, 0, 0)), target, thresholds)
    print(
        f"{label:28s} dist={result.distance:.3f} up={result.up_sim:+.3f} "
        f"fwd={result.forward_sim:+.3f} -> attachable={result.attachable}"
    )

# A 4-fold symmetric connector (a square peg) accepts any quarter turn.
quarter = frame((0, 0, 0), yaw=math.pi / 2)
plain = check_alignment(frame((0, 0, 0)), quarter, thresholds, symmetry_order=1)
squared = check_alignment(frame((0, 0, 0)), quarter, thresholds, symmetry_order=4)
print("\nquarter-turned peg, symmetry 1:", plain.attachable, " symmetry 4:", squared.attachable)
