"""Convex-primitive overlap tests and bounding helpers.

Boxes collide via the separating-axis test over the 15 candidate axes
(3 face normals each, 9 edge cross products); spheres via closest-point
distances. "Overlap" means strict interpenetration: flush contact does not
collide, and a tiny slack absorbs the float noise of snapped-together
assemblies so exactly-touching goal configurations stay legal.
"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING, Iterable, Tuple

from .geom import Pose, Vec3, pose_compose, quat_to_matrix

if TYPE_CHECKING:  # pragma: no cover
    from .model import ConvexShape, Part

# Penetration below this never counts as collision.
CONTACT_SLACK = 1e-9
# Cross-product axes shorter than sqrt of this are parallel-edge degenerate
# and covered by the face axes already.
_MIN_AXIS_SQ = 1e-12

Mat3 = Tuple[Tuple[float, float, float], ...]


def box_box_overlap(
    ca: Vec3, ra: Mat3, ha: Vec3, cb: Vec3, rb: Mat3, hb: Vec3, slack: float = CONTACT_SLACK
) -> bool:
    """Strict overlap of two oriented boxes (centers, rotation rows, half extents).

    Separating-axis test over the 15 candidate axes. The slack applies per
    normalized axis, so edge-cross axes scale it by their length.
    """
    # Rotation of B expressed in A's frame: r[i][j] = A_i . B_j.
    r = [[0.0] * 3 for _ in range(3)]
    absr = [[0.0] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            v = ra[0][i] * rb[0][j] + ra[1][i] * rb[1][j] + ra[2][i] * rb[2][j]
            r[i][j] = v
            absr[i][j] = abs(v)
    d = cb - ca
    t = (
        d.x * ra[0][0] + d.y * ra[1][0] + d.z * ra[2][0],
        d.x * ra[0][1] + d.y * ra[1][1] + d.z * ra[2][1],
        d.x * ra[0][2] + d.y * ra[1][2] + d.z * ra[2][2],
    )
    a = ha.as_tuple()
    b = hb.as_tuple()

    # A's face normals (unit axes).
    for i in range(3):
        if abs(t[i]) >= a[i] + b[0] * absr[i][0] + b[1] * absr[i][1] + b[2] * absr[i][2] - slack:
            return False
    # B's face normals.
    for j in range(3):
        proj = abs(t[0] * r[0][j] + t[1] * r[1][j] + t[2] * r[2][j])
        if proj >= b[j] + a[0] * absr[0][j] + a[1] * absr[1][j] + a[2] * absr[2][j] - slack:
            return False
    # Cross products of edge axes A_i x B_j, length sin(theta_ij).
    idx = ((1, 2), (2, 0), (0, 1))
    for i in range(3):
        i1, i2 = idx[i]
        for j in range(3):
            j1, j2 = idx[j]
            axis_sq = 1.0 - r[i][j] * r[i][j]
            if axis_sq < _MIN_AXIS_SQ:
                continue
            proj = abs(t[i2] * r[i1][j] - t[i1] * r[i2][j])
            radius = (
                a[i1] * absr[i2][j]
                + a[i2] * absr[i1][j]
                + b[j1] * absr[i][j2]
                + b[j2] * absr[i][j1]
            )
            if proj >= radius - slack * math.sqrt(axis_sq):
                return False
    return True


def sphere_box_overlap(
    cs: Vec3, radius: float, cb: Vec3, rb: Mat3, hb: Vec3, slack: float = CONTACT_SLACK
) -> bool:
    """Strict overlap of a sphere and an oriented box (closest-point distance)."""
    d = cs - cb
    local = (
        d.x * rb[0][0] + d.y * rb[1][0] + d.z * rb[2][0],
        d.x * rb[0][1] + d.y * rb[1][1] + d.z * rb[2][1],
        d.x * rb[0][2] + d.y * rb[1][2] + d.z * rb[2][2],
    )
    h = hb.as_tuple()
    dist_sq = 0.0
    for k in range(3):
        excess = 0.0
        if local[k] < -h[k]:
            excess = local[k] + h[k]
        elif local[k] > h[k]:
            excess = local[k] - h[k]
        dist_sq += excess * excess
    reach = radius - slack
    if reach <= 0.0:
        return False
    return dist_sq < reach * reach


def sphere_sphere_overlap(
    ca: Vec3, ra: float, cb: Vec3, rb: float, slack: float = CONTACT_SLACK
) -> bool:
    d = cb - ca
    reach = ra + rb - slack
    if reach <= 0.0:
        return False
    return d.dot(d) < reach * reach


def shapes_overlap(
    shape_a: "ConvexShape", part_pose_a: Pose, shape_b: "ConvexShape", part_pose_b: Pose
) -> bool:
    """Strict overlap of two shapes given their owning parts' world poses."""
    pa = pose_compose(part_pose_a, shape_a.offset)
    pb = pose_compose(part_pose_b, shape_b.offset)
    if shape_a.kind == "box" and shape_b.kind == "box":
        return box_box_overlap(
            pa.pos, quat_to_matrix(pa.rot), shape_a.half_extents,
            pb.pos, quat_to_matrix(pb.rot), shape_b.half_extents,
        )
    if shape_a.kind == "sphere" and shape_b.kind == "sphere":
        return sphere_sphere_overlap(pa.pos, shape_a.radius, pb.pos, shape_b.radius)
    if shape_a.kind == "sphere":
        return sphere_box_overlap(
            pa.pos, shape_a.radius, pb.pos, quat_to_matrix(pb.rot), shape_b.half_extents
        )
    return sphere_box_overlap(
        pb.pos, shape_b.radius, pa.pos, quat_to_matrix(pa.rot), shape_a.half_extents
    )


Aabb = Tuple[Vec3, Vec3]


def shape_world_aabb(shape: "ConvexShape", part_pose: Pose) -> Aabb:
    world = pose_compose(part_pose, shape.offset)
    if shape.kind == "sphere":
        r = shape.radius
        return (
            Vec3(world.pos.x - r, world.pos.y - r, world.pos.z - r),
            Vec3(world.pos.x + r, world.pos.y + r, world.pos.z + r),
        )
    m = quat_to_matrix(world.rot)
    h = shape.half_extents
    ext = [abs(m[k][0]) * h.x + abs(m[k][1]) * h.y + abs(m[k][2]) * h.z for k in range(3)]
    return (
        Vec3(world.pos.x - ext[0], world.pos.y - ext[1], world.pos.z - ext[2]),
        Vec3(world.pos.x + ext[0], world.pos.y + ext[1], world.pos.z + ext[2]),
    )


def aabb_union(boxes: Iterable[Aabb]) -> Aabb:
    los, his = zip(*boxes)
    return (
        Vec3(min(v.x for v in los), min(v.y for v in los), min(v.z for v in los)),
        Vec3(max(v.x for v in his), max(v.y for v in his), max(v.z for v in his)),
    )


def aabb_intersects(a: Aabb, b: Aabb) -> bool:
    """Inclusive interval overlap on all three axes (touching intersects)."""
    return (
        a[0].x <= b[1].x
        and b[0].x <= a[1].x
        and a[0].y <= b[1].y
        and b[0].y <= a[1].y
        and a[0].z <= b[1].z
        and b[0].z <= a[1].z
    )


def part_world_aabb(part: "Part", pose: Pose) -> Aabb:
    return aabb_union(shape_world_aabb(s, pose) for s in part.shapes)


def part_lowest_z(part: "Part", pose: Pose) -> float:
    """World z of the part's lowest surface point across its shapes."""
    return min(shape_world_aabb(s, pose)[0].z for s in part.shapes)


def part_bounding_radius(part: "Part") -> float:
    """Radius of a part-frame-centered sphere containing every shape at any orientation."""
    best = 0.0
    for s in part.shapes:
        reach = s.offset.pos.norm()
        if s.kind == "sphere":
            reach += s.radius
        else:
            reach += s.half_extents.norm()
        best = max(best, reach)
    return best
