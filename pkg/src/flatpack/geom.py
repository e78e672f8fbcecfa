"""Scalar/vector/quaternion/pose algebra shared by every other module.

Conventions, fixed for cross-run determinism:
  * quaternions are (w, x, y, z) with unit norm and w >= 0 (canonical sign),
  * all arithmetic is plain 64-bit floating point, no reassociation,
  * incremental rotations compose intrinsically in X-then-Y-then-Z order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "GeometryError",
    "Vec3",
    "UnitQuat",
    "Pose",
    "ZERO3",
    "UNIT_X",
    "UNIT_Y",
    "UNIT_Z",
    "IDENTITY_QUAT",
    "IDENTITY_POSE",
    "euclidean_distance",
    "cosine_similarity",
    "quat_normalize",
    "quat_mul",
    "quat_conjugate",
    "quat_rotate",
    "pose_compose",
    "pose_inverse",
    "euler_increment",
]

DEGENERATE_NORM = 1e-12
UNIT_TOLERANCE = 1e-9


class GeometryError(ValueError):
    """Raised for degenerate geometric inputs (zero-length vectors, zero quaternions)."""


@dataclass(frozen=True)
class Vec3:
    """A point or direction in 3-space. Components must be finite."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise GeometryError(f"non-finite vector ({self.x}, {self.y}, {self.z})")

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self) -> "Vec3":
        return Vec3(-self.x, -self.y, -self.z)

    def scale(self, s: float) -> "Vec3":
        return Vec3(self.x * s, self.y * s, self.z * s)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: "Vec3") -> "Vec3":
        return Vec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class UnitQuat:
    """Unit quaternion (w, x, y, z) with w >= 0.

    Construction validates the invariants; build from raw components with
    quat_normalize rather than calling the constructor on unnormalized data.
    """

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        n = math.sqrt(self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z)
        if abs(n - 1.0) > UNIT_TOLERANCE:
            raise GeometryError(f"quaternion norm {n!r} not within {UNIT_TOLERANCE} of 1")
        if self.w < 0.0:
            raise GeometryError("quaternion not in canonical sign (w >= 0)")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.w, self.x, self.y, self.z)


@dataclass(frozen=True)
class Pose:
    """Rigid transform: rotate by `rot`, then translate by `pos`."""

    pos: Vec3
    rot: UnitQuat

    def as_tuple(self) -> tuple[float, ...]:
        return self.pos.as_tuple() + self.rot.as_tuple()


ZERO3 = Vec3(0.0, 0.0, 0.0)
UNIT_X = Vec3(1.0, 0.0, 0.0)
UNIT_Y = Vec3(0.0, 1.0, 0.0)
UNIT_Z = Vec3(0.0, 0.0, 1.0)
IDENTITY_QUAT = UnitQuat(1.0, 0.0, 0.0, 0.0)
IDENTITY_POSE = Pose(ZERO3, IDENTITY_QUAT)


def euclidean_distance(a: Vec3, b: Vec3) -> float:
    """L2 distance between two points."""
    dx = a.x - b.x
    dy = a.y - b.y
    dz = a.z - b.z
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def cosine_similarity(u: Vec3, v: Vec3) -> float:
    """Cosine of the angle between u and v, in [-1, 1].

    Raises GeometryError when either vector is shorter than 1e-12.
    """
    nu = u.norm()
    nv = v.norm()
    if nu < DEGENERATE_NORM or nv < DEGENERATE_NORM:
        raise GeometryError("cosine similarity of a near-zero vector")
    c = u.dot(v) / (nu * nv)
    # Clamp rounding spill so downstream threshold comparisons stay in range.
    if c > 1.0:
        return 1.0
    if c < -1.0:
        return -1.0
    return c


def quat_normalize(q: tuple[float, float, float, float]) -> UnitQuat:
    """Normalize raw (w, x, y, z) components to a canonical unit quaternion.

    Canonicalization negates all components when w < 0, so q and -q map to
    the same UnitQuat. Bit-level idempotent: an already-unit quaternion is
    not divided again, so repeated normalization cannot walk the last bit.
    Raises GeometryError on near-zero norm.
    """
    w, x, y, z = q
    n = math.sqrt(w * w + x * x + y * y + z * z)
    if n < DEGENERATE_NORM:
        raise GeometryError("cannot normalize a near-zero quaternion")
    if abs(n - 1.0) > 1e-12:
        w, x, y, z = w / n, x / n, y / n, z / n
    if w < 0.0:
        w, x, y, z = -w, -x, -y, -z
    return UnitQuat(w, x, y, z)


def quat_mul(a: UnitQuat, b: UnitQuat) -> UnitQuat:
    """Hamilton product a * b, renormalized and sign-canonicalized."""
    return quat_normalize(
        (
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
    )


def quat_conjugate(q: UnitQuat) -> UnitQuat:
    """Inverse of a unit quaternion; canonical sign is preserved since w is unchanged."""
    return UnitQuat(q.w, -q.x, -q.y, -q.z)


def quat_rotate(q: UnitQuat, v: Vec3) -> Vec3:
    """Rotate v by q. Preserves norms and pairwise dot products."""
    # v' = v + 2 * u x (u x v + w v), with u the quaternion vector part.
    ux, uy, uz = q.x, q.y, q.z
    tx = uy * v.z - uz * v.y + q.w * v.x
    ty = uz * v.x - ux * v.z + q.w * v.y
    tz = ux * v.y - uy * v.x + q.w * v.z
    return Vec3(
        v.x + 2.0 * (uy * tz - uz * ty),
        v.y + 2.0 * (uz * tx - ux * tz),
        v.z + 2.0 * (ux * ty - uy * tx),
    )


def pose_compose(parent: Pose, local: Pose) -> Pose:
    """Compose two rigid transforms: result maps local coordinates through parent."""
    return Pose(
        parent.pos + quat_rotate(parent.rot, local.pos),
        quat_mul(parent.rot, local.rot),
    )


def pose_inverse(p: Pose) -> Pose:
    """Inverse transform: pose_compose(p, pose_inverse(p)) is the identity."""
    inv_rot = quat_conjugate(p.rot)
    return Pose(quat_rotate(inv_rot, -p.pos), inv_rot)


def quat_from_axis_angle(axis: Vec3, angle: float) -> UnitQuat:
    """Unit quaternion rotating by `angle` radians about `axis` (need not be unit)."""
    n = axis.norm()
    if n < DEGENERATE_NORM:
        raise GeometryError("rotation axis is near zero")
    half = 0.5 * angle
    s = math.sin(half) / n
    return quat_normalize((math.cos(half), axis.x * s, axis.y * s, axis.z * s))


def euler_increment(q: UnitQuat, delta: Vec3) -> UnitQuat:
    """Apply intrinsic X-then-Y-then-Z incremental rotations (radians) to q.

    Each component must satisfy |angle| <= pi; per-step deltas in the
    simulator are far smaller, the bound only rejects misuse.
    """
    for a in (delta.x, delta.y, delta.z):
        if abs(a) > math.pi + 1e-12:
            raise GeometryError(f"euler increment component {a!r} exceeds pi")
    out = q
    if delta.x != 0.0:
        out = quat_mul(out, quat_from_axis_angle(UNIT_X, delta.x))
    if delta.y != 0.0:
        out = quat_mul(out, quat_from_axis_angle(UNIT_Y, delta.y))
    if delta.z != 0.0:
        out = quat_mul(out, quat_from_axis_angle(UNIT_Z, delta.z))
    if out is q:
        return quat_normalize(q.as_tuple())
    return out


def quat_to_matrix(q: UnitQuat) -> tuple[tuple[float, float, float], ...]:
    """Rotation matrix rows for q; internal helper for collision and sampling code."""
    w, x, y, z = q.w, q.x, q.y, q.z
    xx, yy, zz = x * x, y * y, z * z
    xy, xz, yz = x * y, x * z, y * z
    wx, wy, wz = w * x, w * y, w * z
    return (
        (1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz), 2.0 * (xz + wy)),
        (2.0 * (xy + wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx)),
        (2.0 * (xz - wy), 2.0 * (yz + wx), 1.0 - 2.0 * (xx + yy)),
    )


def euler_xyz_from_quat(q: UnitQuat) -> tuple[float, float, float]:
    """Angles (a, b, c) with R(q) = Rx(a) * Ry(b) * Rz(c); helper for the scripted policy."""
    m = quat_to_matrix(q)
    sb = m[0][2]
    if sb > 1.0:
        sb = 1.0
    elif sb < -1.0:
        sb = -1.0
    b = math.asin(sb)
    # The regular branch conditions like 1/cos(b); it stays accurate down to
    # cos(b) ~ 1e-6, so only hand truly singular configurations (where the
    # fallback's a +/- c collapse loses ~sqrt(1 - sb^2) of structure) to it.
    if abs(sb) < 1.0 - 1e-12:
        a = math.atan2(-m[1][2], m[2][2])
        c = math.atan2(-m[0][1], m[0][0])
    else:
        # Gimbal configuration: only a +/- c is determined; put it all in a.
        a = math.atan2(m[2][1], m[1][1])
        c = 0.0
    return (a, b, c)
