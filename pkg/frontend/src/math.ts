// Just enough vector/quaternion arithmetic to place meshes and aim the camera.
// Quaternions are [w, x, y, z], matching the wire format.

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number];

export function quatRotate(q: Quat, v: Vec3): Vec3 {
  const [w, x, y, z] = q;
  const tx = y * v[2] - z * v[1] + w * v[0];
  const ty = z * v[0] - x * v[2] + w * v[1];
  const tz = x * v[1] - y * v[0] + w * v[2];
  return [
    v[0] + 2 * (y * tz - z * ty),
    v[1] + 2 * (z * tx - x * tz),
    v[2] + 2 * (x * ty - y * tx),
  ];
}

export function quatMul(a: Quat, b: Quat): Quat {
  return [
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
    a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
    a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
    a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
  ];
}

export function add(a: Vec3, b: Vec3): Vec3 {
  return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

export function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function transformPoint(pos: Vec3, quat: Quat, local: Vec3): Vec3 {
  return add(pos, quatRotate(quat, local));
}

/** Heading about +z of a yaw-only (or yaw-dominant) quaternion, in radians. */
export function yawOf(q: Quat): number {
  return Math.atan2(2 * (q[0] * q[3] + q[1] * q[2]), 1 - 2 * (q[2] * q[2] + q[3] * q[3]));
}

export function wrapAngle(a: number): number {
  while (a > Math.PI) a -= 2 * Math.PI;
  while (a < -Math.PI) a += 2 * Math.PI;
  return a;
}
