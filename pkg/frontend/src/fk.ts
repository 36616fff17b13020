/**
 * Forward kinematics over the kinematic parameters served by the gateway,
 * so the drawn skeleton always matches what the control loop integrates.
 */

import type { ModelTree, PoseTree, Quat, Vec3 } from "./protocol.js";

export function quatMultiply(a: Quat, b: Quat): Quat {
  const [aw, ax, ay, az] = a;
  const [bw, bx, by, bz] = b;
  return [
    aw * bw - ax * bx - ay * by - az * bz,
    aw * bx + ax * bw + ay * bz - az * by,
    aw * by - ax * bz + ay * bw + az * bx,
    aw * bz + ax * by - ay * bx + az * bw,
  ];
}

export function quatFromAxisAngle(axis: Vec3, angle: number): Quat {
  const n = Math.hypot(axis[0], axis[1], axis[2]);
  const half = angle / 2;
  const s = Math.sin(half) / n;
  return [Math.cos(half), axis[0] * s, axis[1] * s, axis[2] * s];
}

export function rotate(q: Quat, v: Vec3): Vec3 {
  const [w, x, y, z] = q;
  // v' = v + 2 q_vec x (q_vec x v + w v)
  const cx = y * v[2] - z * v[1] + w * v[0];
  const cy = z * v[0] - x * v[2] + w * v[1];
  const cz = x * v[1] - y * v[0] + w * v[2];
  return [
    v[0] + 2 * (y * cz - z * cy),
    v[1] + 2 * (z * cx - x * cz),
    v[2] + 2 * (x * cy - y * cx),
  ];
}

function poseRotation(pose: PoseTree): Quat {
  const q = pose.rotation_quat ?? pose.rotation ?? [1, 0, 0, 0];
  return [q[0], q[1], q[2], q[3]];
}

/** World position of every joint origin plus the end effector. */
export function jointPositions(model: ModelTree, q: number[]): Vec3[] {
  let rot: Quat = [1, 0, 0, 0];
  let pos: Vec3 = [0, 0, 0];
  const out: Vec3[] = [[0, 0, 0]];
  model.joints.forEach((joint, i) => {
    const off = joint.parent_offset;
    const t = off.translation;
    const shifted = rotate(rot, [t[0], t[1], t[2]]);
    pos = [pos[0] + shifted[0], pos[1] + shifted[1], pos[2] + shifted[2]];
    rot = quatMultiply(rot, poseRotation(off));
    const axis: Vec3 = [joint.axis[0], joint.axis[1], joint.axis[2]];
    rot = quatMultiply(rot, quatFromAxisAngle(axis, q[i] ?? 0));
    out.push(pos);
  });
  const ee = model.ee_offset.translation;
  const tip = rotate(rot, [ee[0], ee[1], ee[2]]);
  out.push([pos[0] + tip[0], pos[1] + tip[1], pos[2] + tip[2]]);
  return out;
}
