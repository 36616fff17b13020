"""Rigid-body geometry: unit quaternions, poses and wrenches.

Quaternions are stored as ``[w, x, y, z]`` numpy arrays and kept normalized.
Poses compose left-to-right (``a.compose(b)`` maps b-frame coordinates through
a), translations are meters, rotations dimensionless.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolationError

_UNIT_TOL = 1e-9


def quat_normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if not np.isfinite(n) or n == 0.0:
        raise ContractViolationError("quaternion has zero or non-finite norm")
    return q / n


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n == 0.0:
        raise ContractViolationError("rotation axis must be nonzero")
    half = 0.5 * angle
    return np.concatenate([[np.cos(half)], np.sin(half) * axis / n])


def quat_from_rotvec(v: np.ndarray) -> np.ndarray:
    """Exponential map: axis-angle vector (rad) to unit quaternion."""
    v = np.asarray(v, dtype=float)
    angle = np.linalg.norm(v)
    if angle < 1e-12:
        # second-order series keeps the map smooth through zero
        half = 0.5 * v
        return quat_normalize(np.concatenate([[1.0 - 0.125 * angle * angle], half]))
    return quat_from_axis_angle(v, angle)


def quat_to_rotvec(q: np.ndarray) -> np.ndarray:
    """Log map: unit quaternion to axis-angle vector with angle in [0, pi]."""
    w, xyz = q[0], q[1:]
    if w < 0.0:  # pick the short way around
        w, xyz = -w, -xyz
    s = np.linalg.norm(xyz)
    if s < 1e-12:
        return 2.0 * xyz
    angle = 2.0 * np.arctan2(s, w)
    return angle * xyz / s


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_from_matrix(m: np.ndarray) -> np.ndarray:
    """Shepperd's method, stable for all rotation matrices."""
    m = np.asarray(m, dtype=float)
    t = np.trace(m)
    if t > 0:
        s = np.sqrt(t + 1.0) * 2.0
        q = np.array(
            [0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s]
        )
    elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
        s = np.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
        q = np.array(
            [(m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s]
        )
    elif m[1, 1] > m[2, 2]:
        s = np.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
        q = np.array(
            [(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s]
        )
    else:
        s = np.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
        q = np.array(
            [(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s]
        )
    return quat_normalize(q)


def rotate_vector(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    return quat_to_matrix(q) @ np.asarray(v, dtype=float)


@dataclass(eq=False)
class SpatialPose:
    """End-effector pose: unit-quaternion rotation plus translation (m)."""

    rotation: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=float).reshape(4)
        self.translation = np.asarray(self.translation, dtype=float).reshape(3)
        if not np.all(np.isfinite(self.rotation)) or not np.all(np.isfinite(self.translation)):
            raise ContractViolationError("pose entries must be finite")
        n = np.linalg.norm(self.rotation)
        if abs(n - 1.0) > _UNIT_TOL:
            raise ContractViolationError(f"rotation quaternion norm {n!r} is not 1")
        self.rotation = self.rotation / n

    @classmethod
    def identity(cls) -> "SpatialPose":
        return cls()

    @classmethod
    def from_parts(cls, translation, rotation=None) -> "SpatialPose":
        if rotation is None:
            rotation = np.array([1.0, 0.0, 0.0, 0.0])
        return cls(rotation=np.asarray(rotation, dtype=float), translation=np.asarray(translation, dtype=float))

    @classmethod
    def from_axis_angle(cls, axis, angle: float, translation=(0.0, 0.0, 0.0)) -> "SpatialPose":
        return cls(rotation=quat_from_axis_angle(axis, angle), translation=np.asarray(translation, dtype=float))

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "SpatialPose":
        m = np.asarray(m, dtype=float)
        return cls(rotation=quat_from_matrix(m[:3, :3]), translation=m[:3, 3].copy())

    @property
    def matrix(self) -> np.ndarray:
        out = np.eye(4)
        out[:3, :3] = quat_to_matrix(self.rotation)
        out[:3, 3] = self.translation
        return out

    @property
    def rotation_matrix(self) -> np.ndarray:
        return quat_to_matrix(self.rotation)

    def compose(self, other: "SpatialPose") -> "SpatialPose":
        rot = quat_normalize(quat_multiply(self.rotation, other.rotation))
        trans = self.translation + rotate_vector(self.rotation, other.translation)
        return SpatialPose(rotation=rot, translation=trans)

    def inverse(self) -> "SpatialPose":
        rot = quat_conjugate(self.rotation)
        return SpatialPose(rotation=rot, translation=-rotate_vector(rot, self.translation))

    def apply(self, point: np.ndarray) -> np.ndarray:
        """Map a point from this pose's frame to the parent frame."""
        return self.translation + rotate_vector(self.rotation, np.asarray(point, dtype=float))

    def rotation_angle(self) -> float:
        return float(np.linalg.norm(quat_to_rotvec(self.rotation)))

    def approx_equal(self, other: "SpatialPose", tol: float = 1e-9) -> bool:
        if np.linalg.norm(self.translation - other.translation) > tol:
            return False
        # q and -q encode the same rotation
        d = min(np.linalg.norm(self.rotation - other.rotation), np.linalg.norm(self.rotation + other.rotation))
        return d <= tol

    def copy(self) -> "SpatialPose":
        return SpatialPose(rotation=self.rotation.copy(), translation=self.translation.copy())


BASE_FRAME = "base"
EE_FRAME = "ee"


@dataclass(eq=False)
class Wrench:
    """6-D force/torque with an explicit frame tag."""

    force: np.ndarray = field(default_factory=lambda: np.zeros(3))
    torque: np.ndarray = field(default_factory=lambda: np.zeros(3))
    frame: str = BASE_FRAME

    def __post_init__(self):
        self.force = np.asarray(self.force, dtype=float).reshape(3)
        self.torque = np.asarray(self.torque, dtype=float).reshape(3)
        if not (np.all(np.isfinite(self.force)) and np.all(np.isfinite(self.torque))):
            raise ContractViolationError("wrench entries must be finite")
        if self.frame not in (BASE_FRAME, EE_FRAME):
            raise ContractViolationError(f"unknown wrench frame {self.frame!r}")

    @classmethod
    def zero(cls, frame: str = BASE_FRAME) -> "Wrench":
        return cls(frame=frame)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.force, self.torque])

    def in_base(self, ee_rotation: np.ndarray) -> "Wrench":
        """Express this wrench in base-frame coordinates (point of action unchanged)."""
        if self.frame == BASE_FRAME:
            return self
        r = np.asarray(ee_rotation, dtype=float)
        return Wrench(force=r @ self.force, torque=r @ self.torque, frame=BASE_FRAME)

    def __add__(self, other: "Wrench") -> "Wrench":
        if self.frame != other.frame:
            raise ContractViolationError("cannot add wrenches tagged with different frames")
        return Wrench(force=self.force + other.force, torque=self.torque + other.torque, frame=self.frame)
