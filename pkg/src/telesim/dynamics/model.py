"""Serial manipulator description and joint-space state.

A manipulator is a chain of revolute joints. Each joint carries a rigid
``parent_offset`` transform from the previous joint frame, a unit rotation
axis expressed in its own frame, and safety limits. Each link's mass, center
of mass and inertia tensor (about the COM) are expressed in that joint's
frame. Model files are a versioned YAML tree, see ``load_manipulator``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from ..errors import ContractViolationError, ParseError, UnsupportedVersionError
from ..geometry import SpatialPose, quat_from_rotvec, quat_multiply, quat_normalize

MODEL_FORMAT_VERSION = 1


@dataclass(eq=False)
class JointSpec:
    parent_offset: SpatialPose
    axis: np.ndarray
    position_limits: tuple[float, float] = (-np.pi, np.pi)
    velocity_limit: float = 10.0
    torque_limit: float = 100.0
    damping: float = 0.0  # viscous joint friction, N*m*s/rad
    rotor_inertia: float = 0.0  # motor inertia reflected through the gears, kg*m^2

    def __post_init__(self):
        self.axis = np.asarray(self.axis, dtype=float).reshape(3)
        n = np.linalg.norm(self.axis)
        if n == 0.0 or not np.isfinite(n):
            raise ContractViolationError("joint axis must be a nonzero finite vector")
        self.axis = self.axis / n
        lo, hi = self.position_limits
        if not lo < hi:
            raise ContractViolationError(f"position limits {self.position_limits} are not ordered")
        if self.velocity_limit <= 0 or self.torque_limit <= 0:
            raise ContractViolationError("velocity and torque limits must be positive")
        if self.damping < 0 or self.rotor_inertia < 0:
            raise ContractViolationError("joint damping and rotor inertia must be non-negative")


@dataclass(eq=False)
class LinkSpec:
    mass: float
    com: np.ndarray
    inertia: np.ndarray  # 3x3 about the COM, in the joint frame

    def __post_init__(self):
        self.com = np.asarray(self.com, dtype=float).reshape(3)
        self.inertia = np.asarray(self.inertia, dtype=float).reshape(3, 3)
        if self.mass <= 0 or not np.isfinite(self.mass):
            raise ContractViolationError("link mass must be positive and finite")
        if np.max(np.abs(self.inertia - self.inertia.T)) > 1e-9:
            raise ContractViolationError("inertia tensor must be symmetric")
        try:
            np.linalg.cholesky(self.inertia)
        except np.linalg.LinAlgError:
            raise ContractViolationError("inertia tensor must be positive definite") from None


@dataclass(eq=False)
class ManipulatorModel:
    name: str
    joints: list[JointSpec]
    links: list[LinkSpec]
    gravity: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -9.81]))
    ee_offset: SpatialPose = field(default_factory=SpatialPose.identity)

    def __post_init__(self):
        self.gravity = np.asarray(self.gravity, dtype=float).reshape(3)
        if len(self.joints) < 1:
            raise ContractViolationError("a manipulator needs at least one joint")
        if len(self.joints) != len(self.links):
            raise ContractViolationError("joints and links must pair one-to-one")
        if not np.all(np.isfinite(self.gravity)):
            raise ContractViolationError("gravity vector must be finite")

    @property
    def n(self) -> int:
        return len(self.joints)

    @property
    def position_limits(self) -> np.ndarray:
        return np.array([j.position_limits for j in self.joints])

    @property
    def velocity_limits(self) -> np.ndarray:
        return np.array([j.velocity_limit for j in self.joints])

    @property
    def torque_limits(self) -> np.ndarray:
        return np.array([j.torque_limit for j in self.joints])

    @property
    def damping(self) -> np.ndarray:
        return np.array([j.damping for j in self.joints])

    @property
    def rotor_inertias(self) -> np.ndarray:
        return np.array([j.rotor_inertia for j in self.joints])

    def check_q(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float).reshape(-1)
        if q.shape != (self.n,):
            raise ContractViolationError(f"expected {self.n} joint values, got {q.shape}")
        if not np.all(np.isfinite(q)):
            raise ContractViolationError("joint vector has non-finite entries")
        return q


@dataclass(eq=False)
class JointState:
    """Joint positions, velocities and estimated external torques."""

    q: np.ndarray
    dq: np.ndarray
    tau_ext: np.ndarray | None = None

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float).reshape(-1)
        self.dq = np.asarray(self.dq, dtype=float).reshape(-1)
        if self.tau_ext is None:
            self.tau_ext = np.zeros_like(self.q)
        self.tau_ext = np.asarray(self.tau_ext, dtype=float).reshape(-1)
        if not (self.q.shape == self.dq.shape == self.tau_ext.shape):
            raise ContractViolationError("q, dq and tau_ext must have equal length")
        for name, v in (("q", self.q), ("dq", self.dq), ("tau_ext", self.tau_ext)):
            if not np.all(np.isfinite(v)):
                raise ContractViolationError(f"{name} has non-finite entries")

    @classmethod
    def zero(cls, n: int) -> "JointState":
        return cls(q=np.zeros(n), dq=np.zeros(n))

    @classmethod
    def at(cls, q) -> "JointState":
        q = np.asarray(q, dtype=float)
        return cls(q=q, dq=np.zeros_like(q))

    def copy(self) -> "JointState":
        return JointState(q=self.q.copy(), dq=self.dq.copy(), tau_ext=self.tau_ext.copy())

    def with_tau_ext(self, tau_ext) -> "JointState":
        return replace(self, q=self.q.copy(), dq=self.dq.copy(), tau_ext=np.asarray(tau_ext, dtype=float))


# --- model file format -------------------------------------------------------

def _pose_to_tree(pose: SpatialPose) -> dict:
    return {
        "translation": [float(v) for v in pose.translation],
        "rotation_quat": [float(v) for v in pose.rotation],
    }


def pose_from_tree(node: dict | None) -> SpatialPose:
    if node is None:
        return SpatialPose.identity()
    t = node.get("translation", [0.0, 0.0, 0.0])
    if "rotation_quat" in node:
        rot = quat_normalize(np.asarray(node["rotation_quat"], dtype=float))
    elif "rotation_rpy" in node:
        r, p, y = [float(v) for v in node["rotation_rpy"]]
        rot = quat_multiply(
            quat_multiply(quat_from_rotvec([0, 0, y]), quat_from_rotvec([0, p, 0])),
            quat_from_rotvec([r, 0, 0]),
        )
        rot = quat_normalize(rot)
    else:
        rot = np.array([1.0, 0.0, 0.0, 0.0])
    return SpatialPose(rotation=rot, translation=np.asarray(t, dtype=float))


def _inertia_from_tree(node) -> np.ndarray:
    arr = np.asarray(node, dtype=float)
    if arr.shape == (3, 3):
        return arr
    if arr.shape == (6,):  # [ixx, iyy, izz, ixy, ixz, iyz]
        ixx, iyy, izz, ixy, ixz, iyz = arr
        return np.array([[ixx, ixy, ixz], [ixy, iyy, iyz], [ixz, iyz, izz]])
    raise ParseError(f"inertia must be a 3x3 matrix or 6-vector, got shape {arr.shape}")


def manipulator_to_tree(model: ManipulatorModel) -> dict:
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": "manipulator",
        "name": model.name,
        "gravity": [float(v) for v in model.gravity],
        "ee_offset": _pose_to_tree(model.ee_offset),
        "joints": [
            {
                "parent_offset": _pose_to_tree(j.parent_offset),
                "axis": [float(v) for v in j.axis],
                "position_limits": [float(j.position_limits[0]), float(j.position_limits[1])],
                "velocity_limit": float(j.velocity_limit),
                "torque_limit": float(j.torque_limit),
                "damping": float(j.damping),
                "rotor_inertia": float(j.rotor_inertia),
            }
            for j in model.joints
        ],
        "links": [
            {
                "mass": float(l.mass),
                "com": [float(v) for v in l.com],
                "inertia": [[float(x) for x in row] for row in l.inertia],
            }
            for l in model.links
        ],
    }


def manipulator_from_tree(tree: dict) -> ManipulatorModel:
    version = tree.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise UnsupportedVersionError(f"manipulator format_version {version!r} not supported")
    joints = []
    for node in tree["joints"]:
        joints.append(
            JointSpec(
                parent_offset=pose_from_tree(node.get("parent_offset")),
                axis=np.asarray(node["axis"], dtype=float),
                position_limits=tuple(float(v) for v in node.get("position_limits", (-np.pi, np.pi))),
                velocity_limit=float(node.get("velocity_limit", 10.0)),
                torque_limit=float(node.get("torque_limit", 100.0)),
                damping=float(node.get("damping", 0.0)),
                rotor_inertia=float(node.get("rotor_inertia", 0.0)),
            )
        )
    links = [
        LinkSpec(
            mass=float(node["mass"]),
            com=np.asarray(node["com"], dtype=float),
            inertia=_inertia_from_tree(node["inertia"]),
        )
        for node in tree["links"]
    ]
    return ManipulatorModel(
        name=str(tree.get("name", "unnamed")),
        joints=joints,
        links=links,
        gravity=np.asarray(tree.get("gravity", [0.0, 0.0, -9.81]), dtype=float),
        ee_offset=pose_from_tree(tree.get("ee_offset")),
    )


def save_manipulator(model: ManipulatorModel, path) -> None:
    Path(path).write_text(yaml.safe_dump(manipulator_to_tree(model), sort_keys=False))


def load_manipulator(path) -> ManipulatorModel:
    tree = yaml.safe_load(Path(path).read_text())
    if not isinstance(tree, dict):
        raise ParseError(f"model file {path} is not a key-value tree")
    return manipulator_from_tree(tree)
