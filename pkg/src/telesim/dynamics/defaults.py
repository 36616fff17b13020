"""Built-in manipulator models.

The 7-joint slave uses the kinematic offsets of a common torque-controlled
cobot (3 kg payload class); the 6-joint master is a desk-scale articulated
arm. Inertial values are plausible configuration data, not identified
parameters; swap in your own model file for higher fidelity.
"""

from __future__ import annotations

import numpy as np

from ..geometry import SpatialPose, quat_from_rotvec, quat_multiply, quat_normalize
from .model import JointSpec, LinkSpec, ManipulatorModel


def _offset(xyz, rpy=(0.0, 0.0, 0.0)) -> SpatialPose:
    r, p, y = rpy
    rot = quat_multiply(
        quat_multiply(quat_from_rotvec([0, 0, y]), quat_from_rotvec([0, p, 0])),
        quat_from_rotvec([r, 0, 0]),
    )
    return SpatialPose(rotation=quat_normalize(rot), translation=np.asarray(xyz, dtype=float))


_HALF_PI = np.pi / 2

SLAVE_HOME_Q = np.array([0.0, -0.4, 0.0, -2.0, 0.0, 1.6, 0.785])


def slave_7dof() -> ManipulatorModel:
    """Default 7-DoF slave arm (cobot-class kinematics, 3 kg payload).

    Joints carry viscous friction and reflected rotor inertia: geared
    drives dominate the apparent wrist inertia, and a redundant arm under a
    pure task-space law would drift undamped in its null space without
    friction.
    """
    z = np.array([0.0, 0.0, 1.0])
    joints = [
        JointSpec(_offset((0, 0, 0.333)), z, (-2.8973, 2.8973), 2.175, 87.0, damping=2.0, rotor_inertia=0.25),
        JointSpec(_offset((0, 0, 0), (-_HALF_PI, 0, 0)), z, (-1.7628, 1.7628), 2.175, 87.0, damping=2.0, rotor_inertia=0.25),
        JointSpec(_offset((0, -0.316, 0), (_HALF_PI, 0, 0)), z, (-2.8973, 2.8973), 2.175, 87.0, damping=2.0, rotor_inertia=0.20),
        JointSpec(_offset((0.0825, 0, 0), (_HALF_PI, 0, 0)), z, (-3.0718, -0.0698), 2.175, 87.0, damping=2.0, rotor_inertia=0.20),
        JointSpec(_offset((-0.0825, 0.384, 0), (-_HALF_PI, 0, 0)), z, (-2.8973, 2.8973), 2.61, 12.0, damping=1.0, rotor_inertia=0.10),
        JointSpec(_offset((0, 0, 0), (_HALF_PI, 0, 0)), z, (-0.0175, 3.7525), 2.61, 12.0, damping=1.0, rotor_inertia=0.08),
        JointSpec(_offset((0.088, 0, 0), (_HALF_PI, 0, 0)), z, (-2.8973, 2.8973), 2.61, 12.0, damping=0.5, rotor_inertia=0.05),
    ]
    links = [
        LinkSpec(4.0, (0.0, -0.03, -0.10), np.diag([0.060, 0.060, 0.020])),
        LinkSpec(3.5, (0.0, -0.07, 0.03), np.diag([0.050, 0.020, 0.050])),
        LinkSpec(3.0, (0.04, 0.02, -0.05), np.diag([0.040, 0.040, 0.015])),
        LinkSpec(2.7, (-0.04, 0.05, 0.02), np.diag([0.035, 0.015, 0.035])),
        LinkSpec(1.7, (0.0, 0.03, -0.10), np.diag([0.025, 0.025, 0.008])),
        LinkSpec(1.3, (0.05, 0.01, 0.0), np.diag([0.012, 0.012, 0.006])),
        LinkSpec(0.8, (0.0, 0.0, 0.08), np.diag([0.006, 0.006, 0.003])),
    ]
    # flange at 0.107 m plus a 0.1 m task tool
    return ManipulatorModel(
        name="slave-7dof",
        joints=joints,
        links=links,
        ee_offset=_offset((0, 0, 0.207)),
    )


def master_6dof() -> ManipulatorModel:
    """Default 6-DoF desk-scale master arm (0.16 m class links, 3.3 N output)."""
    z = np.array([0.0, 0.0, 1.0])
    joints = [
        JointSpec(_offset((0, 0, 0.035)), z, (-2.62, 2.62), 20.0, 0.8),
        JointSpec(_offset((0, 0, 0.025), (-_HALF_PI, 0, 0)), z, (-1.75, 1.75), 20.0, 0.8),
        JointSpec(_offset((0.16, 0, 0)), z, (-2.40, 2.40), 20.0, 0.8),
        JointSpec(_offset((0.16, 0, 0), (_HALF_PI, 0, 0)), z, (-2.62, 2.62), 25.0, 0.4),
        JointSpec(_offset((0, 0, 0), (-_HALF_PI, 0, 0)), z, (-1.92, 1.92), 25.0, 0.4),
        JointSpec(_offset((0.04, 0, 0), (_HALF_PI, 0, 0)), z, (-2.97, 2.97), 25.0, 0.4),
    ]
    links = [
        LinkSpec(0.30, (0.0, 0.0, 0.02), np.diag([4e-4, 4e-4, 2e-4])),
        LinkSpec(0.25, (0.08, 0.0, 0.0), np.diag([1e-4, 6e-4, 6e-4])),
        LinkSpec(0.20, (0.08, 0.0, 0.0), np.diag([1e-4, 5e-4, 5e-4])),
        LinkSpec(0.10, (0.0, 0.0, 0.0), np.diag([8e-5, 8e-5, 5e-5])),
        LinkSpec(0.08, (0.0, 0.0, 0.0), np.diag([6e-5, 6e-5, 4e-5])),
        LinkSpec(0.06, (0.01, 0.0, 0.0), np.diag([4e-5, 4e-5, 3e-5])),
    ]
    return ManipulatorModel(
        name="master-6dof",
        joints=joints,
        links=links,
        ee_offset=_offset((0.03, 0, 0)),
    )


def two_link_planar(l1: float = 0.5, l2: float = 0.5, m1: float = 1.0, m2: float = 1.0,
                    gravity=(0.0, 0.0, 0.0)) -> ManipulatorModel:
    """Two revolute joints about +Z, links along +X; moves in the XY plane."""
    z = np.array([0.0, 0.0, 1.0])
    tiny = np.eye(3) * 1e-9
    joints = [
        JointSpec(_offset((0, 0, 0)), z, (-np.pi, np.pi), 50.0, 500.0),
        JointSpec(_offset((l1, 0, 0)), z, (-np.pi, np.pi), 50.0, 500.0),
    ]
    links = [
        LinkSpec(m1, (l1 / 2, 0, 0), tiny + np.diag([1e-6, m1 * l1**2 / 12, m1 * l1**2 / 12])),
        LinkSpec(m2, (l2 / 2, 0, 0), tiny + np.diag([1e-6, m2 * l2**2 / 12, m2 * l2**2 / 12])),
    ]
    return ManipulatorModel(
        name="two-link-planar",
        joints=joints,
        links=links,
        gravity=np.asarray(gravity, dtype=float),
        ee_offset=_offset((l2, 0, 0)),
    )


def single_link(mass: float = 1.0, com_offset: float = 0.5, axis=(0.0, -1.0, 0.0),
                gravity=(0.0, 0.0, -9.81), inertia_scale: float = 1e-12) -> ManipulatorModel:
    """One revolute joint; the link extends along +X of the joint frame.

    With the default axis the configuration q = 0 holds the link horizontal
    and positive q raises the COM, so gravity torque is +m*g*lc*cos(q).
    """
    joints = [JointSpec(_offset((0, 0, 0)), np.asarray(axis, dtype=float), (-4 * np.pi, 4 * np.pi), 100.0, 1000.0)]
    links = [LinkSpec(mass, (com_offset, 0, 0), np.eye(3) * max(inertia_scale, 1e-12))]
    return ManipulatorModel(
        name="single-link",
        joints=joints,
        links=links,
        gravity=np.asarray(gravity, dtype=float),
        ee_offset=_offset((com_offset * 2, 0, 0)),
    )


def hanging_pendulum(mass: float = 1.0, length: float = 0.5) -> ManipulatorModel:
    """One revolute joint about +Y with the COM hanging below at q = 0."""
    joints = [JointSpec(_offset((0, 0, 0)), np.array([0.0, 1.0, 0.0]), (-4 * np.pi, 4 * np.pi), 100.0, 1000.0)]
    links = [LinkSpec(mass, (0, 0, -length), np.eye(3) * 1e-12)]
    return ManipulatorModel(
        name="pendulum",
        joints=joints,
        links=links,
        ee_offset=_offset((0, 0, -length)),
    )
