"""Waypoint scripts for headless runs of the bundled scenarios.

``nominal_script`` completes its task; the ``*_failure_script`` builders
perturb one aspect each to trip one documented failure mode (force limit,
first-grasp miss, grasp loss, suction tilt, path deviation, incomplete
cut). Press actions are force-seeking, so the same scripts work under both
coupling modes.
"""

from __future__ import annotations

import numpy as np

from ..dynamics import ManipulatorModel, forward_kinematics
from ..geometry import quat_from_axis_angle, quat_multiply, quat_normalize
from ..tasks import BOLT_REMOVAL, COVER_REMOVAL, CUTTING, SORTING, UNBOLTING, TaskSpec
from .operator import OperatorScript, Waypoint
from .protocol import GRIP, RELEASE, SPINDLE, SUCTION, EffectorCommand

_CONTAINER_DROP = np.array([0.45, 0.33, 0.36])


def _spindle(on: bool) -> EffectorCommand:
    return EffectorCommand(SPINDLE, on=on)


def _grip(force: float) -> EffectorCommand:
    return EffectorCommand(GRIP, force=force)


def _release() -> EffectorCommand:
    return EffectorCommand(RELEASE)


def _suction(on: bool) -> EffectorCommand:
    return EffectorCommand(SUCTION, on=on)


def _unbolting_waypoints(spec: TaskSpec, lateral_offset=(0.0, 0.0), press_force=11.5,
                         bolts=None) -> list[Waypoint]:
    waypoints = []
    dx, dy = lateral_offset
    for bolt in bolts if bolts is not None else spec.fasteners:
        x, y, z = bolt.position
        waypoints.append(
            Waypoint(
                position=(x + dx, y + dy, z + 0.007),
                speed=0.35,
                settle=0.4,
                press_force=press_force,
                press_speed=0.012,
                until_fastener=bolt.bolt_id,
                dwell=0.1,
                on_arrival=[_spindle(True)],
                on_complete=[_spindle(False)],
            )
        )
        waypoints.append(Waypoint(position=(x + dx, y + dy, z + 0.10), speed=0.35))
    return waypoints


def _grasp_and_drop(position, grip_force: float, lift_z: float = 0.36) -> list[Waypoint]:
    x, y, z = position
    return [
        Waypoint(position=(x, y, z + 0.08), speed=0.35),
        Waypoint(position=(x, y, z), speed=0.10, dwell=0.45, on_complete=[_grip(grip_force)]),
        Waypoint(position=(x, y, lift_z), speed=0.30),
        Waypoint(position=_CONTAINER_DROP, speed=0.35, dwell=0.2, on_complete=[_release()]),
    ]


def _suction_and_drop(position, press_force: float, orientation=None) -> list[Waypoint]:
    x, y, z = position
    return [
        Waypoint(position=(x, y, z + 0.08), speed=0.35, orientation=orientation),
        Waypoint(
            position=(x, y, z + 0.004),
            speed=0.10,
            orientation=orientation,
            settle=0.4,
            press_force=press_force,
            press_speed=0.015,
            dwell=0.15,
            on_complete=[_suction(True)],
        ),
        Waypoint(position=(x, y, 0.36), speed=0.25, orientation=orientation),
        Waypoint(position=_CONTAINER_DROP, speed=0.35, dwell=0.2, on_complete=[_suction(False)]),
    ]


def _cutting_waypoints(spec: TaskSpec, mid_drift=0.0, stop_fraction=1.0) -> list[Waypoint]:
    cut = spec.scene.cut
    start, end = cut.start, cut.end
    plunge_z = start[2] - 0.012  # commanded overshoot; settles ~2 mm into the sheet
    finish = start + (end - start) * stop_fraction
    overshoot = 0.005 if stop_fraction >= 1.0 else 0.0
    finish = finish + cut.direction * overshoot + np.array([mid_drift, 0.0, 0.0])
    return [
        Waypoint(position=start + [0, 0, 0.07], speed=0.35, on_complete=[_spindle(True)]),
        Waypoint(position=(start[0], start[1], plunge_z), speed=0.02),
        Waypoint(position=(finish[0], finish[1], plunge_z), speed=0.02, on_complete=[_spindle(False)]),
        Waypoint(position=(finish[0], finish[1], start[2] + 0.09), speed=0.3),
    ]


def nominal_script(spec: TaskSpec, seed: int = 0) -> OperatorScript:
    """Script that completes the given scenario."""
    if spec.kind == UNBOLTING:
        waypoints = _unbolting_waypoints(spec)
    elif spec.kind == BOLT_REMOVAL:
        waypoints = []
        for obj in spec.objects:
            waypoints += _grasp_and_drop(obj.pose.translation, spec.grip_force)
    elif spec.kind == COVER_REMOVAL:
        waypoints = _grasp_and_drop(spec.objects[0].pose.translation, spec.grip_force, lift_z=0.38)
    elif spec.kind == SORTING:
        waypoints = []
        for obj in spec.objects:
            waypoints += _suction_and_drop(obj.pose.translation, press_force=25.0)
    elif spec.kind == CUTTING:
        waypoints = _cutting_waypoints(spec)
    else:
        raise ValueError(f"no nominal script for task {spec.kind!r}")
    return OperatorScript(waypoints=waypoints, seed=seed)


def force_limit_failure_script(spec: TaskSpec, seed: int = 0) -> OperatorScript:
    """Press on a bolt 6 mm off axis and keep pushing past the force limit."""
    bolt = spec.fasteners[0]
    x, y, z = bolt.position
    return OperatorScript(
        waypoints=[
            Waypoint(
                position=(x + 0.006, y, z + 0.007),
                speed=0.35,
                press_force=spec.force_limit + 15.0,  # never reached; the limit trips first
                press_speed=0.02,
                on_arrival=[_spindle(True)],
            )
        ],
        seed=seed,
    )


def first_grasp_miss_script(spec: TaskSpec, seed: int = 0) -> OperatorScript:
    """Close the gripper 20 mm away from the first fastener."""
    x, y, z = spec.objects[0].pose.translation
    return OperatorScript(
        waypoints=[
            Waypoint(position=(x + 0.02, y, z + 0.08), speed=0.35),
            Waypoint(position=(x + 0.02, y, z), speed=0.10, dwell=0.45,
                     on_complete=[_grip(spec.grip_force)]),
        ],
        seed=seed,
    )


def grasp_loss_failure_script(spec: TaskSpec, seed: int = 0) -> OperatorScript:
    """Lift the cover with too weak a grip; it drops outside the container."""
    waypoints = _grasp_and_drop(spec.objects[0].pose.translation, grip_force=45.0, lift_z=0.38)
    return OperatorScript(waypoints=waypoints, seed=seed)


def suction_tilt_failure_script(spec: TaskSpec, model: ManipulatorModel, seed: int = 0) -> OperatorScript:
    """Approach the module 15 degrees off perpendicular; the cups never seat."""
    home_rot = forward_kinematics(model, spec.home_q).rotation
    tilted = quat_normalize(quat_multiply(quat_from_axis_angle((1, 0, 0), np.deg2rad(15.0)), home_rot))
    waypoints = _suction_and_drop(spec.objects[0].pose.translation, press_force=25.0, orientation=tilted)
    return OperatorScript(waypoints=waypoints[:2], seed=seed)


def path_deviation_failure_script(spec: TaskSpec, seed: int = 0) -> OperatorScript:
    """Let the cut drift 3 mm transverse to the marked path."""
    return OperatorScript(waypoints=_cutting_waypoints(spec, mid_drift=0.003), seed=seed)


def incomplete_cut_failure_script(spec: TaskSpec, seed: int = 0) -> OperatorScript:
    """Stop the cut at 60% of the path."""
    return OperatorScript(waypoints=_cutting_waypoints(spec, stop_fraction=0.6), seed=seed)
