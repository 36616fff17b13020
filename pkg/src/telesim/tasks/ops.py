"""Contact, fastening, grasping, suction and cutting mechanics.

Penalty contact: normal force k*depth + b*depth_rate (clamped at zero) plus
viscous tangential friction. All forces are reported in the base frame as
the wrench exerted by the environment on the end effector; a carried
object's weight is included so grasp/release shows up in the force trace.

The world is owned by one simulation loop: operations that progress task
state mutate it in place and return it.
"""

from __future__ import annotations

import numpy as np

from ..errors import ContractViolationError
from ..geometry import SpatialPose, Wrench
from .world import (
    COMPLETED,
    CUTTING,
    BOLT_REMOVAL,
    COVER_REMOVAL,
    FIRST_GRASP_FAILED,
    FORCE_LIMIT_EXCEEDED,
    GRASP_LOST_OUTSIDE_CONTAINER,
    INCOMPLETE,
    INCOMPLETE_CUT,
    PATH_DEVIATION,
    ABORTED,
    SORTING,
    UNBOLTING,
    Outcome,
    TaskSpec,
    WorldState,
)

GRAVITY = np.array([0.0, 0.0, -9.81])

GRASPED = "grasped"
MISSED = "missed"
ENGAGED = "engaged"
NOT_ENGAGED = "not_engaged"

_CUT_COMPLETE_TOL = 1e-3


def tool_axis(ee_pose: SpatialPose) -> np.ndarray:
    """Approach direction of the mounted tool: the EE frame +Z axis.

    The default arm holds its flange z pointing at the work surface, so at
    perfect alignment this is antiparallel to the surface normal.
    """
    return ee_pose.rotation_matrix[:, 2].copy()


def _tilt_from(ee_pose: SpatialPose, reference_axis: np.ndarray) -> float:
    """Angle between the tool approach direction and -reference_axis."""
    cosine = float(tool_axis(ee_pose) @ -np.asarray(reference_axis, dtype=float))
    return float(np.arccos(np.clip(cosine, -1.0, 1.0)))


def _surface_force(surf, params, p, v, tangent_friction=True) -> np.ndarray:
    depth = surf.penetration(p)
    if depth <= 0.0:
        return np.zeros(3)
    rate = -float(surf.normal @ v)  # positive while pressing in
    fn = max(surf.k_scale * params.k_normal * depth + params.b_normal * rate, 0.0)
    force = fn * surf.normal
    if tangent_friction:
        v_tan = v - (surf.normal @ v) * surf.normal
        force = force - params.b_tangent * v_tan
    return force


def contact_wrench(world: WorldState, ee_pose: SpatialPose, ee_twist, skip_tangent_on: str | None = None) -> Wrench:
    """Environment wrench on the end effector at its current pose/twist."""
    p = ee_pose.translation
    v = np.asarray(ee_twist, dtype=float).reshape(-1)[:3]
    params = world.scene.contact
    force = np.zeros(3)
    world.contacts.clear()
    for surf in world.scene.surfaces:
        if surf.penetration(p) > 0.0:
            world.contacts.add(surf.surface_id)
        force += _surface_force(surf, params, p, v, tangent_friction=surf.surface_id != skip_tangent_on)
    if world.attached_object is not None:
        force += world.objects[world.attached_object].mass * GRAVITY
    return Wrench(force=force, torque=np.zeros(3), frame="base")


def surface_normal_force(world: WorldState, surface_id: str, ee_pose: SpatialPose) -> float:
    """Static penalty normal force the tool exerts on one surface."""
    surf = world.scene.surface(surface_id)
    depth = surf.penetration(ee_pose.translation)
    return surf.k_scale * world.scene.contact.k_normal * depth


def advance_fastener(
    world: WorldState,
    bolt_id: str,
    tool_pose: SpatialPose,
    spindle_on: bool,
    dt: float,
    *,
    lateral_tol: float = 2e-3,
    tilt_tol: float = np.deg2rad(5.0),
    min_force: float = 5.0,
    rate: float = 1.0,
) -> WorldState:
    """Unscrew a fastener when the powered tool is aligned and seated on it.

    Progress requires lateral error within ``lateral_tol``, tilt within
    ``tilt_tol``, the spindle on and at least ``min_force`` of normal
    contact; otherwise the state is unchanged.
    """
    if dt <= 0.0:
        raise ContractViolationError("dt must be positive")
    bolt = world.fasteners[bolt_id]  # KeyError for unknown ids
    if bolt.threads_remaining <= 0.0 or not spindle_on:
        return world
    rel = tool_pose.translation - bolt.position
    lateral = float(np.linalg.norm(rel - (rel @ bolt.axis) * bolt.axis))
    tilt = _tilt_from(tool_pose, bolt.axis)
    try:
        normal_force = surface_normal_force(world, f"{bolt_id}-top", tool_pose)
    except KeyError:
        normal_force = 0.0
    if lateral <= lateral_tol and tilt <= tilt_tol and normal_force >= min_force:
        bolt.threads_remaining = max(bolt.threads_remaining - rate * dt, 0.0)
        if bolt.threads_remaining == 0.0:
            bolt.seated = False  # removable by hand
    return world


def attempt_grasp(
    world: WorldState,
    ee_pose: SpatialPose,
    grip_force: float,
    target_id: str,
    *,
    lateral_tol: float = 6e-3,
    tilt_tol: float = np.deg2rad(10.0),
    axial_tol: float = 15e-3,
    hold_load_factor: float = 0.3,
) -> str:
    """Close the gripper on a target; returns "grasped" or "missed".

    The grasp succeeds when the target sits in the capture window and the
    grip force meets the object's required hold force. On success the object
    attaches rigidly; its hold capacity is ``hold_load_factor * grip_force``.
    """
    if grip_force <= 0.0:
        raise ContractViolationError("grip force must be positive")
    obj = world.objects[target_id]  # KeyError for unknown ids
    world.grasp_attempts[target_id] = world.grasp_attempts.get(target_id, 0) + 1
    approach = tool_axis(ee_pose)
    rel = obj.pose.translation - ee_pose.translation
    axial = float(rel @ approach)
    lateral = float(np.linalg.norm(rel - axial * approach))
    tilt = _tilt_from(ee_pose, obj.pose.rotation_matrix[:, 2])
    if lateral > lateral_tol or abs(axial) > axial_tol or tilt > tilt_tol:
        return MISSED
    if grip_force < obj.hold_force_required:
        return MISSED
    obj.attached_to = "gripper"
    obj.grasp_offset = ee_pose.inverse().compose(obj.pose)
    world.attached_object = target_id
    world.attach_capacity = hold_load_factor * grip_force
    return GRASPED


def suction_engage(
    world: WorldState,
    ee_pose: SpatialPose,
    normal_force: float,
    *,
    target_id: str | None = None,
    tilt_tol: float = np.deg2rad(5.0),
    min_force: float = 20.0,
    capacity: float = 30.0,
) -> str:
    """Try to seat the vacuum cups; returns "engaged" or "not_engaged".

    Engagement needs near-perpendicular tool orientation to the module
    surface and enough press-on force.
    """
    if target_id is None:
        target_id = _module_under_tool(world, ee_pose)
        if target_id is None:
            return NOT_ENGAGED
    obj = world.objects[target_id]
    surf = world.scene.surface(f"{target_id}-top")
    tilt = _tilt_from(ee_pose, surf.normal)
    if tilt > tilt_tol or normal_force < min_force:
        return NOT_ENGAGED
    obj.attached_to = "suction"
    obj.grasp_offset = ee_pose.inverse().compose(obj.pose)
    world.attached_object = target_id
    world.attach_capacity = capacity
    return ENGAGED


def _module_under_tool(world: WorldState, ee_pose: SpatialPose) -> str | None:
    best, best_lat = None, np.inf
    for obj in world.objects.values():
        if obj.attached_to is not None:
            continue
        try:
            surf = world.scene.surface(f"{obj.object_id}-top")
        except KeyError:
            continue
        rel = ee_pose.translation - surf.origin
        lat = np.linalg.norm(rel - (rel @ surf.normal) * surf.normal)
        if lat < best_lat:
            best, best_lat = obj.object_id, lat
    return best


def update_attachment(world: WorldState, ee_pose: SpatialPose) -> list[tuple]:
    """Drag the attached object with the effector; drop it when overloaded.

    Returns detach records ``("detach", object_id, position)``; at most one
    per call, and a dropped object never re-detaches.
    """
    if world.attached_object is None:
        return []
    obj = world.objects[world.attached_object]
    obj.pose = ee_pose.compose(obj.grasp_offset)
    load = obj.mass * float(np.linalg.norm(GRAVITY))
    if load > world.attach_capacity:
        position = obj.pose.translation.copy()
        obj.attached_to = None
        obj.grasp_offset = None
        world.attached_object = None
        world.attach_capacity = 0.0
        return [("detach", obj.object_id, position)]
    return []


def release(world: WorldState, ee_pose: SpatialPose) -> str | None:
    """Open the gripper / vent the suction cups; returns the freed object id."""
    if world.attached_object is None:
        return None
    obj = world.objects[world.attached_object]
    obj.pose = ee_pose.compose(obj.grasp_offset)
    obj.attached_to = None
    obj.grasp_offset = None
    world.attached_object = None
    world.attach_capacity = 0.0
    return obj.object_id


def cutting_wrench(
    world: WorldState,
    ee_pose: SpatialPose,
    feed_velocity,
    spindle_on: bool,
) -> Wrench:
    """Cutting reaction forces; advances cut coverage while engaged on-path.

    While the spinning blade is engaged, the sheet resists the feed with
    k_cut * depth * |feed| in place of rubbing friction; other surfaces keep
    the plain penalty law. Motion beyond the path window while engaged sets
    the (sticky) deviation flag. With the spindle off this is pure penalty
    contact and removes no material.
    """
    twist = np.concatenate([np.asarray(feed_velocity, dtype=float).reshape(3), np.zeros(3)])
    cut = world.scene.cut
    if cut is None:
        return contact_wrench(world, ee_pose, twist)
    sheet = world.scene.surface("sheet")
    # the blade keeps cutting with its tip through the thin sheet, so
    # engagement is a slab test over the blade reach; the depth of cut that
    # resists the feed saturates at the sheet thickness
    rel_sheet = ee_pose.translation - sheet.origin
    in_extent = (
        abs(rel_sheet @ sheet.u) <= sheet.extents[0]
        and abs(rel_sheet @ sheet.v) <= sheet.extents[1]
    )
    below = -float(rel_sheet @ sheet.normal)
    engaged = spindle_on and in_extent and 0.0 < below <= cut.engage_reach
    if not engaged:
        world._cut_prev_s = None
        return contact_wrench(world, ee_pose, twist)
    depth = min(below, cut.max_depth)
    base = contact_wrench(world, ee_pose, twist, skip_tangent_on="sheet")
    feed = np.asarray(feed_velocity, dtype=float).reshape(3)
    feed_t = feed - (feed @ sheet.normal) * sheet.normal
    speed = float(np.linalg.norm(feed_t))
    force = base.force.copy()
    if speed > 0.0:
        force -= world.scene.k_cut * depth * speed * (feed_t / speed)

    rel = ee_pose.translation - cut.start
    s = float(rel @ cut.direction) / cut.length
    trans_vec = rel - (rel @ cut.direction) * cut.direction
    trans_vec -= (trans_vec @ sheet.normal) * sheet.normal
    transverse = float(np.linalg.norm(trans_vec))
    if transverse > cut.window:
        world.deviation_flagged = True  # sticky within the trial
        world._cut_prev_s = None
    else:
        s_clamped = float(np.clip(s, 0.0, 1.0))
        if world._cut_prev_s is not None:
            world.add_cut_interval(world._cut_prev_s, s_clamped)
        world._cut_prev_s = s_clamped
    return Wrench(force=force, torque=base.torque, frame="base")


def evaluate_outcome(world: WorldState, spec: TaskSpec, log) -> Outcome:
    """Apply the per-task success/failure predicate to an ended trial."""
    if not getattr(log, "ended", False):
        raise ContractViolationError("trial has not ended")
    time_s = float(log.duration)

    def fail(reason: str) -> Outcome:
        return Outcome(success=False, reason=reason, time_s=time_s)

    # the decimated samples may straddle a short peak, so the loop also
    # records an explicit event when the limit trips
    peak = max((float(np.linalg.norm(s.f_ext_force)) for s in log.samples), default=0.0)
    if peak > spec.force_limit or any(e.kind == "force_limit" for e in log.events):
        return fail(FORCE_LIMIT_EXCEEDED)
    for event in log.events:
        if event.kind == "rep_failure":
            reason = dict(event.data).get("reason", INCOMPLETE)
            return fail(reason)
        if event.kind == "abort":
            return fail(ABORTED)

    if spec.kind == UNBOLTING:
        done = all(f.threads_remaining == 0.0 for f in world.fasteners.values())
        return Outcome(True, COMPLETED, time_s) if done else fail(INCOMPLETE)
    if spec.kind in (BOLT_REMOVAL, COVER_REMOVAL, SORTING):
        successes = len(log.events_of("rep_success"))
        done = successes >= spec.repetitions
        return Outcome(True, COMPLETED, time_s) if done else fail(INCOMPLETE)
    if spec.kind == CUTTING:
        if world.deviation_flagged:
            return fail(PATH_DEVIATION)
        if world.cut_progress >= 1.0 - _CUT_COMPLETE_TOL:
            return Outcome(True, COMPLETED, time_s)
        return fail(INCOMPLETE_CUT)
    raise ContractViolationError(f"unknown task kind {spec.kind!r}")
