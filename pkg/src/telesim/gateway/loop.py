"""Fixed-rate bilateral control loop.

One loop owns the slave simulation, the coupling state and the world. Per
tick it consumes at most one operator command, updates the coupling target
(or master configuration), advances contact and task state, steps the
slave dynamics, and computes the feedback for the master side. Samples are
decimated into the trial log at a fixed sub-rate; all time is simulated,
so headless runs are free to outpace the wall clock.
"""

from __future__ import annotations

import copy
import time
from dataclasses import dataclass, field

import numpy as np

from ..coupling import (
    CARTESIAN,
    JOINT,
    CouplingConfig,
    TargetPose,
    cartesian_impedance_torques,
    joint_impedance_torques,
    map_feedback_force,
    map_master_delta,
    master_feedback_torques,
)
from ..dynamics import (
    JointState,
    ManipulatorModel,
    forward_kinematics,
    jacobian,
    slave_7dof,
    step_dynamics,
)
from ..dynamics.defaults import SLAVE_HOME_Q
from ..errors import ConfigurationError, ContractViolationError
from ..geometry import SpatialPose, Wrench, quat_multiply, quat_normalize
from ..logs import LogSample, TrialLog, make_event
from ..metrics import ACTION_FORCE_SUSTAIN, ACTION_FORCE_THRESHOLD, FINE_DISTANCE
from ..tasks import (
    CUTTING,
    FIRST_GRASP_FAILED,
    GRASP_LOST_OUTSIDE_CONTAINER,
    GRASPED,
    ENGAGED,
    PATH_DEVIATION,
    TaskSpec,
    UNBOLTING,
    WorldState,
    advance_fastener,
    attempt_grasp,
    contact_wrench,
    cutting_wrench,
    evaluate_outcome,
    make_world,
    release,
    suction_engage,
    surface_normal_force,
    update_attachment,
)
from ..tasks.world import BOLT_REMOVAL, COVER_REMOVAL, SORTING
from .protocol import GRIP, RELEASE, SPINDLE, SUCTION, MasterCommand, SlaveFrame

STALE_HOLD_S = 0.05  # no command for this long freezes the slave target


@dataclass(eq=False)
class _SessionState:
    """Everything the loop mutates while a trial runs."""

    model: ManipulatorModel
    spec: TaskSpec
    config: CouplingConfig
    world: WorldState
    state: JointState
    master: JointState
    target: TargetPose
    wrench: Wrench
    spindle_on: bool = False
    reps_done: int = 0
    failure: str | None = None
    stale: bool = False
    last_cmd_t: float = 0.0
    last_seq: int = 0
    dropped: int = 0
    stale_episodes: int = 0
    force_timer: float = 0.0
    filtered_tau_ext: np.ndarray | None = None
    active_limits: set = field(default_factory=set)
    feedback_force: Wrench | None = None
    feedback_torques: np.ndarray | None = None


def _nearest_pending_bolt(world: WorldState, ee: SpatialPose) -> str | None:
    best, best_d = None, np.inf
    for bolt_id, bolt in world.fasteners.items():
        if bolt.threads_remaining <= 0.0:
            continue
        d = float(np.linalg.norm(ee.translation - bolt.position))
        if d < best_d:
            best, best_d = bolt_id, d
    return best


def _nearest_free_object(world: WorldState, ee: SpatialPose) -> str | None:
    best, best_d = None, np.inf
    for obj in world.objects.values():
        if obj.attached_to is not None:
            continue
        d = float(np.linalg.norm(ee.translation - obj.pose.translation))
        if d < best_d:
            best, best_d = obj.object_id, d
    return best


def _online_stage(s: _SessionState, ee: SpatialPose, force_norm: float, dt: float) -> str:
    if s.world.attached_object is not None:
        return "place"
    if s.spec.kind in (UNBOLTING, CUTTING):
        if s.spindle_on:
            return "action"
    else:
        s.force_timer = s.force_timer + dt if force_norm >= ACTION_FORCE_THRESHOLD else 0.0
        if s.force_timer >= ACTION_FORCE_SUSTAIN:
            return "action"
    idx = min(s.reps_done, len(s.spec.targets) - 1)
    dist = float(np.linalg.norm(ee.translation - s.spec.targets[idx].translation))
    return "coarse" if dist > FINE_DISTANCE else "fine"


def run_trial(
    scenario: TaskSpec,
    coupling: CouplingConfig,
    operator,
    rate: float = 1000.0,
    max_duration: float = 120.0,
    *,
    model: ManipulatorModel | None = None,
    trial_id: str = "trial",
    seed: int | None = None,
    log_rate: float = 100.0,
    frame_sink=None,
    pace_to_wall: bool = False,
) -> TrialLog:
    """Run one headless trial and return its complete log.

    The operator object provides ``step(frame, dt) -> MasterCommand | None``
    and a ``done`` flag; the loop ends on task failure, operator completion,
    a closed remote source, or ``max_duration`` of simulated time.
    ``frame_sink(frame)``, when given, observes every control tick (used by
    the live gateway for streaming). Simulated time is authoritative;
    ``pace_to_wall`` slows the loop to real time for interactive sessions.
    """
    if not 100.0 <= rate <= 2000.0:
        raise ContractViolationError(f"rate {rate} outside [100, 2000] Hz")
    model = model or slave_7dof()
    dt = 1.0 / rate
    decim = max(int(round(rate / log_rate)), 1)
    home_q = scenario.home_q if scenario.home_q is not None else SLAVE_HOME_Q
    if len(home_q) != model.n:
        raise ConfigurationError("home configuration does not match the model")

    platform = "haptic" if coupling.mode == CARTESIAN else "twin"
    log = TrialLog(
        trial_id=trial_id,
        platform=platform,
        task=scenario.kind,
        scenario=scenario.name,
        coupling_profile=coupling.name,
        rate_hz=rate,
        sample_rate_hz=rate / decim,
        seed=seed,
    )

    s = _SessionState(
        model=model,
        spec=scenario,
        config=copy.deepcopy(coupling),
        world=make_world(scenario),
        state=JointState.at(np.asarray(home_q, dtype=float)),
        master=JointState.at(np.asarray(home_q, dtype=float)),
        target=TargetPose(pose=forward_kinematics(model, home_q)),
        wrench=Wrench.zero(),
    )

    def fail(t: float, reason: str, **data) -> None:
        if s.failure is None:
            s.failure = reason
            log.events.append(make_event(t, "rep_failure", reason=reason, **data))

    # trials end only on decimation boundaries so the last sample is never
    # earlier than the last event and the sample grid stays exactly uniform
    max_steps = int(np.ceil(max_duration * rate / decim)) * decim
    aborted = False
    stop_pending = False
    stage = "coarse"
    wall_start = time.perf_counter() if pace_to_wall else 0.0
    for k in range(max_steps + 1):
        t = k * dt
        if pace_to_wall:
            ahead = t - (time.perf_counter() - wall_start)
            if ahead > 0.0:
                time.sleep(ahead)
        ee_pose = forward_kinematics(model, s.state.q)
        frame = SlaveFrame(
            seq=k,
            t=t,
            mode=s.config.mode,
            q_f=s.state.q,
            dq_f=s.state.dq,
            x_f=ee_pose,
            f_ext=s.wrench,
            feedback_force=s.feedback_force,
            feedback_torques=s.feedback_torques,
            world=s.world.summary(),
            stage=stage,
        )
        if frame_sink is not None:
            frame_sink(frame)
        if k % decim == 0:
            log.samples.append(
                LogSample(
                    t=t,
                    q_f=tuple(map(float, s.state.q)),
                    dq_f=tuple(map(float, s.state.dq)),
                    x_f_translation=tuple(map(float, ee_pose.translation)),
                    x_f_rotation=tuple(map(float, ee_pose.rotation)),
                    f_ext_force=tuple(map(float, s.wrench.force)),
                    f_ext_torque=tuple(map(float, s.wrench.torque)),
                    effector=_effector_state(s),
                    stage=stage,
                )
            )
            if stop_pending or k == max_steps:
                break
        if not stop_pending:
            if getattr(operator, "closed", False):
                aborted = True
                log.events.append(make_event(t, "abort", reason="operator source closed"))
                stop_pending = True
            elif operator.done:
                stop_pending = True
        if s.failure is not None:
            stop_pending = True

        command = None if stop_pending else operator.step(frame, dt)
        if command is not None:
            if command.seq <= s.last_seq:
                s.dropped += 1
                command = None
            else:
                s.last_seq = command.seq
                s.last_cmd_t = t
                if s.stale:
                    s.stale = False
        if command is None and t - s.last_cmd_t > STALE_HOLD_S and not s.stale:
            s.stale = True
            s.stale_episodes += 1
            log.events.append(make_event(t, "stale_input"))
        if command is not None:
            _apply_command(s, command, ee_pose, t, log, fail)

        # task mechanics at the current EE state
        twist = jacobian(model, s.state.q) @ s.state.dq
        if scenario.tool == "cutter":
            s.wrench = cutting_wrench(s.world, ee_pose, twist[:3], s.spindle_on)
            if s.world.deviation_flagged and s.failure is None:
                s.failure = PATH_DEVIATION
                log.events.append(make_event(t, "deviation"))
        else:
            s.wrench = contact_wrench(s.world, ee_pose, twist)
        if s.spindle_on and scenario.tool == "wrench":
            bolt_id = _nearest_pending_bolt(s.world, ee_pose)
            if bolt_id is not None:
                before = s.world.fasteners[bolt_id].threads_remaining
                advance_fastener(
                    s.world, bolt_id, ee_pose, True, dt,
                    lateral_tol=scenario.unbolt_lateral_tol,
                    tilt_tol=scenario.unbolt_tilt_tol,
                    min_force=scenario.unbolt_min_force,
                    rate=scenario.unscrew_rate,
                )
                if before > 0.0 and s.world.fasteners[bolt_id].threads_remaining == 0.0:
                    s.reps_done += 1
                    log.events.append(make_event(t, "rep_success", target=bolt_id))
        for detach in update_attachment(s.world, ee_pose):
            _, obj_id, position = detach
            log.events.append(make_event(t, "detach", target=obj_id))
            if scenario.in_container(position):
                s.reps_done += 1
                log.events.append(make_event(t, "rep_success", target=obj_id))
            else:
                fail(t, GRASP_LOST_OUTSIDE_CONTAINER, target=obj_id)
        force_norm = float(np.linalg.norm(s.wrench.force))
        if force_norm > scenario.force_limit and s.failure is None:
            s.failure = "force_limit"
            log.events.append(make_event(t, "force_limit", value=force_norm))

        # control law and integration
        if s.config.mode == CARTESIAN:
            tau = cartesian_impedance_torques(model, s.state, s.target, s.config)
        else:
            tau = joint_impedance_torques(model, s.state, s.master, s.config)
        limits = model.torque_limits
        over = np.abs(tau) > limits
        for j in np.flatnonzero(over):
            key = ("torque", int(j))
            if key not in s.active_limits:
                s.active_limits.add(key)
                log.events.append(make_event(t, "torque_saturation", joint=int(j)))
        for key in list(s.active_limits):
            if key[0] == "torque" and not over[key[1]]:
                s.active_limits.discard(key)
        tau = np.clip(tau, -limits, limits)

        step_events: list = []
        s.state = step_dynamics(model, s.state, tau, s.wrench, dt=dt, events=step_events)
        for ev in step_events:
            key = (ev.kind, ev.joint)
            if key not in s.active_limits:
                s.active_limits.add(key)
                log.events.append(make_event(t, "limit_violation", kind=ev.kind, joint=ev.joint))
        kinds_now = {(e.kind, e.joint) for e in step_events}
        for key in list(s.active_limits):
            if key[0] in ("position_limit", "velocity_limit") and key not in kinds_now:
                s.active_limits.discard(key)

        # feedback to the master side
        if s.config.mode == CARTESIAN:
            s.feedback_force = map_feedback_force(s.config, s.wrench)
        else:
            tau_ext = s.state.tau_ext
            if s.config.feedback_lowpass_hz:
                alpha = 1.0 - np.exp(-2.0 * np.pi * s.config.feedback_lowpass_hz * dt)
                if s.filtered_tau_ext is None:
                    s.filtered_tau_ext = tau_ext.copy()
                s.filtered_tau_ext = s.filtered_tau_ext + alpha * (tau_ext - s.filtered_tau_ext)
                tau_ext = s.filtered_tau_ext
            s.feedback_torques = master_feedback_torques(tau_ext, s.master, s.config)
        stage = _online_stage(s, ee_pose, force_norm, dt)

    log.ended = True
    log.counters = {
        "dropped_commands": s.dropped,
        "stale_episodes": s.stale_episodes,
        "ticks": k,
    }
    if aborted:
        from ..tasks.world import ABORTED, Outcome

        log.outcome = Outcome(False, ABORTED, log.duration)
    else:
        log.outcome = evaluate_outcome(s.world, scenario, log)
    log.validate()
    return log


def _effector_state(s: _SessionState) -> str:
    if s.world.attached_object is not None:
        return f"holding:{s.world.attached_object}"
    if s.spindle_on:
        return "spindle"
    return "idle"


def _apply_command(s, command: MasterCommand, ee_pose: SpatialPose, t: float, log, fail) -> None:
    if command.mode != s.config.mode:
        raise ConfigurationError(
            f"command mode {command.mode!r} does not match session mode {s.config.mode!r}"
        )
    if command.mode == CARTESIAN:
        s.config.clutch_engaged = command.clutch
        mapped = map_master_delta(s.config, command.delta_pose)
        s.target.pose = SpatialPose(
            rotation=quat_normalize(quat_multiply(mapped.rotation, s.target.pose.rotation)),
            translation=s.target.pose.translation + mapped.translation,
        )
    else:
        s.master = JointState(q=command.q_l, dq=command.dq_l)

    eff = command.effector
    if eff is None:
        return
    spec = s.spec
    if eff.kind == SPINDLE:
        if eff.on != s.spindle_on:
            s.spindle_on = eff.on
            log.events.append(make_event(t, "spindle_on" if eff.on else "spindle_off"))
    elif eff.kind == GRIP:
        target_id = _nearest_free_object(s.world, ee_pose)
        if target_id is None:
            log.events.append(make_event(t, "grasp_missed"))
            fail(t, FIRST_GRASP_FAILED)
            return
        result = attempt_grasp(
            s.world, ee_pose, eff.force, target_id,
            lateral_tol=spec.grasp_lateral_tol,
            tilt_tol=spec.grasp_tilt_tol,
            hold_load_factor=spec.hold_load_factor,
        )
        if result == GRASPED:
            log.events.append(make_event(t, "grasp", target=target_id))
        else:
            log.events.append(make_event(t, "grasp_missed", target=target_id))
            fail(t, FIRST_GRASP_FAILED, target=target_id)
    elif eff.kind == SUCTION and eff.on:
        target_id = _nearest_free_object(s.world, ee_pose)
        if target_id is None:
            log.events.append(make_event(t, "engage_missed"))
            fail(t, FIRST_GRASP_FAILED)
            return
        try:
            normal_force = surface_normal_force(s.world, f"{target_id}-top", ee_pose)
        except KeyError:
            normal_force = 0.0
        result = suction_engage(
            s.world, ee_pose, normal_force,
            target_id=target_id,
            tilt_tol=spec.suction_tilt_tol,
            min_force=spec.suction_min_force,
            capacity=spec.suction_capacity,
        )
        log.events.append(make_event(t, "suction_on"))
        if result == ENGAGED:
            log.events.append(make_event(t, "engage", target=target_id))
        else:
            log.events.append(make_event(t, "engage_missed", target=target_id))
            fail(t, FIRST_GRASP_FAILED, target=target_id)
    elif eff.kind == RELEASE or (eff.kind == SUCTION and not eff.on):
        if eff.kind == SUCTION:
            log.events.append(make_event(t, "suction_off"))
        freed = release(s.world, ee_pose)
        if freed is not None:
            log.events.append(make_event(t, "release", target=freed))
            position = s.world.objects[freed].pose.translation
            if s.spec.in_container(position):
                s.reps_done += 1
                log.events.append(make_event(t, "rep_success", target=freed))
            else:
                fail(t, GRASP_LOST_OUTSIDE_CONTAINER, target=freed)
