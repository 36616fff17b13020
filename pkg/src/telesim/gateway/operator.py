"""Operator command sources: scripted waypoint followers and remote queues.

A scripted operator stands in for the human: it steers a virtual master
through waypoints at a set speed, optionally presses until a measured
contact force is reached, waits on task feedback, and issues effector
commands. Identical (script, seed) pairs produce identical command
sequences.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..coupling import CARTESIAN, JOINT, CouplingConfig
from ..dynamics import ManipulatorModel, forward_kinematics, jacobian
from ..errors import ContractViolationError
from ..geometry import (
    SpatialPose,
    quat_conjugate,
    quat_from_rotvec,
    quat_multiply,
    quat_normalize,
    quat_to_rotvec,
)
from .protocol import EffectorCommand, MasterCommand, SlaveFrame

_ANGULAR_SPEED = 1.5  # rad/s used for orientation moves
_ARRIVAL_EPS = 1e-9


@dataclass(eq=False)
class Waypoint:
    position: np.ndarray
    orientation: np.ndarray | None = None  # quaternion; None keeps the current one
    speed: float = 0.15
    settle: float = 0.0  # pause after arrival so the arm catches up, s
    press_force: float | None = None  # descend until |F_ext| holds at this, N
    press_speed: float = 0.02
    press_hold: float = 0.1  # force must stay at target this long, s
    until_fastener: str | None = None  # hold until this bolt reads zero threads
    dwell: float = 0.0
    on_arrival: list[EffectorCommand] = field(default_factory=list)
    on_complete: list[EffectorCommand] = field(default_factory=list)

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        if self.orientation is not None:
            self.orientation = np.asarray(self.orientation, dtype=float).reshape(4)
        if self.speed <= 0:
            raise ContractViolationError("waypoint speed must be positive")


@dataclass(eq=False)
class OperatorScript:
    waypoints: list[Waypoint]
    noise_sigma: float = 0.0  # m of per-step positional jitter
    seed: int = 0

    def __post_init__(self):
        if not self.waypoints:
            raise ContractViolationError("script needs at least one waypoint")


class ScriptedOperator:
    """Deterministic waypoint-following command source.

    In cartesian mode it emits master-frame pose increments (inverting the
    configured base rotation and motion scale); in joint mode it integrates
    a virtual master arm with damped least-squares rate control and emits
    its joint trajectory.
    """

    def __init__(
        self,
        script: OperatorScript,
        coupling: CouplingConfig,
        model: ManipulatorModel,
        home_q: np.ndarray,
    ):
        self.script = script
        self.coupling = coupling
        self.model = model
        self.rng = np.random.default_rng(script.seed)
        self.seq = 0
        self._idx = 0
        self._phase = "move"
        self._timer = 0.0
        self._pending: deque[EffectorCommand] = deque()
        self.mode = coupling.mode
        if self.mode == JOINT:
            self.q_l = np.asarray(home_q, dtype=float).copy()
            self.cmd_pose = forward_kinematics(model, self.q_l)
            # visual-servo integrator: a human watching the slave leans the
            # master further to cancel steady deflection under contact
            self._corr_t = np.zeros(3)
            self._corr_r = np.zeros(3)
        else:
            self.q_l = None
            self.cmd_pose = forward_kinematics(model, np.asarray(home_q, dtype=float))

    @property
    def done(self) -> bool:
        return self._idx >= len(self.script.waypoints) and not self._pending

    def _waypoint(self) -> Waypoint:
        return self.script.waypoints[self._idx]

    def _advance_phase(self, frame: SlaveFrame) -> None:
        wp = self._waypoint()
        order = ["move", "settle", "press", "until", "dwell", "done"]
        pos = order.index(self._phase)
        for nxt in order[pos + 1 :]:
            if nxt == "settle" and wp.settle <= 0.0:
                continue
            if nxt == "press" and wp.press_force is None:
                continue
            if nxt == "until" and wp.until_fastener is None:
                continue
            if nxt == "dwell" and wp.dwell <= 0.0:
                continue
            self._phase = nxt
            self._timer = 0.0
            return

    def _desired_motion(self, frame: SlaveFrame, dt: float) -> tuple[np.ndarray, np.ndarray]:
        """(translation step, rotation-vector step) for the command pose."""
        wp = self._waypoint()
        step = np.zeros(3)
        rot_step = np.zeros(3)
        # under positional jitter the command never lands exactly, so the
        # arrival window widens with the configured noise
        arrival_tol = max(_ARRIVAL_EPS, 4.0 * self.script.noise_sigma)
        if self._phase == "move":
            to_target = wp.position - self.cmd_pose.translation
            dist = float(np.linalg.norm(to_target))
            if dist > _ARRIVAL_EPS:
                step = to_target * min(wp.speed * dt / dist, 1.0)
            if wp.orientation is not None:
                rel = quat_multiply(wp.orientation, quat_conjugate(self.cmd_pose.rotation))
                rv = quat_to_rotvec(rel)
                angle = float(np.linalg.norm(rv))
                if angle > _ARRIVAL_EPS:
                    rot_step = rv * min(_ANGULAR_SPEED * dt / angle, 1.0)
            arrived = dist <= arrival_tol and (
                wp.orientation is None or float(np.linalg.norm(quat_to_rotvec(
                    quat_multiply(wp.orientation, quat_conjugate(self.cmd_pose.rotation))
                ))) <= 1e-6
            )
            if arrived:
                self._pending.extend(wp.on_arrival)
                self._advance_phase(frame)
        elif self._phase == "settle":
            self._timer += dt
            if self._timer >= wp.settle:
                self._advance_phase(frame)
        elif self._phase == "press":
            # descend while light, hold while the target force is sustained
            if float(np.linalg.norm(frame.f_ext.force)) >= wp.press_force:
                self._timer += dt
                if self._timer >= wp.press_hold:
                    self._advance_phase(frame)
            else:
                self._timer = 0.0
                step = np.array([0.0, 0.0, -wp.press_speed * dt])
        elif self._phase == "until":
            threads = frame.world.get("fasteners", {}).get(wp.until_fastener)
            if threads is not None and threads <= 0.0:
                self._advance_phase(frame)
        elif self._phase == "dwell":
            self._timer += dt
            if self._timer >= wp.dwell:
                self._advance_phase(frame)
        if self._phase == "done":
            self._pending.extend(wp.on_complete)
            self._idx += 1
            self._phase = "move"
        if self.script.noise_sigma > 0.0:
            step = step + self.rng.normal(0.0, self.script.noise_sigma, 3)
        return step, rot_step

    def step(self, frame: SlaveFrame, dt: float) -> MasterCommand | None:
        if self.done:
            return None
        if self._idx < len(self.script.waypoints):
            step, rot_step = self._desired_motion(frame, dt)
        else:
            step, rot_step = np.zeros(3), np.zeros(3)
        effector = self._pending.popleft() if self._pending else None
        self.seq += 1
        new_rot = quat_multiply(quat_from_rotvec(rot_step), self.cmd_pose.rotation)
        new_pos = self.cmd_pose.translation + step

        if self.mode == CARTESIAN:
            self.cmd_pose = SpatialPose(rotation=new_rot, translation=new_pos)
            r_inv = self.coupling.base_transform.rotation_matrix.T
            delta = SpatialPose(
                rotation=quat_from_rotvec(r_inv @ rot_step),
                translation=r_inv @ step / self.coupling.motion_scale,
            )
            return MasterCommand(
                seq=self.seq, t=frame.t, mode=CARTESIAN, delta_pose=delta, clutch=True,
                effector=effector,
            )

        # joint mode: track the command pose with the virtual master arm,
        # integrating the slave's observed pose error the way an operator
        # corrects for joint-space compliance under load
        err_t = new_pos - frame.x_f.translation
        err_r = quat_to_rotvec(quat_multiply(new_rot, quat_conjugate(frame.x_f.rotation)))
        force = np.asarray(frame.f_ext.force, dtype=float)
        force_norm = float(np.linalg.norm(force))
        if force_norm > 3.0:
            # felt contact: stop leaning along the reaction, keep fixing drift
            fhat = force / force_norm
            err_t = err_t - (err_t @ fhat) * fhat
        self._corr_t = np.clip(self._corr_t + 2.0 * err_t * dt, -0.05, 0.05)
        self._corr_r = np.clip(self._corr_r + 2.0 * err_r * dt, -0.2, 0.2)
        goal_pos = new_pos + self._corr_t
        goal_rot = quat_normalize(quat_multiply(quat_from_rotvec(self._corr_r), new_rot))
        master_pose = forward_kinematics(self.model, self.q_l)
        pos_err = goal_pos - master_pose.translation
        rot_err = quat_to_rotvec(quat_multiply(goal_rot, quat_conjugate(master_pose.rotation)))
        twist = np.concatenate([pos_err, rot_err]) / dt
        # keep the virtual master gentle: cap the tracking twist
        nrm = np.linalg.norm(twist[:3])
        if nrm > 4.0 * self._waypoint_speed():
            twist *= 4.0 * self._waypoint_speed() / nrm
        jac = jacobian(self.model, self.q_l)
        jjt = jac @ jac.T + 1e-4 * np.eye(6)
        dq_l = jac.T @ np.linalg.solve(jjt, twist)
        self.q_l = self.q_l + dq_l * dt
        self.cmd_pose = SpatialPose(rotation=new_rot, translation=new_pos)
        return MasterCommand(
            seq=self.seq, t=frame.t, mode=JOINT, q_l=self.q_l.copy(), dq_l=dq_l,
            effector=effector,
        )

    def _waypoint_speed(self) -> float:
        if self._idx < len(self.script.waypoints):
            return max(self.script.waypoints[self._idx].speed, 0.05)
        return 0.05


class RemoteOperator:
    """Command source fed by a network session; bounded, ordered, late drops counted."""

    def __init__(self, mode: str, max_queue: int = 2048):
        self.mode = mode
        self._queue: deque[MasterCommand] = deque()
        self._max_queue = max_queue
        self.last_seq = 0
        self.dropped = 0
        self.overflowed = 0
        self.closed = False

    @property
    def done(self) -> bool:
        return self.closed

    def push(self, cmd: MasterCommand) -> bool:
        """Enqueue a decoded command; returns False when dropped."""
        if cmd.seq <= self.last_seq:
            self.dropped += 1
            return False
        if len(self._queue) >= self._max_queue:
            self.overflowed += 1
            return False
        self.last_seq = cmd.seq
        self._queue.append(cmd)
        return True

    def step(self, frame: SlaveFrame, dt: float) -> MasterCommand | None:
        if self._queue:
            return self._queue.popleft()
        return None

    def close(self) -> None:
        self.closed = True
