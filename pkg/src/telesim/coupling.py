"""Bilateral master-slave coupling.

Two schemes are provided and selected by ``CouplingConfig.mode``:

* ``cartesian``: master pose increments are rotated into the slave base
  frame and scaled, the slave tracks the integrated target under a task
  space impedance law, and measured end-effector forces are reflected back
  scaled by ``feedback_gain`` and capped at the master's force limit.
* ``joint``: two identical arms are coupled 1:1 in joint space; estimated
  external joint torques are reflected to the master minus a damping term.

A configuration holds the gains for exactly one mode; operations of the
other mode reject it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .dynamics import (
    ManipulatorModel,
    JointState,
    bias_torques,
    forward_kinematics,
    inertia_matrix,
    jacobian,
)
from .errors import ConfigurationError, ContractViolationError, ParseError, UnsupportedVersionError
from .geometry import (
    SpatialPose,
    Wrench,
    quat_conjugate,
    quat_from_rotvec,
    quat_multiply,
    quat_to_rotvec,
)
from .dynamics.model import pose_from_tree, _pose_to_tree

COUPLING_FORMAT_VERSION = 1

CARTESIAN = "cartesian"
JOINT = "joint"


def _gain_matrix(value, size: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.eye(size) * float(arr)
    elif arr.ndim == 1:
        if arr.shape != (size,):
            raise ConfigurationError(f"{name} diagonal must have length {size}")
        arr = np.diag(arr)
    if arr.shape != (size, size):
        raise ConfigurationError(f"{name} must be {size}x{size}")
    if np.max(np.abs(arr - arr.T)) > 1e-9:
        raise ConfigurationError(f"{name} must be symmetric")
    try:
        np.linalg.cholesky(arr)
    except np.linalg.LinAlgError:
        raise ConfigurationError(f"{name} must be positive definite") from None
    return arr


@dataclass(eq=False)
class TargetPose:
    """Desired slave end-effector pose in the slave base frame."""

    pose: SpatialPose = field(default_factory=SpatialPose.identity)


@dataclass(eq=False)
class CouplingConfig:
    mode: str = CARTESIAN
    base_transform: SpatialPose = field(default_factory=SpatialPose.identity)
    motion_scale: float = 1.0
    feedback_gain: float = 0.1
    master_force_cap: float = 3.3
    kp_task: np.ndarray | None = None
    kd_task: np.ndarray | None = None
    kp_joint: np.ndarray | None = None
    kd_joint: np.ndarray | None = None
    kd_master: np.ndarray | None = None
    clutch_engaged: bool = True
    master_renders_torque: bool = False
    master_torque_limit: np.ndarray | None = None
    feedback_lowpass_hz: float | None = None  # optional smoothing of reflected torque
    kd_null: float = 4.0  # cartesian mode: null-space damping, N*m*s/rad
    name: str = ""

    def __post_init__(self):
        if self.mode not in (CARTESIAN, JOINT):
            raise ConfigurationError(f"unknown coupling mode {self.mode!r}")
        if not 0.0 < self.feedback_gain <= 1.0:
            raise ConfigurationError("feedback_gain must lie in (0, 1]")
        if self.motion_scale <= 0:
            raise ConfigurationError("motion_scale must be positive")
        if self.master_force_cap <= 0:
            raise ConfigurationError("master_force_cap must be positive")
        if self.mode == CARTESIAN:
            if self.kp_task is None or self.kd_task is None:
                raise ConfigurationError("cartesian mode requires kp_task and kd_task")
            if any(g is not None for g in (self.kp_joint, self.kd_joint, self.kd_master)):
                raise ConfigurationError("cartesian mode must not carry joint-mode gains")
            self.kp_task = _gain_matrix(self.kp_task, 6, "kp_task")
            self.kd_task = _gain_matrix(self.kd_task, 6, "kd_task")
        else:
            if self.kp_joint is None or self.kd_joint is None or self.kd_master is None:
                raise ConfigurationError("joint mode requires kp_joint, kd_joint and kd_master")
            if any(g is not None for g in (self.kp_task, self.kd_task)):
                raise ConfigurationError("joint mode must not carry task-space gains")
            n = np.asarray(self.kp_joint).shape[-1]
            self.kp_joint = _gain_matrix(self.kp_joint, n, "kp_joint")
            self.kd_joint = _gain_matrix(self.kd_joint, n, "kd_joint")
            self.kd_master = _gain_matrix(self.kd_master, n, "kd_master")
        if self.master_torque_limit is not None:
            self.master_torque_limit = np.asarray(self.master_torque_limit, dtype=float).reshape(-1)
            if np.any(self.master_torque_limit <= 0):
                raise ConfigurationError("master torque limits must be positive")

    def require_mode(self, mode: str) -> None:
        if self.mode != mode:
            raise ConfigurationError(f"operation requires {mode} mode, config is {self.mode}")


def haptic_cartesian_profile(**overrides) -> CouplingConfig:
    """Scaled Cartesian coupling: G = 0.1 feedback, 3.3 N master cap."""
    kp = np.array([400.0, 400.0, 400.0, 30.0, 30.0, 30.0])
    defaults = dict(
        mode=CARTESIAN,
        kp_task=np.diag(kp),
        kd_task=np.diag(2.0 * np.sqrt(kp)),
        feedback_gain=0.1,
        master_force_cap=3.3,
        motion_scale=1.0,
        name="haptic-cartesian",
    )
    defaults.update(overrides)
    return CouplingConfig(**defaults)


def twin_joint_profile(n: int = 7, **overrides) -> CouplingConfig:
    """1:1 joint coupling between identical arms with torque reflection."""
    kp = np.array([600.0, 600.0, 600.0, 600.0, 250.0, 150.0, 50.0])[:n]
    kd = np.array([50.0, 50.0, 50.0, 20.0, 20.0, 20.0, 10.0])[:n]
    defaults = dict(
        mode=JOINT,
        kp_joint=np.diag(kp),
        kd_joint=np.diag(kd),
        kd_master=np.diag(0.3 * kd),
        feedback_gain=1.0,
        master_torque_limit=np.array([87.0, 87.0, 87.0, 87.0, 12.0, 12.0, 12.0])[:n],
        name="twin-joint",
    )
    defaults.update(overrides)
    return CouplingConfig(**defaults)


# --- cartesian scheme ---------------------------------------------------------

def map_master_delta(config: CouplingConfig, delta_master: SpatialPose) -> SpatialPose:
    """Map a master pose increment into the slave base frame.

    The rotation block of ``base_transform`` carries master-frame vectors to
    slave-frame vectors; translation is scaled by ``motion_scale``, rotation
    angle is preserved. With the clutch disengaged the identity increment is
    returned so the slave target holds still.
    """
    config.require_mode(CARTESIAN)
    angle = delta_master.rotation_angle()
    if angle >= np.pi - 1e-12:
        raise ContractViolationError("delta rotation angle must be below pi")
    if not config.clutch_engaged:
        return SpatialPose.identity()
    r = config.base_transform.rotation_matrix
    translation = config.motion_scale * (r @ delta_master.translation)
    rotvec = r @ quat_to_rotvec(delta_master.rotation)
    return SpatialPose(rotation=quat_from_rotvec(rotvec), translation=translation)


def pose_error(x_f: SpatialPose, x_t: SpatialPose) -> np.ndarray:
    """6-vector pose error: translation difference and axis-angle of R_f R_t^T."""
    rel = quat_multiply(x_f.rotation, quat_conjugate(x_t.rotation))
    return np.concatenate([x_f.translation - x_t.translation, quat_to_rotvec(rel)])


def cartesian_impedance_torques(
    model: ManipulatorModel,
    state: JointState,
    x_t: TargetPose,
    config: CouplingConfig,
) -> np.ndarray:
    """Task-space impedance law with dynamics compensation.

    tau = J^T (-Kp e_x - Kd J qd) + c(q, qd) + g(q). Jacobian-transpose
    only, so kinematic singularities are not an error here.

    For redundant arms a dynamically consistent null-space damping term
    (gain ``kd_null``) is added; it is invisible to the end effector, so the
    task-space closed loop is unchanged, and it vanishes at qd = 0.
    """
    config.require_mode(CARTESIAN)
    q = model.check_q(state.q)
    dq = model.check_q(state.dq)
    e_x = pose_error(forward_kinematics(model, q), x_t.pose)
    jac = jacobian(model, q)
    wrench_cmd = -config.kp_task @ e_x - config.kd_task @ (jac @ dq)
    tau = jac.T @ wrench_cmd + bias_torques(model, q, dq)
    if config.kd_null > 0.0 and model.n > 6:
        m = inertia_matrix(model, q)
        minv_jt = np.linalg.solve(m, jac.T)
        lam = np.linalg.inv(jac @ minv_jt + 1e-9 * np.eye(6))
        tau_damp = -config.kd_null * dq
        # N = I - J^T Lambda J M^-1 maps tau_damp into the task null space
        tau = tau + tau_damp - jac.T @ (lam @ (jac @ np.linalg.solve(m, tau_damp)))
    return tau


def map_feedback_force(config: CouplingConfig, f_ext: Wrench) -> Wrench:
    """Reflect a slave-frame EE wrench to the master: F_l = G R^-1 F_ext.

    The force norm is clamped to ``master_force_cap`` preserving direction.
    Torque passes through the same rotation and gain but is zeroed unless
    the master renders torques (3-axis force device by default).
    """
    config.require_mode(CARTESIAN)
    r_inv = config.base_transform.rotation_matrix.T
    force = config.feedback_gain * (r_inv @ f_ext.force)
    norm = np.linalg.norm(force)
    if norm > config.master_force_cap:
        force = force * (config.master_force_cap / norm)
    if config.master_renders_torque:
        torque = config.feedback_gain * (r_inv @ f_ext.torque)
    else:
        torque = np.zeros(3)
    return Wrench(force=force, torque=torque, frame="base")


# --- joint scheme --------------------------------------------------------------

def joint_impedance_torques(
    model: ManipulatorModel,
    slave: JointState,
    master: JointState,
    config: CouplingConfig,
) -> np.ndarray:
    """1:1 joint coupling: tau = -Kp e_q - Kd ed_q + c + g with e_q = q_f - q_l."""
    config.require_mode(JOINT)
    q_f = model.check_q(slave.q)
    dq_f = model.check_q(slave.dq)
    if master.q.shape != q_f.shape:
        raise ConfigurationError(
            f"joint coupling needs identical arms (master has {master.q.shape[0]} joints, "
            f"slave has {q_f.shape[0]})"
        )
    e_q = q_f - master.q
    de_q = dq_f - master.dq
    return -config.kp_joint @ e_q - config.kd_joint @ de_q + bias_torques(model, q_f, dq_f)


def master_feedback_torques(
    tau_ext_slave: np.ndarray,
    master: JointState,
    config: CouplingConfig,
    events: list | None = None,
) -> np.ndarray:
    """Reflect slave external torques to the master: tau_l = tau_ext - Kd,l qd_l.

    Clamped per joint to the configured master torque limits; each clamp
    appends a saturation record to ``events`` when a list is given.
    """
    config.require_mode(JOINT)
    tau_ext = np.asarray(tau_ext_slave, dtype=float).reshape(-1)
    tau_l = tau_ext - config.kd_master @ master.dq
    limit = config.master_torque_limit
    if limit is not None:
        over = np.abs(tau_l) > limit
        if np.any(over):
            if events is not None:
                for j in np.flatnonzero(over):
                    events.append(("torque_saturation", int(j), float(tau_l[j])))
            tau_l = np.clip(tau_l, -limit, limit)
    return tau_l


# --- profile files --------------------------------------------------------------

def _gain_to_tree(mat: np.ndarray | None):
    if mat is None:
        return None
    d = np.diag(np.diag(mat))
    if np.allclose(mat, d):
        return [float(v) for v in np.diag(mat)]
    return [[float(v) for v in row] for row in mat]


def coupling_to_tree(config: CouplingConfig) -> dict:
    tree = {
        "format_version": COUPLING_FORMAT_VERSION,
        "kind": "coupling",
        "name": config.name,
        "mode": config.mode,
        "base_transform": _pose_to_tree(config.base_transform),
        "motion_scale": float(config.motion_scale),
        "feedback_gain": float(config.feedback_gain),
        "master_force_cap": float(config.master_force_cap),
        "master_renders_torque": bool(config.master_renders_torque),
    }
    for key in ("kp_task", "kd_task", "kp_joint", "kd_joint", "kd_master"):
        val = _gain_to_tree(getattr(config, key))
        if val is not None:
            tree[key] = val
    if config.master_torque_limit is not None:
        tree["master_torque_limit"] = [float(v) for v in config.master_torque_limit]
    if config.feedback_lowpass_hz is not None:
        tree["feedback_lowpass_hz"] = float(config.feedback_lowpass_hz)
    if config.mode == CARTESIAN:
        tree["kd_null"] = float(config.kd_null)
    return tree


def coupling_from_tree(tree: dict) -> CouplingConfig:
    version = tree.get("format_version")
    if version != COUPLING_FORMAT_VERSION:
        raise UnsupportedVersionError(f"coupling format_version {version!r} not supported")
    kwargs = dict(
        mode=tree.get("mode", CARTESIAN),
        base_transform=pose_from_tree(tree.get("base_transform")),
        motion_scale=float(tree.get("motion_scale", 1.0)),
        feedback_gain=float(tree.get("feedback_gain", 0.1)),
        master_force_cap=float(tree.get("master_force_cap", 3.3)),
        master_renders_torque=bool(tree.get("master_renders_torque", False)),
        name=str(tree.get("name", "")),
    )
    for key in ("kp_task", "kd_task", "kp_joint", "kd_joint", "kd_master"):
        if key in tree:
            kwargs[key] = np.asarray(tree[key], dtype=float)
    if "master_torque_limit" in tree:
        kwargs["master_torque_limit"] = np.asarray(tree["master_torque_limit"], dtype=float)
    if "feedback_lowpass_hz" in tree:
        kwargs["feedback_lowpass_hz"] = float(tree["feedback_lowpass_hz"])
    if "kd_null" in tree:
        kwargs["kd_null"] = float(tree["kd_null"])
    return CouplingConfig(**kwargs)


def save_coupling(config: CouplingConfig, path) -> None:
    Path(path).write_text(yaml.safe_dump(coupling_to_tree(config), sort_keys=False))


def load_coupling(path) -> CouplingConfig:
    tree = yaml.safe_load(Path(path).read_text())
    if not isinstance(tree, dict):
        raise ParseError(f"coupling file {path} is not a key-value tree")
    return coupling_from_tree(tree)
