"""Kinematics and dynamics of rigid serial chains.

Joint-space dynamics follow the standard rigid-body form

    M(q) qdd + c(q, qd) + g(q) = tau + tau_ext

with the velocity-product term kept as a torque vector. The inertia matrix
is assembled by Lagrangian summation over per-link COM Jacobians; bias
torques (Coriolis/centrifugal plus gravity) come from a world-frame
recursive Newton-Euler pass, so both quantities describe the same model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractViolationError, SingularityError
from ..geometry import SpatialPose, Wrench, quat_from_matrix
from .model import JointState, ManipulatorModel

_SINGULARITY_TOL = 1e-6


def _cross3(a, b) -> np.ndarray:
    # single-pair cross product; np.cross has too much overhead here
    return np.array(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


class _Memo:
    """Tiny FIFO cache for pure per-configuration results.

    Keys include id(model): edit a model's joints or links only before its
    first use, or build a fresh model.
    """

    def __init__(self, size: int = 8):
        self.size = size
        self.data: dict = {}

    def get(self, key):
        return self.data.get(key)

    def put(self, key, value):
        if len(self.data) >= self.size:
            self.data.pop(next(iter(self.data)))
        self.data[key] = value
        return value


_packed_cache: dict = {}
_chain_memo = _Memo()
_rnea_memo = _Memo()
_inertia_memo = _Memo()
_jacobian_memo = _Memo()


def _purge_model(mid: int) -> None:
    for memo in (_chain_memo, _rnea_memo, _inertia_memo, _jacobian_memo):
        for key in [k for k in memo.data if k[0] == mid]:
            memo.data.pop(key, None)


def _packed(model: ManipulatorModel) -> dict:
    """Constant per-model arrays (offset matrices, axes, inertial data).

    The cache holds the model itself so its id cannot be recycled while
    entries keyed on it exist; a newly seen id flushes any leftovers.
    """
    key = id(model)
    hit = _packed_cache.get(key)
    if hit is not None and hit[0] is model:
        return hit[1]
    _purge_model(key)
    packed = {
        "off_r": np.stack([j.parent_offset.rotation_matrix for j in model.joints]),
        "off_p": np.stack([j.parent_offset.translation for j in model.joints]),
        "axes": np.stack([j.axis for j in model.joints]),
        "masses": np.array([l.mass for l in model.links]),
        "coms": np.stack([l.com for l in model.links]),
        "inertias": np.stack([l.inertia for l in model.links]),
        "rotor": model.rotor_inertias,
        "ee_r": model.ee_offset.rotation_matrix,
        "ee_p": model.ee_offset.translation,
    }
    if len(_packed_cache) > 16:
        old_id = next(iter(_packed_cache))
        _packed_cache.pop(old_id)
        _purge_model(old_id)
    _packed_cache[key] = (model, packed)
    return packed


def chain_transforms(model: ManipulatorModel, q) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """World rotation, origin and rotation axis of every joint frame.

    Returns (rotations (N,3,3), origins (N,3), axes (N,3)). The joint frame
    is taken after applying the joint's own rotation; the axis direction is
    unaffected by that rotation. Treat the returned arrays as read-only.
    """
    q = model.check_q(q)
    key = (id(model), q.tobytes())
    hit = _chain_memo.get(key)
    if hit is not None:
        return hit
    packed = _packed(model)
    off_r, off_p, local_axes = packed["off_r"], packed["off_p"], packed["axes"]
    n = model.n
    rotations = np.empty((n, 3, 3))
    origins = np.empty((n, 3))
    axes = np.empty((n, 3))
    r = np.eye(3)
    p = np.zeros(3)
    for i in range(n):
        p = p + r @ off_p[i]
        r = r @ off_r[i]
        r = r @ _axis_angle_matrix(local_axes[i], q[i])
        rotations[i] = r
        origins[i] = p
        axes[i] = r @ local_axes[i]
    return _chain_memo.put(key, (rotations, origins, axes))


def _axis_angle_matrix(axis: np.ndarray, angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    t = 1.0 - c
    x, y, z = axis
    return np.array(
        [
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ]
    )


def forward_kinematics(model: ManipulatorModel, q) -> SpatialPose:
    """End-effector pose in the model base frame."""
    rotations, origins, _ = chain_transforms(model, q)
    packed = _packed(model)
    r_last, p_last = rotations[-1], origins[-1]
    r = r_last @ packed["ee_r"]
    p = p_last + r_last @ packed["ee_p"]
    return SpatialPose(rotation=quat_from_matrix(r), translation=p)


def link_frames(model: ManipulatorModel, q) -> list[SpatialPose]:
    """World pose of every joint frame plus the end effector (for rendering)."""
    rotations, origins, _ = chain_transforms(model, q)
    frames = [
        SpatialPose(rotation=quat_from_matrix(rotations[i]), translation=origins[i])
        for i in range(model.n)
    ]
    frames.append(forward_kinematics(model, q))
    return frames


def jacobian(model: ManipulatorModel, q) -> np.ndarray:
    """Geometric Jacobian (6 x N) in the base frame: xd = J qd.

    Rows 0..2 map to linear EE velocity, rows 3..5 to angular velocity.
    """
    q = model.check_q(q)
    key = (id(model), q.tobytes())
    hit = _jacobian_memo.get(key)
    if hit is not None:
        return hit.copy()
    rotations, origins, axes = chain_transforms(model, q)
    p_ee = origins[-1] + rotations[-1] @ _packed(model)["ee_p"]
    d = p_ee[None, :] - origins
    jac = np.empty((6, model.n))
    jac[0, :] = axes[:, 1] * d[:, 2] - axes[:, 2] * d[:, 1]
    jac[1, :] = axes[:, 2] * d[:, 0] - axes[:, 0] * d[:, 2]
    jac[2, :] = axes[:, 0] * d[:, 1] - axes[:, 1] * d[:, 0]
    jac[3:, :] = axes.T
    return _jacobian_memo.put(key, jac).copy()


def inertia_matrix(model: ManipulatorModel, q) -> np.ndarray:
    """Joint-space inertia matrix by Lagrangian summation over link Jacobians."""
    q = model.check_q(q)
    key = (id(model), q.tobytes())
    hit = _inertia_memo.get(key)
    if hit is not None:
        return hit.copy()
    rotations, origins, axes = chain_transforms(model, q)
    packed = _packed(model)
    n = model.n
    masses, coms, inertias = packed["masses"], packed["coms"], packed["inertias"]

    coms_w = origins + np.einsum("nij,nj->ni", rotations, coms)
    # jv[i, j] = z_j x (com_i - p_j) for j <= i, else 0
    diff = coms_w[:, None, :] - origins[None, :, :]
    mask = np.tril(np.ones((n, n)))[:, :, None]
    jv = np.cross(np.broadcast_to(axes[None, :, :], (n, n, 3)), diff) * mask
    jw = np.broadcast_to(axes[None, :, :], (n, n, 3)) * mask

    inertias_w = rotations @ inertias @ rotations.transpose(0, 2, 1)
    m_lin = np.einsum("i,ijk,ilk->jl", masses, jv, jv)
    m_ang = np.einsum("ijk,ikm,ilm->jl", jw, inertias_w, jw)
    return _inertia_memo.put(key, m_lin + m_ang + np.diag(packed["rotor"])).copy()


def inverse_dynamics(model: ManipulatorModel, q, dq, ddq, include_gravity: bool = True) -> np.ndarray:
    """Joint torques for a prescribed motion (recursive Newton-Euler).

    With ddq = 0 this returns the bias torques c(q, qd) + g(q); with dq and
    ddq both zero it returns gravity torques alone.
    """
    q = model.check_q(q)
    dq = model.check_q(dq)
    ddq = model.check_q(ddq)
    key = (id(model), q.tobytes(), dq.tobytes(), ddq.tobytes(), include_gravity)
    hit = _rnea_memo.get(key)
    if hit is not None:
        return hit.copy()
    rotations, origins, axes = chain_transforms(model, q)
    packed = _packed(model)
    masses, coms, inertias = packed["masses"], packed["coms"], packed["inertias"]
    n = model.n

    omega = np.zeros(3)
    alpha = np.zeros(3)
    acc = -model.gravity if include_gravity else np.zeros(3)
    p_prev = np.zeros(3)

    com_r = np.empty((n, 3))  # joint origin -> link COM, world coords
    forces = np.empty((n, 3))
    moments = np.empty((n, 3))

    for i in range(n):
        dp = origins[i] - p_prev
        acc = acc + _cross3(alpha, dp) + _cross3(omega, _cross3(omega, dp))
        zdq = axes[i] * dq[i]
        alpha = alpha + _cross3(omega, zdq) + axes[i] * ddq[i]
        omega = omega + zdq

        r = rotations[i] @ coms[i]
        a_com = acc + _cross3(alpha, r) + _cross3(omega, _cross3(omega, r))
        inertia_w = rotations[i] @ inertias[i] @ rotations[i].T

        com_r[i] = r
        forces[i] = masses[i] * a_com
        moments[i] = inertia_w @ alpha + _cross3(omega, inertia_w @ omega)
        p_prev = origins[i]

    tau = np.empty(n)
    f_child = np.zeros(3)
    n_child = np.zeros(3)
    p_child = np.zeros(3)
    for i in range(n - 1, -1, -1):
        f_total = forces[i] + f_child
        n_total = moments[i] + _cross3(com_r[i], forces[i]) + n_child
        if i < n - 1:
            n_total = n_total + _cross3(p_child - origins[i], f_child)
        tau[i] = axes[i] @ n_total
        f_child = f_total
        n_child = n_total
        p_child = origins[i]
    return _rnea_memo.put(key, tau + packed["rotor"] * ddq).copy()


def gravity_torques(model: ManipulatorModel, q) -> np.ndarray:
    """Gravitational joint torques, equal to the potential-energy gradient."""
    z = np.zeros(model.n)
    return inverse_dynamics(model, q, z, z, include_gravity=True)


def coriolis_torques(model: ManipulatorModel, q, dq) -> np.ndarray:
    """Velocity-product torques c(q, qd); zero at qd = 0, quadratic in qd."""
    return inverse_dynamics(model, q, dq, np.zeros(model.n), include_gravity=False)


def bias_torques(model: ManipulatorModel, q, dq) -> np.ndarray:
    """c(q, qd) + g(q) in a single recursion."""
    return inverse_dynamics(model, q, dq, np.zeros(model.n), include_gravity=True)


def potential_energy(model: ManipulatorModel, q) -> float:
    rotations, origins, _ = chain_transforms(model, q)
    coms_w = origins + np.einsum("nij,nj->ni", rotations, np.stack([l.com for l in model.links]))
    masses = np.array([l.mass for l in model.links])
    return float(-masses @ (coms_w @ model.gravity))


def kinetic_energy(model: ManipulatorModel, q, dq) -> float:
    dq = model.check_q(dq)
    return float(0.5 * dq @ inertia_matrix(model, q) @ dq)  # rotor term is inside M


def total_energy(model: ManipulatorModel, state: JointState) -> float:
    return kinetic_energy(model, state.q, state.dq) + potential_energy(model, state.q)


def operational_space_inertia(model: ManipulatorModel, q, task_dims=None) -> np.ndarray:
    """EE-reflected inertia inv(J M^-1 J^T), optionally restricted to task rows.

    Raises SingularityError when the (selected) Jacobian loses row rank,
    i.e. its smallest singular value falls below 1e-6.
    """
    jac = jacobian(model, q)
    if task_dims is not None:
        jac = jac[list(task_dims), :]
    sv = np.linalg.svd(jac, compute_uv=False)
    if sv.min() < _SINGULARITY_TOL:
        raise SingularityError(
            f"Jacobian is rank deficient (smallest singular value {sv.min():.2e})"
        )
    m = inertia_matrix(model, q)
    a = jac @ np.linalg.solve(m, jac.T)
    return np.linalg.inv(a)


@dataclass(frozen=True)
class LimitEvent:
    """Emitted when the integrator clamps a joint at a limit."""

    kind: str  # "position_limit" or "velocity_limit"
    joint: int
    value: float
    limit: float


def step_dynamics(
    model: ManipulatorModel,
    state: JointState,
    tau,
    f_ext: Wrench | None = None,
    dt: float = 1e-3,
    events: list | None = None,
) -> JointState:
    """Advance the state one semi-implicit Euler step.

    Solves M qdd = tau + J^T f_ext - c(q, qd) - g(q) - damping * qd, then
    updates velocity before position. Velocity and position limits are
    enforced by clamping; each clamp appends a LimitEvent to ``events``
    when a list is supplied.
    """
    if not 0.0 < dt <= 0.01:
        raise ContractViolationError(f"dt {dt} outside (0, 0.01]")
    q = model.check_q(state.q)
    dq = model.check_q(state.dq)
    tau = model.check_q(tau)

    rhs = tau - bias_torques(model, q, dq) - model.damping * dq
    tau_ext = np.zeros(model.n)
    if f_ext is not None:
        jac = jacobian(model, q)
        if f_ext.frame != "base":
            f_ext = f_ext.in_base(forward_kinematics(model, q).rotation_matrix)
        tau_ext = jac.T @ f_ext.as_vector()
        rhs = rhs + tau_ext

    m = inertia_matrix(model, q)
    try:
        qdd = np.linalg.solve(m, rhs)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("inertia matrix is not invertible; model is degenerate") from exc

    dq_new = dq + qdd * dt
    vel_lim = model.velocity_limits
    over = np.abs(dq_new) > vel_lim
    if np.any(over):
        for j in np.flatnonzero(over):
            if events is not None:
                events.append(
                    LimitEvent("velocity_limit", int(j), float(dq_new[j]), float(vel_lim[j]))
                )
        dq_new = np.clip(dq_new, -vel_lim, vel_lim)

    q_new = q + dq_new * dt
    limits = model.position_limits
    low, high = limits[:, 0], limits[:, 1]
    below, above = q_new < low, q_new > high
    if np.any(below) or np.any(above):
        for j in np.flatnonzero(below | above):
            lim = low[j] if below[j] else high[j]
            if events is not None:
                events.append(LimitEvent("position_limit", int(j), float(q_new[j]), float(lim)))
            # zero the outward velocity component so the clamp sticks
            if (below[j] and dq_new[j] < 0) or (above[j] and dq_new[j] > 0):
                dq_new[j] = 0.0
        q_new = np.clip(q_new, low, high)

    return JointState(q=q_new, dq=dq_new, tau_ext=tau_ext)
