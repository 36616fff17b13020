"""The two bilateral coupling schemes, driven open-loop.

Shows the scaled Cartesian mapping with capped force feedback, then both
closed-loop stiffness relations: a constant end-effector force displaces
the slave by F/Kp in task space, a constant joint torque by tau/Kp in
joint space.
"""

import numpy as np

from telesim.coupling import (
    TargetPose,
    cartesian_impedance_torques,
    haptic_cartesian_profile,
    joint_impedance_torques,
    map_feedback_force,
    map_master_delta,
    pose_error,
    twin_joint_profile,
)
from telesim.dynamics import JointState, forward_kinematics, slave_7dof, step_dynamics
from telesim.dynamics.defaults import SLAVE_HOME_Q
from telesim.geometry import SpatialPose, Wrench

np.set_printoptions(precision=4, suppress=True)
model = slave_7dof()

# --- master-to-slave motion mapping ------------------------------------------
config = haptic_cartesian_profile(
    base_transform=SpatialPose.from_axis_angle((0, 0, 1), np.pi / 2),
    motion_scale=2.0,
)
delta = SpatialPose.from_parts((0.01, 0.0, 0.0))
mapped = map_master_delta(config, delta)
print("master +x delta of 1 cm, 90deg base rotation, scale 2:")
print("  slave delta:", mapped.translation)

# --- force feedback: scaled then capped ---------------------------------------
config = haptic_cartesian_profile()
for magnitude in (10.0, 40.0):
    f = map_feedback_force(config, Wrench(force=(magnitude, 0, 0)))
    print(f"slave force {magnitude:5.1f} N -> master {np.linalg.norm(f.force):5.2f} N")

# --- cartesian stiffness relation ----------------------------------------------
state = JointState.at(SLAVE_HOME_Q)
target = TargetPose(pose=forward_kinematics(model, state.q))
push = Wrench(force=(4.0, 0.0, 0.0))
for _ in range(2500):
    tau = cartesian_impedance_torques(model, state, target, config)
    state = step_dynamics(model, state, tau, push, dt=2e-3)
err = pose_error(forward_kinematics(model, state.q), target.pose)
print(f"\n4 N push against Kp=400 N/m -> settled offset {err[0] * 1000:.2f} mm (expect 10)")

# --- joint stiffness relation ----------------------------------------------------
twin = twin_joint_profile(kp_joint=np.eye(7) * 50.0, kd_joint=np.eye(7) * 15.0,
                          kd_master=np.eye(7) * 5.0)
state = JointState.at(SLAVE_HOME_Q)
master = JointState.at(SLAVE_HOME_Q)
tau_ext = np.zeros(7)
tau_ext[0] = 1.0
for _ in range(2500):
    tau = joint_impedance_torques(model, state, master, twin)
    state = step_dynamics(model, state, tau + tau_ext, None, dt=2e-3)
e_q = state.q - master.q
print(f"1 N*m on joint 1 against Kp=50 -> settled error {e_q[0]:.4f} rad (expect 0.02)")
