from .algorithms import (
    LimitEvent,
    bias_torques,
    chain_transforms,
    coriolis_torques,
    forward_kinematics,
    gravity_torques,
    inertia_matrix,
    inverse_dynamics,
    jacobian,
    kinetic_energy,
    link_frames,
    operational_space_inertia,
    potential_energy,
    step_dynamics,
    total_energy,
)
from .defaults import (
    SLAVE_HOME_Q,
    hanging_pendulum,
    master_6dof,
    single_link,
    slave_7dof,
    two_link_planar,
)
from .model import (
    MODEL_FORMAT_VERSION,
    JointSpec,
    JointState,
    LinkSpec,
    ManipulatorModel,
    load_manipulator,
    manipulator_from_tree,
    manipulator_to_tree,
    save_manipulator,
)

__all__ = [
    "LimitEvent",
    "JointSpec",
    "JointState",
    "LinkSpec",
    "ManipulatorModel",
    "MODEL_FORMAT_VERSION",
    "SLAVE_HOME_Q",
    "bias_torques",
    "chain_transforms",
    "coriolis_torques",
    "forward_kinematics",
    "gravity_torques",
    "hanging_pendulum",
    "inertia_matrix",
    "inverse_dynamics",
    "jacobian",
    "kinetic_energy",
    "link_frames",
    "load_manipulator",
    "manipulator_from_tree",
    "manipulator_to_tree",
    "master_6dof",
    "operational_space_inertia",
    "potential_energy",
    "save_manipulator",
    "single_link",
    "slave_7dof",
    "step_dynamics",
    "total_energy",
    "two_link_planar",
]
