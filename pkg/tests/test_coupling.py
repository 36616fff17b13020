import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from telesim.coupling import (
    CouplingConfig,
    TargetPose,
    cartesian_impedance_torques,
    coupling_from_tree,
    coupling_to_tree,
    haptic_cartesian_profile,
    joint_impedance_torques,
    load_coupling,
    map_feedback_force,
    map_master_delta,
    master_feedback_torques,
    pose_error,
    save_coupling,
    twin_joint_profile,
)
from telesim.dynamics import (
    JointState,
    forward_kinematics,
    gravity_torques,
    step_dynamics,
    two_link_planar,
)
from telesim.dynamics.defaults import SLAVE_HOME_Q
from telesim.errors import ConfigurationError, ContractViolationError
from telesim.geometry import SpatialPose, Wrench


# --- delta mapping --------------------------------------------------------------

def test_identity_mapping():
    config = haptic_cartesian_profile()
    delta = SpatialPose.from_parts((0.01, 0, 0))
    out = map_master_delta(config, delta)
    assert np.allclose(out.translation, (0.01, 0, 0), atol=1e-15)
    assert out.rotation_angle() < 1e-15


def test_quarter_turn_base_transform():
    config = haptic_cartesian_profile(
        base_transform=SpatialPose.from_axis_angle((0, 0, 1), np.pi / 2)
    )
    out = map_master_delta(config, SpatialPose.from_parts((0.01, 0, 0)))
    assert np.allclose(out.translation, (0, 0.01, 0), atol=1e-12)


def test_translation_scaling_leaves_rotation():
    config = haptic_cartesian_profile(motion_scale=2.0)
    delta = SpatialPose.from_axis_angle((1, 0, 0), 0.2, translation=(0.01, 0, 0))
    out = map_master_delta(config, delta)
    assert np.allclose(out.translation, (0.02, 0, 0), atol=1e-12)
    assert np.isclose(out.rotation_angle(), 0.2, atol=1e-12)


@given(st.floats(min_value=0.1, max_value=5.0))
@settings(max_examples=50, deadline=None)
def test_delta_mapping_linearity(scale):
    base = haptic_cartesian_profile()
    scaled = haptic_cartesian_profile(motion_scale=scale)
    delta = SpatialPose.from_axis_angle((0, 1, 0), 0.3, translation=(0.004, -0.002, 0.001))
    out1 = map_master_delta(base, delta)
    out2 = map_master_delta(scaled, delta)
    assert np.allclose(out2.translation, scale * out1.translation, atol=1e-12)
    assert np.isclose(out2.rotation_angle(), out1.rotation_angle(), atol=1e-12)


def test_clutch_disengaged_freezes_target():
    config = haptic_cartesian_profile(clutch_engaged=False)
    out = map_master_delta(config, SpatialPose.from_parts((0.05, 0.02, -0.01)))
    assert out.approx_equal(SpatialPose.identity(), tol=1e-15)


def test_delta_rotation_near_pi_rejected():
    config = haptic_cartesian_profile()
    with pytest.raises(ContractViolationError):
        map_master_delta(config, SpatialPose.from_axis_angle((0, 0, 1), np.pi))


# --- pose error -----------------------------------------------------------------

def test_pose_error_zero_for_identical():
    p = SpatialPose.from_axis_angle((0, 1, 0), 0.4, translation=(0.3, -0.1, 0.2))
    assert np.allclose(pose_error(p, p), np.zeros(6), atol=1e-15)


def test_pose_error_translation_only():
    t = SpatialPose.from_parts((0, 0, 0.0))
    f = SpatialPose.from_parts((0, 0, 0.05))
    assert np.allclose(pose_error(f, t), [0, 0, 0.05, 0, 0, 0], atol=1e-15)


def test_pose_error_principal_rotation():
    t = SpatialPose.identity()
    f = SpatialPose.from_axis_angle((1, 0, 0), 0.2)
    assert np.allclose(pose_error(f, t), [0, 0, 0, 0.2, 0, 0], atol=1e-12)


# --- cartesian impedance ----------------------------------------------------------

def test_cartesian_equilibrium_zero_gravity():
    model = two_link_planar(gravity=(0, 0, 0))
    state = JointState.at([0.4, 0.5])
    target = TargetPose(pose=forward_kinematics(model, state.q))
    config = haptic_cartesian_profile()
    tau = cartesian_impedance_torques(model, state, target, config)
    assert np.allclose(tau, np.zeros(2), atol=1e-12)


def test_cartesian_gravity_compensation(slave_model):
    state = JointState.at(SLAVE_HOME_Q)
    target = TargetPose(pose=forward_kinematics(slave_model, state.q))
    config = haptic_cartesian_profile()
    tau = cartesian_impedance_torques(slave_model, state, target, config)
    assert np.allclose(tau, gravity_torques(slave_model, SLAVE_HOME_Q), atol=1e-10)


def test_cartesian_steady_state_error_matches_stiffness(slave_model):
    # constant 4 N push along x against Kp = 400 N/m -> 0.01 m offset
    config = haptic_cartesian_profile()
    state = JointState.at(SLAVE_HOME_Q)
    target = TargetPose(pose=forward_kinematics(slave_model, state.q))
    wrench = Wrench(force=(4.0, 0.0, 0.0))
    dt = 1e-3
    for _ in range(4000):
        tau = cartesian_impedance_torques(slave_model, state, target, config)
        state = step_dynamics(slave_model, state, tau, wrench, dt=dt)
    err = pose_error(forward_kinematics(slave_model, state.q), target.pose)
    assert abs(err[0] - 0.0100) < 0.0001
    assert np.linalg.norm(err[1:3]) < 1e-3
    assert np.linalg.norm(state.dq) < 1e-3


# --- feedback force ---------------------------------------------------------------

def test_feedback_scaling_gain():
    config = haptic_cartesian_profile()
    out = map_feedback_force(config, Wrench(force=(10.0, 0, 0)))
    assert np.allclose(out.force, (1.0, 0, 0), atol=1e-15)
    assert np.allclose(out.torque, np.zeros(3))


def test_feedback_clamped_at_master_cap():
    config = haptic_cartesian_profile()
    out = map_feedback_force(config, Wrench(force=(40.0, 0, 0)))
    assert np.isclose(np.linalg.norm(out.force), 3.3, atol=1e-12)
    assert out.force[0] > 0 and np.allclose(out.force[1:], 0.0)


def test_feedback_zero_input():
    config = haptic_cartesian_profile()
    out = map_feedback_force(config, Wrench.zero())
    assert np.allclose(out.force, 0.0) and np.allclose(out.torque, 0.0)


@given(st.tuples(*[st.floats(-20, 20) for _ in range(3)]))
@settings(max_examples=100, deadline=None)
def test_feedback_norm_law(force):
    config = haptic_cartesian_profile(
        base_transform=SpatialPose.from_axis_angle((0.6, 0.8, 0), 0.7),
        master_force_cap=1e9,
    )
    f_ext = Wrench(force=force)
    out = map_feedback_force(config, f_ext)
    assert abs(np.linalg.norm(out.force) - 0.1 * np.linalg.norm(f_ext.force)) < 1e-12


def test_feedback_always_within_cap(rng):
    config = haptic_cartesian_profile()
    for _ in range(100):
        f = Wrench(force=rng.uniform(-100, 100, size=3))
        out = map_feedback_force(config, f)
        assert np.linalg.norm(out.force) <= 3.3 + 1e-12


def test_feedback_torque_passthrough_when_enabled():
    config = haptic_cartesian_profile(master_renders_torque=True)
    out = map_feedback_force(config, Wrench(force=(0, 0, 0), torque=(2.0, 0, 0)))
    assert np.allclose(out.torque, (0.2, 0, 0), atol=1e-15)


# --- joint coupling ----------------------------------------------------------------

def test_joint_tracking_zero_gravity():
    model = two_link_planar(gravity=(0, 0, 0))
    config = twin_joint_profile(n=2)
    s = JointState.at([0.3, -0.4])
    m = JointState.at([0.3, -0.4])
    tau = joint_impedance_torques(model, s, m, config)
    assert np.allclose(tau, np.zeros(2), atol=1e-12)


def test_joint_gravity_compensation(slave_model):
    config = twin_joint_profile()
    s = JointState.at(SLAVE_HOME_Q)
    m = JointState.at(SLAVE_HOME_Q)
    tau = joint_impedance_torques(slave_model, s, m, config)
    assert np.allclose(tau, gravity_torques(slave_model, SLAVE_HOME_Q), atol=1e-10)


def test_joint_steady_state_error_matches_stiffness(slave_model):
    # constant 1 N*m on joint 1 against Kp = 50 -> 0.02 rad offset
    config = twin_joint_profile(
        kp_joint=np.eye(7) * 50.0, kd_joint=np.eye(7) * 15.0, kd_master=np.eye(7) * 5.0
    )
    state = JointState.at(SLAVE_HOME_Q)
    master = JointState.at(SLAVE_HOME_Q)
    tau_inj = np.zeros(7)
    tau_inj[0] = 1.0
    for _ in range(5000):
        tau = joint_impedance_torques(slave_model, state, master, config)
        state = step_dynamics(slave_model, state, tau + tau_inj, None, dt=1e-3)
    e_q = state.q - master.q
    assert abs(e_q[0] - 0.0200) < 0.0002
    assert np.max(np.abs(e_q[1:])) < 1e-3
    assert np.linalg.norm(state.dq) < 1e-3


def test_joint_dimension_mismatch_is_config_error(slave_model):
    config = twin_joint_profile()
    with pytest.raises(ConfigurationError):
        joint_impedance_torques(slave_model, JointState.zero(7), JointState.zero(6), config)


# --- master torque reflection --------------------------------------------------------

def test_master_torques_at_rest():
    config = twin_joint_profile()
    out = master_feedback_torques(np.zeros(7), JointState.zero(7), config)
    assert np.allclose(out, np.zeros(7))


def test_master_torques_pure_reflection():
    config = twin_joint_profile()
    tau_ext = np.array([1.0, 1.0, 0, 0, 0, 0, 0])
    out = master_feedback_torques(tau_ext, JointState.zero(7), config)
    assert np.allclose(out, tau_ext, atol=1e-15)


def test_master_torques_pure_damping():
    config = twin_joint_profile(kd_master=np.eye(7) * 2.0)
    master = JointState(q=np.zeros(7), dq=np.array([0.5, 0, 0, 0, 0, 0, 0]))
    out = master_feedback_torques(np.zeros(7), master, config)
    assert np.allclose(out, [-1.0, 0, 0, 0, 0, 0, 0], atol=1e-15)


def test_master_torques_saturation_event():
    config = twin_joint_profile()
    events = []
    tau_ext = np.zeros(7)
    tau_ext[6] = 100.0  # wrist limit is 12
    out = master_feedback_torques(tau_ext, JointState.zero(7), config, events=events)
    assert out[6] == 12.0
    assert events and events[0][0] == "torque_saturation" and events[0][1] == 6


# --- mode isolation and profiles ------------------------------------------------------

def test_mixed_gains_rejected():
    with pytest.raises(ConfigurationError):
        CouplingConfig(mode="cartesian", kp_task=np.eye(6), kd_task=np.eye(6), kp_joint=np.eye(7))
    with pytest.raises(ConfigurationError):
        twin_joint_profile(kp_task=np.eye(6))
    with pytest.raises(ConfigurationError):
        CouplingConfig(mode="cartesian")  # missing task gains


def test_wrong_mode_operations_rejected(slave_model):
    cart = haptic_cartesian_profile()
    twin = twin_joint_profile()
    with pytest.raises(ConfigurationError):
        map_master_delta(twin, SpatialPose.identity())
    with pytest.raises(ConfigurationError):
        map_feedback_force(twin, Wrench.zero())
    with pytest.raises(ConfigurationError):
        joint_impedance_torques(slave_model, JointState.zero(7), JointState.zero(7), cart)
    with pytest.raises(ConfigurationError):
        master_feedback_torques(np.zeros(7), JointState.zero(7), cart)


def test_invalid_gains_rejected():
    with pytest.raises(ConfigurationError):
        haptic_cartesian_profile(kp_task=np.diag([1, 1, 1, 1, 1, -1.0]))
    with pytest.raises(ConfigurationError):
        haptic_cartesian_profile(feedback_gain=0.0)
    with pytest.raises(ConfigurationError):
        haptic_cartesian_profile(feedback_gain=1.5)
    with pytest.raises(ConfigurationError):
        haptic_cartesian_profile(motion_scale=-1.0)


def test_profile_file_round_trip(tmp_path):
    for config in (haptic_cartesian_profile(), twin_joint_profile()):
        path = tmp_path / f"{config.name}.yaml"
        save_coupling(config, path)
        loaded = load_coupling(path)
        assert loaded.mode == config.mode
        assert loaded.feedback_gain == config.feedback_gain
        assert loaded.master_force_cap == config.master_force_cap
        tree1 = coupling_to_tree(config)
        tree2 = coupling_to_tree(loaded)
        assert tree1 == tree2
