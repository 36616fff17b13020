import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from telesim.errors import ContractViolationError
from telesim.geometry import (
    SpatialPose,
    Wrench,
    quat_from_rotvec,
    quat_multiply,
    quat_to_matrix,
    quat_from_matrix,
    quat_to_rotvec,
    rotate_vector,
)

finite_angle = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)
unit_axis = st.sampled_from(
    [(1.0, 0, 0), (0, 1.0, 0), (0, 0, 1.0), (0.6, 0.8, 0), (0.267261, 0.534522, 0.801784)]
)
coord = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)


def poses():
    return st.builds(
        lambda ax, ang, t: SpatialPose.from_axis_angle(ax, ang, translation=t),
        unit_axis,
        finite_angle,
        st.tuples(coord, coord, coord),
    )


@given(poses(), poses(), poses())
@settings(max_examples=200, deadline=None)
def test_compose_is_associative(a, b, c):
    left = a.compose(b).compose(c)
    right = a.compose(b.compose(c))
    assert left.approx_equal(right, tol=1e-12)


@given(poses())
@settings(max_examples=200, deadline=None)
def test_inverse_composes_to_identity(p):
    prod = p.compose(p.inverse())
    assert prod.approx_equal(SpatialPose.identity(), tol=1e-12)
    prod = p.inverse().compose(p)
    assert prod.approx_equal(SpatialPose.identity(), tol=1e-12)


@given(unit_axis, finite_angle)
@settings(max_examples=200, deadline=None)
def test_rotvec_round_trip(axis, angle):
    v = np.asarray(axis) * angle
    back = quat_to_rotvec(quat_from_rotvec(v))
    # log map returns the short representative
    wrapped = np.asarray(axis) * (np.mod(angle + np.pi, 2 * np.pi) - np.pi)
    assert np.allclose(back, wrapped, atol=1e-9) or np.allclose(back, -wrapped, atol=1e-9)


def test_quaternion_matrix_consistency():
    rng = np.random.default_rng(7)
    for _ in range(50):
        v = rng.normal(size=3)
        q = quat_from_rotvec(v)
        m = quat_to_matrix(q)
        assert np.allclose(m @ m.T, np.eye(3), atol=1e-12)
        assert np.isclose(np.linalg.det(m), 1.0, atol=1e-12)
        q2 = quat_from_matrix(m)
        assert min(np.linalg.norm(q - q2), np.linalg.norm(q + q2)) < 1e-9
        w = rng.normal(size=3)
        assert np.allclose(rotate_vector(q, w), m @ w, atol=1e-12)


def test_rotation_must_be_normalized():
    with pytest.raises(ContractViolationError):
        SpatialPose(rotation=np.array([1.0, 0.5, 0.0, 0.0]), translation=np.zeros(3))
    with pytest.raises(ContractViolationError):
        SpatialPose(rotation=np.array([np.nan, 0, 0, 0]), translation=np.zeros(3))


def test_pose_apply_matches_matrix():
    p = SpatialPose.from_axis_angle((0, 0, 1), np.pi / 3, translation=(1, 2, 3))
    pt = np.array([0.4, -0.2, 0.7])
    hom = p.matrix @ np.append(pt, 1.0)
    assert np.allclose(p.apply(pt), hom[:3], atol=1e-12)


def test_wrench_frames():
    w = Wrench(force=(1, 0, 0), torque=(0, 1, 0), frame="ee")
    r = quat_to_matrix(quat_from_rotvec([0, 0, np.pi / 2]))
    wb = w.in_base(r)
    assert wb.frame == "base"
    assert np.allclose(wb.force, (0, 1, 0), atol=1e-12)
    assert np.allclose(wb.torque, (-1, 0, 0), atol=1e-12)
    with pytest.raises(ContractViolationError):
        Wrench(force=(np.inf, 0, 0))
    with pytest.raises(ContractViolationError):
        Wrench(frame="tool")
    with pytest.raises(ContractViolationError):
        Wrench(frame="base") + Wrench(frame="ee")


def test_quat_multiply_identity():
    q = quat_from_rotvec([0.3, -0.2, 0.9])
    ident = np.array([1.0, 0, 0, 0])
    assert np.allclose(quat_multiply(q, ident), q)
    assert np.allclose(quat_multiply(ident, q), q)
