import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from handeffort.errors import DegenerateBone
from handeffort.kinematics import (
    JOINT_IDS,
    JointAngleVector,
    angular_distance,
    handshape_distance,
    joint_angle_array,
    joint_angles,
    read_angles,
    write_angles,
)
from handeffort.landmark_io import LandmarkFrame
from synth import planar_hand, random_angles, random_rotation


def test_joint_order():
    assert JOINT_IDS == (1, 2, 3, 5, 6, 7, 9, 10, 11, 13, 14, 15, 17, 18, 19)


def test_collinear_hand_is_straight():
    pts = np.outer(np.arange(1, 22), [0.3, -1.0, 2.0])
    # landmark 0 must sit behind every base so each chain runs straight outward
    pts = np.vstack([[0, 0, 0], np.tile(pts[1:5], (5, 1))])
    h = joint_angles(LandmarkFrame(0, pts))
    np.testing.assert_allclose(h.angles, 0.0, atol=1e-12)


def test_right_angles():
    # every digit traces the unit square: wrist -> (1,0,0) -> (1,1,0) -> (0,1,0) -> wrist
    pts = np.zeros((21, 3))
    for base in (1, 5, 9, 13, 17):
        pts[base] = [1, 0, 0]
        pts[base + 1] = [1, 1, 0]
        pts[base + 2] = [0, 1, 0]
    h = joint_angles(pts)
    np.testing.assert_allclose(h.angles, math.pi / 2, atol=1e-12)


def test_fully_folded_is_pi():
    ang = {j: math.pi for j in JOINT_IDS}
    h = joint_angles(planar_hand(ang))
    np.testing.assert_allclose(h.angles, math.pi, atol=1e-12)


def test_against_brute_force(rng):
    for _ in range(50):
        pts = rng.normal(size=(21, 3))
        got = joint_angles(pts)
        want = oracles.joint_angles(pts.tolist())
        for j in JOINT_IDS:
            assert abs(got.angle(j) - want[j]) <= 1e-12


def test_planar_construction_recovers_angles(rng):
    for _ in range(20):
        ang = random_angles(rng)
        h = joint_angles(planar_hand(ang))
        for j in JOINT_IDS:
            assert h.angle(j) == pytest.approx(ang[j], abs=1e-12)


def test_degenerate_bone(rng):
    pts = rng.normal(size=(21, 3))
    pts[7] = pts[6]
    with pytest.raises(DegenerateBone):
        joint_angles(pts)


def test_batch_matches_single(rng):
    pts = rng.normal(size=(7, 21, 3))
    batch = joint_angle_array(pts)
    for i in range(7):
        np.testing.assert_array_equal(batch[i], joint_angles(pts[i]).angles)


def test_rigid_motion_invariance(rng):
    for _ in range(100):
        pts = rng.normal(size=(21, 3))
        q = random_rotation(rng)
        if rng.random() < 0.5:
            q = q @ np.diag([1.0, 1.0, -1.0])
        moved = rng.uniform(0.01, 100) * pts @ q.T + rng.normal(size=3) * 50
        np.testing.assert_allclose(joint_angles(moved).angles, joint_angles(pts).angles, atol=1e-9, rtol=0)


@pytest.mark.parametrize("a,b,want", [
    (math.pi / 2, math.pi / 2, 0.0),
    (0.0, math.pi, math.pi),
    (0.3, 1.0, 0.7),
])
def test_angular_distance(a, b, want):
    assert angular_distance(a, b) == pytest.approx(want, abs=1e-15)


def test_angular_distance_is_literal_mod():
    # no wrap to the shorter way round
    assert angular_distance(0.1, 6.0) == pytest.approx(5.9)
    assert angular_distance(0.0, 7.0) == pytest.approx(7.0 - 2 * math.pi)


angle = st.floats(0.0, math.pi)


@given(angle, angle)
def test_angular_distance_symmetric_nonnegative(a, b):
    assert angular_distance(a, b) == angular_distance(b, a)
    assert 0 <= angular_distance(a, b) <= math.pi
    assert (angular_distance(a, b) == 0) == (a == b)


def test_handshape_distance_examples(rng):
    h = JointAngleVector(rng.uniform(0, math.pi, 15))
    assert handshape_distance(h, h) == 0.0
    zero = JointAngleVector(np.zeros(15))
    full = JointAngleVector(np.full(15, math.pi))
    assert handshape_distance(zero, full) == pytest.approx(math.pi, abs=1e-15)


def test_handshape_distance_against_loop(rng):
    for _ in range(100):
        a, b = (rng.uniform(0, math.pi, 15) for _ in range(2))
        want = oracles.handshape_distance(dict(zip(JOINT_IDS, a)), dict(zip(JOINT_IDS, b)))
        assert abs(handshape_distance(JointAngleVector(a), JointAngleVector(b)) - want) <= 1e-12


vec = st.lists(angle, min_size=15, max_size=15).map(JointAngleVector)


@given(vec, vec, vec)
def test_handshape_distance_pseudometric(x, y, z):
    assert handshape_distance(x, x) == 0
    assert handshape_distance(x, y) == handshape_distance(y, x)
    assert handshape_distance(x, z) <= handshape_distance(x, y) + handshape_distance(y, z) + 1e-12
    assert 0 <= handshape_distance(x, y) <= math.pi


def test_angle_vector_validation():
    with pytest.raises(ValueError):
        JointAngleVector(np.zeros(14))
    with pytest.raises(ValueError):
        JointAngleVector(np.full(15, 4.0))


def test_angle_csv_round_trip(rng):
    rows = [("s1", 3, JointAngleVector(rng.uniform(0, math.pi, 15))),
            ("s2", 0, JointAngleVector(rng.uniform(0, math.pi, 15)))]
    buf = io.StringIO()
    write_angles(rows, buf)
    assert buf.getvalue().splitlines()[0] == "sequence_id,frame,joint,angle_radians"
    back = read_angles(buf.getvalue().encode())
    assert back == {("s1", 3): rows[0][2], ("s2", 0): rows[1][2]}
