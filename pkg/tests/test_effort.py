import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from handeffort.effort import (
    JOINT_GROUPS,
    EffortScore,
    finger_independence,
    group_spread,
    rank_letters_by_effort,
    resting_angles,
    thumb_effort,
    write_effort,
)
from handeffort.errors import EmptyRestingSet
from handeffort.kinematics import JOINT_IDS, JointAngleVector, joint_angles
from handeffort.landmark_io import LandmarkFrame, RestingHandSet
from synth import planar_hand, random_angles, random_rotation


def vec(d):
    return JointAngleVector.from_mapping(d)


def as_dict(h):
    return dict(h.items())


def test_groups_are_disjoint_and_thumbless():
    flat = [j for g in JOINT_GROUPS for j in g]
    assert len(flat) == len(set(flat)) == 12
    assert not set(flat) & {1, 2, 3}


def test_te_zero_for_matching_thumb(rng):
    rest = [JointAngleVector(rng.uniform(0, math.pi, 15)) for _ in range(3)]
    h = dict(zip(JOINT_IDS, rng.uniform(0, math.pi, 15)))
    for j in (1, 2, 3):
        h[j] = rest[1].angle(j)
    assert thumb_effort(vec(h), rest) == 0.0


def test_te_equal_offsets():
    r = {j: 1.0 for j in JOINT_IDS}
    h = {**r, 1: 1.3, 2: 0.7, 3: 1.3}
    assert thumb_effort(vec(h), [vec(r)]) == pytest.approx(0.3, abs=1e-15)


def test_te_min_over_four(rng):
    for _ in range(50):
        rest = [JointAngleVector(rng.uniform(0, math.pi, 15)) for _ in range(4)]
        h = JointAngleVector(rng.uniform(0, math.pi, 15))
        want = min(sum(abs(h.angle(j) - r.angle(j)) for j in (1, 2, 3)) / 3 for r in rest)
        assert thumb_effort(h, rest) == pytest.approx(want, abs=1e-15)


def test_te_empty_set(rng):
    with pytest.raises(EmptyRestingSet):
        thumb_effort(JointAngleVector(np.zeros(15)), [])


def test_resting_hand_set_input(rng):
    frames = [planar_hand(random_angles(rng)) for _ in range(2)]
    rs = RestingHandSet(tuple((f"r{i}", LandmarkFrame(i, f)) for i, f in enumerate(frames)))
    h = JointAngleVector(rng.uniform(0, math.pi, 15))
    assert thumb_effort(h, rs) == thumb_effort(h, [joint_angles(f) for f in frames])


def test_fi_zero_case():
    r = {j: 0.4 for j in JOINT_IDS}
    h = {1: 0.4, 2: 0.4, 3: 0.4, 5: 0.2, 9: 0.2, 13: 0.2, 17: 0.2,
         6: 1.1, 10: 1.1, 14: 1.1, 18: 1.1, 7: 0.9, 11: 0.9, 15: 0.9, 19: 0.9}
    s = finger_independence(vec(h), [vec(r)])
    assert s.thumb_effort == 0.0
    assert s.finger_independence == 0.0


def test_fi_one_odd_joint():
    # MCP group (0, 0, 0, 1): pairs (5,17), (9,17), (13,17) each contribute 1
    r = {j: 0.0 for j in JOINT_IDS}
    h = {**r, 17: 1.0}
    pairs = [(a, b) for a in JOINT_GROUPS[0] for b in JOINT_GROUPS[0] if a < b and abs(h[a] - h[b]) > 0]
    assert len(pairs) == 3
    assert finger_independence(vec(h), [vec(r)]).finger_independence == 3.0


def test_fi_against_double_loop(rng):
    for _ in range(200):
        rest = [JointAngleVector(rng.uniform(0, math.pi, 15)) for _ in range(4)]
        h = JointAngleVector(rng.uniform(0, math.pi, 15))
        want = oracles.finger_independence(as_dict(h), [as_dict(r) for r in rest])
        s = finger_independence(h, rest)
        assert abs(s.finger_independence - want) <= 1e-12
        assert abs(s.finger_independence - 2 * s.thumb_effort - oracles.group_pairs(as_dict(h))) <= 1e-12


def test_te_weight_configurable(rng):
    rest = [JointAngleVector(rng.uniform(0, math.pi, 15))]
    h = JointAngleVector(rng.uniform(0, math.pi, 15))
    s1 = finger_independence(h, rest, te_weight=1.0)
    s2 = finger_independence(h, rest)
    assert s2.finger_independence - s1.finger_independence == pytest.approx(s1.thumb_effort)


angles = st.lists(st.floats(0, math.pi), min_size=15, max_size=15).map(JointAngleVector)


@given(angles, st.lists(angles, min_size=1, max_size=4), angles)
def test_effort_properties(h, rest, extra):
    s = finger_independence(h, rest)
    assert s.thumb_effort >= 0 and s.finger_independence >= 0
    assert s.finger_independence - 2 * s.thumb_effort == pytest.approx(group_spread(h), abs=1e-12)
    # a larger resting set can only lower thumb effort
    assert thumb_effort(h, rest + [extra]) <= s.thumb_effort


def test_fi_rigid_invariance(rng):
    rest = [joint_angles(planar_hand(random_angles(rng))) for _ in range(2)]
    for _ in range(20):
        pts = rng.normal(size=(21, 3))
        moved = 3.7 * pts @ random_rotation(rng).T + 5.0
        a = finger_independence(joint_angles(pts), rest).finger_independence
        b = finger_independence(joint_angles(moved), rest).finger_independence
        assert a == pytest.approx(b, abs=1e-9)


def test_rank_letters():
    assert [c for c, _ in rank_letters_by_effort({"A": 1.0, "B": 0.5, "C": 2.0})] == ["B", "A", "C"]
    assert [c for c, _ in rank_letters_by_effort({"B": 1.0, "A": 1.0})] == ["A", "B"]
    scores = [EffortScore("X", 0.0, 2.0), EffortScore("Y", 0.0, 1.0)]
    assert rank_letters_by_effort(scores) == [("Y", 1.0), ("X", 2.0)]


def test_write_effort():
    buf = io.StringIO()
    write_effort([EffortScore("A", 0.25, 1.5, "s1:4")], buf)
    assert buf.getvalue() == "letter,sample_id,thumb_effort,finger_independence\nA,s1:4,0.25,1.5\n"


def test_resting_angles_empty():
    with pytest.raises(EmptyRestingSet):
        resting_angles([])
