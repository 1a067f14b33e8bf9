"""Articulatory effort of a handshape: thumb effort and finger independence."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations
from typing import IO, Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import EmptyRestingSet
from .kinematics import JointAngleVector, angular_distance, joint_angles
from .landmark_io import RestingHandSet

THUMB_JOINTS = (1, 2, 3)

# MCP, PIP and DIP joints of the four fingers
JOINT_GROUPS = (
    (5, 9, 13, 17),
    (6, 10, 14, 18),
    (7, 11, 15, 19),
)

TE_WEIGHT = 2.0

EFFORT_HEADER = ["letter", "sample_id", "thumb_effort", "finger_independence"]

Resting = Union[RestingHandSet, Sequence[JointAngleVector]]


@dataclass(frozen=True)
class EffortScore:
    letter: str | None
    thumb_effort: float
    finger_independence: float
    sample_id: str | None = None


def resting_angles(resting: Resting) -> list[JointAngleVector]:
    """Joint angles of every resting hand; angle vectors pass through."""
    if isinstance(resting, RestingHandSet):
        hands = [joint_angles(frame) for _, frame in resting]
    else:
        hands = list(resting)
    if not hands:
        raise EmptyRestingSet("resting hand set is empty")
    return hands


def thumb_effort(h: JointAngleVector, resting: Resting) -> float:
    """Smallest mean thumb-joint distance between ``h`` and any resting hand."""
    thumb = h.select(THUMB_JOINTS)
    best = None
    for r in resting_angles(resting):
        d = float(np.mean(angular_distance(thumb, r.select(THUMB_JOINTS))))
        if best is None or d < best:
            best = d
    return best


def group_spread(h: JointAngleVector) -> float:
    """Sum of pairwise angular distances within each same-type joint group
    (3 groups x 6 pairs)."""
    total = 0.0
    for group in JOINT_GROUPS:
        a = h.select(group)
        for i, j in combinations(range(len(group)), 2):
            total += angular_distance(a[i], a[j])
    return total


def finger_independence(h: JointAngleVector, resting: Resting, *, letter=None,
                        sample_id=None, te_weight: float = TE_WEIGHT) -> EffortScore:
    te = thumb_effort(h, resting)
    fi = te_weight * te + group_spread(h)
    return EffortScore(letter, te, fi, sample_id)


def rank_letters_by_effort(scores: Union[Mapping[str, float], Iterable[EffortScore]]) -> list[tuple[str, float]]:
    """Letters ordered from lowest to highest finger independence; equal
    scores fall back to alphabetical order."""
    if isinstance(scores, Mapping):
        items = [(k, float(v)) for k, v in scores.items()]
    else:
        items = [(s.letter, float(s.finger_independence)) for s in scores]
    return sorted(items, key=lambda kv: (kv[1], kv[0]))


def write_effort(scores: Iterable[EffortScore], out: IO[str]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(EFFORT_HEADER)
    for s in scores:
        w.writerow([s.letter or "", s.sample_id or "", repr(s.thumb_effort), repr(s.finger_independence)])
