"""Joint-angle representation of a hand and distances between handshapes."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

from .errors import DegenerateBone, MalformedRow
from .landmark_io import LandmarkFrame, LandmarkSequence, _csv_rows, _read_text

# Landmark chains, wrist first. Each interior landmark is a joint vertex.
FINGER_CHAINS = (
    (0, 1, 2, 3, 4),        # thumb
    (0, 5, 6, 7, 8),        # index
    (0, 9, 10, 11, 12),     # middle
    (0, 13, 14, 15, 16),    # ring
    (0, 17, 18, 19, 20),    # pinky
)

JOINT_IDS = tuple(j for chain in FINGER_CHAINS for j in chain[1:4])
N_JOINTS = len(JOINT_IDS)

# (predecessor, vertex, successor) for every joint, in JOINT_IDS order
JOINT_TRIPLES = tuple((c[i - 1], c[i], c[i + 1]) for c in FINGER_CHAINS for i in (1, 2, 3))

_PREV = np.array([p for p, _, _ in JOINT_TRIPLES])
_VERT = np.array([j for _, j, _ in JOINT_TRIPLES])
_NEXT = np.array([c for _, _, c in JOINT_TRIPLES])
_JOINT_POS = {j: i for i, j in enumerate(JOINT_IDS)}

BONE_EPS = 1e-9
TWO_PI = 2.0 * math.pi

ANGLE_HEADER = ["sequence_id", "frame", "joint", "angle_radians"]


@dataclass(frozen=True, eq=False)
class JointAngleVector:
    """The 15 joint angles of a hand, in radians, ordered as ``JOINT_IDS``.

    0 means the finger is straight through that joint; pi means it is folded
    fully back on itself.
    """

    angles: np.ndarray

    def __post_init__(self):
        a = np.array(self.angles, dtype=float).reshape(-1)
        if a.shape != (N_JOINTS,):
            raise ValueError(f"expected {N_JOINTS} joint angles, got {a.size}")
        if not np.all(np.isfinite(a)) or np.any(a < 0) or np.any(a > math.pi):
            raise ValueError("joint angles must be finite and lie in [0, pi]")
        a.setflags(write=False)
        object.__setattr__(self, "angles", a)

    @classmethod
    def from_mapping(cls, by_joint: dict) -> "JointAngleVector":
        missing = [j for j in JOINT_IDS if j not in by_joint]
        if missing:
            raise ValueError(f"missing joints {missing}")
        return cls(np.array([by_joint[j] for j in JOINT_IDS], dtype=float))

    def angle(self, joint_id: int) -> float:
        return float(self.angles[_JOINT_POS[joint_id]])

    def select(self, joint_ids: Iterable[int]) -> np.ndarray:
        return self.angles[[_JOINT_POS[j] for j in joint_ids]]

    def items(self):
        return zip(JOINT_IDS, self.angles.tolist())

    def __eq__(self, other):
        if not isinstance(other, JointAngleVector):
            return NotImplemented
        return np.array_equal(self.angles, other.angles)

    __hash__ = None


def joint_angle_array(points: np.ndarray) -> np.ndarray:
    """Vectorised joint angles for an array of shape ``(..., 21, 3)``.

    Returns ``(..., 15)``. The angle at each vertex is the angle between the
    incoming bone (vertex - predecessor) and the outgoing bone
    (successor - vertex). It is evaluated as ``atan2(|u x v|, u . v)``, which
    equals the clamped ``arccos`` of the normalised dot product but keeps
    full precision near 0 and pi.
    """
    pts = np.asarray(points, dtype=float)
    u = pts[..., _VERT, :] - pts[..., _PREV, :]
    v = pts[..., _NEXT, :] - pts[..., _VERT, :]
    nu = np.linalg.norm(u, axis=-1)
    nv = np.linalg.norm(v, axis=-1)
    bad = (nu <= BONE_EPS) | (nv <= BONE_EPS)
    if np.any(bad):
        joints = sorted({JOINT_IDS[i] for i in np.nonzero(bad)[-1]})
        raise DegenerateBone(f"zero-length bone at joint(s) {joints}")
    cross = np.linalg.norm(np.cross(u, v), axis=-1)
    dot = np.einsum("...k,...k->...", u, v)
    return np.arctan2(cross, dot)


def joint_angles(frame) -> JointAngleVector:
    """Joint angles of a single hand (``LandmarkFrame`` or a 21x3 array)."""
    pts = frame.points if isinstance(frame, LandmarkFrame) else np.asarray(frame, dtype=float)
    if pts.shape != (21, 3):
        raise ValueError(f"expected 21x3 landmarks, got {pts.shape}")
    return JointAngleVector(joint_angle_array(pts))


def angular_distance(a, b):
    """``|a - b| mod 2*pi``. Works on scalars and arrays alike.

    No wrap-around to ``min(d, 2*pi - d)`` is applied; for angles in
    ``[0, pi]`` this is the plain absolute difference.
    """
    d = np.mod(np.abs(np.subtract(a, b)), TWO_PI)
    return float(d) if np.ndim(d) == 0 else d


def handshape_distance(h1: JointAngleVector, h2: JointAngleVector) -> float:
    """Mean per-joint angular distance over all 15 joints."""
    return float(np.mean(angular_distance(h1.angles, h2.angles)))


# ---------------------------------------------------------------------------
# angle export: sequence_id,frame,joint,angle_radians
# ---------------------------------------------------------------------------


def sequence_angles(seq: LandmarkSequence) -> list[tuple[int, JointAngleVector]]:
    return [(f.frame_index, joint_angles(f)) for f in seq.frames]


def write_angles(rows: Iterable[tuple[str, int, JointAngleVector]], out: IO[str]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(ANGLE_HEADER)
    for seq_id, frame, vec in rows:
        for j, a in vec.items():
            w.writerow([seq_id, frame, j, repr(a)])


def read_angles(source) -> dict[tuple[str, int], JointAngleVector]:
    """Inverse of :func:`write_angles`; keys are ``(sequence_id, frame)``."""
    text, name = _read_text(source)
    rows = _csv_rows(text)
    header = next(rows, None)
    if header is None or [h.strip() for h in header] != ANGLE_HEADER:
        raise MalformedRow(f"expected header {','.join(ANGLE_HEADER)}", source=name, line=1)
    partial: dict[tuple[str, int], dict[int, float]] = {}
    for lineno, row in enumerate(rows, start=2):
        if not row:
            continue
        if len(row) != 4:
            raise MalformedRow(f"expected 4 columns, got {len(row)}", source=name, line=lineno)
        try:
            key = (row[0], int(row[1]))
            joint, angle = int(row[2]), float(row[3])
        except ValueError:
            raise MalformedRow(f"non-numeric field in {row!r}", source=name, line=lineno) from None
        if joint not in _JOINT_POS:
            raise MalformedRow(f"unknown joint {joint}", source=name, line=lineno)
        partial.setdefault(key, {})[joint] = angle
    out = {}
    for key, by_joint in partial.items():
        try:
            out[key] = JointAngleVector.from_mapping(by_joint)
        except ValueError as e:
            raise MalformedRow(f"sequence {key[0]!r} frame {key[1]}: {e}", source=name) from None
    return out
