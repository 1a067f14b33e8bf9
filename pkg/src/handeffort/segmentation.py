"""Keyframe extraction for fingerspelled phrases.

The hand slows down while holding each letter, so letters are taken at the
sharpest local minima of the frame-to-frame landmark velocity and paired
with the phrase letters in order.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, replace
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import (
    FrameNotInSequence,
    MalformedRow,
    NonMonotonicAfterCorrection,
    NotEnoughMinima,
    PositionOutOfRange,
    TooFewFrames,
)
from .landmark_io import LandmarkSequence, _csv_rows, _read_text

log = logging.getLogger(__name__)

ALIGNMENT_HEADER = ["sequence_id", "letter", "frame", "corrected"]
CORRECTIONS_HEADER = ["sequence_id", "position", "new_frame"]
PHRASES_HEADER = ["sequence_id", "phrase"]

KEYFRAME_SIDES = ("start", "end")


@dataclass(frozen=True)
class VelocitySeries:
    """``values[t]`` is the summed landmark displacement from frame
    ``start_frames[t]`` to the next present frame."""

    values: np.ndarray
    start_frames: tuple[int, ...]
    end_frames: tuple[int, ...]
    gaps: int = 0

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class AlignedLetter:
    letter: str
    frame: int
    corrected: bool = False


@dataclass(frozen=True)
class LetterFrameAlignment:
    pairs: tuple[AlignedLetter, ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        frames = self.frames
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise NonMonotonicAfterCorrection(f"alignment frames not strictly increasing: {frames}")

    def __len__(self):
        return len(self.pairs)

    @property
    def letters(self) -> list[str]:
        return [p.letter for p in self.pairs]

    @property
    def frames(self) -> list[int]:
        return [p.frame for p in self.pairs]


def spellable_letters(phrase: str) -> list[str]:
    return [c for c in phrase.upper() if "A" <= c <= "Z"]


def transition_velocity(seq: LandmarkSequence) -> VelocitySeries:
    if len(seq.frames) < 2:
        raise TooFewFrames(f"sequence {seq.sequence_id!r} has {len(seq.frames)} frame(s); need at least 2")
    pts = seq.points()
    values = np.linalg.norm(np.diff(pts, axis=0), axis=-1).sum(axis=-1)
    idx = seq.frame_indices
    gaps = sum(1 for a, b in zip(idx, idx[1:]) if b != a + 1)
    if gaps:
        log.warning("sequence %r: %d transition(s) span missing frames", seq.sequence_id, gaps)
    return VelocitySeries(values, tuple(idx[:-1]), tuple(idx[1:]), gaps)


def local_minima(v: Sequence[float]) -> list[tuple[int, float]]:
    """Interior local minima of ``v`` as ``(t, sharpness)``.

    A run of equal values strictly lower than both of its neighbours counts
    once, at its first index. Sharpness is the sum of the drops from the
    left and right neighbours of the run.
    """
    v = np.asarray(v, dtype=float)
    n = len(v)
    out = []
    t = 1
    while t < n - 1:
        end = t
        while end + 1 < n and v[end + 1] == v[t]:
            end += 1
        if end < n - 1 and v[t - 1] > v[t] and v[end + 1] > v[t]:
            out.append((t, float(v[t - 1] - v[t] + v[end + 1] - v[t])))
        t = end + 1
    return out


def select_minima(v: Sequence[float], n: int) -> list[int]:
    """Transition indices of the ``n`` sharpest minima, in time order."""
    minima = local_minima(v)
    if len(minima) < n:
        raise NotEnoughMinima(f"need {n} local minima, found {len(minima)}")
    best = sorted(minima, key=lambda m: (-m[1], m[0]))[:n]
    return sorted(t for t, _ in best)


def extract_letter_frames(seq: LandmarkSequence, phrase: str, keyframe_side: str = "start") -> LetterFrameAlignment:
    """Pair every letter of ``phrase`` with one keyframe of ``seq``.

    Characters outside A-Z are skipped. With ``keyframe_side="start"`` the
    keyframe is the frame at which the slow transition begins; ``"end"``
    takes the frame where it ends.
    """
    if keyframe_side not in KEYFRAME_SIDES:
        raise ValueError(f"keyframe_side must be one of {KEYFRAME_SIDES}")
    letters = spellable_letters(phrase)
    vel = transition_velocity(seq)
    try:
        ts = select_minima(vel.values, len(letters))
    except NotEnoughMinima as e:
        raise NotEnoughMinima(f"sequence {seq.sequence_id!r}, phrase {phrase!r}: {e}") from None
    frames = vel.start_frames if keyframe_side == "start" else vel.end_frames
    return LetterFrameAlignment(tuple(AlignedLetter(c, frames[t]) for c, t in zip(letters, ts)))


def apply_corrections(alignment: LetterFrameAlignment, corrections: Iterable[tuple[int, int]],
                      frame_indices: Iterable[int] | None = None) -> LetterFrameAlignment:
    """Overwrite keyframes by (0-based letter position, new frame index).

    If ``frame_indices`` is given, every new frame must be one of them.
    """
    pairs = list(alignment.pairs)
    valid = set(frame_indices) if frame_indices is not None else None
    for pos, new_frame in corrections:
        if not 0 <= pos < len(pairs):
            raise PositionOutOfRange(f"position {pos} outside alignment of length {len(pairs)}")
        if valid is not None and new_frame not in valid:
            raise FrameNotInSequence(f"frame {new_frame} is not in the sequence")
        pairs[pos] = replace(pairs[pos], frame=int(new_frame), corrected=True)
    return LetterFrameAlignment(tuple(pairs))


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------


def read_phrases(source) -> dict[str, str]:
    text, name = _read_text(source)
    rows = _csv_rows(text)
    header = next(rows, None)
    if header is None or [h.strip() for h in header] != PHRASES_HEADER:
        raise MalformedRow(f"expected header {','.join(PHRASES_HEADER)}", source=name, line=1)
    out = {}
    for lineno, row in enumerate(rows, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise MalformedRow(f"expected 2 columns, got {len(row)}", source=name, line=lineno)
        out[row[0].strip()] = row[1]
    return out


def read_corrections(source) -> dict[str, list[tuple[int, int]]]:
    text, name = _read_text(source)
    rows = _csv_rows(text)
    header = next(rows, None)
    if header is None or [h.strip() for h in header] != CORRECTIONS_HEADER:
        raise MalformedRow(f"expected header {','.join(CORRECTIONS_HEADER)}", source=name, line=1)
    out: dict[str, list[tuple[int, int]]] = {}
    for lineno, row in enumerate(rows, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise MalformedRow(f"expected 3 columns, got {len(row)}", source=name, line=lineno)
        try:
            pos, frame = int(row[1]), int(row[2])
        except ValueError:
            raise MalformedRow(f"non-integer field in {row!r}", source=name, line=lineno) from None
        out.setdefault(row[0].strip(), []).append((pos, frame))
    return out


def write_alignments(alignments: Iterable[tuple[str, LetterFrameAlignment]], out: IO[str]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(ALIGNMENT_HEADER)
    for seq_id, al in alignments:
        for p in al.pairs:
            w.writerow([seq_id, p.letter, p.frame, int(p.corrected)])


def read_alignments(source) -> dict[str, LetterFrameAlignment]:
    text, name = _read_text(source)
    rows = _csv_rows(text)
    header = next(rows, None)
    if header is None or [h.strip() for h in header] != ALIGNMENT_HEADER:
        raise MalformedRow(f"expected header {','.join(ALIGNMENT_HEADER)}", source=name, line=1)
    pairs: dict[str, list[AlignedLetter]] = {}
    for lineno, row in enumerate(rows, start=2):
        if not row:
            continue
        if len(row) != 4 or row[3].strip() not in ("0", "1"):
            raise MalformedRow(f"bad alignment row {row!r}", source=name, line=lineno)
        try:
            frame = int(row[2])
        except ValueError:
            raise MalformedRow(f"non-integer frame {row[2]!r}", source=name, line=lineno) from None
        pairs.setdefault(row[0].strip(), []).append(
            AlignedLetter(row[1].strip().upper(), frame, row[3].strip() == "1"))
    return {k: LetterFrameAlignment(tuple(v)) for k, v in pairs.items()}
