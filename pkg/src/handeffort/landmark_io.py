"""Readers and writers for landmark sequences, resting hands, lexicon tables
and word-frequency lists, plus the rare-word filtering of the English corpus.

Sources may be a filesystem path, raw ``bytes``, or an open file object
(text or binary). All text is decoded as UTF-8; CRLF line endings are
tolerated everywhere.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import re
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Union

import numpy as np

from .errors import (
    EmptySet,
    IncompleteFrame,
    MalformedLandmarks,
    MalformedRow,
    NonMonotonicFrames,
    UnknownLexicalClass,
)

N_LANDMARKS = 21

LANDMARK_HEADER = ["sequence_id", "frame", "landmark", "x", "y", "z"]
LEXICON_HEADER = ["gloss", "handshape", "frequency", "lexical_class"]

LEXICAL_CLASSES = ("native", "initialized", "loan")

# J and Z carry movement and have no static handshape of their own.
FS_LETTERS = tuple(c for c in "ABCDEFGHIJKLMNOPQRSTUVWXYZ" if c not in "JZ")

_WORD_RE = re.compile(r"^[a-z]+$")

Source = Union[str, os.PathLike, bytes, IO[str], IO[bytes]]


def _read_text(source: Source) -> tuple[str, str]:
    """Return ``(text, display_name)`` for any supported source."""
    if isinstance(source, (bytes, bytearray)):
        return bytes(source).decode("utf-8-sig"), "<bytes>"
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return fh.read().decode("utf-8-sig"), os.fspath(source)
    data = source.read()
    name = getattr(source, "name", "<stream>")
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    return data, str(name)


def _csv_rows(text: str) -> Iterator[list[str]]:
    return csv.reader(io.StringIO(text, newline=""))


# ---------------------------------------------------------------------------
# Landmark frames and sequences
# ---------------------------------------------------------------------------


def _as_points(points, *, exc=MalformedLandmarks) -> np.ndarray:
    try:
        arr = np.array(points, dtype=float)
    except (TypeError, ValueError) as e:
        raise exc(f"landmarks are not numeric: {e}") from None
    if arr.shape != (N_LANDMARKS, 3):
        raise exc(f"expected {N_LANDMARKS}x3 landmarks, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise exc("landmark coordinates must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LandmarkFrame:
    """One observation of the dominant hand: 21 points indexed as in the
    MediaPipe hand chart (0 = wrist, then 4 points per digit from thumb to
    pinky)."""

    frame_index: int
    points: np.ndarray

    def __post_init__(self):
        if int(self.frame_index) != self.frame_index or self.frame_index < 0:
            raise MalformedLandmarks(f"frame index must be a non-negative integer, got {self.frame_index!r}")
        object.__setattr__(self, "frame_index", int(self.frame_index))
        object.__setattr__(self, "points", _as_points(self.points))

    def __eq__(self, other):
        if not isinstance(other, LandmarkFrame):
            return NotImplemented
        return self.frame_index == other.frame_index and np.array_equal(self.points, other.points)

    __hash__ = None


@dataclass(frozen=True)
class LandmarkSequence:
    sequence_id: str
    frames: tuple[LandmarkFrame, ...]

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        idx = [f.frame_index for f in self.frames]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise NonMonotonicFrames(f"sequence {self.sequence_id!r}: frame indices must strictly increase")

    def __len__(self):
        return len(self.frames)

    @property
    def frame_indices(self) -> list[int]:
        return [f.frame_index for f in self.frames]

    def points(self) -> np.ndarray:
        """All frames stacked as an ``(n_frames, 21, 3)`` array."""
        if not self.frames:
            return np.empty((0, N_LANDMARKS, 3))
        return np.stack([f.points for f in self.frames])

    def frame(self, frame_index: int) -> LandmarkFrame:
        for f in self.frames:
            if f.frame_index == frame_index:
                return f
        raise KeyError(frame_index)


def parse_landmark_sequences(source: Source, errors: list | None = None) -> list[LandmarkSequence]:
    """Parse a long-format landmark CSV (one row per landmark).

    Rows are grouped by ``sequence_id`` and then by ``frame``; sequences come
    out in order of first appearance. Rows of different sequences may be
    interleaved freely.

    By default the first bad frame raises. If ``errors`` is a list, each bad
    frame is skipped instead and one exception per skipped frame is appended
    to it, so that ``input frames == parsed frames + len(errors)``.
    """
    text, name = _read_text(source)
    rows = _csv_rows(text)
    header = next(rows, None)
    if header is None or [h.strip() for h in header] != LANDMARK_HEADER:
        raise MalformedRow(f"expected header {','.join(LANDMARK_HEADER)}, got {header!r}", source=name, line=1)

    # seq_id -> frame key (raw string) -> {"line": first line, "points": {lm: xyz}, "error": exc|None}
    seqs: "OrderedDict[str, OrderedDict[str, dict]]" = OrderedDict()
    for lineno, row in enumerate(rows, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        seq_id = row[0].strip()
        fkey = row[1].strip() if len(row) > 1 else ""
        frames = seqs.setdefault(seq_id, OrderedDict())
        slot = frames.get(fkey)
        if slot is None:
            slot = frames[fkey] = {"line": lineno, "points": {}, "error": None}
        if slot["error"] is not None:
            continue
        try:
            if len(row) != 6:
                raise MalformedRow(f"expected 6 columns, got {len(row)}", source=name, line=lineno)
            try:
                frame_index = int(fkey)
                lm = int(row[2])
                xyz = tuple(float(v) for v in row[3:6])
            except ValueError:
                raise MalformedRow(f"non-numeric field in {row!r}", source=name, line=lineno) from None
            if frame_index < 0:
                raise MalformedRow(f"negative frame index {frame_index}", source=name, line=lineno)
            if not 0 <= lm < N_LANDMARKS:
                raise MalformedRow(f"landmark index {lm} outside 0..20", source=name, line=lineno)
            if not all(math.isfinite(v) for v in xyz):
                raise MalformedRow(f"non-finite coordinate in {row!r}", source=name, line=lineno)
            if lm in slot["points"]:
                raise IncompleteFrame(
                    f"sequence {seq_id!r} frame {frame_index}: landmark {lm} listed twice",
                    source=name, line=lineno)
            slot["points"][lm] = xyz
        except (MalformedRow, IncompleteFrame) as e:
            if errors is None:
                raise
            slot["error"] = e

    result = []
    for seq_id, frames in seqs.items():
        parsed: list[LandmarkFrame] = []
        for fkey, slot in frames.items():
            err = slot["error"]
            if err is None and len(slot["points"]) != N_LANDMARKS:
                err = IncompleteFrame(
                    f"sequence {seq_id!r} frame {fkey}: {len(slot['points'])} of {N_LANDMARKS} landmarks",
                    source=name, line=slot["line"])
            if err is None and parsed and int(fkey) <= parsed[-1].frame_index:
                err = NonMonotonicFrames(
                    f"sequence {seq_id!r}: frame {fkey} follows frame {parsed[-1].frame_index}",
                    source=name, line=slot["line"])
            if err is not None:
                if errors is None:
                    raise err
                errors.append(err)
                continue
            pts = [slot["points"][i] for i in range(N_LANDMARKS)]
            parsed.append(LandmarkFrame(int(fkey), pts))
        result.append(LandmarkSequence(seq_id, tuple(parsed)))
    return result


def write_landmark_sequences(sequences: Iterable[LandmarkSequence], out: IO[str]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(LANDMARK_HEADER)
    for seq in sequences:
        for fr in seq.frames:
            for lm, (x, y, z) in enumerate(fr.points):
                w.writerow([seq.sequence_id, fr.frame_index, lm, repr(float(x)), repr(float(y)), repr(float(z))])


# ---------------------------------------------------------------------------
# Resting hands
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RestingHandSet:
    hands: tuple[tuple[str, LandmarkFrame], ...]

    def __post_init__(self):
        object.__setattr__(self, "hands", tuple(self.hands))
        if not self.hands:
            raise EmptySet("resting hand set is empty")

    def __len__(self):
        return len(self.hands)

    def __iter__(self):
        return iter(self.hands)

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.hands]


def parse_resting_hands(source: Source) -> RestingHandSet:
    """Read a JSON array of ``{"name": ..., "landmarks": [[x, y, z] * 21]}``."""
    text, name = _read_text(source)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedLandmarks(f"invalid JSON: {e}", source=name) from None
    if not isinstance(data, list):
        raise MalformedLandmarks("expected a JSON array of resting hands", source=name)
    if not data:
        raise EmptySet("resting hand set is empty", source=name)
    hands = []
    for i, item in enumerate(data):
        if not isinstance(item, dict) or "landmarks" not in item:
            raise MalformedLandmarks(f"entry {i}: expected object with 'landmarks'", source=name)
        try:
            frame = LandmarkFrame(i, item["landmarks"])
        except MalformedLandmarks as e:
            raise MalformedLandmarks(f"entry {i}: {e}", source=name) from None
        hands.append((str(item.get("name", f"rest{i}")), frame))
    return RestingHandSet(tuple(hands))


def write_resting_hands(resting: RestingHandSet, out: IO[str]) -> None:
    payload = [{"name": n, "landmarks": f.points.tolist()} for n, f in resting]
    json.dump(payload, out, indent=1)


# ---------------------------------------------------------------------------
# Lexicon
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LexiconEntry:
    gloss: str
    handshape: str
    frequency_rating: float
    lexical_class: str

    def __post_init__(self):
        if self.lexical_class not in LEXICAL_CLASSES:
            raise UnknownLexicalClass(f"unknown lexical class {self.lexical_class!r}")
        if not (self.frequency_rating >= 0 and math.isfinite(self.frequency_rating)):
            raise MalformedRow(f"frequency rating must be finite and >= 0, got {self.frequency_rating!r}")


def parse_lexicon(source: Source) -> tuple[list[LexiconEntry], int]:
    """Read a lexicon CSV and keep the rows whose handshape is a static
    fingerspelling handshape.

    Returns ``(entries, dropped)`` where ``dropped`` counts the well-formed
    rows discarded because their handshape is not one of the 24 letters.
    """
    text, name = _read_text(source)
    rows = _csv_rows(text)
    header = next(rows, None)
    if header is None or [h.strip() for h in header] != LEXICON_HEADER:
        raise MalformedRow(f"expected header {','.join(LEXICON_HEADER)}, got {header!r}", source=name, line=1)
    entries = []
    dropped = 0
    for lineno, row in enumerate(rows, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 4:
            raise MalformedRow(f"expected 4 columns, got {len(row)}", source=name, line=lineno)
        gloss, hs, freq, cls = (c.strip() for c in row)
        try:
            rating = float(freq)
        except ValueError:
            raise MalformedRow(f"non-numeric frequency {freq!r}", source=name, line=lineno) from None
        cls = cls.lower()
        if cls not in LEXICAL_CLASSES:
            raise UnknownLexicalClass(f"unknown lexical class {cls!r}", source=name, line=lineno)
        if not (rating >= 0 and math.isfinite(rating)):
            raise MalformedRow(f"frequency must be finite and >= 0, got {freq!r}", source=name, line=lineno)
        hs = hs.upper()
        if hs not in FS_LETTERS:
            dropped += 1
            continue
        entries.append(LexiconEntry(gloss, hs, rating, cls))
    return entries, dropped


# ---------------------------------------------------------------------------
# Word frequency list
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WordFrequencyList:
    entries: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for w, c in self.entries.items():
            if not _WORD_RE.match(w):
                raise ValueError(f"word {w!r} is not lowercase a-z")
            if int(c) != c or c < 1:
                raise ValueError(f"count for {w!r} must be a positive integer, got {c!r}")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, word):
        return self.entries[word]

    def items(self):
        return self.entries.items()


def read_word_counts(source: Source) -> Iterator[tuple[str, int]]:
    """Yield ``(word, count)`` pairs from a ``word<TAB>count`` file."""
    text, name = _read_text(source)
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise MalformedRow("expected word<TAB>count", source=name, line=lineno)
        try:
            count = int(parts[1])
        except ValueError:
            raise MalformedRow(f"non-integer count {parts[1]!r}", source=name, line=lineno) from None
        if count < 1:
            raise MalformedRow(f"count must be >= 1, got {count}", source=name, line=lineno)
        yield parts[0], count


def prepare_word_list(tokens: Iterable[tuple[str, int]], top_k: int = 20000,
                      min_count: int = 2) -> WordFrequencyList:
    """Approximate the vocabulary that gets fingerspelled.

    Words are lowercased and anything outside a-z is rejected outright (it
    does not take part in the frequency ranking). The ``top_k`` most frequent
    types are removed, then every word seen fewer than ``min_count`` times.
    Ties at the ``top_k`` cut are resolved alphabetically: the
    alphabetically smaller word is the one removed.
    """
    if top_k < 0 or min_count < 1:
        raise ValueError("top_k must be >= 0 and min_count >= 1")
    counts: dict[str, int] = {}
    for word, count in tokens:
        word = word.lower()
        if not _WORD_RE.match(word):
            continue
        counts[word] = counts.get(word, 0) + int(count)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = {w: c for w, c in ranked[top_k:] if c >= min_count}
    return WordFrequencyList(dict(sorted(kept.items())))


def write_word_list(words: WordFrequencyList, out: IO[str]) -> None:
    for w, c in words.items():
        out.write(f"{w}\t{c}\n")
