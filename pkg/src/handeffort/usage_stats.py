"""Usage statistics: handshape frequency in the lexicon, English letter
frequency, and how confusable two letters are given their preceding
context."""

from __future__ import annotations

import csv
import math
import string
from dataclasses import dataclass, field
from itertools import combinations
from typing import IO, Iterable, Mapping

from .errors import NoPairMass
from .landmark_io import LEXICAL_CLASSES, LexiconEntry, WordFrequencyList

MAX_CONTEXT = 4

LETTER_FREQ_HEADER = ["letter", "weight"]
PAIR_STATS_HEADER = ["letter1", "letter2", "confusability_bits", "min_frequency"]


def handshape_frequency(lexicon: Iterable[LexiconEntry], handshape: str,
                        classes: Iterable[str] = ("native",)) -> float:
    """Summed frequency ratings of the signs made with ``handshape`` whose
    lexical class is in ``classes``."""
    classes = set(classes)
    if not classes:
        raise ValueError("classes must not be empty")
    unknown = classes - set(LEXICAL_CLASSES)
    if unknown:
        raise ValueError(f"unknown lexical classes {sorted(unknown)}")
    hs = handshape.upper()
    return float(sum(e.frequency_rating for e in lexicon
                     if e.handshape == hs and e.lexical_class in classes))


def letter_frequency(words: WordFrequencyList) -> dict[str, float]:
    """Occurrences of each letter a-z, weighted by word count."""
    freq = dict.fromkeys(string.ascii_lowercase, 0.0)
    for w, c in words.items():
        for ch in w:
            freq[ch] += c
    return freq


@dataclass
class ContextModel:
    """Weighted counts of (preceding context, letter).

    ``by_letter[x][c]`` holds the weight of letter ``x`` following context
    ``c``; ``totals[c]`` is the summed weight of context ``c``.
    """

    by_letter: dict[str, dict[str, float]] = field(default_factory=dict)
    totals: dict[str, float] = field(default_factory=dict)

    def add(self, context: str, letter: str, weight: float) -> None:
        if not 1 <= len(context) <= MAX_CONTEXT:
            raise ValueError(f"context length must be 1..{MAX_CONTEXT}, got {context!r}")
        if weight < 0:
            raise ValueError("weights must be non-negative")
        row = self.by_letter.setdefault(letter, {})
        row[context] = row.get(context, 0.0) + weight
        self.totals[context] = self.totals.get(context, 0.0) + weight

    def count(self, context: str, letter: str) -> float:
        return self.by_letter.get(letter, {}).get(context, 0.0)

    @property
    def counts(self) -> dict[tuple[str, str], float]:
        return {(c, x): w for x, row in self.by_letter.items() for c, w in row.items()}

    @property
    def mass(self) -> float:
        return sum(self.totals.values())

    def merge(self, other: "ContextModel") -> "ContextModel":
        out = ContextModel()
        for m in (self, other):
            for x, row in m.by_letter.items():
                for c, w in row.items():
                    out.add(c, x, w)
        return out


def build_context_model(words: WordFrequencyList, weighted: bool = True) -> ContextModel:
    """Count every non-initial letter of every word against the (up to) four
    letters before it. Word-initial letters have no context and are left
    out. Each occurrence weighs the word's count, or 1 if not ``weighted``."""
    model = ContextModel()
    for w, c in words.items():
        k = float(c) if weighted else 1.0
        for i in range(1, len(w)):
            model.add(w[max(0, i - MAX_CONTEXT):i], w[i], k)
    return model


def confusability(model: ContextModel, pair) -> float:
    """Conditional entropy H(X | C) in bits, with X restricted to the two
    letters of ``pair`` and renormalised over contexts where either occurs."""
    x1, x2 = (p.lower() for p in pair)
    r1 = model.by_letter.get(x1, {})
    r2 = model.by_letter.get(x2, {})
    mass = sum(r1.values()) + sum(r2.values())
    if not mass > 0:
        raise NoPairMass(f"letters {x1!r} and {x2!r} never occur after a context")
    h = 0.0
    for ctx in r1.keys() | r2.keys():
        n1, n2 = r1.get(ctx, 0.0), r2.get(ctx, 0.0)
        nc = n1 + n2
        for n in (n1, n2):
            if n > 0:
                h -= (n / mass) * math.log2(n / nc)
    # rounding can leave a hair outside the binary-entropy range
    return min(max(h, 0.0), 1.0)


@dataclass(frozen=True)
class LetterPairStat:
    letter1: str
    letter2: str
    confusability_bits: float | None
    min_frequency: float

    @property
    def has_mass(self) -> bool:
        return self.confusability_bits is not None


def pair_statistics(model: ContextModel, letter_freqs: Mapping[str, float],
                    alphabet: Iterable[str]) -> list[LetterPairStat]:
    """Confusability and minimum letter frequency for every unordered pair
    of ``alphabet``. Pairs with no context mass get ``confusability_bits``
    of ``None``; see :func:`usable_pairs`."""
    letters = sorted(set(alphabet))
    if any(c.upper() in "JZ" for c in letters):
        raise ValueError("alphabet must exclude J and Z")
    freqs = {k.lower(): float(v) for k, v in letter_freqs.items()}
    out = []
    for a, b in combinations(letters, 2):
        try:
            conf = confusability(model, (a, b))
        except NoPairMass:
            conf = None
        out.append(LetterPairStat(a, b, conf, min(freqs.get(a.lower(), 0.0), freqs.get(b.lower(), 0.0))))
    return out


def usable_pairs(stats: Iterable[LetterPairStat]) -> tuple[list[LetterPairStat], int]:
    """Split off pairs without context mass; returns ``(kept, n_excluded)``."""
    stats = list(stats)
    kept = [s for s in stats if s.has_mass]
    return kept, len(stats) - len(kept)


def write_letter_frequency(freqs: Mapping[str, float], out: IO[str]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(LETTER_FREQ_HEADER)
    for k in sorted(freqs):
        w.writerow([k, repr(float(freqs[k]))])


def write_pair_statistics(stats: Iterable[LetterPairStat], out: IO[str]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(PAIR_STATS_HEADER)
    for s in stats:
        conf = "" if s.confusability_bits is None else repr(s.confusability_bits)
        w.writerow([s.letter1, s.letter2, conf, repr(s.min_frequency)])
