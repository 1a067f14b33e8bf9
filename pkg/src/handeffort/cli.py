"""Command line entry point: ``handeffort <subcommand> ...``.

Each subcommand exposes one stage of the pipeline with the CSV formats of
the library; ``report`` runs everything from a config file.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import logging
import sys
from itertools import combinations

from . import effort as eff
from .errors import ConfigError, HandEffortError, MalformedRow
from .kinematics import joint_angles, read_angles, write_angles
from .landmark_io import (
    FS_LETTERS,
    parse_landmark_sequences,
    parse_lexicon,
    parse_resting_hands,
    prepare_word_list,
    read_word_counts,
)
from .pipeline import ANALYSES, config_from_file, run_report
from .segmentation import (
    KEYFRAME_SIDES,
    apply_corrections,
    extract_letter_frames,
    read_alignments,
    read_corrections,
    read_phrases,
    write_alignments,
)
from .stats import HD_AGGREGATIONS, mean_pair_distance, partial_correlation, pearson, write_correlations
from .usage_stats import (
    build_context_model,
    handshape_frequency,
    letter_frequency,
    pair_statistics,
    write_letter_frequency,
    write_pair_statistics,
)

log = logging.getLogger("handeffort")


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _open_input(path):
    try:
        return open(path, "rb")
    except OSError as e:
        raise ConfigError(f"cannot open {path}: {e.strerror}") from None


def _read(path, parser, *args):
    with _open_input(path) as fh:
        return parser(fh, *args)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_segment(args):
    sequences = _read(args.input, parse_landmark_sequences)
    phrases = _read(args.phrase_file, read_phrases)
    corrections = _read(args.corrections, read_corrections) if args.corrections else {}
    results = []
    for seq in sequences:
        if seq.sequence_id not in phrases:
            log.warning("no phrase for sequence %r; skipped", seq.sequence_id)
            continue
        al = extract_letter_frames(seq, phrases[seq.sequence_id], args.keyframe_side)
        if seq.sequence_id in corrections:
            al = apply_corrections(al, corrections[seq.sequence_id], seq.frame_indices)
        results.append((seq.sequence_id, al))
    with _output(args.out) as fh:
        write_alignments(results, fh)


def _keyframes(alignment_path):
    """(sequence_id, frame) -> letter for every aligned keyframe."""
    alignments = _read(alignment_path, read_alignments)
    return {(sid, p.frame): p.letter for sid, al in alignments.items() for p in al.pairs}


def cmd_angles(args):
    sequences = _read(args.input, parse_landmark_sequences)
    wanted = _keyframes(args.alignment) if args.alignment else None
    rows = []
    for seq in sequences:
        for frame in seq.frames:
            if wanted is not None and (seq.sequence_id, frame.frame_index) not in wanted:
                continue
            rows.append((seq.sequence_id, frame.frame_index, joint_angles(frame)))
    with _output(args.out) as fh:
        write_angles(rows, fh)


def cmd_effort(args):
    angles = _read(args.angles, read_angles)
    resting = eff.resting_angles(_read(args.resting, parse_resting_hands))
    letters = _keyframes(args.alignment) if args.alignment else None
    scores = []
    for (sid, frame), vec in angles.items():
        letter = None
        if letters is not None:
            letter = letters.get((sid, frame))
            if letter is None or letter not in FS_LETTERS:
                continue
        scores.append(eff.finger_independence(vec, resting, letter=letter, sample_id=f"{sid}:{frame}",
                                              te_weight=args.te_weight))
    with _output(args.out) as fh:
        eff.write_effort(scores, fh)


def cmd_distance(args):
    angles = _read(args.angles, read_angles)
    letters = _keyframes(args.alignment)
    samples = {}
    for key, vec in angles.items():
        letter = letters.get(key)
        if letter in FS_LETTERS:
            samples.setdefault(letter, []).append(vec)
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["letter1", "letter2", "mean_hd"])
        for a, b in combinations(sorted(samples), 2):
            w.writerow([a, b, repr(mean_pair_distance(samples, (a, b), args.hd_aggregation))])


def _words(args):
    return prepare_word_list(_read(args.words, lambda fh: list(read_word_counts(fh))),
                             args.top_k, args.min_count)


def cmd_usage(args):
    if args.kind == "handshapes":
        if not args.lexicon:
            raise ConfigError("usage handshapes needs --lexicon")
        entries, dropped = _read(args.lexicon, parse_lexicon)
        log.info("%d lexicon rows with non-fingerspelling handshapes dropped", dropped)
        with _output(args.out) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["letter", "asl_native_freq", "asl_foreign_freq"])
            for c in FS_LETTERS:
                w.writerow([c, repr(handshape_frequency(entries, c, ("native",))),
                            repr(handshape_frequency(entries, c, ("initialized", "loan")))])
        return
    if not args.words:
        raise ConfigError(f"usage {args.kind} needs --words")
    words = _words(args)
    freqs = letter_frequency(words)
    with _output(args.out) as fh:
        if args.kind == "letters":
            write_letter_frequency(freqs, fh)
        else:
            model = build_context_model(words, weighted=args.weighted_contexts)
            stats = pair_statistics(model, freqs, [c.lower() for c in FS_LETTERS])
            excluded = sum(1 for s in stats if not s.has_mass)
            if excluded:
                log.warning("%d pair(s) have no context mass", excluded)
            write_pair_statistics(stats, fh)


def _column(rows, header, name, path):
    if name not in header:
        raise ConfigError(f"{path}: no column {name!r} (have {', '.join(header)})")
    i = header.index(name)
    out = []
    for lineno, row in enumerate(rows, start=2):
        try:
            out.append(float(row[i]))
        except (ValueError, IndexError):
            raise MalformedRow(f"non-numeric {name!r} value", source=path, line=lineno) from None
    return out


def cmd_correlate(args):
    with _open_input(args.table) as fh:
        reader = csv.reader(fh.read().decode("utf-8-sig").splitlines())
        header = next(reader, [])
        # rows with an empty cell in any requested column are skipped
        cols = [args.x, args.y] + ([args.partial] if args.partial else [])
        idx = [header.index(c) if c in header else None for c in cols]
        rows = [r for r in reader if r and all(i is None or (i < len(r) and r[i] != "") for i in idx)]
    x = _column(rows, header, args.x, args.table)
    y = _column(rows, header, args.y, args.table)
    if args.partial:
        res = partial_correlation(x, y, _column(rows, header, args.partial, args.table))
        name = f"{args.x}_vs_{args.y}_partial_{args.partial}"
    else:
        res = pearson(x, y)
        name = f"{args.x}_vs_{args.y}"
    with _output(args.out) as fh:
        write_correlations([(name, res, res.n)], fh)


def cmd_report(args):
    overrides = {
        "landmarks": args.landmarks, "phrases": args.phrases, "alignment": args.alignment,
        "corrections": args.corrections, "resting": args.resting, "lexicon": args.lexicon,
        "words": args.words, "out": args.out, "top_k": args.top_k, "min_count": args.min_count,
        "te_weight": args.te_weight, "keyframe_side": args.keyframe_side,
        "hd_aggregation": args.hd_aggregation, "weighted_contexts": args.weighted_contexts,
    }
    cfg = config_from_file(args.config, overrides)
    bundle = run_report(cfg)
    for a in ANALYSES:
        res = bundle.correlations[a]
        if res is None:
            print(f"{a}: not computable")
        else:
            print(f"{a}: r={res.r:.3f} p={res.p_value:.3g} n={res.n}")
    print(f"tables written to {cfg.out}")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="handeffort", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def word_opts(sp):
        sp.add_argument("--top-k", type=int, default=20000, help="most frequent types to discard")
        sp.add_argument("--min-count", type=int, default=2, help="discard words seen fewer times")

    sp = sub.add_parser("segment", help="extract one keyframe per fingerspelled letter")
    sp.add_argument("--input", required=True, help="landmark CSV")
    sp.add_argument("--phrase-file", required=True, help="CSV sequence_id,phrase")
    sp.add_argument("--corrections", help="CSV sequence_id,position,new_frame (0-based position)")
    sp.add_argument("--keyframe-side", choices=KEYFRAME_SIDES, default="start")
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_segment)

    sp = sub.add_parser("angles", help="joint angles of landmark frames")
    sp.add_argument("--input", required=True, help="landmark CSV")
    sp.add_argument("--alignment", help="restrict to the keyframes of this alignment CSV")
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_angles)

    sp = sub.add_parser("effort", help="thumb effort and finger independence")
    sp.add_argument("--angles", required=True)
    sp.add_argument("--resting", required=True, help="resting hands JSON")
    sp.add_argument("--alignment", help="label samples with letters (others are skipped)")
    sp.add_argument("--te-weight", type=float, default=eff.TE_WEIGHT)
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_effort)

    sp = sub.add_parser("distance", help="mean handshape distance for every letter pair")
    sp.add_argument("--angles", required=True)
    sp.add_argument("--alignment", required=True, help="alignment CSV giving each keyframe's letter")
    sp.add_argument("--hd-aggregation", choices=HD_AGGREGATIONS, default="cross_product")
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_distance)

    sp = sub.add_parser("usage", help="usage statistics")
    sp.add_argument("kind", choices=("letters", "handshapes", "confusability"))
    sp.add_argument("--words", help="word<TAB>count list (letters, confusability)")
    sp.add_argument("--lexicon", help="lexicon CSV (handshapes)")
    word_opts(sp)
    sp.add_argument("--unweighted-contexts", dest="weighted_contexts", action="store_false",
                    help="count each word type once in the context model")
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_usage)

    sp = sub.add_parser("correlate", help="Pearson or partial correlation of two table columns")
    sp.add_argument("--table", required=True, help="CSV with a header row")
    sp.add_argument("--x", required=True, help="column name")
    sp.add_argument("--y", required=True, help="column name")
    sp.add_argument("--partial", help="column to partial out")
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_correlate)

    sp = sub.add_parser("report", help="full analysis from a key=value config file")
    sp.add_argument("--config", required=True)
    for key in ("landmarks", "phrases", "alignment", "corrections", "resting", "lexicon", "words", "out"):
        sp.add_argument(f"--{key}", default=None)
    sp.add_argument("--top-k", type=int, default=None)
    sp.add_argument("--min-count", type=int, default=None)
    sp.add_argument("--te-weight", type=float, default=None)
    sp.add_argument("--keyframe-side", choices=KEYFRAME_SIDES, default=None)
    sp.add_argument("--hd-aggregation", choices=HD_AGGREGATIONS, default=None)
    sp.add_argument("--weighted-contexts", dest="weighted_contexts", action="store_true", default=None)
    sp.add_argument("--unweighted-contexts", dest="weighted_contexts", action="store_false")
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        args.func(args)
    except HandEffortError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return ConfigError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
