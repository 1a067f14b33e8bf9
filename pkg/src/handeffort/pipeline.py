"""End-to-end report: landmarks -> keyframes -> angles -> effort/distance,
usage statistics -> correlations, written as CSV tables."""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass, field, fields
from itertools import combinations
from pathlib import Path

from . import effort as eff
from .errors import ConfigError, HandEffortError, StatsError
from .kinematics import JointAngleVector, joint_angles
from .landmark_io import (
    FS_LETTERS,
    parse_landmark_sequences,
    parse_lexicon,
    parse_resting_hands,
    prepare_word_list,
    read_word_counts,
)
from .segmentation import (
    KEYFRAME_SIDES,
    LetterFrameAlignment,
    apply_corrections,
    extract_letter_frames,
    read_alignments,
    read_corrections,
    read_phrases,
    write_alignments,
)
from .stats import (
    HD_AGGREGATIONS,
    CorrelationResult,
    mean_by_key,
    mean_pair_distance,
    partial_correlation,
    pearson,
    write_correlations,
)
from .usage_stats import (
    build_context_model,
    handshape_frequency,
    letter_frequency,
    pair_statistics,
)

log = logging.getLogger(__name__)

LETTER_TABLE_HEADER = ["letter", "mean_fi", "asl_native_freq", "asl_foreign_freq", "english_freq", "sample_count"]
PAIR_TABLE_HEADER = ["letter1", "letter2", "confusability_bits", "mean_hd", "min_frequency"]

ANALYSES = (
    "native_freq_vs_fi",
    "foreign_freq_vs_fi",
    "english_freq_vs_fi",
    "confusability_vs_hd",
    "confusability_vs_minfreq",
    "confusability_vs_hd_partial",
)

# one scatter file per figure panel: (file stem, x column, y column)
LETTER_PANELS = (
    ("scatter_native_freq_vs_fi", "asl_native_freq", "mean_fi"),
    ("scatter_foreign_freq_vs_fi", "asl_foreign_freq", "mean_fi"),
    ("scatter_english_freq_vs_fi", "english_freq", "mean_fi"),
)
PAIR_PANEL = ("scatter_confusability_vs_hd", "mean_hd", "confusability_bits")

PATH_KEYS = ("landmarks", "phrases", "alignment", "corrections", "resting", "lexicon", "words", "out")


@dataclass
class RunConfig:
    landmarks: Path | None = None
    phrases: Path | None = None
    alignment: Path | None = None
    corrections: Path | None = None
    resting: Path | None = None
    lexicon: Path | None = None
    words: Path | None = None
    out: Path = Path("report")
    top_k: int = 20000
    min_count: int = 2
    te_weight: float = eff.TE_WEIGHT
    keyframe_side: str = "start"
    hd_aggregation: str = "cross_product"
    weighted_contexts: bool = True

    @classmethod
    def from_mapping(cls, values: dict, base_dir: Path | None = None) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        kwargs = {}
        for key, raw in values.items():
            if raw is None:
                continue
            if key in PATH_KEYS:
                p = Path(raw)
                if base_dir is not None and not p.is_absolute():
                    p = base_dir / p
                kwargs[key] = p
            elif key in ("top_k", "min_count"):
                kwargs[key] = _parse(int, key, raw)
            elif key == "te_weight":
                kwargs[key] = _parse(float, key, raw)
            elif key == "weighted_contexts":
                kwargs[key] = _parse_bool(key, raw)
            else:
                kwargs[key] = str(raw)
        cfg = cls(**kwargs)
        cfg.validate(require_files=False)
        return cfg

    def validate(self, require_files: bool = True) -> None:
        if self.top_k < 0:
            raise ConfigError("top_k must be >= 0")
        if self.min_count < 1:
            raise ConfigError("min_count must be >= 1")
        if self.te_weight < 0:
            raise ConfigError("te_weight must be >= 0")
        if self.keyframe_side not in KEYFRAME_SIDES:
            raise ConfigError(f"keyframe_side must be one of {KEYFRAME_SIDES}")
        if self.hd_aggregation not in HD_AGGREGATIONS:
            raise ConfigError(f"hd_aggregation must be one of {HD_AGGREGATIONS}")
        if not require_files:
            return
        needed = ["landmarks", "resting", "lexicon", "words"]
        needed.append("alignment" if self.alignment is not None else "phrases")
        for key in needed:
            path = getattr(self, key)
            if path is None:
                raise ConfigError(f"missing required input '{key}'")
            if not Path(path).is_file():
                raise ConfigError(f"{key} file not found: {path}")
        if self.corrections is not None and not Path(self.corrections).is_file():
            raise ConfigError(f"corrections file not found: {self.corrections}")


def _parse(typ, key, raw):
    try:
        return typ(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot parse {raw!r} as {typ.__name__}") from None


def _parse_bool(key, raw):
    if isinstance(raw, bool):
        return raw
    v = str(raw).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: cannot parse {raw!r} as a boolean")


def read_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected key = value", source=path, line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def write_config_file(cfg: RunConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for f in fields(cfg):
            v = getattr(cfg, f.name)
            if v is not None:
                fh.write(f"{f.name} = {v}\n")


# ---------------------------------------------------------------------------
# the report
# ---------------------------------------------------------------------------


@dataclass
class ReportBundle:
    letters: list[dict]
    pairs: list[dict]
    correlations: dict[str, CorrelationResult | None]
    files: dict[str, Path] = field(default_factory=dict)
    excluded_pairs: int = 0


def build_alignments(cfg: RunConfig, sequences) -> dict[str, LetterFrameAlignment]:
    if cfg.alignment is not None:
        return read_alignments(cfg.alignment)
    phrases = read_phrases(cfg.phrases)
    corrections = read_corrections(cfg.corrections) if cfg.corrections is not None else {}
    out = {}
    for seq in sequences:
        if seq.sequence_id not in phrases:
            log.warning("no phrase for sequence %r; skipped", seq.sequence_id)
            continue
        al = extract_letter_frames(seq, phrases[seq.sequence_id], cfg.keyframe_side)
        if seq.sequence_id in corrections:
            al = apply_corrections(al, corrections[seq.sequence_id], seq.frame_indices)
        out[seq.sequence_id] = al
    return out


def _correlate(fn, *series) -> CorrelationResult | None:
    try:
        return fn(*series)
    except StatsError as e:
        log.warning("%s", e)
        return None


def run_report(cfg: RunConfig) -> ReportBundle:
    cfg.validate()
    sequences = parse_landmark_sequences(cfg.landmarks)
    by_id = {s.sequence_id: s for s in sequences}
    alignments = build_alignments(cfg, sequences)

    # keyframe angles per letter; J and Z are segmented but not analysed
    samples: dict[str, list[JointAngleVector]] = {}
    sample_ids: dict[str, list[str]] = {}
    for seq_id, al in alignments.items():
        seq = by_id.get(seq_id)
        if seq is None:
            raise HandEffortError(f"alignment refers to unknown sequence {seq_id!r}", source=cfg.alignment)
        for p in al.pairs:
            if p.letter not in FS_LETTERS:
                continue
            try:
                frame = seq.frame(p.frame)
            except KeyError:
                raise HandEffortError(f"sequence {seq_id!r} has no frame {p.frame}") from None
            samples.setdefault(p.letter, []).append(joint_angles(frame))
            sample_ids.setdefault(p.letter, []).append(f"{seq_id}:{p.frame}")

    resting = eff.resting_angles(parse_resting_hands(cfg.resting))
    scores = []
    for letter in sorted(samples):
        for h, sid in zip(samples[letter], sample_ids[letter]):
            scores.append(eff.finger_independence(h, resting, letter=letter, sample_id=sid,
                                                  te_weight=cfg.te_weight))
    mean_fi = mean_by_key((s.letter, s.finger_independence) for s in scores)

    lexicon, dropped = parse_lexicon(cfg.lexicon)
    log.info("lexicon: %d entries kept, %d non-fingerspelling rows dropped", len(lexicon), dropped)
    words = prepare_word_list(read_word_counts(cfg.words), cfg.top_k, cfg.min_count)
    en_freq = letter_frequency(words)
    model = build_context_model(words, weighted=cfg.weighted_contexts)

    letters = sorted(samples)
    letter_rows = [{
        "letter": c,
        "mean_fi": mean_fi[c],
        "asl_native_freq": handshape_frequency(lexicon, c, ("native",)),
        "asl_foreign_freq": handshape_frequency(lexicon, c, ("initialized", "loan")),
        "english_freq": en_freq[c.lower()],
        "sample_count": len(samples[c]),
    } for c in letters]

    pair_rows = []
    for st in pair_statistics(model, en_freq, letters):
        pair_rows.append({
            "letter1": st.letter1,
            "letter2": st.letter2,
            "confusability_bits": st.confusability_bits,
            "mean_hd": mean_pair_distance(samples, (st.letter1, st.letter2), cfg.hd_aggregation),
            "min_frequency": st.min_frequency,
        })
    usable = [r for r in pair_rows if r["confusability_bits"] is not None]
    excluded = len(pair_rows) - len(usable)
    if excluded:
        log.warning("%d letter pair(s) without context mass excluded from correlations", excluded)

    def col(rows, key):
        return [r[key] for r in rows]

    fi = col(letter_rows, "mean_fi")
    conf = col(usable, "confusability_bits")
    corr = {
        "native_freq_vs_fi": _correlate(pearson, col(letter_rows, "asl_native_freq"), fi),
        "foreign_freq_vs_fi": _correlate(pearson, col(letter_rows, "asl_foreign_freq"), fi),
        "english_freq_vs_fi": _correlate(pearson, col(letter_rows, "english_freq"), fi),
        "confusability_vs_hd": _correlate(pearson, conf, col(usable, "mean_hd")),
        "confusability_vs_minfreq": _correlate(pearson, conf, col(usable, "min_frequency")),
        "confusability_vs_hd_partial": _correlate(partial_correlation, conf, col(usable, "mean_hd"),
                                                  col(usable, "min_frequency")),
    }
    sizes = {a: len(letter_rows) if a.endswith("_fi") else len(usable) for a in ANALYSES}

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    files = {}

    def write_table(stem, header, rows):
        path = out / f"{stem}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(r[h]) for h in header])
        files[stem] = path

    write_table("letters", LETTER_TABLE_HEADER, letter_rows)
    write_table("pairs", PAIR_TABLE_HEADER, pair_rows)
    for stem, x, y in LETTER_PANELS:
        write_table(stem, ["letter", x, y], letter_rows)
    stem, x, y = PAIR_PANEL
    write_table(stem, ["letter1", "letter2", x, y], usable)

    path = out / "correlations.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        write_correlations(((a, corr[a], sizes[a]) for a in ANALYSES), fh)
    files["correlations"] = path

    path = out / "alignment.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        write_alignments(sorted(alignments.items()), fh)
    files["alignment"] = path

    path = out / "effort.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        eff.write_effort(scores, fh)
    files["effort"] = path

    return ReportBundle(letter_rows, pair_rows, corr, files, excluded)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def config_from_file(path, overrides: dict | None = None) -> RunConfig:
    """Load a config file and apply ``overrides`` (e.g. command-line flags)
    on top; ``None`` override values are ignored."""
    values = read_config_file(path)
    base = Path(os.path.dirname(os.path.abspath(path)))
    cfg = RunConfig.from_mapping(values, base)
    if overrides:
        over = {k: v for k, v in overrides.items() if v is not None}
        for key, value in RunConfig.from_mapping(over, Path.cwd()).__dict__.items():
            if key in over:
                setattr(cfg, key, value)
    return cfg
