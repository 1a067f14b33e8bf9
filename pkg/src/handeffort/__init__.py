"""Articulatory and perceptual effort of fingerspelling handshapes."""

from .effort import EffortScore, finger_independence, rank_letters_by_effort, thumb_effort
from .kinematics import JointAngleVector, angular_distance, handshape_distance, joint_angles
from .landmark_io import (
    LandmarkFrame,
    LandmarkSequence,
    LexiconEntry,
    RestingHandSet,
    WordFrequencyList,
    parse_landmark_sequences,
    parse_lexicon,
    parse_resting_hands,
    prepare_word_list,
)
from .segmentation import LetterFrameAlignment, apply_corrections, extract_letter_frames, transition_velocity
from .stats import CorrelationResult, mean_by_key, mean_pair_distance, partial_correlation, pearson
from .usage_stats import (
    ContextModel,
    build_context_model,
    confusability,
    handshape_frequency,
    letter_frequency,
    pair_statistics,
)

__version__ = "0.1.0"
