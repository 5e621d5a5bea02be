"""Scoring, normalisation and simulation tools for speaker-attributed transcripts."""
from .kernels import BACKEND
from .metrics import (
    Assignment,
    EditCounts,
    ScoreReport,
    cer,
    cpcer,
    edit_distance,
    optimal_assignment,
    score_corpus,
    score_record,
    score_texts,
    speaker_cost_matrix,
)
from .normalizer import NormalizationOptions, normalize, split_by_speaker, tokenize_for_scoring
from .transcript import (
    Annotation,
    Segment,
    Transcript,
    emit,
    parse,
    parse_long,
    parse_short,
    parse_timestamp,
    render_timestamp,
)

__version__ = "0.1.0"
