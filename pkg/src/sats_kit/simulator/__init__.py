"""Multi-speaker conversation simulator."""
from .config import SimConfig
from .generate import Dialogue, dialogue_rng, generate, synthesize
from .plan import (
    PlacedSegment,
    Timeline,
    layout,
    overlap_limit,
    partition_utterance,
    plan_dialogue,
    snap_boundaries,
    split_counts,
)
from .pool import (
    AlignedUtterance,
    UtterancePool,
    Word,
    load_pool,
    read_wav,
    uniform_alignment,
    write_wav,
)
from .render import (
    AugmentResult,
    activity_mask,
    apply_rir,
    augment,
    fade_envelope,
    measure_snr,
    parse_rttm,
    render_mixture,
    synthetic_rir,
    timeline_to_rttm,
)

__all__ = [
    "AlignedUtterance",
    "AugmentResult",
    "Dialogue",
    "PlacedSegment",
    "SimConfig",
    "Timeline",
    "UtterancePool",
    "Word",
    "activity_mask",
    "apply_rir",
    "augment",
    "dialogue_rng",
    "fade_envelope",
    "generate",
    "layout",
    "load_pool",
    "measure_snr",
    "overlap_limit",
    "parse_rttm",
    "partition_utterance",
    "plan_dialogue",
    "read_wav",
    "render_mixture",
    "snap_boundaries",
    "split_counts",
    "synthesize",
    "synthetic_rir",
    "timeline_to_rttm",
    "uniform_alignment",
    "write_wav",
]
