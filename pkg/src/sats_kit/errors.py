"""Exception hierarchy shared by all sats_kit modules."""
from __future__ import annotations


class SatsError(Exception):
    pass


# transcript grammar


class TranscriptError(SatsError, ValueError):
    pass


class NoSpeakerTags(TranscriptError):
    pass


class MalformedRecord(TranscriptError):
    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class InvalidInterval(MalformedRecord):
    pass


class InvalidTimestamp(TranscriptError):
    pass


class MissingTimestamps(TranscriptError):
    pass


# scoring


class ScoringError(SatsError, ValueError):
    pass


class EmptyReference(ScoringError):
    pass


class EmptyCorpus(ScoringError):
    pass


# simulation


class SimulationError(SatsError, ValueError):
    pass


class EmptyUtterance(SimulationError):
    pass


class InsufficientSpeakers(SimulationError):
    pass


class SampleRateMismatch(SimulationError):
    pass


class SilentNoise(SimulationError):
    pass


class SilentSpeech(SimulationError):
    pass


class MissingMetadata(SatsError, ValueError):
    pass
