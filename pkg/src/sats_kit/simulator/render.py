"""Waveform rendering, fades, noise/reverb augmentation and RTTM export."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from ..errors import SampleRateMismatch, SilentNoise, SilentSpeech
from ..transcript import LONG, Segment, Transcript
from .config import SimConfig
from .plan import Timeline


def fade_envelope(n: int, fade_in: int, fade_out: int) -> np.ndarray:
    """Unit gain with equal-power (quarter-sine) ramps at both ends.

    Ramp values are ``sin(pi/2 * (k + 0.5) / f)``; a fade-in and the matching
    fade-out sum to unit power at every sample.
    """
    env = np.ones(n, dtype=np.float64)
    if fade_in:
        env[:fade_in] = np.sin(0.5 * np.pi * (np.arange(fade_in) + 0.5) / fade_in)
    if fade_out:
        env[n - fade_out:] *= np.sin(0.5 * np.pi * (np.arange(fade_out)[::-1] + 0.5) / fade_out)
    return env


def activity_mask(tl: Timeline) -> np.ndarray:
    """True wherever at least one placed segment is sounding."""
    mask = np.zeros(tl.total_samples, dtype=bool)
    for p in tl.placed:
        mask[p.start:p.end] = True
    return mask


def reference_transcript(tl: Timeline) -> Transcript:
    sr = tl.sample_rate
    segs = tuple(
        Segment(p.speaker, p.text, round(p.start / sr, 3), round(p.end / sr, 3))
        for p in tl.placed
    )
    return Transcript(segs, LONG)


def render_mixture(tl: Timeline, cfg: SimConfig) -> tuple[np.ndarray, Transcript]:
    """Sum faded source slices at their timeline positions.

    The reference transcript has one timestamped segment per placed run, in
    start order, with millisecond-rounded times.
    """
    for u in tl.utterances:
        if u.sample_rate != cfg.sample_rate:
            raise SampleRateMismatch(
                f"{u.id or u.speaker_key}: {u.sample_rate} Hz, expected {cfg.sample_rate} Hz"
            )
    mix = np.zeros(tl.total_samples, dtype=np.float64)
    for p in tl.placed:
        src = tl.utterances[p.utterance].audio[p.src_start:p.src_end]
        mix[p.start:p.end] += src * fade_envelope(len(src), p.fade_in, p.fade_out)
    return mix, reference_transcript(tl)


# --------------------------------------------------------------------------
# augmentation
# --------------------------------------------------------------------------


def synthetic_rir(sample_rate: int, t60: float, rng: np.random.Generator) -> np.ndarray:
    """Exponentially decaying noise tail behind a unit direct path."""
    n = max(1, int(t60 * sample_rate))
    decay = np.exp(-np.log(1000.0) * np.arange(n) / (t60 * sample_rate))
    h = np.clip(0.5 * rng.standard_normal(n) * decay, -0.9, 0.9)
    h[0] = 1.0
    return h


def apply_rir(x: np.ndarray, rir: np.ndarray) -> np.ndarray:
    """Convolve with a peak-normalised, direct-path-aligned impulse response.

    Output has the input's length. A single-tap response is applied as an
    exact scalar gain.
    """
    rir = np.asarray(rir, dtype=np.float64)
    peak = int(np.argmax(np.abs(rir)))
    if rir[peak] == 0:
        raise SilentNoise("impulse response is all zeros")
    h = rir[peak:] / rir[peak]
    if len(h) == 1:
        return x * h[0]
    return signal.fftconvolve(x, h)[: len(x)]


def loop_noise(noise: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    noise = np.asarray(noise, dtype=np.float64)
    if len(noise) == 0:
        raise SilentNoise("empty noise buffer")
    offset = int(rng.integers(len(noise)))
    reps = -(-(offset + n) // len(noise))
    return np.tile(noise, reps)[offset:offset + n]


@dataclass(frozen=True, eq=False)
class AugmentResult:
    waveform: np.ndarray
    clean: np.ndarray  # speech after reverberation, before noise
    noise: np.ndarray  # scaled noise actually added
    target_snr: float
    realized_snr: float


def measure_snr(clean: np.ndarray, noisy: np.ndarray, active: np.ndarray | None = None) -> float:
    """SNR in dB of ``noisy`` against ``clean`` over the active samples."""
    resid = noisy - clean
    if active is not None:
        clean, resid = clean[active], resid[active]
    return float(10 * np.log10(np.mean(clean**2) / np.mean(resid**2)))


def augment(
    waveform: np.ndarray,
    noise: np.ndarray,
    rir: np.ndarray | None,
    cfg: SimConfig,
    rng: np.random.Generator,
    active: np.ndarray | None = None,
) -> AugmentResult:
    """Reverberate, then add noise at an SNR drawn uniformly from the config range.

    Speech and noise power are both measured over ``active`` samples (the
    whole signal when omitted).
    """
    speech = apply_rir(waveform, rir) if rir is not None else np.asarray(waveform, np.float64)
    if active is None:
        active = np.ones(len(speech), dtype=bool)
    p_speech = float(np.mean(speech[active] ** 2)) if active.any() else 0.0
    if p_speech == 0:
        raise SilentSpeech("speech has zero power over the active region")
    target = float(rng.uniform(cfg.snr_min, cfg.snr_max))
    looped = loop_noise(noise, len(speech), rng)
    p_noise = float(np.mean(looped[active] ** 2))
    if p_noise == 0:
        raise SilentNoise("noise has zero power over the active region")
    scaled = looped * np.sqrt(p_speech / (p_noise * 10 ** (target / 10)))
    out = speech + scaled
    return AugmentResult(out, speech, scaled, target, measure_snr(speech, out, active))


# --------------------------------------------------------------------------
# RTTM
# --------------------------------------------------------------------------


def timeline_to_rttm(tl: Timeline, file_id: str) -> str:
    sr = tl.sample_rate
    lines = [
        f"SPEAKER {file_id} 1 {p.start / sr:.3f} {p.duration / sr:.3f} <NA> <NA> "
        f"S{p.speaker} <NA> <NA>"
        for p in tl.placed
    ]
    return "".join(line + "\n" for line in lines)


def parse_rttm(text: str) -> list[tuple[str, float, float, str]]:
    """``(file_id, start, duration, speaker)`` for every SPEAKER line."""
    out = []
    for line in text.splitlines():
        f = line.split()
        if f and f[0] == "SPEAKER":
            out.append((f[1], float(f[3]), float(f[4]), f[7]))
    return out
