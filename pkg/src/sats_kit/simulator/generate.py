"""End-to-end dataset generation."""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..transcript import Transcript, emit
from .config import SimConfig
from .plan import Timeline, plan_dialogue, snap_boundaries
from .pool import UtterancePool, load_wav_dir, wav_bytes
from .render import activity_mask, augment, render_mixture, synthetic_rir, timeline_to_rttm

PEAK = 0.99


@dataclass(frozen=True, eq=False)
class Dialogue:
    index: int
    timeline: Timeline
    waveform: np.ndarray  # what gets written, peak-limited
    clean: np.ndarray  # speech (reverberated if augmented) on the same scale
    reference: Transcript
    snr_db: float | None = None  # realized
    target_snr: float | None = None

    @property
    def name(self) -> str:
        return f"mix_{self.index:03d}"

    def sidecar(self) -> dict:
        d = self.timeline.to_dict()
        d["id"] = self.name
        d["snr_db"] = self.snr_db
        d["target_snr_db"] = self.target_snr
        return d

    def files(self, write_rttm: bool = False) -> dict[str, bytes]:
        sr = self.timeline.sample_rate
        out = {
            f"{self.name}.wav": wav_bytes(self.waveform, sr),
            f"{self.name}.txt": (emit(self.reference) + "\n").encode("utf-8"),
            f"{self.name}.json": (
                json.dumps(self.sidecar(), ensure_ascii=False, indent=1) + "\n"
            ).encode("utf-8"),
        }
        if write_rttm:
            out[f"{self.name}.rttm"] = timeline_to_rttm(self.timeline, self.name).encode()
        return out

    def manifest_entry(self) -> dict:
        return {
            "audio": f"{self.name}.wav",
            "ref": f"{self.name}.txt",
            "timeline": f"{self.name}.json",
            "snr_db": None if self.snr_db is None else round(self.snr_db, 3),
            "num_speakers": self.timeline.num_speakers,
            "duration": self.timeline.total_duration,
        }


def dialogue_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream per dialogue so any index can be rebuilt alone."""
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def synthesize(
    pool: UtterancePool,
    cfg: SimConfig,
    index: int,
    noises: Sequence[np.ndarray] = (),
    rirs: Sequence[np.ndarray] = (),
) -> Dialogue:
    rng = dialogue_rng(cfg.seed, index)
    tl = plan_dialogue(pool, cfg, rng, seed=(cfg.seed, index))
    tl = snap_boundaries(tl, cfg)
    mix, ref = render_mixture(tl, cfg)
    clean, snr, target = mix, None, None
    if cfg.augment:
        rir = None
        if cfg.reverb:
            if rirs:
                rir = rirs[int(rng.integers(len(rirs)))]
            else:
                t60 = rng.uniform(cfg.rir_t60_min, cfg.rir_t60_max)
                rir = synthetic_rir(cfg.sample_rate, t60, rng)
        if noises:
            noise = noises[int(rng.integers(len(noises)))]
        else:
            noise = rng.standard_normal(len(mix))
        res = augment(mix, noise, rir, cfg, rng, active=activity_mask(tl))
        mix, clean, snr, target = res.waveform, res.clean, res.realized_snr, res.target_snr
    peak = float(np.max(np.abs(mix))) if len(mix) else 0.0
    if peak > PEAK:
        gain = PEAK / peak
        mix, clean = mix * gain, clean * gain
        np.clip(mix, -PEAK, PEAK, out=mix)  # the product can land one ulp above
    return Dialogue(index, tl, mix, clean, ref, snr, target)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("SATS_KIT_THREADS", "1")))
    except ValueError:
        return 1


def generate(
    pool: UtterancePool, cfg: SimConfig, n: int, out_dir: str | Path
) -> list[dict]:
    """Write ``n`` dialogues plus ``manifest.jsonl`` into ``out_dir``.

    Returns the manifest entries. Output bytes depend only on the pool and the
    config (including its seed).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    noises = load_wav_dir(cfg.noise_dir, cfg.sample_rate) if cfg.noise_dir else []
    rirs = load_wav_dir(cfg.rir_dir, cfg.sample_rate) if cfg.rir_dir else []
    if n > 0:
        pool.require_speakers(cfg.speakers_min)

    def one(i: int) -> dict:
        d = synthesize(pool, cfg, i, noises, rirs)
        for name, data in d.files(cfg.write_rttm).items():
            (out_dir / name).write_bytes(data)
        return d.manifest_entry()

    with ThreadPoolExecutor(_workers()) as ex:
        entries = list(ex.map(one, range(n)))
    with open(out_dir / "manifest.jsonl", "w", encoding="utf-8") as f:
        for e in entries:
            f.write(json.dumps(e, ensure_ascii=False) + "\n")
    return entries
