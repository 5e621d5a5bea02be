from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import yaml

from ..errors import SimulationError


@dataclass(frozen=True)
class SimConfig:
    """Distribution parameters of the conversation simulator.

    Times are in seconds, SNRs in dB. ``noise_dir`` / ``rir_dir`` point at
    folders of WAV files; without them white noise and synthetic
    exponential-decay impulse responses are used.
    """

    speakers_min: int = 2
    speakers_max: int = 12
    seg_count_min: int = 1
    seg_count_max: int = 8
    weight_lognorm_mu: float = 0.0
    weight_lognorm_sigma: float = 1.0
    gap_mean: float = 0.5
    gap_std: float = 1.0
    overlap_cap: float = 0.8
    fade: float = 0.050
    snap_window: float = 0.150
    snr_min: float = 0.0
    snr_max: float = 15.0
    sample_rate: int = 16000
    seed: int = 0
    augment: bool = True
    reverb: bool = True
    rir_t60_min: float = 0.2
    rir_t60_max: float = 0.8
    noise_dir: str | None = None
    rir_dir: str | None = None
    write_rttm: bool = False
    allow_single_speaker: bool = False

    def __post_init__(self):
        if not 0 <= self.overlap_cap < 1:
            raise SimulationError(f"overlap_cap must be in [0, 1), got {self.overlap_cap}")
        if self.snr_min > self.snr_max:
            raise SimulationError("snr_min exceeds snr_max")
        if self.fade < 0 or self.snap_window < 0 or self.gap_std < 0:
            raise SimulationError("fade, snap_window and gap_std must be non-negative")
        floor = 1 if self.allow_single_speaker else 2
        if not floor <= self.speakers_min <= self.speakers_max:
            raise SimulationError(
                f"need {floor} <= speakers_min <= speakers_max, "
                f"got {self.speakers_min}..{self.speakers_max}"
            )
        if not 1 <= self.seg_count_min <= self.seg_count_max:
            raise SimulationError("need 1 <= seg_count_min <= seg_count_max")
        if self.weight_lognorm_sigma < 0:
            raise SimulationError("weight_lognorm_sigma must be non-negative")
        if self.sample_rate <= 0:
            raise SimulationError("sample_rate must be positive")
        if not 0 < self.rir_t60_min <= self.rir_t60_max:
            raise SimulationError("need 0 < rir_t60_min <= rir_t60_max")

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "SimConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise SimulationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**dict(values))

    @classmethod
    def load(cls, path: str | Path, **overrides: Any) -> "SimConfig":
        """Read a flat YAML or JSON key/value file; absent keys keep defaults."""
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        if not isinstance(data, dict):
            raise SimulationError(f"{path}: expected a flat key/value mapping")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_mapping(data)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)
