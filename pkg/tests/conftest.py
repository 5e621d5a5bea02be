import zlib
import numpy as np
import pytest

from sats_kit.simulator import AlignedUtterance, UtterancePool, Word

SR = 16000
CHARS = "的一是在不了有和人这中大为上个国我以要他时来用们生到作地于出就分对成会可主发年动同工也能下过子说产种面而方后多定行学法所民得经十三之进着等部度家电力里如水化高自二理起小物现实加量都两体制机当使点从业本去把性好应开它合还因由其些然前外天政四日那社义事平形相全表间样与关各重新线内数正心反你明看原又么利比或但质气第向道命此变条只没结解问意建月公无系军很情者最立代想已通并提直题党程展五果料象员革位入常文总次品式活设及管特件长求老头基资边流路级少图山统接知较将组见计别她手角期根论运农指几九区强放决西被干做必战先回则任取据处府研质"


def make_utterance(rng, speaker, n_words, sr=SR, latin=False, uid=""):
    """Tone-per-word utterance with silent gaps; word boundaries are exact."""
    freq = 150.0 + 40.0 * (zlib.crc32(speaker.encode()) % 10)
    pieces, words, t = [np.zeros(int(0.05 * sr))], [], 0.05
    for _ in range(n_words):
        dur = float(rng.uniform(0.12, 0.25))
        n = int(dur * sr)
        k = np.arange(n)
        pieces.append(0.3 * np.sin(2 * np.pi * freq * k / sr))
        if latin:
            text = "".join(rng.choice(list("abcdefghij"), size=int(rng.integers(2, 6))))
        else:
            text = str(rng.choice(list(CHARS)))
        words.append(Word(text, t, t + n / sr))
        t += n / sr
        gap = int(float(rng.uniform(0.04, 0.1)) * sr)
        pieces.append(np.zeros(gap))
        t += gap / sr
    audio = np.concatenate(pieces)
    text = (" " if latin else "").join(w.text for w in words)
    return AlignedUtterance(audio, sr, tuple(words), speaker, text, id=uid or f"{speaker}.wav")


def make_pool(n_speakers=12, per_speaker=2, seed=0, words=(3, 9)):
    rng = np.random.default_rng(seed)
    utts = []
    for s in range(n_speakers):
        for u in range(per_speaker):
            utts.append(
                make_utterance(
                    rng, f"spk{s:02d}", int(rng.integers(*words)), latin=(s % 3 == 0),
                    uid=f"spk{s:02d}_{u}.wav",
                )
            )
    return UtterancePool(utts)


@pytest.fixture(scope="session")
def pool():
    return make_pool()


def write_pool(pool, directory):
    """Write pool WAVs plus a JSONL manifest; returns the manifest path."""
    import json
    from pathlib import Path

    from sats_kit.simulator import write_wav
    from sats_kit.simulator.pool import words_to_json

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = []
    for u in pool.utterances:
        write_wav(directory / u.id, u.audio, u.sample_rate)
        lines.append(json.dumps({
            "audio": u.id, "speaker": u.speaker_key, "text": u.text,
            "words": words_to_json(u.words),
        }, ensure_ascii=False))
    manifest = directory / "pool.jsonl"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
