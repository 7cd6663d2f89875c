"""
Synthetic amplitude-modulation corpus for end-to-end checks.

Each "emotion" class is an AM rate; each speaker owns a disjoint pool of
carrier frequencies, so a speaker-independent classifier has to rely on
modulation content rather than carrier position.
"""

import logging
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .manifest import write_manifest
from .models import AudioBuffer, DatasetManifest, UtteranceRecord
from .wav import write_wav

logger = logging.getLogger(__name__)

DEFAULT_AM_RATES = (2.0, 4.0, 8.0, 16.0)


def am_tone(carrier_hz: float, am_rate_hz: float, duration_s: float, rate: float = 16000.0,
            depth: float = 1.0, amplitude: float = 0.5, phase: float = 0.0) -> AudioBuffer:
    """Sinusoidal carrier with (1 + depth*cos) amplitude modulation."""
    t = np.arange(int(round(duration_s * rate))) / rate
    envelope = 1.0 + depth * np.cos(2 * np.pi * am_rate_hz * t + phase)
    samples = amplitude * envelope / (1.0 + depth) * np.sin(2 * np.pi * carrier_hz * t)
    return AudioBuffer(samples=samples, rate=rate)


def carrier_pools(n_speakers: int, f_lo: float = 200.0, f_hi: float = 3200.0) -> np.ndarray:
    """Log-spaced, non-overlapping [lo, hi) carrier bands, one per speaker."""
    edges = np.geomspace(f_lo, f_hi, n_speakers + 1)
    return np.stack([edges[:-1], edges[1:]], axis=1)


def generate_am_corpus(
    out_dir: Union[str, Path],
    n_speakers: int = 6,
    per_speaker: int = 40,
    rates: Sequence[float] = DEFAULT_AM_RATES,
    duration_s: float = 2.0,
    rate: float = 16000.0,
    noise_level: float = 0.01,
    seed: int = 0,
) -> DatasetManifest:
    """Write WAVs plus manifest.csv under out_dir and return the manifest."""
    out_dir = Path(out_dir)
    rng = np.random.default_rng(seed)
    pools = carrier_pools(n_speakers)
    labels = [f"am{int(r) if float(r).is_integer() else r}hz" for r in rates]

    records = []
    for s in range(n_speakers):
        speaker = f"spk{s:02d}"
        lo, hi = pools[s]
        for u in range(per_speaker):
            cls = u % len(rates)
            carrier = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
            buf = am_tone(carrier, rates[cls], duration_s, rate=rate, phase=float(rng.uniform(0, 2 * np.pi)))
            noisy = buf.samples + noise_level * rng.standard_normal(len(buf))
            rel = f"{speaker}/{speaker}_{u:03d}_{labels[cls]}.wav"
            write_wav(out_dir / rel, AudioBuffer(samples=noisy, rate=rate))
            records.append(UtteranceRecord(path=rel, speaker=speaker, emotion=labels[cls], duration_s=duration_s))

    write_manifest(out_dir / "manifest.csv", records)
    logger.info("[Synth] Wrote %d utterances (%d speakers, %d classes) to %s",
                len(records), n_speakers, len(rates), out_dir)
    return DatasetManifest(records=records, label_set=labels, root=out_dir)
