"""
Shared fixtures: test tones, tiny network specs and a small synthetic corpus
"""

import numpy as np
import pytest

from src.audio import AudioBuffer, generate_am_corpus

FS = 16000.0


def tone(freq: float, duration_s: float = 1.0, rate: float = FS, amplitude: float = 0.5,
         phase: float = 0.0) -> AudioBuffer:
    t = np.arange(int(round(duration_s * rate))) / rate
    return AudioBuffer(samples=amplitude * np.sin(2 * np.pi * freq * t + phase), rate=rate)


def am_signal(carrier: float, am_rate: float, duration_s: float = 6.0, rate: float = FS) -> AudioBuffer:
    t = np.arange(int(round(duration_s * rate))) / rate
    env = 1.0 + 0.9 * np.cos(2 * np.pi * am_rate * t)
    return AudioBuffer(samples=0.4 * env * np.sin(2 * np.pi * carrier * t), rate=rate)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    """3 speakers x 4 utterances, two AM-rate classes, 0.5 s each."""
    root = tmp_path_factory.mktemp("corpus")
    generate_am_corpus(root, n_speakers=3, per_speaker=4, rates=(2.0, 8.0), duration_s=0.5, seed=7)
    return root
