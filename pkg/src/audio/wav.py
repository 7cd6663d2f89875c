"""
WAV ingest/egress and polyphase resampling
"""

import logging
from fractions import Fraction
from pathlib import Path
from typing import Union

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from .models import AudioBuffer
from src.errors import (
    ConfigurationError,
    MalformedWavError,
    UnsupportedEncodingError,
    WavNotFoundError,
)

logger = logging.getLogger(__name__)

# 16-bit PCM full scale; amplitude = sample / 32768
PCM16_SCALE = 32768.0

PathLike = Union[str, Path]


def read_wav(path: PathLike) -> AudioBuffer:
    """
    Read a PCM16 or float32 WAV file as a mono buffer.

    Stereo files are averaged across channels; PCM16 samples are divided
    by 32768 so full scale maps just below 1.0.
    """
    path = Path(path)
    if not path.is_file():
        raise WavNotFoundError(f"WAV file not found: {path}")

    try:
        rate, data = wavfile.read(str(path))
    except ValueError as e:
        msg = str(e)
        if "Unknown wave file format" in msg or "Unsupported" in msg:
            raise UnsupportedEncodingError(f"{path}: {msg}") from e
        raise MalformedWavError(f"{path}: {msg}") from e
    except (EOFError, OSError) as e:
        raise MalformedWavError(f"{path}: truncated or unreadable RIFF data ({e})") from e

    if data.dtype == np.int16:
        samples = data.astype(np.float64) / PCM16_SCALE
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise UnsupportedEncodingError(
            f"{path}: sample type {data.dtype} not supported (PCM 16-bit or IEEE float32 only)"
        )

    if samples.ndim == 2:
        if samples.shape[1] > 2:
            raise UnsupportedEncodingError(f"{path}: {samples.shape[1]} channels, at most 2 supported")
        samples = samples.mean(axis=1)

    return AudioBuffer(samples=samples, rate=float(rate))


def write_wav(path: PathLike, buf: AudioBuffer, encoding: str = "pcm16") -> Path:
    """Write a mono buffer as PCM16 (quantized, clipped) or float32."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rate = int(round(buf.rate))

    if encoding == "pcm16":
        pcm = np.clip(np.round(buf.samples * PCM16_SCALE), -32768, 32767).astype(np.int16)
        wavfile.write(str(path), rate, pcm)
    elif encoding == "float32":
        wavfile.write(str(path), rate, buf.samples.astype(np.float32))
    else:
        raise ConfigurationError(f"Unknown WAV encoding {encoding!r} (pcm16|float32)")
    return path


def resample(buf: AudioBuffer, target_rate: float) -> AudioBuffer:
    """
    Windowed-sinc polyphase resampling to target_rate.

    Output length is round(len * target / source); equal rates return an
    unchanged copy.
    """
    if not target_rate > 0:
        raise ConfigurationError(f"Target rate must be positive, got {target_rate}")

    if float(target_rate) == float(buf.rate):
        return AudioBuffer(samples=buf.samples.copy(), rate=buf.rate)

    ratio = Fraction(str(float(target_rate))) / Fraction(str(float(buf.rate)))
    ratio = ratio.limit_denominator(1_000_000)
    up, down = ratio.numerator, ratio.denominator

    out_len = int(round(len(buf) * float(target_rate) / float(buf.rate)))
    if len(buf) == 0:
        return AudioBuffer(samples=np.zeros(0), rate=float(target_rate))

    y = resample_poly(buf.samples, up, down)
    if y.shape[0] >= out_len:
        y = y[:out_len]
    else:
        y = np.pad(y, (0, out_len - y.shape[0]))

    logger.debug("[Resample] %s Hz -> %s Hz (up=%d, down=%d), %d -> %d samples",
                 buf.rate, target_rate, up, down, len(buf), out_len)
    return AudioBuffer(samples=y, rate=float(target_rate))
