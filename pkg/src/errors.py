"""
Exception hierarchy shared by all pipeline stages
"""

from typing import Optional


class CqtMsfError(Exception):
    """Base class for every error raised by this package"""


class AudioError(CqtMsfError, ValueError):
    """Audio could not be read or converted"""


class WavNotFoundError(AudioError, FileNotFoundError):
    """WAV path does not exist"""


class MalformedWavError(AudioError):
    """RIFF/WAVE header is broken or truncated"""


class UnsupportedEncodingError(AudioError):
    """WAV sample format other than PCM16 or IEEE float32"""


class ManifestError(CqtMsfError, ValueError):
    """Manifest CSV is missing columns, empty or inconsistent"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigurationError(CqtMsfError, ValueError):
    """Parameters violate a precondition (rates, bounds, shapes)"""


class TrainingError(CqtMsfError, RuntimeError):
    """Training or backpropagation cannot proceed"""


class FeatureFileError(CqtMsfError, ValueError):
    """Feature, checkpoint or model file is missing or corrupt"""


class FoldError(CqtMsfError, RuntimeError):
    """A LOSO fold failed; carries the fold identity"""

    def __init__(self, test_speaker: str, cause: BaseException):
        self.test_speaker = test_speaker
        self.cause = cause
        super().__init__(f"Fold test_speaker={test_speaker!r} failed: {cause}")
