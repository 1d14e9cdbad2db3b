from dataclasses import dataclass, field
from enum import Enum
import logging
import numpy as np
from scipy import signal

from ..utils.errors import PywmbenchException

logger = logging.getLogger('pywmbench.audio_core.audio_types')

# every pipeline stage resamples its inputs to this rate on ingestion
CANONICAL_RATE = 16000

# maximum relative deviation of the overlap-added window from a constant
COLA_TOLERANCE = 1e-6


class AudioException(PywmbenchException):
    pass


class WavReadException(AudioException):
    pass


class UnsupportedEncodingException(AudioException):
    pass


class EmptyAudioException(AudioException):
    pass


class WavWriteException(AudioException):
    pass


class FrameSpecException(AudioException):
    pass


class DimensionException(AudioException):
    pass


class WindowType(Enum):
    hann = "hann"
    rect = "rect"


class FeatureKind(Enum):
    log_mel = "log_mel"
    mfcc = "mfcc"


@dataclass
class AudioBuffer:
    """
    Mono PCM samples (nominal range [-1, 1]) with their sample rate in Hz.
    """
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise DimensionException(f"Expected mono samples (1-D) but got shape {self.samples.shape}.")
        if int(self.sample_rate) <= 0:
            raise ValueError(f"Sample rate must be positive but got {self.sample_rate}.")
        self.sample_rate = int(self.sample_rate)
        if not np.all(np.isfinite(self.samples)):
            raise AudioException("Audio contains NaN or Inf samples.")

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def with_samples(self, samples: np.ndarray) -> 'AudioBuffer':
        return AudioBuffer(samples, self.sample_rate)

    def require_samples(self, minimum: int = 1):
        if len(self.samples) < minimum:
            raise EmptyAudioException(f"Audio must have at least {minimum} samples but has {len(self.samples)}.")


@dataclass(frozen=True)
class FrameSpec:
    frame_len: int = 1024
    hop: int = 256
    window: WindowType = WindowType.hann

    def __post_init__(self):
        if not isinstance(self.window, WindowType):
            object.__setattr__(self, 'window', WindowType(self.window))
        if self.frame_len <= 0 or self.hop <= 0 or self.hop > self.frame_len:
            raise FrameSpecException(f"Invalid framing: frame_len={self.frame_len}, hop={self.hop}. "
                                     f"Need 0 < hop <= frame_len.")

    @property
    def num_bins(self) -> int:
        return self.frame_len // 2 + 1

    def window_values(self) -> np.ndarray:
        if self.window == WindowType.hann:
            # periodic hann, which is COLA for hop = frame_len / k
            return signal.get_window('hann', self.frame_len, fftbins=True)
        return np.ones(self.frame_len)

    def cola_deviation(self) -> float:
        """
        Relative deviation of sum_k w[n + k*hop] from its mean over one hop period.
        """
        w = self.window_values()
        pad = (-len(w)) % self.hop
        folded = np.concatenate([w, np.zeros(pad)]).reshape(-1, self.hop).sum(axis=0)
        mean = folded.mean()
        if mean == 0:
            return np.inf
        return float((folded.max() - folded.min()) / mean)

    def is_cola(self) -> bool:
        return self.cola_deviation() <= COLA_TOLERANCE

    def num_frames(self, num_samples: int) -> int:
        if num_samples < self.frame_len:
            return 1
        return (num_samples - self.frame_len) // self.hop + 1

    def to_dict(self) -> dict:
        return {"frame_len": self.frame_len, "hop": self.hop, "window": self.window.value}


@dataclass
class Spectrogram:
    """complex STFT frames [num_frames x num_bins]"""
    frames: np.ndarray
    spec: FrameSpec
    sample_rate: int

    def __post_init__(self):
        if self.frames.ndim != 2 or self.frames.shape[1] != self.spec.num_bins:
            raise DimensionException(f"Spectrogram frames must have {self.spec.num_bins} bins but have shape "
                                     f"{self.frames.shape}.")

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    def magnitude(self) -> np.ndarray:
        return np.abs(self.frames)


@dataclass
class FeatureMatrix:
    rows: np.ndarray
    kind: FeatureKind
    spec: FrameSpec
    sample_rate: int = CANONICAL_RATE

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float64)
        if self.rows.ndim != 2:
            raise DimensionException(f"Feature rows must be 2-D but have shape {self.rows.shape}.")
        if not np.all(np.isfinite(self.rows)):
            raise AudioException("Feature matrix contains NaN or Inf entries.")

    @property
    def num_frames(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


@dataclass
class PitchTrack:
    """per-frame f0 in Hz, 0 for unvoiced frames"""
    f0: np.ndarray
    voicing: np.ndarray = field(default=None)

    def __post_init__(self):
        self.f0 = np.asarray(self.f0, dtype=np.float64)
        if self.voicing is None:
            self.voicing = self.f0 > 0
        self.voicing = np.asarray(self.voicing, dtype=bool)
        if np.any(self.voicing != (self.f0 > 0)):
            raise ValueError("Voicing flags must match non-zero f0 values.")

    @property
    def voiced_fraction(self) -> float:
        if len(self.f0) == 0:
            return 0.0
        return float(np.mean(self.voicing))
