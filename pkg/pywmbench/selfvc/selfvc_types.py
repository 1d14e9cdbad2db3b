from dataclasses import dataclass, field
from enum import Enum
import logging
import numpy as np

from ..audio_core import FeatureMatrix, FrameSpec
from ..utils.config import config_from_dict, config_to_dict
from ..utils.errors import PywmbenchException, ConfigException

logger = logging.getLogger('pywmbench.selfvc.selfvc_types')


class SelfVcException(PywmbenchException):
    pass


class ReferenceException(SelfVcException):
    pass


class EmptyCandidateException(SelfVcException):
    pass


class QualityException(PywmbenchException):
    pass


class PoolMode(Enum):
    separate_reference = "separate_reference"
    same_utterance_excluded = "same_utterance_excluded"


class Distance(Enum):
    cosine = "cosine"
    l2 = "l2"


class Resynthesis(Enum):
    griffin_lim = "griffin_lim"
    unit_ola = "unit_ola"


class Representation(Enum):
    """spectral representation a copy-synthesis vocoder resynthesizes from"""
    linear = "linear"
    mel = "mel"


@dataclass
class SelfVcConfig:
    k: int = 4
    pool_mode: PoolMode = PoolMode.separate_reference
    # frames on each side of a query that can't be matched in same_utterance_excluded mode
    exclusion_window: int = 10
    distance: Distance = Distance.cosine
    resynth: Resynthesis = Resynthesis.griffin_lim
    gl_iterations: int = 60
    n_mels: int = 40
    n_mfcc: int = 20
    frame_len: int = 1024
    hop: int = 256
    # weight of the normalized log-F0 column appended to the matching features, 0 disables it
    pitch_weight: float = 4.0
    # rescale converted frames to the energy of the source frames (griffin_lim resynthesis only)
    match_energy: bool = True

    def __post_init__(self):
        for name, enum_class in [("pool_mode", PoolMode), ("distance", Distance), ("resynth", Resynthesis)]:
            value = getattr(self, name)
            if not isinstance(value, enum_class):
                try:
                    setattr(self, name, enum_class(value))
                except ValueError as err:
                    allowed = ', '.join(member.value for member in enum_class)
                    raise ConfigException(f"'{value}' is not one of {allowed}", name) from err
        if self.k < 1:
            raise ConfigException(f"must be at least 1 but is {self.k}", "k")
        if self.exclusion_window < 1:
            raise ConfigException(f"must be at least 1 but is {self.exclusion_window}", "exclusion_window")
        if self.gl_iterations < 1:
            raise ConfigException(f"must be at least 1 but is {self.gl_iterations}", "gl_iterations")
        if not 1 <= self.n_mfcc < self.n_mels:
            raise ConfigException(f"must be in [1, n_mels) but is {self.n_mfcc}", "n_mfcc")
        if self.pitch_weight < 0:
            raise ConfigException(f"must not be negative but is {self.pitch_weight}", "pitch_weight")
        try:
            spec = self.frame_spec
        except PywmbenchException as err:
            raise ConfigException(str(err), "hop") from err
        if not spec.is_cola():
            raise ConfigException(f"hann window of {self.frame_len} samples is not COLA at hop {self.hop}", "hop")
        if self.n_mels > spec.num_bins:
            raise ConfigException(f"must not exceed {spec.num_bins} bins but is {self.n_mels}", "n_mels")

    @property
    def frame_spec(self) -> FrameSpec:
        return FrameSpec(self.frame_len, self.hop, "hann")

    @staticmethod
    def from_dict(data: dict, path: str = "") -> 'SelfVcConfig':
        return config_from_dict(SelfVcConfig, data, path)

    def to_dict(self) -> dict:
        return config_to_dict(self)


@dataclass
class NormStats:
    """per-dimension statistics of the pool, applied unchanged to queries"""
    mean: np.ndarray
    std: np.ndarray

    @staticmethod
    def of(rows: np.ndarray) -> 'NormStats':
        std = rows.std(axis=0)
        # constant dimensions are centered but not scaled
        std[std == 0] = 1.0
        return NormStats(rows.mean(axis=0), std)

    def apply(self, rows: np.ndarray) -> np.ndarray:
        if rows.shape[1] != len(self.mean):
            raise SelfVcException(f"Feature dimension {rows.shape[1]} does not match pool dimension {len(self.mean)}.")
        return (rows - self.mean) / self.std


@dataclass
class MatchingPool:
    """
    Frame-aligned representations of the pool audio: normalized matching features, STFT magnitudes and
    the raw waveform frames used for unit overlap-add.
    """
    features: FeatureMatrix
    magnitudes: np.ndarray
    frames: np.ndarray
    source_id: str
    norm_stats: NormStats

    def __post_init__(self):
        counts = {self.features.num_frames, self.magnitudes.shape[0], self.frames.shape[0]}
        if len(counts) != 1:
            raise SelfVcException(f"Pool representations are not frame aligned: {self.features.num_frames} feature "
                                  f"rows, {self.magnitudes.shape[0]} magnitude frames, {self.frames.shape[0]} "
                                  f"waveform frames.")

    @property
    def size(self) -> int:
        return self.features.num_frames


@dataclass
class QualityReport:
    """
    Content and quality preservation between two equally long signals. f0_corr is None when fewer than
    10 frames are voiced in both.
    """
    mcd_db: float
    lsd_db: float
    f0_corr: float
    voiced_overlap: float
    snr_db: float
    speaker_sim: float

    def to_dict(self) -> dict:
        return {
            "mcd_db": self.mcd_db,
            "lsd_db": self.lsd_db,
            "f0_corr": self.f0_corr,
            "voiced_overlap": self.voiced_overlap,
            "snr_db": self.snr_db,
            "speaker_sim": self.speaker_sim,
        }
